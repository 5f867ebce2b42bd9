use std::f64::consts::PI;

use anyhow::{anyhow, bail, Context, Result};
use lcslab_core::index::{closed_index, index_report};
use lcslab_core::instanton::charges::slice_charges;
use lcslab_core::instanton::energy::vertical_energy;
use lcslab_core::instanton::{
    explicit_family, hicks_charge, lattice_torus_family, proper_potential_energy, residual, total_energy, InstantonState,
};
use lcslab_core::linearization::linearize_check;
use lcslab_core::model::LcsPoint;
use lcslab_core::reeb::cz::rotation_index_oracle;
use lcslab_core::reeb::path::closed_form_path;
use lcslab_core::reeb::{
    action_spectrum, asymptotic_spectrum, axis_orbits, conley_zehnder, find_orbit, linearized_path, CzOptions,
    OrbitSearchOptions, ReebOrbit, SymplecticPath,
};
use lcslab_core::solver::{classification_check, smooth_perturbation, solve_instanton, SolveOptions, Verdict};
use lcslab_core::{ContactModel, DomainKind, DomainSpec, End, LabError, Point, SurfaceDomain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{OrbitChoice, RunConfig};
use crate::report::{Artifacts, Checks};
use crate::svg;

pub const COMMANDS: [&str; 11] = [
    "verify-frames",
    "example",
    "energy",
    "decompose",
    "charges",
    "orbits",
    "cz",
    "spectrum",
    "index",
    "solve",
    "linearize-check",
];

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub model: ContactModel,
    pub seed: u64,
}

/// Default tolerance of every check a command can emit.
pub fn tolerances(command: &str, cfg: &RunConfig) -> Result<Vec<(&'static str, f64)>> {
    Ok(match command {
        "verify-frames" => vec![
            ("lambda_reeb", 1e-10),
            ("reeb_d_lambda", 1e-8),
            ("j_squared", 1e-8),
            ("proj_idempotent", 1e-8),
            ("metric_asymmetry", 1e-8),
            ("metric_min_eigenvalue", 1e-12),
            ("flow_lambda_defect", 1e-8),
            ("lcs_closedness", 1e-6),
        ],
        "example" => vec![
            ("residual_sup", 5e-3),
            ("e_pi", 1e-8),
            ("e_total", 1e-8),
            ("e_total_vs_action", 0.05),
            ("charge_class", 0.0),
            ("end_q", 1e-6),
            ("end_t", 1e-6),
        ],
        "energy" => vec![
            ("e_pi_nonnegative", -1e-12),
            ("e_vert_nonnegative", -1e-12),
            ("pi_energy_vs_dlambda", 1e-6),
            ("vertical_sample_floor", -1e-10),
            ("proper_total_split", 1e-12),
        ],
        "decompose" => vec![("beta_error", 1e-6), ("laplacian_residual", 1e-8), ("class_change", 0.0)],
        "charges" => vec![("end_q", 1e-6), ("end_t", 1e-6), ("slice_spread", 1e-2)],
        "orbits" => vec![("action_vs_oracle", 1e-6), ("closure_error", 1e-8), ("reeb_time_defect", 1e-6)],
        "cz" => vec![("cz_vs_oracle", 0.0)],
        "spectrum" => vec![
            ("t_lambda_vs_oracle", 1e-6),
            ("actions_vs_oracle", 1e-6),
            ("gap_refinement_drift", 0.01),
            ("delta_positive", 1e-15),
            ("delta_below_bound", 1e-15),
        ],
        "index" => vec![("full_split", 0.0), ("closed_agreement", 0.0)],
        "solve" => vec![
            ("final_residual", cfg.params.solve.residual_tol),
            ("monotone_objective", 1.0),
            ("classification", 1.0),
        ],
        "linearize-check" => vec![
            ("fd_mismatch", cfg.params.linearize.tol),
            ("refinement_order", cfg.params.linearize.min_order),
            ("block_constant", 1e-4),
            ("block_holomorphic", 1e-4),
            ("block_antiholomorphic", 1e-4),
            ("block_r1_response", 1e-6),
            ("b_norm", 1e-6),
            ("eps_contraction", 0.5),
        ],
        other => bail!("unknown command {other:?}"),
    })
}

pub fn run(command: &str, ctx: &Ctx, checks: &mut Checks, art: &mut Artifacts) -> Result<Value> {
    match command {
        "verify-frames" => verify_frames(ctx, checks),
        "example" => example(ctx, checks, art),
        "energy" => energy(ctx, checks, art),
        "decompose" => decompose(ctx, checks, art),
        "charges" => charges(ctx, checks, art),
        "orbits" => orbits(ctx, checks, art),
        "cz" => cz(ctx, checks, art),
        "spectrum" => spectrum(ctx, checks, art),
        "index" => index(ctx, checks),
        "solve" => solve(ctx, checks, art),
        "linearize-check" => linearize(ctx, checks, art),
        other => bail!("unknown command {other:?}"),
    }
}

fn axis_orbit(ctx: &Ctx) -> Result<ReebOrbit> {
    if !ctx.model.is_sphere_like() {
        bail!("model {} has no closed Reeb orbits", ctx.model.name());
    }
    let [short, long] = axis_orbits(&ctx.model, 64)?;
    Ok(match ctx.cfg.params.orbit {
        OrbitChoice::Short => short,
        OrbitChoice::Long => long,
    })
}

fn domain_or(ctx: &Ctx, kind: DomainKind, half_length: f64, n_tau: usize, n_t: usize) -> Result<SurfaceDomain> {
    let spec = ctx.cfg.domain.unwrap_or(DomainSpec { kind, half_length, n_tau, n_t });
    Ok(SurfaceDomain::new(spec)?)
}

/// The configured explicit family; on a torus the `k = 0` family is placed
/// on its lattice half-length.
fn family_state(ctx: &Ctx, orbit: &ReebOrbit, domain: &SurfaceDomain) -> Result<InstantonState> {
    let p = &ctx.cfg.params;
    if domain.kind() == DomainKind::Torus && p.k == 0 {
        return Ok(lattice_torus_family(orbit, p.nu, domain.spec.n_tau, domain.spec.n_t)?);
    }
    Ok(explicit_family(orbit, p.k, p.nu, domain)?)
}

fn end_name(end: End) -> &'static str {
    match end {
        End::Negative => "negative",
        End::Positive => "positive",
    }
}

fn state_artifacts(art: &mut Artifacts, u: &InstantonState, model: &ContactModel) -> Result<()> {
    let r = residual(u, model)?;
    let r1: Vec<f64> = (0..u.domain.len()).map(|k| r.r1_norm(k)).collect();
    let r2: Vec<f64> = (0..u.domain.len()).map(|k| r.r2.a[k].hypot(r.r2.b[k])).collect();
    art.node_table("nodes.csv", u, &[("r1", &r1), ("r2", &r2)])?;
    let total: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| a.max(*b)).collect();
    art.svg("residual.svg", svg::heatmap("pointwise residual", u.domain.n_tau_nodes(), u.domain.n_t_nodes(), &total))
}

fn verify_frames(ctx: &Ctx, checks: &mut Checks) -> Result<Value> {
    let m = &ctx.model;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut worst = None;
    let mut flow_defect: f64 = 0.0;
    let mut lie_j: f64 = 0.0;
    let mut lcs: f64 = 0.0;
    for k in 0..ctx.cfg.params.points {
        let p = m.random_point(&mut rng);
        let a = m.eval_frame(&p)?.axioms();
        worst = Some(match worst {
            None => a,
            Some(w) => a.merge(w),
        });
        if k % 10 == 0 {
            flow_defect = flow_defect.max(m.flow_lambda_defect(&p, rng.gen_range(0.1..2.0))?);
            lie_j = lie_j.max(m.lie_derivative_j(&p)?.amax());
            lcs = lcs.max(m.lcs_closedness_residual(&LcsPoint::new(p, rng.gen_range(0.0..1.0)), 1e-4));
        }
    }
    let a = worst.ok_or_else(|| anyhow!("params.points must be positive"))?;
    checks.at_most("lambda_reeb", a.lambda_reeb);
    checks.at_most("reeb_d_lambda", a.reeb_d_lambda);
    checks.at_most("j_squared", a.j_squared);
    checks.at_most("proj_idempotent", a.proj_idempotent);
    checks.at_most("metric_asymmetry", a.metric_asymmetry);
    checks.at_least("metric_min_eigenvalue", a.metric_min_eigenvalue);
    checks.at_most("flow_lambda_defect", flow_defect);
    checks.at_most("lcs_closedness", lcs);
    Ok(json!({
        "model": m.name(),
        "points": ctx.cfg.params.points,
        "axioms": a,
        "flow_lambda_defect": flow_defect,
        "lie_derivative_j": lie_j,
        "lcs_closedness": lcs,
    }))
}

fn example(ctx: &Ctx, checks: &mut Checks, art: &mut Artifacts) -> Result<Value> {
    let p = &ctx.cfg.params;
    let orbit = axis_orbit(ctx)?;
    let domain = domain_or(ctx, DomainKind::Cylinder, 5.0, 128, 64)?;
    let u = family_state(ctx, &orbit, &domain)?;
    let norms = residual(&u, &ctx.model)?.norms(&u.domain);
    let e = total_energy(&u, &ctx.model)?;
    checks.at_most("residual_sup", norms.sup);
    checks.at_most("e_pi", e.e_pi);
    let action = p.k as f64 * orbit.period;
    if p.k == 0 {
        checks.at_most("e_total", e.e_total);
    } else {
        checks.at_most("e_total_vs_action", (e.e_total / action.abs() - 1.0).abs());
    }
    if let Some(c) = e.charge_class.last() {
        checks.near("charge_class", *c as f64, p.nu as f64);
    }
    for c in &e.end_charges {
        let side = end_name(c.end);
        checks.near(&format!("end_q/{side}"), c.q, p.nu as f64);
        checks.near(&format!("end_t/{side}"), c.t, action);
    }
    state_artifacts(art, &u, &ctx.model)?;
    Ok(json!({
        "family": {"k": p.k, "nu": p.nu, "period": orbit.period, "half_length": u.domain.spec.half_length},
        "residual": norms,
        "energy": e,
    }))
}

fn energy(ctx: &Ctx, checks: &mut Checks, art: &mut Artifacts) -> Result<Value> {
    let p = &ctx.cfg.params;
    let orbit = axis_orbit(ctx)?;
    let domain = domain_or(ctx, DomainKind::Cylinder, 5.0, 128, 64)?;
    let u = family_state(ctx, &orbit, &domain)?;
    let e = total_energy(&u, &ctx.model)?;
    checks.at_least("e_pi_nonnegative", e.e_pi);
    checks.at_least("e_vert_nonnegative", e.e_vert);
    checks.at_most("pi_energy_vs_dlambda", (e.e_pi - e.dlambda_integral).abs());
    let vertical = if u.domain.kind() == DomainKind::Disc {
        Value::Null
    } else {
        let h = u.domain.harmonic_decompose(&u.f_form()?, 1e-6)?;
        let v = vertical_energy(&u, &ctx.model, &h.potential)?;
        checks.at_least("vertical_sample_floor", v.min_sample);
        serde_json::to_value(v)?
    };
    let proper = if p.actions_plus.is_empty() && p.actions_minus.is_empty() {
        Value::Null
    } else {
        let (e_pi, e_vert, e_total) = proper_potential_energy(&p.actions_plus, &p.actions_minus)?;
        checks.near("proper_total_split", e_total, e_pi + e_vert);
        json!({"e_pi": e_pi, "e_vert": e_vert, "e_total": e_total})
    };
    state_artifacts(art, &u, &ctx.model)?;
    Ok(json!({"energy": e, "vertical": vertical, "proper_potential": proper}))
}

fn decompose(ctx: &Ctx, checks: &mut Checks, art: &mut Artifacts) -> Result<Value> {
    let p = &ctx.cfg.params;
    let d = domain_or(ctx, DomainKind::Cylinder, 5.0, 64, 32)?;
    let radius = 2.0f64.min(0.8 * d.spec.half_length);
    let bump = |x: f64| if x.abs() < radius { (-1.0 / (1.0 - (x / radius).powi(2))).exp() } else { 0.0 };
    let b = d.scalar_from_fn(|tau, t| p.bump_amplitude * bump(tau) * (1.0 + 0.3 * (2.0 * PI * t).cos()));
    let [h_tau, h_t] = p.harmonic;
    let alpha = d.oneform_from_fn(|_, _| (h_tau, h_t)).add(&d.d_scalar(&b));
    // d tau is exact on the cylinder, so only the torus keeps it
    let keep_tau = if d.kind() == DomainKind::Torus { h_tau } else { 0.0 };
    let expected = d.oneform_from_fn(|_, _| (keep_tau, h_t));
    let h = d.harmonic_decompose(&alpha, 1e-6)?;
    let class_alpha = d.cohomology_class(&alpha).ok();
    let class_beta = d.cohomology_class(&h.beta).ok();
    let class_change = match (&class_alpha, &class_beta) {
        (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or(0) as f64,
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    checks.at_most("beta_error", h.beta.sub(&expected).sup());
    checks.at_most("laplacian_residual", h.laplacian_residual);
    checks.at_most("class_change", class_change);
    let rows: Vec<Vec<f64>> = (0..d.len())
        .map(|k| {
            let (tau, t) = d.node_position(k);
            vec![tau, t, alpha.a[k], alpha.b[k], h.beta.a[k], h.beta.b[k], h.potential.values[k]]
        })
        .collect();
    art.table("forms.csv", &["tau", "t", "alpha_tau", "alpha_t", "beta_tau", "beta_t", "potential"], &rows)?;
    art.svg("potential.svg", svg::heatmap("exact potential", d.n_tau_nodes(), d.n_t_nodes(), &h.potential.values))?;
    Ok(json!({
        "periods_alpha": d.generator_periods(&alpha),
        "periods_beta": d.generator_periods(&h.beta),
        "class_alpha": class_alpha,
        "class_beta": class_beta,
        "laplacian_residual": h.laplacian_residual,
        "co_closed_residual": d.co_closed_residual(&h.beta),
        "cg_iterations": h.cg_iterations,
    }))
}

fn charges(ctx: &Ctx, checks: &mut Checks, art: &mut Artifacts) -> Result<Value> {
    let p = &ctx.cfg.params;
    let orbit = axis_orbit(ctx)?;
    let domain = domain_or(ctx, DomainKind::Cylinder, 5.0, 128, 64)?;
    let u = family_state(ctx, &orbit, &domain)?;
    let ends = [hicks_charge(&u, &ctx.model, End::Negative)?, hicks_charge(&u, &ctx.model, End::Positive)?];
    let slices = slice_charges(&u, &ctx.model)?;
    for c in &ends {
        let side = end_name(c.end);
        checks.near(&format!("end_q/{side}"), c.q, p.nu as f64);
        checks.near(&format!("end_t/{side}"), c.t, p.k as f64 * orbit.period);
    }
    checks.at_most("slice_spread", slices.iter().map(|q| (q - p.nu as f64).abs()).fold(0.0, f64::max));
    let rows: Vec<Vec<f64>> = slices.iter().enumerate().map(|(i, q)| vec![u.domain.tau(i), *q]).collect();
    art.table("slices.csv", &["tau", "q"], &rows)?;
    art.svg("slices.svg", svg::lines("slice charge", &[("q", rows.iter().map(|r| (r[0], r[1])).collect())], false))?;
    Ok(json!({"ends": ends, "slice_charges": slices}))
}

fn orbit_table(art: &mut Artifacts, orbits: &[ReebOrbit]) -> Result<()> {
    let mut rows = Vec::new();
    for (id, o) in orbits.iter().enumerate() {
        for (k, z) in o.samples.iter().enumerate() {
            let s = o.period * k as f64 / o.samples.len() as f64;
            rows.push(vec![id as f64, o.period, s, z[0], z[1], z[2], z[3]]);
        }
    }
    art.table("orbits.csv", &["orbit", "action", "s", "x1", "y1", "x2", "y2"], &rows)
}

fn orbits(ctx: &Ctx, checks: &mut Checks, art: &mut Artifacts) -> Result<Value> {
    if !ctx.model.is_sphere_like() {
        bail!("model {} has no closed Reeb orbits", ctx.model.name());
    }
    let m = &ctx.model;
    let (a, b) = m.weights();
    let axes = axis_orbits(m, 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut found = Vec::new();
    let mut worst = [0.0f64; 3];
    for k in 0..ctx.cfg.params.orbit_seeds {
        let axis = &axes[k % 2];
        let seed: Vec<Point> = (0..32)
            .map(|i| {
                let z = axis.point_at(axis.period * i as f64 / 32.0)?;
                m.retract(&(z + Point::from_fn(|_, _| rng.gen_range(-0.05..0.05))))
            })
            .collect::<Result<_, LabError>>()?;
        let t0 = axis.period * rng.gen_range(0.9..1.1);
        let o = find_orbit(m, &seed, t0, OrbitSearchOptions::default())?;
        let oracle = [PI * a, PI * b]
            .into_iter()
            .map(|x| (o.period - x * (o.period / x).round().max(1.0)).abs())
            .fold(f64::INFINITY, f64::min);
        worst[0] = worst[0].max(oracle);
        worst[1] = worst[1].max(o.closure_error()?);
        worst[2] = worst[2].max(o.reeb_time_defect());
        found.push(o);
    }
    checks.at_most("action_vs_oracle", worst[0]);
    checks.at_most("closure_error", worst[1]);
    checks.at_most("reeb_time_defect", worst[2]);
    orbit_table(art, &found)?;
    let series: Vec<(String, Vec<(f64, f64)>)> = found
        .iter()
        .enumerate()
        .map(|(i, o)| (format!("orbit {i}"), o.samples.iter().map(|z| (z[0] + z[2], z[1] + z[3])).collect()))
        .collect();
    let refs: Vec<(&str, Vec<(f64, f64)>)> = series.iter().map(|(n, p)| (n.as_str(), p.clone())).collect();
    art.svg("orbits.svg", svg::lines("orbits projected to (x1 + x2, y1 + y2)", &refs, false))?;
    Ok(json!({
        "orbits": found.iter().map(|o| o.summary()).collect::<Vec<_>>(),
        "oracle_actions": [PI * a, PI * b],
    }))
}

fn cz(ctx: &Ctx, checks: &mut Checks, art: &mut Artifacts) -> Result<Value> {
    let p = &ctx.cfg.params;
    let (report, oracle, source) = if let Some(theta) = p.theta {
        let r = conley_zehnder(&SymplecticPath::rotation(theta), CzOptions::default())?;
        let oracle = rotation_index_oracle(theta).ok_or_else(|| anyhow!("theta = {theta} is an integer"))?;
        (r, oracle, json!({"rotation": theta}))
    } else {
        let orbit = axis_orbit(ctx)?;
        let path = linearized_path(&orbit)?.iterate(p.iterate);
        let r = conley_zehnder(&path, CzOptions::default())?;
        let closed = closed_form_path(&ctx.model, orbit.start(), orbit.period)?.iterate(p.iterate);
        let oracle = conley_zehnder(&closed, CzOptions::default())?.index;
        (r, oracle, json!({"orbit": orbit.summary(), "iterate": p.iterate}))
    };
    checks.near("cz_vs_oracle", report.index as f64, oracle as f64);
    let rows: Vec<Vec<f64>> = report.crossings.iter().map(|c| vec![c.time, c.signature as f64]).collect();
    art.table("crossings.csv", &["time", "signature"], &rows)?;
    Ok(json!({"path": source, "cz": report, "oracle": oracle}))
}

fn spectrum(ctx: &Ctx, checks: &mut Checks, art: &mut Artifacts) -> Result<Value> {
    let p = &ctx.cfg.params;
    let m = &ctx.model;
    let s = action_spectrum(m, p.t_max, p.random_seeds, ctx.seed)?;
    let mut asymptotic = Value::Null;
    if m.is_sphere_like() {
        let (a, b) = m.weights();
        checks.near("t_lambda_vs_oracle", s.t_lambda, PI * a.min(b));
        let miss = s
            .actions
            .iter()
            .map(|x| {
                [PI * a, PI * b].iter().map(|o| (x - o * (x / o).round().max(1.0)).abs()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        checks.at_most("actions_vs_oracle", miss);
        let orbit = axis_orbit(ctx)?;
        match asymptotic_spectrum(&orbit, p.sobolev_p, p.n_s) {
            Ok(coarse) => {
                let fine = asymptotic_spectrum(&orbit, p.sobolev_p, 2 * p.n_s)?;
                checks.at_most("gap_refinement_drift", (coarse.gap - fine.gap).abs() / fine.gap);
                for sd in [&coarse, &fine] {
                    checks.at_least(&format!("delta_positive/n{}", sd.nodes), sd.delta);
                    let bound = (sd.gap / sd.sobolev_p).min(2.0 / sd.sobolev_p);
                    checks.at_least(&format!("delta_below_bound/n{}", sd.nodes), bound - sd.delta);
                }
                let rows: Vec<Vec<f64>> = fine.eigenvalues.iter().enumerate().map(|(i, e)| vec![i as f64, *e]).collect();
                art.table("eigenvalues.csv", &["k", "eigenvalue"], &rows)?;
                art.svg(
                    "eigenvalues.svg",
                    svg::lines("asymptotic operator eigenvalues", &[("eigenvalue", rows.iter().map(|r| (r[0], r[1])).collect())], false),
                )?;
                asymptotic = json!({"orbit": orbit.summary(), "coarse": coarse, "fine": fine});
            }
            Err(e @ LabError::GapBelowResolution { .. }) => {
                asymptotic = json!({"orbit": orbit.summary(), "degenerate": e.to_string()});
            }
            Err(e) => return Err(e.into()),
        }
    }
    orbit_table(art, &s.orbits)?;
    Ok(json!({"actions": s.actions, "t_lambda": s.t_lambda, "asymptotic": asymptotic}))
}

fn index(ctx: &Ctx, checks: &mut Checks) -> Result<Value> {
    let d = ctx.cfg.params.index.clone().context("params.index is required for the index command")?;
    let r = index_report(&d)?;
    checks.near("full_split", r.full_index as f64, (r.pi_index + r.dbar_index) as f64);
    if d.s_plus + d.s_minus == 0 && d.g == 0 {
        checks.near("closed_agreement", r.full_index as f64, closed_index(d.n, d.g)? as f64);
    }
    Ok(serde_json::to_value(r)?)
}

fn solve(ctx: &Ctx, checks: &mut Checks, art: &mut Artifacts) -> Result<Value> {
    let p = &ctx.cfg.params;
    let orbit = axis_orbit(ctx)?;
    let domain = domain_or(ctx, DomainKind::Torus, 1.0, 64, 64)?;
    let base = family_state(ctx, &orbit, &domain)?;
    let u0 = smooth_perturbation(&base, &ctx.model, p.amplitude, ctx.seed)?;
    let initial = residual(&u0, &ctx.model)?.norms(&u0.domain);
    let opts = SolveOptions { seed: ctx.seed, ..p.solve };
    let (u, trace) = solve_instanton(&u0, &ctx.model, &opts)?;
    checks.at_most("final_residual", trace.final_residual);
    checks.at_least("monotone_objective", trace.is_monotone() as u8 as f64);
    let classification = match classification_check(&u, &ctx.model, &p.classify) {
        Ok(c) => {
            let ok = matches!(c.verdict, Verdict::Constant | Verdict::OrbitTorus);
            checks.at_least("classification", ok as u8 as f64);
            serde_json::to_value(c)?
        }
        Err(e) => {
            checks.at_least("classification", 0.0);
            json!({"error": e.to_string()})
        }
    };
    let rows: Vec<Vec<f64>> = trace
        .rows
        .iter()
        .map(|r| {
            vec![r.iteration as f64, r.objective, r.step, r.sup_r1, r.sup_r2, r.accepted as u8 as f64, r.cg_iterations as f64]
        })
        .collect();
    art.table("trace.csv", &["iteration", "objective", "step", "sup_r1", "sup_r2", "accepted", "cg_iterations"], &rows)?;
    let accepted: Vec<(f64, f64)> = trace.rows.iter().filter(|r| r.accepted || r.iteration == 0).map(|r| (r.iteration as f64, r.objective)).collect();
    art.svg("trace.svg", svg::lines("accepted objective", &[("objective", accepted)], true))?;
    state_artifacts(art, &u, &ctx.model)?;
    Ok(json!({
        "start": {"amplitude": p.amplitude, "half_length": base.domain.spec.half_length, "residual": initial},
        "stop": trace.stop,
        "iterations": trace.iterations,
        "final_residual": trace.final_residual,
        "accepted_objectives": trace.accepted_objectives(),
        "classification": classification,
    }))
}

fn linearize(ctx: &Ctx, checks: &mut Checks, art: &mut Artifacts) -> Result<Value> {
    let c = linearize_check(&ctx.model, &ctx.cfg.params.linearize)?;
    checks.at_most("fd_mismatch", c.error_at_default);
    checks.at_least("refinement_order", c.order);
    for case in &c.block.cases {
        let label = serde_json::to_value(case.case)?.as_str().unwrap_or_default().to_string();
        checks.at_most(&format!("block_{label}"), case.mismatch);
        checks.at_most(&format!("block_r1_response/{label}"), case.r1_response);
    }
    checks.at_most("b_norm", c.b_norm);
    checks.near("eps_contraction", c.eps_contraction, 4.0);
    let rows: Vec<Vec<f64>> = c.sweep.iter().map(|(n, e)| vec![*n as f64, *e]).collect();
    art.table("sweep.csv", &["n", "mismatch"], &rows)?;
    art.svg(
        "sweep.svg",
        svg::lines("analytic vs finite-difference mismatch", &[("mismatch", rows.iter().map(|r| (r[0].log2(), r[1])).collect())], true),
    )?;
    Ok(serde_json::to_value(c)?)
}
