//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lcslab_core::index::{closed_index, dbar_index, full_index, pi_index, IndexData};
use lcslab_core::instanton::identities::identity_one_against_smooth;
use lcslab_core::instanton::{explicit_family, identities_check, lattice_torus_family, proper_potential_energy, residual, total_energy};
use lcslab_core::linearization::{linearize_check, LinearizeCheckOptions};
use lcslab_core::reeb::cz::rotation_index_oracle;
use lcslab_core::reeb::orbit::complex_circle;
use lcslab_core::reeb::{action_spectrum, asymptotic_spectrum, axis_orbits, conley_zehnder, find_orbit, CzOptions, OrbitSearchOptions, SymplecticPath};
use lcslab_core::solver::{classification_check, smooth_perturbation, solve_instanton, ClassifyOptions, SolveOptions, Verdict};
use lcslab_core::{ContactModel, Point, SurfaceDomain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok { Ok(msg) } else { Err(msg) }
}

fn models() -> [ContactModel; 2] {
    [ContactModel::round_sphere(), ContactModel::ellipsoid(1.0, 1.3).unwrap()]
}

fn frame_axioms() -> Outcome {
    let mut worst = [0.0f64; 3];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in models() {
        for _ in 0..1000 {
            let a = m.eval_frame(&m.random_point(&mut rng)).map_err(|e| e.to_string())?.axioms();
            worst[0] = worst[0].max(a.lambda_reeb);
            worst[1] = worst[1].max(a.reeb_d_lambda);
            worst[2] = worst[2].max(a.j_squared);
        }
    }
    ensure(
        worst[0] <= 1e-10 && worst[1] <= 1e-8 && worst[2] <= 1e-8,
        format!("lambda(R)-1 {:.1e}, R_|dlambda {:.1e}, J^2+proj {:.1e}", worst[0], worst[1], worst[2]),
    )
}

fn explicit_family_example() -> Outcome {
    let m = ContactModel::round_sphere();
    let [hopf, _] = axis_orbits(&m, 64).map_err(|e| e.to_string())?;
    let sup = |nt: usize, ns: usize| -> Result<f64, String> {
        let u = explicit_family(&hopf, 0, 1, &SurfaceDomain::cylinder(5.0, nt, ns).unwrap()).map_err(|e| e.to_string())?;
        Ok(residual(&u, &m).map_err(|e| e.to_string())?.norms(&u.domain).sup)
    };
    let sups = [sup(64, 32)?, sup(128, 64)?, sup(256, 128)?];
    let orders = [(sups[0] / sups[1]).log2(), (sups[1] / sups[2]).log2()];
    let u = explicit_family(&hopf, 0, 1, &SurfaceDomain::cylinder(5.0, 128, 64).unwrap()).map_err(|e| e.to_string())?;
    let e = total_energy(&u, &m).map_err(|e| e.to_string())?;
    let charges_ok = e.end_charges.iter().all(|c| (c.q - 1.0).abs() <= 1e-6 && c.t.abs() <= 1e-6);
    ensure(
        sups[1] <= 5e-3
            && orders.iter().all(|o| *o >= 1.9)
            && e.charge_class == vec![1]
            && e.e_pi <= 1e-8
            && e.e_vert <= 1e-10
            && charges_ok
            && e.end_charges.len() == 2,
        format!(
            "sup {:.3e}, orders {:.3}/{:.3}, class {:?}, E_pi {:.1e}, E_vert {:.1e}, ends {:?}",
            sups[1],
            orders[0],
            orders[1],
            e.charge_class,
            e.e_pi,
            e.e_vert,
            e.end_charges.iter().map(|c| (c.q, c.t)).collect::<Vec<_>>()
        ),
    )
}

fn identities() -> Outcome {
    let m = ContactModel::round_sphere();
    let [hopf, _] = axis_orbits(&m, 64).map_err(|e| e.to_string())?;
    let d = SurfaceDomain::cylinder(4.0, 256, 128).unwrap();
    let mut worst: f64 = 0.0;
    for (k, nu, tol) in [(0, 1, 1e-3), (0, -1, 1e-3), (0, 0, 1e-3), (1, 0, 2e-3)] {
        let u = explicit_family(&hopf, k, nu, &d).map_err(|e| e.to_string())?;
        worst = worst.max(identities_check(&u, &m, tol).map_err(|e| e.to_string())?.max());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut min_order = f64::INFINITY;
    for trial in 0..10 {
        let model = &models()[trial % 2];
        let c: Vec<f64> = (0..8).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let map = |tau: f64, t: f64| {
            let s = 2.0 * PI * t;
            let p = Point::new(
                0.9 + c[0] * tau.sin(),
                0.3 * s.cos() + c[1] * (s + tau).sin(),
                0.3 * s.sin() + c[2] * tau + c[3] * (2.0 * s).cos(),
                c[4] * (s + c[5] * tau).cos() + c[6] * (c[7] * tau).sin(),
            );
            model.retract(&p).unwrap()
        };
        let err = |n: usize| identity_one_against_smooth(&SurfaceDomain::cylinder(1.0, n, n).unwrap(), model, map);
        let (e1, e2) = (err(64).map_err(|e| e.to_string())?, err(128).map_err(|e| e.to_string())?);
        min_order = min_order.min((e1 / e2).log2());
    }
    ensure(worst <= 1e-6 && min_order >= 1.8, format!("families max {worst:.1e}, smooth-map min order {min_order:.3}"))
}

fn harmonic_decomposition() -> Outcome {
    let d = SurfaceDomain::cylinder(5.0, 64, 32).unwrap();
    let bump = |x: f64| if x.abs() < 2.0 { (-1.0 / (1.0 - (x / 2.0).powi(2))).exp() } else { 0.0 };
    let b = d.scalar_from_fn(|tau, t| bump(tau) * (1.0 + 0.3 * (2.0 * PI * t).cos()));
    let dt = d.oneform_from_fn(|_, _| (0.0, 1.0));
    let alpha = dt.add(&d.d_scalar(&b));
    let h = d.harmonic_decompose(&alpha, 1e-6).map_err(|e| e.to_string())?;
    let err = h.beta.sub(&dt).sup();
    let same_class = d.cohomology_class(&alpha).ok() == d.cohomology_class(&h.beta).ok();
    ensure(
        err <= 1e-6 && h.laplacian_residual <= 1e-8 && same_class,
        format!("|beta - dt| {err:.1e}, laplacian {:.1e}, class preserved {same_class}", h.laplacian_residual),
    )
}

fn linearization() -> Outcome {
    let c = linearize_check(&ContactModel::round_sphere(), &LinearizeCheckOptions::default()).map_err(|e| e.to_string())?;
    let block_ok = c.block.cases.iter().all(|b| b.mismatch <= 1e-4 && b.r1_response <= 1e-6);
    ensure(
        c.error_at_default <= 1e-4 && c.order >= 1.9 && block_ok && c.b_norm <= 1e-6,
        format!(
            "FD mismatch {:.2e}, order {:.3}, block mismatches {:?}, B {:.1e}",
            c.error_at_default,
            c.order,
            c.block.cases.iter().map(|b| format!("{:.1e}", b.mismatch)).collect::<Vec<_>>(),
            c.b_norm
        ),
    )
}

fn cz_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = Vec::new();
    for _ in 0..20 {
        let theta: f64 = rng.gen_range(0.0..5.0);
        let expected = 2 * theta.floor() as i64 + 1;
        let got = conley_zehnder(&SymplecticPath::rotation(theta), CzOptions::default()).map(|r| r.index);
        if got.as_ref().ok() != Some(&expected) || rotation_index_oracle(theta) != Some(expected) {
            bad.push((theta, got.map_err(|e| e.to_string())));
        }
    }
    ensure(bad.is_empty(), format!("20 rotation paths, mismatches {bad:?}"))
}

fn orbits_and_spectrum() -> Outcome {
    let round = ContactModel::round_sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_t: f64 = 0.0;
    for _ in 0..5 {
        let p = round.random_point(&mut rng);
        let seed: Vec<Point> = complex_circle(&round, &p, 1, 32)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|z| round.retract(&(z + Point::from_fn(|_, _| rng.gen_range(-0.05..0.05)))).unwrap())
            .collect();
        let o = find_orbit(&round, &seed, PI * rng.gen_range(0.9..1.1), OrbitSearchOptions::default())
            .map_err(|e| e.to_string())?;
        worst_t = worst_t.max((o.period - PI).abs());
    }
    let s_round = action_spectrum(&round, 4.0, 4, 1).map_err(|e| e.to_string())?;
    let ell = ContactModel::ellipsoid(1.0, 1.3).unwrap();
    let s_ell = action_spectrum(&ell, 5.0, 4, 1).map_err(|e| e.to_string())?;
    let ell_ok = s_ell.actions.len() == 2
        && (s_ell.actions[0] - PI).abs() <= 1e-6
        && (s_ell.actions[1] - 1.3 * PI).abs() <= 1e-6;
    let [short, _] = axis_orbits(&ell, 64).map_err(|e| e.to_string())?;
    let p = 4.0;
    let a = asymptotic_spectrum(&short, p, 128).map_err(|e| e.to_string())?;
    let b = asymptotic_spectrum(&short, p, 256).map_err(|e| e.to_string())?;
    let drift = (a.gap - b.gap).abs() / b.gap;
    let delta_ok = [&a, &b].iter().all(|s| s.delta > 0.0 && s.delta < (s.gap / p).min(2.0 / p));
    ensure(
        worst_t <= 1e-8 && (s_round.t_lambda - PI).abs() <= 1e-8 && ell_ok && a.gap > 0.0 && drift <= 0.01 && delta_ok,
        format!(
            "|T - pi| {worst_t:.1e}, T_lambda {:.12}, ellipsoid actions {:?}, gap {:.6} (drift {drift:.1e}), delta {:.4}",
            s_round.t_lambda, s_ell.actions, b.gap, b.delta
        ),
    )
}

fn index_arithmetic() -> Outcome {
    let fixed = closed_index(2, 0) == Ok(4) && closed_index(2, 1) == Ok(0) && dbar_index(&[1], &[], 0) == Ok(2);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut bad = 0;
    for _ in 0..1000 {
        let (sp, sm) = (rng.gen_range(0..4usize), rng.gen_range(0..4usize));
        let d = IndexData {
            n: rng.gen_range(1..6),
            g: rng.gen_range(0..4),
            s_plus: sp,
            s_minus: sm,
            c1: rng.gen_range(-3..4),
            mu_plus: (0..sp).map(|_| rng.gen_range(-10..11)).collect(),
            mu_minus: (0..sm).map(|_| rng.gen_range(-10..11)).collect(),
            m_plus: (0..sp).map(|_| rng.gen_range(1..5)).collect(),
            m_minus: (0..sm).map(|_| rng.gen_range(1..5)).collect(),
        };
        if full_index(&d).ok() != Some(pi_index(&d).unwrap() + dbar_index(&d.m_plus, &d.m_minus, d.g).unwrap()) {
            bad += 1;
        }
    }
    ensure(fixed && bad == 0, format!("closed/dbar examples {fixed}, split failures {bad}/1000"))
}

fn solver_classification() -> Outcome {
    let m = ContactModel::round_sphere();
    let [hopf, _] = axis_orbits(&m, 64).map_err(|e| e.to_string())?;
    let base = lattice_torus_family(&hopf, 1, 64, 64).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut good = 0;
    for seed in 0..10u64 {
        let u0 = smooth_perturbation(&base, &m, 0.05, seed).map_err(|e| e.to_string())?;
        let r0 = residual(&u0, &m).map_err(|e| e.to_string())?.norms(&u0.domain).sup;
        let opts = SolveOptions { max_iters: 100, seed, ..SolveOptions::default() };
        let (v, trace) = solve_instanton(&u0, &m, &opts).map_err(|e| e.to_string())?;
        let class = classification_check(&v, &m, &ClassifyOptions::default());
        let verdict_ok = matches!(class.as_ref().map(|c| c.verdict), Ok(Verdict::Constant | Verdict::OrbitTorus));
        let ok = trace.final_residual <= 1e-6 && trace.iterations <= 100 && trace.is_monotone() && verdict_ok;
        good += ok as usize;
        lines.push(format!(
            "{seed}:{r0:.1e}->{:.1e} in {}it {}",
            trace.final_residual,
            trace.iterations,
            class
                .map(|c| format!("{:?}@{:.1e}", c.verdict, c.distance.unwrap_or(0.0)))
                .unwrap_or_else(|e| e.to_string())
        ));
    }
    ensure(good == 10, format!("{good}/10 runs [{}]", lines.join(" ")))
}

fn proper_potential() -> Outcome {
    let a = proper_potential_energy(&[PI], &[]).map_err(|e| e.to_string())?;
    let b = proper_potential_energy(&[PI], &[PI]).map_err(|e| e.to_string())?;
    ensure(a == (PI, PI, 2.0 * PI) && b == (0.0, PI, PI), format!("{a:?}, {b:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("frame axioms", frame_axioms, Duration::from_secs(2)),
        ("explicit family example", explicit_family_example, Duration::from_secs(10)),
        ("energy identities", identities, Duration::from_secs(30)),
        ("harmonic decomposition", harmonic_decomposition, Duration::from_secs(5)),
        ("linearization consistency", linearization, Duration::from_secs(20)),
        ("Conley-Zehnder oracle", cz_oracle, Duration::from_secs(5)),
        ("orbits and action spectrum", orbits_and_spectrum, Duration::from_secs(60)),
        ("index arithmetic", index_arithmetic, Duration::from_secs(1)),
        ("solver and classification", solver_classification, Duration::from_secs(300)),
        ("proper-potential energy", proper_potential, Duration::from_secs(1)),
    ];
    let mut failures = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        failures += (!pass) as usize;
        println!(
            "criterion {:>2} {} [{name}] {detail}; {:.2}s of {}s",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
