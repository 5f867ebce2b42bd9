//! Projected Gauss-Newton for the discretized instanton equation, and the
//! classification of converged closed solutions.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::instanton::{dbar_coords, residual, InstantonState};
use crate::model::{ContactModel, Point};
use crate::linearization::{perturb, TangentField};
use crate::reeb::orbit::{find_orbit, OrbitSearchOptions, OrbitSummary};
use crate::sparse::{conjugate_gradient, dot, Csr};
use crate::surface::{Axis, DomainKind, SurfaceDomain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Sup-norm target for the residual.
    pub residual_tol: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub cg_rtol: f64,
    pub cg_max_iters: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            grad_tol: 1e-8,
            residual_tol: 1e-6,
            armijo_c: 1e-4,
            backtrack: 0.5,
            cg_rtol: 1e-3,
            cg_max_iters: 2000,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.grad_tol, self.residual_tol, self.armijo_c, self.cg_rtol];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(LabError::InvalidSpec("solver tolerances must be positive".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) || self.armijo_c >= 1.0 {
            return Err(LabError::InvalidSpec("Armijo parameters must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub step: f64,
    pub sup_r1: f64,
    pub sup_r2: f64,
    pub accepted: bool,
    pub cg_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Residual,
    Gradient,
    MaxIters,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveTrace {
    pub rows: Vec<TraceRow>,
    pub stop: StopReason,
    pub final_residual: f64,
    pub iterations: usize,
}

impl SolveTrace {
    /// Objectives of the initial state and of every accepted step.
    pub fn accepted_objectives(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.accepted || r.iteration == 0).map(|r| r.objective).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.accepted_objectives().windows(2).all(|w| w[1] < w[0])
    }
}

const ROWS: usize = 4;
const FD_STEP: f64 = 1e-6;

/// Weighted residual rows of one node: `sqrt(2 dA) dbar^pi w(d/dtau)` in
/// `xi`-coordinates (the `d/dt` value is `-J` of it) and `sqrt(dA) R2`.
fn node_rows(d: &SurfaceDomain, model: &ContactModel, w: &[Point], f: &[f64], q: usize, weight: f64) -> Result<[f64; ROWS]> {
    let w_tau = d.diff_at(w, Axis::Tau, q);
    let w_t = d.diff_at(w, Axis::T, q);
    let frame = model.frame_unchecked(&w[q])?;
    let (a, _) = dbar_coords(&frame.xi_coords(&w_tau), &frame.xi_coords(&w_t));
    let (lt, ls) = (frame.lambda_of(&w_tau), frame.lambda_of(&w_t));
    let f_tau = d.diff_angle_at(f, Axis::Tau, q)?;
    let f_t = d.diff_angle_at(f, Axis::T, q)?;
    let s1 = (2.0 * weight).sqrt();
    let s2 = weight.sqrt();
    Ok([s1 * a[0], s1 * a[1], s2 * (ls - f_tau), s2 * (-lt - f_t)])
}

struct Problem<'a> {
    domain: &'a SurfaceDomain,
    model: &'a ContactModel,
    weights: Vec<f64>,
    /// Column block of each node, `None` for frozen nodes.
    free: Vec<Option<usize>>,
    n_free: usize,
    /// Nodes whose rows depend on a given node.
    dependents: Vec<Vec<usize>>,
}

impl<'a> Problem<'a> {
    fn new(domain: &'a SurfaceDomain, model: &'a ContactModel) -> Self {
        let n = domain.len();
        let mut free = vec![None; n];
        let mut n_free = 0;
        for (k, slot) in free.iter_mut().enumerate() {
            let (i, j) = domain.coords(k);
            let frozen = match domain.kind() {
                DomainKind::Torus => false,
                DomainKind::Cylinder => i == 0 || i + 1 == domain.n_tau_nodes(),
                DomainKind::Disc => {
                    i == 0 || i + 1 == domain.n_tau_nodes() || j == 0 || j + 1 == domain.n_t_nodes()
                }
            };
            if !frozen {
                *slot = Some(n_free);
                n_free += 1;
            }
        }
        let mut dependents = vec![Vec::new(); n];
        for q in 0..n {
            let mut nodes = vec![q];
            for axis in [Axis::Tau, Axis::T] {
                nodes.extend(domain.stencil_nodes(axis, q).iter().filter(|e| e.2 != 0.0).map(|e| e.0));
            }
            nodes.sort_unstable();
            nodes.dedup();
            for p in nodes {
                dependents[p].push(q);
            }
        }
        Self { domain, model, weights: domain.area_weights(), free, n_free, dependents }
    }

    fn rows(&self, w: &[Point], f: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(ROWS * w.len());
        for q in 0..w.len() {
            out.extend(node_rows(self.domain, self.model, w, f, q, self.weights[q])?);
        }
        Ok(out)
    }

    /// Moves node `p` by `s` along coordinate `c` (three tangent directions,
    /// then the angle).
    fn shifted(&self, w: &mut [Point], f: &mut [f64], p: usize, c: usize, s: f64, basis: &[Point; 3]) -> Result<()> {
        if c < 3 {
            w[p] = self.model.retract(&(w[p] + basis[c] * s))?;
        } else {
            f[p] += s;
        }
        Ok(())
    }

    fn jacobian(&self, w: &[Point], f: &[f64]) -> Result<Csr> {
        let n = w.len();
        let mut columns: Vec<Vec<(usize, f64)>> = Vec::with_capacity(ROWS * self.n_free);
        let mut ww = w.to_vec();
        let mut ff = f.to_vec();
        for p in 0..n {
            if self.free[p].is_none() {
                continue;
            }
            let basis = self.model.frame_unchecked(&w[p])?.tangent_basis;
            for c in 0..ROWS {
                let mut col = Vec::with_capacity(ROWS * self.dependents[p].len());
                self.shifted(&mut ww, &mut ff, p, c, FD_STEP, &basis)?;
                let plus: Vec<[f64; ROWS]> = self.dependents[p]
                    .iter()
                    .map(|&q| node_rows(self.domain, self.model, &ww, &ff, q, self.weights[q]))
                    .collect::<Result<_>>()?;
                ww[p] = w[p];
                ff[p] = f[p];
                self.shifted(&mut ww, &mut ff, p, c, -FD_STEP, &basis)?;
                for (m, &q) in self.dependents[p].iter().enumerate() {
                    let minus = node_rows(self.domain, self.model, &ww, &ff, q, self.weights[q])?;
                    for r in 0..ROWS {
                        let v = (plus[m][r] - minus[r]) / (2.0 * FD_STEP);
                        if v != 0.0 {
                            col.push((ROWS * q + r, v));
                        }
                    }
                }
                ww[p] = w[p];
                ff[p] = f[p];
                columns.push(col);
            }
        }
        // transpose the column lists into CSR rows
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ROWS * n];
        for (j, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                by_row[r].push((j, v));
            }
        }
        let mut jac = Csr::with_cols(ROWS * self.n_free);
        for row in &by_row {
            jac.push_row(row);
        }
        Ok(jac)
    }

    fn apply_step(&self, w: &[Point], f: &[f64], delta: &[f64], alpha: f64) -> Result<(Vec<Point>, Vec<f64>)> {
        let mut w2 = w.to_vec();
        let mut f2 = f.to_vec();
        for p in 0..w.len() {
            let Some(b) = self.free[p] else { continue };
            let basis = self.model.frame_unchecked(&w[p])?.tangent_basis;
            let v = basis[0] * delta[ROWS * b] + basis[1] * delta[ROWS * b + 1] + basis[2] * delta[ROWS * b + 2];
            w2[p] = self.model.retract(&(w[p] + v * alpha))?;
            f2[p] = (f[p] + alpha * delta[ROWS * b + 3]).rem_euclid(1.0);
        }
        Ok((w2, f2))
    }
}

fn trace_row(iteration: usize, objective: f64, step: f64, u: &InstantonState, model: &ContactModel, accepted: bool, cg: usize) -> Result<TraceRow> {
    let r = residual(u, model)?.norms(&u.domain);
    Ok(TraceRow { iteration, objective, step, sup_r1: r.sup_r1, sup_r2: r.sup_r2, accepted, cg_iterations: cg })
}

/// Minimizes `|R1|^2 + |R2|^2` (area-weighted) by Gauss-Newton with a
/// locally differenced sparse Jacobian, CG on the damped normal equations,
/// retraction after each step and Armijo backtracking. Boundary nodes of
/// cylinders and discs stay fixed.
pub fn solve_instanton(u0: &InstantonState, model: &ContactModel, opts: &SolveOptions) -> Result<(InstantonState, SolveTrace)> {
    opts.validate()?;
    u0.validate(model)?;
    let domain = &u0.domain;
    let problem = Problem::new(domain, model);
    let mut u = u0.clone();
    let mut r = problem.rows(&u.w, &u.f)?;
    let mut obj = dot(&r, &r);
    let mut rows = vec![trace_row(0, obj, 0.0, &u, model, false, 0)?];
    let mut damping = 1e-12;
    let mut failures = 0;
    let min_step = 2f64.powi(-20);
    let mut stop = StopReason::MaxIters;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        let last = rows.last().unwrap();
        if last.sup_r1.max(last.sup_r2) <= opts.residual_tol {
            stop = StopReason::Residual;
            break;
        }
        iterations += 1;
        let jac = problem.jacobian(&u.w, &u.f)?;
        let mut grad = vec![0.0; jac.ncols];
        jac.matvec_transpose(&r, &mut grad);
        let gnorm = dot(&grad, &grad).sqrt();
        if gnorm <= opts.grad_tol {
            stop = StopReason::Gradient;
            break;
        }
        let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        let scratch = RefCell::new(vec![0.0; jac.nrows]);
        let mut delta = vec![0.0; jac.ncols];
        let outcome = conjugate_gradient(
            |x, y| {
                let mut t = scratch.borrow_mut();
                jac.matvec(x, &mut t);
                jac.matvec_transpose(&t, y);
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi += damping * xi;
                }
            },
            &rhs,
            &mut delta,
            opts.cg_rtol,
            opts.cg_max_iters,
        );
        // a stalled CG still leaves a descent direction in `delta`
        let cg_iterations = match outcome {
            Ok(o) => o.iterations,
            Err(LabError::SolverFailure(_)) => opts.cg_max_iters,
            Err(e) => return Err(e),
        };
        let slope = dot(&grad, &delta) * 2.0;
        let mut alpha = 1.0;
        let mut accepted = None;
        if slope < 0.0 {
            while alpha >= min_step {
                if let Ok((w2, f2)) = problem.apply_step(&u.w, &u.f, &delta, alpha) {
                    let r2 = problem.rows(&w2, &f2)?;
                    let obj2 = dot(&r2, &r2);
                    if obj2 <= obj + opts.armijo_c * alpha * slope && obj2 < obj {
                        accepted = Some((w2, f2, r2, obj2));
                        break;
                    }
                }
                alpha *= opts.backtrack;
            }
        }
        match accepted {
            Some((w2, f2, r2, obj2)) => {
                u = InstantonState { domain: domain.clone(), w: w2, f: f2 };
                r = r2;
                obj = obj2;
                failures = 0;
                damping = (damping * 0.1).max(1e-12);
                rows.push(trace_row(iterations, obj, alpha, &u, model, true, cg_iterations)?);
            }
            None => {
                failures += 1;
                damping *= 100.0;
                rows.push(trace_row(iterations, obj, 0.0, &u, model, false, cg_iterations)?);
                if failures >= 10 {
                    return Err(LabError::Diverged(format!(
                        "no decrease in 10 consecutive line searches (objective {obj:.3e})"
                    )));
                }
            }
        }
    }
    if stop == StopReason::MaxIters {
        let last = rows.last().unwrap();
        if last.sup_r1.max(last.sup_r2) <= opts.residual_tol {
            stop = StopReason::Residual;
        }
    }
    u.validate(model)?;
    let final_residual = residual(&u, model)?.norms(domain).sup;
    Ok((u, SolveTrace { rows, stop, final_residual, iterations }))
}

/// `u` moved by a random smooth tangent variation with sup-norm `amplitude`
/// in `Y` and in `upsilon`: low Fourier modes (periodic on the torus) with
/// seeded coefficients, damped to zero at non-periodic ends.
pub fn smooth_perturbation(u: &InstantonState, model: &ContactModel, amplitude: f64, seed: u64) -> Result<InstantonState> {
    let d = &u.domain;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = 2.0 * d.spec.half_length;
    let modes: Vec<[f64; 6]> = (0..4 * 9)
        .map(|_| {
            let mut c = [0.0; 6];
            for v in c.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            c
        })
        .collect();
    let periodic_tau = d.kind() == DomainKind::Torus;
    let field = |comp: usize, tau: f64, t: f64| -> f64 {
        let x = (tau + d.spec.half_length) / span;
        let mut acc = 0.0;
        for mt in 0..3 {
            for ms in 0..3 {
                let c = &modes[comp * 9 + 3 * mt + ms];
                let (a, b) = (std::f64::consts::TAU * mt as f64 * x, std::f64::consts::TAU * ms as f64 * t);
                acc += c[0] * a.cos() * b.cos() + c[1] * a.sin() * b.cos() + c[2] * a.cos() * b.sin() + c[3] * a.sin() * b.sin();
            }
        }
        if periodic_tau { acc } else { acc * (std::f64::consts::PI * x).sin().powi(2) }
    };
    let raw = TangentField::from_frame_coeffs(u, model, |tau, t| {
        (field(0, tau, t), field(1, tau, t), field(2, tau, t), field(3, tau, t))
    })?;
    let ysup = raw.sup();
    let usup = raw.upsilon.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let x = TangentField {
        y: raw.y.iter().map(|v| v * (amplitude / ysup)).collect(),
        upsilon: raw.upsilon.iter().map(|v| v * (amplitude / usup)).collect(),
    };
    perturb(u, model, &x, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyOptions {
    pub constant_tol: f64,
    pub orbit_tol: f64,
    pub residual_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { constant_tol: 1e-3, orbit_tol: 1e-2, residual_tol: 1e-5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Constant,
    OrbitTorus,
    Other,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub diameter: f64,
    /// Largest distance from an image node to the fitted orbit.
    pub distance: Option<f64>,
    pub orbit: Option<OrbitSummary>,
    pub residual: f64,
}

/// Closed loop of image points with the larger `lambda`-length, oriented
/// along the Reeb field, with its `lambda`-length.
fn seed_loop(u: &InstantonState, model: &ContactModel) -> (Vec<Point>, f64) {
    let d = &u.domain;
    let tau_loop: Vec<Point> = (0..d.n_tau_nodes()).map(|i| u.w[d.idx(i, 0)]).collect();
    let t_loop: Vec<Point> = (0..d.n_t_nodes()).map(|j| u.w[d.idx(0, j)]).collect();
    let length = |pts: &[Point]| -> f64 {
        (0..pts.len()).map(|i| model.lambda(&pts[i]).dot(&(pts[(i + 1) % pts.len()] - pts[i]))).sum()
    };
    let mut best = (tau_loop.clone(), length(&tau_loop));
    if d.periodic(Axis::T) {
        let lt = length(&t_loop);
        if lt.abs() > best.1.abs() || d.kind() != DomainKind::Torus {
            best = (t_loop, lt);
        }
    }
    if best.1 < 0.0 {
        best.0.reverse();
        best.1 = -best.1;
    }
    let stride = (best.0.len() / 32).max(1);
    (best.0.into_iter().step_by(stride).collect(), best.1)
}

/// Constant if the image is small, otherwise fits a Reeb orbit through the
/// image and measures how far the image strays from it.
pub fn classification_check(u: &InstantonState, model: &ContactModel, opts: &ClassifyOptions) -> Result<Classification> {
    let res = residual(u, model)?.norms(&u.domain).sup;
    if !(res <= opts.residual_tol) {
        return Err(LabError::Precondition(format!(
            "classification needs residual <= {:.1e}, got {res:.3e}",
            opts.residual_tol
        )));
    }
    let diameter = u.image_diameter();
    if diameter <= opts.constant_tol {
        return Ok(Classification { verdict: Verdict::Constant, diameter, distance: None, orbit: None, residual: res });
    }
    let other = Classification { verdict: Verdict::Other, diameter, distance: None, orbit: None, residual: res };
    if !model.is_sphere_like() {
        return Ok(other);
    }
    let (seed, action) = seed_loop(u, model);
    if seed.len() < 8 || !(action > 1e-3) {
        return Ok(other);
    }
    let Ok(orbit) = find_orbit(model, &seed, action, OrbitSearchOptions::default()) else { return Ok(other) };
    let dense: Vec<Point> = (0..4096).map(|k| orbit.point_at(orbit.period * k as f64 / 4096.0)).collect::<Result<_>>()?;
    let distance = u
        .w
        .iter()
        .map(|p| dense.iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min).sqrt())
        .fold(0.0, f64::max);
    let verdict = if distance <= opts.orbit_tol { Verdict::OrbitTorus } else { Verdict::Other };
    Ok(Classification { verdict, diameter, distance: Some(distance), orbit: Some(orbit.summary()), residual: res })
}
