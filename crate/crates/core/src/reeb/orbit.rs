use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fourier::derivative_matrix;
use crate::model::{ContactModel, Point};
use crate::reeb::path::linearized_path;

/// Closure tolerance used to decide multiplicity.
const COVER_TOL: f64 = 1e-6;
/// Endpoint margin below which an orbit counts as degenerate.
pub const NONDEGENERACY_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ReebOrbit {
    pub model: ContactModel,
    /// Period in Reeb time, equal to the action.
    pub period: f64,
    /// Samples `z(T k / N)`.
    pub samples: Vec<Point>,
    pub multiplicity: usize,
    pub nondegenerate: bool,
    /// Smallest singular value of `Psi(1) - I` on `xi`.
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSummary {
    pub action: f64,
    pub multiplicity: usize,
    pub nondegenerate: bool,
    pub margin: f64,
    pub start: [f64; 4],
}

impl ReebOrbit {
    /// Orbit through `z0` with the given period, sampled from the model flow.
    pub fn from_flow(model: &ContactModel, z0: Point, period: f64, n_samples: usize) -> Result<Self> {
        if !(period > 0.0) {
            return Err(LabError::NonPositiveAction(period));
        }
        let samples = (0..n_samples)
            .map(|k| model.reeb_flow(&z0, period * k as f64 / n_samples as f64))
            .collect::<Result<Vec<_>>>()?;
        let closure = (model.reeb_flow(&z0, period)? - z0).norm();
        if closure > 1e-8 {
            return Err(LabError::Precondition(format!("flow does not close after {period} (gap {closure:.3e})")));
        }
        Self::finish(*model, period, samples)
    }

    fn finish(model: ContactModel, period: f64, samples: Vec<Point>) -> Result<Self> {
        let z0 = samples[0];
        let mut multiplicity = 1;
        for m in (2..=16).rev() {
            if (model.reeb_flow(&z0, period / m as f64)? - z0).norm() <= COVER_TOL {
                multiplicity = m;
                break;
            }
        }
        let mut orbit = Self { model, period, samples, multiplicity, nondegenerate: false, margin: 0.0 };
        let path = linearized_path(&orbit)?;
        orbit.margin = path.endpoint_margin();
        orbit.nondegenerate = orbit.margin >= NONDEGENERACY_MARGIN;
        Ok(orbit)
    }

    pub fn start(&self) -> Point {
        self.samples[0]
    }

    /// `gamma(s)` for Reeb time `s`.
    pub fn point_at(&self, s: f64) -> Result<Point> {
        self.model.reeb_flow(&self.samples[0], s)
    }

    pub fn closure_error(&self) -> Result<f64> {
        Ok((self.point_at(self.period)? - self.start()).norm())
    }

    /// Largest `|lambda(dz/ds) - 1|` over the samples with spectral
    /// differentiation of the sample loop.
    pub fn reeb_time_defect(&self) -> f64 {
        let n = self.samples.len();
        let d = derivative_matrix(n, self.period);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mut dz = Point::zeros();
            for k in 0..n {
                dz += self.samples[k] * d[(i, k)];
            }
            worst = worst.max((self.model.lambda(&self.samples[i]).dot(&dz) - 1.0).abs());
        }
        worst
    }

    pub fn summary(&self) -> OrbitSummary {
        let s = self.start();
        OrbitSummary {
            action: self.period,
            multiplicity: self.multiplicity,
            nondegenerate: self.nondegenerate,
            margin: self.margin,
            start: [s[0], s[1], s[2], s[3]],
        }
    }

    /// Symmetric Hausdorff distance between sample sets.
    pub fn hausdorff_to(&self, points: &[Point]) -> f64 {
        hausdorff(&self.samples, points)
    }
}

pub fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let one = |x: &[Point], y: &[Point]| {
        x.iter().map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// The two axis circles of an ellipsoid (for the round sphere, two Hopf fibres).
pub fn axis_orbits(model: &ContactModel, n_samples: usize) -> Result<[ReebOrbit; 2]> {
    if !model.is_sphere_like() {
        return Err(LabError::InvalidSpec("the standard R^3 model has no closed Reeb orbits".into()));
    }
    let (a, b) = model.weights();
    let short = ReebOrbit::from_flow(model, Point::new(a.sqrt(), 0.0, 0.0, 0.0), std::f64::consts::PI * a, n_samples)?;
    let long = ReebOrbit::from_flow(model, Point::new(0.0, 0.0, b.sqrt(), 0.0), std::f64::consts::PI * b, n_samples)?;
    if a <= b { Ok([short, long]) } else { Ok([long, short]) }
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitSearchOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub min_action: f64,
}

impl Default for OrbitSearchOptions {
    fn default() -> Self {
        Self { max_iters: 50, tol: 1e-12, min_action: 1e-3 }
    }
}

/// Newton (Gauss-Newton with a pseudoinverse, so Morse-Bott families are
/// tolerated) on the collocated equation `z' = T R(z)`, the level set and a
/// phase condition against the initial loop. `initial` samples a closed loop
/// on `[0, 1)`.
pub fn find_orbit(model: &ContactModel, initial: &[Point], t0: f64, opts: OrbitSearchOptions) -> Result<ReebOrbit> {
    let n = initial.len();
    if n < 8 {
        return Err(LabError::InvalidSpec(format!("need at least 8 loop samples, got {n}")));
    }
    if !(t0 > 0.0) {
        return Err(LabError::NonPositiveAction(t0));
    }
    let gap = (initial[n - 1] - initial[0]).norm();
    if gap > 0.5 {
        return Err(LabError::Precondition(format!("initial loop does not close (gap {gap:.3})")));
    }
    let d = derivative_matrix(n, 1.0);
    let reference: Vec<Point> = initial.to_vec();
    let ref_velocity: Vec<Point> = (0..n).map(|i| (0..n).map(|k| reference[k] * d[(i, k)]).sum()).collect();
    let nu = 4 * n + 1;
    let ne = 5 * n + 1;
    let mut x = DVector::zeros(nu);
    for i in 0..n {
        for c in 0..4 {
            x[4 * i + c] = initial[i][c];
        }
    }
    x[4 * n] = t0;
    let point = |x: &DVector<f64>, i: usize| Point::new(x[4 * i], x[4 * i + 1], x[4 * i + 2], x[4 * i + 3]);
    let mut last = f64::INFINITY;
    for _ in 0..opts.max_iters {
        let t = x[4 * n];
        let mut f = DVector::zeros(ne);
        let mut jac = DMatrix::zeros(ne, nu);
        for i in 0..n {
            let zi = point(&x, i);
            let r = model.reeb(&zi);
            let dr = model.reeb_jacobian(&zi);
            for c in 0..4 {
                let row = 4 * i + c;
                let mut acc = -t * r[c];
                for k in 0..n {
                    acc += d[(i, k)] * x[4 * k + c];
                    jac[(row, 4 * k + c)] += d[(i, k)];
                }
                for e in 0..4 {
                    jac[(row, 4 * i + e)] -= t * dr[(c, e)];
                }
                jac[(row, 4 * n)] = -r[c];
                f[row] = acc;
            }
            let row = 4 * n + i;
            if model.is_sphere_like() {
                let nrm = model.normal(&zi);
                f[row] = nrm.dot(&zi) - 1.0;
                for c in 0..4 {
                    jac[(row, 4 * i + c)] = 2.0 * nrm[c];
                }
            } else {
                f[row] = zi[3];
                jac[(row, 4 * i + 3)] = 1.0;
            }
        }
        let row = 5 * n;
        for i in 0..n {
            let zi = point(&x, i);
            f[row] += (zi - reference[i]).dot(&ref_velocity[i]) / n as f64;
            for c in 0..4 {
                jac[(row, 4 * i + c)] = ref_velocity[i][c] / n as f64;
            }
        }
        let fnorm = f.amax();
        last = fnorm;
        if !fnorm.is_finite() {
            break;
        }
        if fnorm <= opts.tol {
            return accept(model, &x, n, opts);
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|s| **s > 1e-10 * smax).count();
        if rank + 4 < nu {
            return Err(LabError::DegenerateJacobian { rank, expected: nu });
        }
        let step = svd.solve(&f, 1e-10 * smax).map_err(|e| LabError::SolverFailure(e.to_string()))?;
        x -= step.clone();
        if step.amax() <= 1e-14 && fnorm <= 1e3 * opts.tol {
            return accept(model, &x, n, opts);
        }
    }
    Err(LabError::NoConvergence { iterations: opts.max_iters, residual: last })
}

fn accept(model: &ContactModel, x: &DVector<f64>, n: usize, opts: OrbitSearchOptions) -> Result<ReebOrbit> {
    let t = x[4 * n];
    if t < opts.min_action {
        return Err(LabError::NoConvergence { iterations: 0, residual: t });
    }
    let samples = (0..n)
        .map(|i| model.retract(&Point::new(x[4 * i], x[4 * i + 1], x[4 * i + 2], x[4 * i + 3])))
        .collect::<Result<Vec<_>>>()?;
    let closure = (model.reeb_flow(&samples[0], t)? - samples[0]).norm();
    if closure > 1e-8 {
        return Err(LabError::NoConvergence { iterations: 0, residual: closure });
    }
    ReebOrbit::finish(*model, t, samples)
}

/// A loop `cos(2 pi m t) p + sin(2 pi m t) i p` through `p`, retracted onto the model.
pub fn complex_circle(model: &ContactModel, p: &Point, m: usize, n: usize) -> Result<Vec<Point>> {
    let ip = crate::model::complex_structure() * p;
    (0..n)
        .map(|k| {
            let s = 2.0 * std::f64::consts::PI * m as f64 * k as f64 / n as f64;
            let v = p * s.cos() + ip * s.sin();
            model.retract(&v)
        })
        .collect()
}
