//! Robbin-Salamon index of paths in `Sp(2)` by crossing forms.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::reeb::path::{Mat2, SymplecticPath};

#[derive(Debug, Clone, Copy)]
pub struct CzOptions {
    pub scan_points: usize,
    pub time_tol: f64,
    pub crossing_tol: f64,
    pub min_margin: f64,
}

impl Default for CzOptions {
    fn default() -> Self {
        Self { scan_points: 4096, time_tol: 1e-10, crossing_tol: 1e-7, min_margin: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Crossing {
    pub time: f64,
    pub signature: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CzReport {
    pub index: i64,
    pub start_signature: i64,
    pub crossings: Vec<Crossing>,
    pub margin: f64,
    pub regularized: bool,
}

fn sigma_min(path: &SymplecticPath, t: f64) -> f64 {
    (path.at(t) - Mat2::identity()).singular_values().min()
}

fn det_shift(path: &SymplecticPath, t: f64) -> f64 {
    (path.at(t) - Mat2::identity()).determinant()
}

fn signature(m: &Mat2, tol: f64) -> Option<i64> {
    let e = SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues;
    let scale = e.amax().max(1.0);
    let mut sig = 0;
    for v in e.iter() {
        if v.abs() <= tol * scale {
            return None;
        }
        sig += if *v > 0.0 { 1 } else { -1 };
    }
    Some(sig)
}

/// Crossing-form signature on `ker(Psi(t) - I)`.
fn crossing_signature(path: &SymplecticPath, t: f64) -> Result<i64> {
    let shifted = path.at(t) - Mat2::identity();
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let s = path.generator(t);
    let scale = svd.singular_values.max().max(1.0);
    let kernel: Vec<usize> = (0..2).filter(|&k| svd.singular_values[k] <= 1e-5 * scale).collect();
    if kernel.is_empty() {
        return Err(LabError::DegenerateCrossing { time: t });
    }
    let mut form = nalgebra::DMatrix::zeros(kernel.len(), kernel.len());
    for (a, &ka) in kernel.iter().enumerate() {
        for (b, &kb) in kernel.iter().enumerate() {
            let va = vt.row(ka).transpose();
            let vb = vt.row(kb).transpose();
            form[(a, b)] = (va.transpose() * s * vb)[(0, 0)];
        }
    }
    let e = SymmetricEigen::new(form).eigenvalues;
    let emax = e.amax().max(1e-300);
    let mut sig = 0;
    for v in e.iter() {
        if v.abs() <= 1e-9 * emax.max(1.0) {
            return Err(LabError::DegenerateCrossing { time: t });
        }
        sig += if *v > 0.0 { 1 } else { -1 };
    }
    Ok(sig)
}

fn golden_min(path: &SymplecticPath, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = sigma_min(path, c);
    let mut fd = sigma_min(path, d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sigma_min(path, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sigma_min(path, d);
        }
    }
    let t = 0.5 * (a + b);
    (t, sigma_min(path, t))
}

fn bisect_det(path: &SymplecticPath, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = det_shift(path, a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = det_shift(path, m);
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Conley-Zehnder index of a path starting at the identity with a
/// nondegenerate endpoint: half the signature of the generator at `t = 0`
/// plus the crossing-form signatures at interior crossings. Crossings are
/// found both as sign changes of `det(Psi - I)` and as near-zero local
/// minima of the smallest singular value of `Psi - I` (elliptic crossings
/// do not change the sign of the determinant).
pub fn conley_zehnder(path: &SymplecticPath, opts: CzOptions) -> Result<CzReport> {
    let margin = path.endpoint_margin();
    if margin < opts.min_margin {
        return Err(LabError::DegenerateEndpoint { margin });
    }
    if (path.at(0.0) - Mat2::identity()).amax() > 1e-8 {
        return Err(LabError::Precondition("path must start at the identity".into()));
    }
    match signature(&path.generator(0.0), 1e-8) {
        Some(sig) => interior(path, sig, margin, false, opts),
        None => {
            let delta = (margin * 0.1).min(1e-3);
            let reg = path.regularized(delta);
            let sig = signature(&reg.generator(0.0), 1e-12).ok_or(LabError::DegenerateCrossing { time: 0.0 })?;
            interior(&reg, sig, margin, true, opts)
        }
    }
}

fn interior(path: &SymplecticPath, start_sig: i64, margin: f64, regularized: bool, opts: CzOptions) -> Result<CzReport> {
    let m = opts.scan_points.max(16);
    let ts: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
    let sig: Vec<f64> = ts.iter().map(|t| sigma_min(path, *t)).collect();
    let det: Vec<f64> = ts.iter().map(|t| det_shift(path, *t)).collect();
    let mut times: Vec<f64> = Vec::new();
    for k in 1..m {
        if sig[k] <= sig[k - 1] && sig[k] <= sig[k + 1] {
            let (t, s) = golden_min(path, ts[k - 1], ts[k + 1], opts.time_tol);
            if s < opts.crossing_tol && t > opts.time_tol * 10.0 && t < 1.0 - opts.time_tol * 10.0 {
                times.push(t);
            }
        }
    }
    for k in 1..m {
        if det[k] != 0.0 && det[k + 1] != 0.0 && (det[k] > 0.0) != (det[k + 1] > 0.0) {
            times.push(bisect_det(path, ts[k], ts[k + 1], opts.time_tol));
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    let mut crossings = Vec::with_capacity(times.len());
    let mut index2 = start_sig;
    for t in times {
        let s = crossing_signature(path, t)?;
        index2 += 2 * s;
        crossings.push(Crossing { time: t, signature: s });
    }
    if index2 % 2 != 0 {
        return Err(LabError::Precondition(format!("crossing count produced a half-integer index {index2}/2")));
    }
    Ok(CzReport { index: index2 / 2, start_signature: start_sig, crossings, margin, regularized })
}

/// Index of a rotation path by `2 pi theta`, by brute-force counting of
/// full turns: `2 floor(theta) + 1` off the integers.
pub fn rotation_index_oracle(theta: f64) -> Option<i64> {
    if (theta - theta.round()).abs() < 1e-9 {
        return None;
    }
    let turns = (1..).take_while(|k| (*k as f64) < theta.abs()).count() as i64;
    Some(theta.signum() as i64 * (2 * turns + 1))
}
