use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fourier::derivative_matrix;
use crate::model::{ContactModel, Point};
use crate::reeb::orbit::{complex_circle, find_orbit, hausdorff, OrbitSearchOptions, ReebOrbit};
use crate::reeb::path::{j0, linearized_path, SymplecticPath};

#[derive(Debug, Clone, Serialize)]
pub struct SpectralData {
    /// Sorted eigenvalues of the discretized asymptotic operator.
    pub eigenvalues: Vec<f64>,
    pub gap: f64,
    pub delta: f64,
    pub sobolev_p: f64,
    pub nodes: usize,
    pub truncation_estimate: f64,
    /// Sup over sampled orbit points of `|(T/2)(L_R J) J|`.
    pub lie_term: f64,
    pub generator_periodicity_defect: f64,
}

/// Weight selection `delta = 0.9 min(gap / p, 2 / p)`.
pub fn weight_rule(gap: f64, p: f64) -> f64 {
    0.9 * (gap / p).min(2.0 / p)
}

fn operator_eigenvalues(path: &SymplecticPath, n: usize) -> Vec<f64> {
    let d = derivative_matrix(n, 1.0);
    let j = j0();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for k in 0..n {
            if d[(i, k)] != 0.0 {
                for c in 0..2 {
                    for e in 0..2 {
                        a[(2 * i + c, 2 * k + e)] -= j[(c, e)] * d[(i, k)];
                    }
                }
            }
        }
        let s = path.generator(i as f64 / n as f64);
        for c in 0..2 {
            for e in 0..2 {
                a[(2 * i + c, 2 * i + e)] -= s[(c, e)];
            }
        }
    }
    let sym = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

fn min_abs(ev: &[f64]) -> f64 {
    ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
}

/// Spectrum of `A = -J0 d/dt - S(t)` on loops in `R^2`, where
/// `Psi' = J0 S Psi` is the linearized flow along the orbit in the global
/// frame. Periodic collocation on `n_s` nodes.
pub fn asymptotic_spectrum(orbit: &ReebOrbit, p: f64, n_s: usize) -> Result<SpectralData> {
    if !(p > 2.0) {
        return Err(LabError::InvalidSpec(format!("Sobolev exponent must exceed 2, got {p}")));
    }
    if n_s < 16 {
        return Err(LabError::InvalidSpec(format!("need at least 16 nodes, got {n_s}")));
    }
    let path = linearized_path(orbit)?;
    let eigenvalues = operator_eigenvalues(&path, n_s);
    let coarse = operator_eigenvalues(&path, n_s / 2);
    let gap = min_abs(&eigenvalues);
    let emax = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // the generator is itself differenced, so its step error bounds how well
    // any eigenvalue is resolved
    let generator_error = (0..n_s)
        .map(|i| {
            let t = i as f64 / n_s as f64;
            (path.generator(t) - path.generator_coarse(t)).amax()
        })
        .fold(0.0, f64::max);
    let truncation_estimate =
        (gap - min_abs(&coarse)).abs().max(n_s as f64 * f64::EPSILON * emax).max(generator_error);
    if gap < 10.0 * truncation_estimate {
        return Err(LabError::GapBelowResolution { gap, estimate: truncation_estimate });
    }
    let mut lie_term: f64 = 0.0;
    let step = (orbit.samples.len() / 8).max(1);
    for z in orbit.samples.iter().step_by(step) {
        let l = orbit.model.lie_derivative_j(z)?;
        let f = orbit.model.eval_frame(z)?;
        lie_term = lie_term.max((l * f.j_xi * (0.5 * orbit.period)).amax());
    }
    Ok(SpectralData {
        eigenvalues,
        gap,
        delta: weight_rule(gap, p),
        sobolev_p: p,
        nodes: n_s,
        truncation_estimate,
        lie_term,
        generator_periodicity_defect: path.generator_periodicity_defect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ActionSpectrum {
    pub actions: Vec<f64>,
    /// Minimal action, `+inf` when nothing was found.
    pub t_lambda: f64,
    #[serde(skip)]
    pub orbits: Vec<ReebOrbit>,
}

/// Multi-start orbit search: complex circles of winding `1..=3` through the
/// axis points and `random_seeds` random points, each solved from the
/// period guess `m pi |p|^2`. Orbits above `t_max` are dropped, duplicates
/// merged, and actions closer than `1e-6` identified.
pub fn action_spectrum(model: &ContactModel, t_max: f64, random_seeds: usize, seed: u64) -> Result<ActionSpectrum> {
    if !(t_max > 0.0) {
        return Err(LabError::InvalidSpec(format!("t_max must be positive, got {t_max}")));
    }
    let mut orbits: Vec<ReebOrbit> = Vec::new();
    if model.is_sphere_like() {
        let (a, b) = model.weights();
        let mut starts = vec![Point::new(a.sqrt(), 0.0, 0.0, 0.0), Point::new(0.0, 0.0, b.sqrt(), 0.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random_seeds {
            starts.push(model.random_point(&mut rng));
        }
        for p in &starts {
            for m in 1..=3usize {
                let guess = m as f64 * std::f64::consts::PI * p.norm_squared();
                if guess > 1.5 * t_max {
                    continue;
                }
                let Ok(seed_loop) = complex_circle(model, p, m, 32) else { continue };
                let Ok(orbit) = find_orbit(model, &seed_loop, guess, OrbitSearchOptions::default()) else { continue };
                if orbit.period > t_max {
                    continue;
                }
                let duplicate = orbits
                    .iter()
                    .any(|o| (o.period - orbit.period).abs() < 1e-6 && hausdorff(&o.samples, &orbit.samples) < 1e-4);
                if !duplicate {
                    orbits.push(orbit);
                }
            }
        }
    }
    orbits.sort_by(|x, y| x.period.partial_cmp(&y.period).unwrap());
    let mut actions: Vec<f64> = Vec::new();
    for o in &orbits {
        if actions.last().map_or(true, |a| (o.period - a).abs() > 1e-6) {
            actions.push(o.period);
        }
    }
    let t_lambda = actions.first().copied().unwrap_or(f64::INFINITY);
    Ok(ActionSpectrum { actions, t_lambda, orbits })
}
