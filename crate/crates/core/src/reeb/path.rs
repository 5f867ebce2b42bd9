use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2};

use crate::error::{LabError, Result};
use crate::model::{ContactModel, Point};
use crate::ode::rk4_linear_step;
use crate::reeb::orbit::ReebOrbit;

pub type Mat2 = Matrix2<f64>;

const DERIVATIVE_STEP: f64 = 1e-6;

type PathFn = Arc<dyn Fn(f64) -> Mat2 + Send + Sync>;

/// The standard complex structure on `R^2`.
pub fn j0() -> Mat2 {
    Mat2::new(0.0, -1.0, 1.0, 0.0)
}

/// The standard symplectic form `omega_0(u, v) = u^T omega0 v` on `R^2`.
pub fn omega0() -> Mat2 {
    Mat2::new(0.0, 1.0, -1.0, 0.0)
}

pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// A path of symplectic `2x2` matrices on `[0, 1]`, kept as samples plus an
/// evaluator for arbitrary times.
#[derive(Clone)]
pub struct SymplecticPath {
    pub times: Vec<f64>,
    pub matrices: Vec<Mat2>,
    eval: PathFn,
}

impl fmt::Debug for SymplecticPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymplecticPath").field("samples", &self.times.len()).field("endpoint", &self.endpoint()).finish()
    }
}

impl SymplecticPath {
    pub fn from_fn<F>(n_samples: usize, f: F) -> Self
    where
        F: Fn(f64) -> Mat2 + Send + Sync + 'static,
    {
        let eval: PathFn = Arc::new(f);
        let times: Vec<f64> = (0..=n_samples).map(|k| k as f64 / n_samples as f64).collect();
        let matrices = times.iter().map(|t| eval(*t)).collect();
        Self { times, matrices, eval }
    }

    /// `t -> rotation by 2 pi theta t`.
    pub fn rotation(theta: f64) -> Self {
        Self::from_fn(256, move |t| rotation(2.0 * std::f64::consts::PI * theta * t))
    }

    pub fn at(&self, t: f64) -> Mat2 {
        (self.eval)(t)
    }

    pub fn endpoint(&self) -> Mat2 {
        self.at(1.0)
    }

    /// Central-difference derivative.
    pub fn derivative(&self, t: f64) -> Mat2 {
        self.derivative_with_step(t, DERIVATIVE_STEP)
    }

    fn derivative_with_step(&self, t: f64, h: f64) -> Mat2 {
        (self.at(t + h) - self.at(t - h)) / (2.0 * h)
    }

    /// The symmetric generator `S` with `Psi' = J0 S Psi`.
    pub fn generator(&self, t: f64) -> Mat2 {
        self.generator_with_step(t, DERIVATIVE_STEP)
    }

    /// Generator from a doubled difference step, for error estimates.
    pub fn generator_coarse(&self, t: f64) -> Mat2 {
        self.generator_with_step(t, 2.0 * DERIVATIVE_STEP)
    }

    fn generator_with_step(&self, t: f64, h: f64) -> Mat2 {
        let psi = self.at(t);
        let inv = psi.try_inverse().unwrap_or_else(Mat2::identity);
        let s = -j0() * self.derivative_with_step(t, h) * inv;
        (s + s.transpose()) * 0.5
    }

    pub fn endpoint_margin(&self) -> f64 {
        (self.endpoint() - Mat2::identity()).singular_values().min()
    }

    pub fn symplectic_defect(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| (m.transpose() * omega0() * m - omega0()).amax())
            .fold(0.0, f64::max)
    }

    /// `|Psi'(0) Psi(0)^-1 - Psi'(1) Psi(1)^-1|`, the loop-class defect of the generator.
    pub fn generator_periodicity_defect(&self) -> f64 {
        (self.generator(0.0) - self.generator(1.0)).amax()
    }

    /// The `k`-fold iterate `t -> Psi(frac(k t)) Psi(1)^floor(k t)`.
    pub fn iterate(&self, k: usize) -> Self {
        let base = self.eval.clone();
        let end = base(1.0);
        Self::from_fn(256 * k.max(1), move |t| {
            let kt = k as f64 * t;
            let mut whole = kt.floor();
            let mut frac = kt - whole;
            if frac < 0.0 {
                frac += 1.0;
                whole -= 1.0;
            }
            let step = if whole < 0.0 { end.try_inverse().unwrap_or_else(Mat2::identity) } else { end };
            let mut m = base(frac);
            for _ in 0..(whole.abs() as usize) {
                m *= step;
            }
            m
        })
    }

    /// `t -> Psi(t) exp(delta J0 t)`.
    pub fn regularized(&self, delta: f64) -> Self {
        let base = self.eval.clone();
        Self::from_fn(self.times.len() - 1, move |t| base(t) * rotation(delta * t))
    }
}

const PATH_STEPS: usize = 1024;

/// The linearized Reeb flow along an orbit restricted to `xi`, written in
/// the model's global symplectic frame of `xi`. Time is rescaled to `[0, 1]`.
pub fn linearized_path(orbit: &ReebOrbit) -> Result<SymplecticPath> {
    let model = orbit.model;
    let z0 = orbit.start();
    let period = orbit.period;
    let jac = move |s: f64| -> Matrix4<f64> {
        let z = model.reeb_flow(&z0, period * s).unwrap_or(z0);
        model.reeb_jacobian(&z) * period
    };
    let h = 1.0 / PATH_STEPS as f64;
    let mut flows = Vec::with_capacity(PATH_STEPS + 1);
    let mut y = Matrix4::identity();
    flows.push(y);
    for i in 0..PATH_STEPS {
        y = rk4_linear_step(jac, i as f64 * h, &y, h);
        flows.push(y);
    }
    let f0 = model.frame_unchecked(&z0)?;
    let b0 = Matrix4x2::from_columns(&f0.xi_basis);
    let flows = Arc::new(flows);
    let coords = move |z: &Point| -> Matrix2x4<f64> {
        match model.frame_unchecked(z) {
            Ok(f) => {
                let row1 = (f.d_lambda * f.xi_basis[1]).transpose();
                let row2 = f.xi_basis[0].transpose() * f.d_lambda;
                Matrix2x4::from_rows(&[row1, row2])
            }
            Err(_) => Matrix2x4::repeat(f64::NAN),
        }
    };
    // Frames must exist along the whole orbit.
    for s in orbit.samples.iter() {
        model.frame_unchecked(s).map_err(|_| LabError::FrameDegeneracy)?;
    }
    let eval = move |t: f64| -> Mat2 {
        let i = ((t * PATH_STEPS as f64).floor().max(0.0) as usize).min(PATH_STEPS - 1);
        let ti = i as f64 * h;
        let sub = 4;
        let dh = (t - ti) / sub as f64;
        let mut y = flows[i];
        for k in 0..sub {
            y = rk4_linear_step(jac, ti + k as f64 * dh, &y, dh);
        }
        let z = model.reeb_flow(&z0, period * t).unwrap_or(z0);
        coords(&z) * y * b0
    };
    Ok(SymplecticPath::from_fn(PATH_STEPS, eval))
}

/// Helper for the model: the path for the closed-form flow, used as an
/// independent check of the integrated one.
pub fn closed_form_path(model: &ContactModel, z0: Point, period: f64) -> Result<SymplecticPath> {
    let m = *model;
    let f0 = m.frame_unchecked(&z0)?;
    let b0 = Matrix4x2::from_columns(&f0.xi_basis);
    Ok(SymplecticPath::from_fn(PATH_STEPS, move |t| {
        let z = m.reeb_flow(&z0, period * t).unwrap_or(z0);
        let dphi = m.flow_jacobian(&z0, period * t).unwrap_or_else(|_| Matrix4::identity());
        let f = m.frame_unchecked(&z).expect("frame along orbit");
        let row1 = (f.d_lambda * f.xi_basis[1]).transpose();
        let row2 = f.xi_basis[0].transpose() * f.d_lambda;
        Matrix2x4::from_rows(&[row1, row2]) * dphi * b0
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reeb::orbit::axis_orbits;

    #[test]
    fn rotation_path_is_symplectic() {
        let p = SymplecticPath::rotation(1.3);
        assert!(p.symplectic_defect() < 1e-12);
        assert!((p.at(0.0) - Mat2::identity()).amax() == 0.0);
        let s = p.generator(0.3);
        assert!((s - Mat2::identity() * 2.0 * std::f64::consts::PI * 1.3).amax() < 1e-6);
    }

    #[test]
    fn iterate_concatenates() {
        let p = SymplecticPath::rotation(0.3).iterate(3);
        assert!((p.endpoint() - rotation(2.0 * std::f64::consts::PI * 0.9)).amax() < 1e-12);
        assert!((p.at(0.5) - rotation(2.0 * std::f64::consts::PI * 0.45)).amax() < 1e-12);
    }

    #[test]
    fn hopf_path_is_degenerate_and_ellipsoid_is_not() {
        let round = ContactModel::round_sphere();
        let [hopf, _] = axis_orbits(&round, 32).unwrap();
        let path = linearized_path(&hopf).unwrap();
        assert!(path.endpoint_margin() < 1e-8);
        assert!(path.symplectic_defect() < 1e-6);
        let ell = ContactModel::ellipsoid(1.0, 1.3).unwrap();
        let [short, long] = axis_orbits(&ell, 32).unwrap();
        for o in [short, long] {
            let path = linearized_path(&o).unwrap();
            assert!(path.endpoint_margin() > 1e-2);
            assert!(path.symplectic_defect() < 1e-6);
            let exact = closed_form_path(&ell, o.start(), o.period).unwrap();
            for t in [0.1, 0.37, 0.5, 0.99, 1.0] {
                assert!((path.at(t) - exact.at(t)).amax() < 1e-9);
            }
        }
    }
}
