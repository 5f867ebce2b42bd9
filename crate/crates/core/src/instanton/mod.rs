//! Maps `u = (w, f)` from a discretized surface into `Q x S^1`, the
//! instanton residual and everything derived from the pulled-back frame.

pub mod charges;
pub mod energy;
pub mod family;
pub mod identities;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::model::{ContactFrame, ContactModel, Point, Vec4};
use crate::surface::{Axis, DiscreteOneForm, SurfaceDomain};

pub use charges::{hicks_charge, EndCharge, EndClass};
pub use energy::{pi_energy, proper_potential_energy, total_energy, vertical_energy, EnergyReport};
pub use family::{explicit_family, lattice_torus_family};
pub use identities::{identities_check, IdentityReport};

/// Nodes further than this from the level set are rejected.
pub const STATE_MANIFOLD_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct InstantonState {
    pub domain: SurfaceDomain,
    pub w: Vec<Point>,
    /// Angles in `[0, 1)`.
    pub f: Vec<f64>,
}

impl InstantonState {
    pub fn new(domain: SurfaceDomain, w: Vec<Point>, f: Vec<f64>, model: &ContactModel) -> Result<Self> {
        let n = domain.len();
        if w.len() != n {
            return Err(LabError::ShapeMismatch { expected: n, got: w.len() });
        }
        if f.len() != n {
            return Err(LabError::ShapeMismatch { expected: n, got: f.len() });
        }
        let state = Self { domain, w, f: f.into_iter().map(|x| x.rem_euclid(1.0)).collect() };
        state.validate(model)?;
        Ok(state)
    }

    pub fn constant(domain: SurfaceDomain, model: &ContactModel, p: Point, theta: f64) -> Result<Self> {
        let n = domain.len();
        Self::new(domain, vec![p; n], vec![theta; n], model)
    }

    pub fn from_fn<F>(domain: SurfaceDomain, model: &ContactModel, map: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> (Point, f64),
    {
        let (w, f): (Vec<Point>, Vec<f64>) = (0..domain.len())
            .map(|k| {
                let (tau, t) = domain.node_position(k);
                map(tau, t)
            })
            .unzip();
        Self::new(domain, w, f, model)
    }

    pub fn validate(&self, model: &ContactModel) -> Result<()> {
        for (node, p) in self.w.iter().enumerate() {
            let residual = model.level_residual(p);
            if !(residual <= STATE_MANIFOLD_TOL) {
                return Err(LabError::ManifoldViolation { node, residual });
            }
        }
        self.f_form().map(|_| ())
    }

    /// `f^* d theta`.
    pub fn f_form(&self) -> Result<DiscreteOneForm> {
        self.domain.d_angle(&self.f)
    }

    pub fn charge_class(&self) -> Result<Vec<i64>> {
        self.domain.cohomology_class(&self.f_form()?)
    }

    /// Largest pairwise extent of the `w`-image (bounding-box diagonal).
    pub fn image_diameter(&self) -> f64 {
        let mut lo = Vec4::repeat(f64::INFINITY);
        let mut hi = Vec4::repeat(f64::NEG_INFINITY);
        for p in &self.w {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }
}

/// Frames and pulled-back derivatives at every node.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub frames: Vec<ContactFrame>,
    pub w_tau: Vec<Point>,
    pub w_t: Vec<Point>,
    /// `xi`-coordinates of `pi dw(d/dtau)` and `pi dw(d/dt)`.
    pub c_tau: Vec<[f64; 2]>,
    pub c_t: Vec<[f64; 2]>,
    /// `w^* lambda`.
    pub lambda_form: DiscreteOneForm,
}

impl Pullback {
    pub fn new(u: &InstantonState, model: &ContactModel) -> Result<Self> {
        let d = &u.domain;
        let frames = u
            .w
            .iter()
            .enumerate()
            .map(|(node, p)| {
                let residual = model.level_residual(p);
                if !(residual <= STATE_MANIFOLD_TOL) {
                    return Err(LabError::ManifoldViolation { node, residual });
                }
                model.frame_unchecked(p)
            })
            .collect::<Result<Vec<_>>>()?;
        let w_tau = d.diff_points(&u.w, Axis::Tau);
        let w_t = d.diff_points(&u.w, Axis::T);
        let c_tau = frames.iter().zip(&w_tau).map(|(f, v)| f.xi_coords(v)).collect();
        let c_t = frames.iter().zip(&w_t).map(|(f, v)| f.xi_coords(v)).collect();
        let lambda_form = DiscreteOneForm {
            a: frames.iter().zip(&w_tau).map(|(f, v)| f.lambda_of(v)).collect(),
            b: frames.iter().zip(&w_t).map(|(f, v)| f.lambda_of(v)).collect(),
        };
        Ok(Self { frames, w_tau, w_t, c_tau, c_t, lambda_form })
    }

    /// `|d^pi w|^2` at each node.
    pub fn dpi_norm2(&self) -> Vec<f64> {
        self.c_tau.iter().zip(&self.c_t).map(|(a, b)| norm2(a) + norm2(b)).collect()
    }

    /// Density of `w^* d lambda` restricted to `xi`.
    pub fn dlambda_density(&self) -> Vec<f64> {
        self.c_tau.iter().zip(&self.c_t).map(|(a, b)| a[0] * b[1] - a[1] * b[0]).collect()
    }
}

pub(crate) fn norm2(c: &[f64; 2]) -> f64 {
    c[0] * c[0] + c[1] * c[1]
}

/// `J` in `xi`-coordinates.
pub(crate) fn j_coords(c: &[f64; 2]) -> [f64; 2] {
    [-c[1], c[0]]
}

/// `d-bar^pi w` evaluated on `d/dtau` and `d/dt`, in `xi`-coordinates.
pub(crate) fn dbar_coords(c_tau: &[f64; 2], c_t: &[f64; 2]) -> ([f64; 2], [f64; 2]) {
    let jt = j_coords(c_t);
    let jtau = j_coords(c_tau);
    (
        [0.5 * (c_tau[0] + jt[0]), 0.5 * (c_tau[1] + jt[1])],
        [0.5 * (c_t[0] - jtau[0]), 0.5 * (c_t[1] - jtau[1])],
    )
}

/// `d^pi w` minus its anti-linear part, in `xi`-coordinates.
pub(crate) fn del_coords(c_tau: &[f64; 2], c_t: &[f64; 2]) -> ([f64; 2], [f64; 2]) {
    let jt = j_coords(c_t);
    let jtau = j_coords(c_tau);
    (
        [0.5 * (c_tau[0] - jt[0]), 0.5 * (c_tau[1] - jt[1])],
        [0.5 * (c_t[0] + jtau[0]), 0.5 * (c_t[1] + jtau[1])],
    )
}

/// The two components of the instanton equation: the anti-linear part of
/// `pi dw` and `w^* lambda o j - f^* d theta`.
#[derive(Debug, Clone)]
pub struct ResidualPair {
    /// `d-bar^pi w (d/dtau)` as ambient vectors in `xi`.
    pub r1_tau: Vec<Vec4>,
    /// `d-bar^pi w (d/dt) = -J d-bar^pi w (d/dtau)`.
    pub r1_t: Vec<Vec4>,
    /// `xi`-coordinates `[tau_1, tau_2, t_1, t_2]`.
    pub r1_coords: Vec<[f64; 4]>,
    pub r2: DiscreteOneForm,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualNorms {
    pub sup_r1: f64,
    pub sup_r2: f64,
    pub sup: f64,
    pub l2_r1: f64,
    pub l2_r2: f64,
}

impl ResidualPair {
    pub fn r1_norm(&self, node: usize) -> f64 {
        self.r1_coords[node].iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn norms(&self, domain: &SurfaceDomain) -> ResidualNorms {
        let w = domain.area_weights();
        let n = self.r1_coords.len();
        let sup_r1 = (0..n).map(|k| self.r1_norm(k)).fold(0.0, f64::max);
        let sup_r2 = self.r2.sup();
        let l2_r1 = (0..n).map(|k| w[k] * self.r1_norm(k).powi(2)).sum::<f64>().sqrt();
        let l2_r2 = (0..n).map(|k| w[k] * (self.r2.a[k].powi(2) + self.r2.b[k].powi(2))).sum::<f64>().sqrt();
        ResidualNorms { sup_r1, sup_r2, sup: sup_r1.max(sup_r2), l2_r1, l2_r2 }
    }

    pub fn sub(&self, o: &ResidualPair) -> ResidualPair {
        ResidualPair {
            r1_tau: self.r1_tau.iter().zip(&o.r1_tau).map(|(a, b)| a - b).collect(),
            r1_t: self.r1_t.iter().zip(&o.r1_t).map(|(a, b)| a - b).collect(),
            r1_coords: self
                .r1_coords
                .iter()
                .zip(&o.r1_coords)
                .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
                .collect(),
            r2: self.r2.sub(&o.r2),
        }
    }

    pub fn scale(&self, s: f64) -> ResidualPair {
        ResidualPair {
            r1_tau: self.r1_tau.iter().map(|a| a * s).collect(),
            r1_t: self.r1_t.iter().map(|a| a * s).collect(),
            r1_coords: self.r1_coords.iter().map(|a| [a[0] * s, a[1] * s, a[2] * s, a[3] * s]).collect(),
            r2: self.r2.scale(s),
        }
    }
}

pub fn residual_from_pullback(u: &InstantonState, pb: &Pullback) -> Result<ResidualPair> {
    let n = u.domain.len();
    let mut r1_tau = Vec::with_capacity(n);
    let mut r1_t = Vec::with_capacity(n);
    let mut r1_coords = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = dbar_coords(&pb.c_tau[k], &pb.c_t[k]);
        let e = &pb.frames[k].xi_basis;
        r1_tau.push(e[0] * a[0] + e[1] * a[1]);
        r1_t.push(e[0] * b[0] + e[1] * b[1]);
        r1_coords.push([a[0], a[1], b[0], b[1]]);
    }
    let r2 = u.domain.compose_j(&pb.lambda_form).sub(&u.f_form()?);
    Ok(ResidualPair { r1_tau, r1_t, r1_coords, r2 })
}

/// The lcs instanton residual `(d-bar^pi w, w^* lambda o j - f^* d theta)`.
pub fn residual(u: &InstantonState, model: &ContactModel) -> Result<ResidualPair> {
    residual_from_pullback(u, &Pullback::new(u, model)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reeb::orbit::axis_orbits;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_map_has_zero_residual() {
        let m = ContactModel::round_sphere();
        let d = SurfaceDomain::cylinder(2.0, 16, 16).unwrap();
        let u = InstantonState::constant(d.clone(), &m, Point::new(0.0, 1.0, 0.0, 0.0), 0.3).unwrap();
        let r = residual(&u, &m).unwrap().norms(&d);
        assert_eq!(r.sup, 0.0);
    }

    #[test]
    fn off_manifold_node_is_reported() {
        let m = ContactModel::round_sphere();
        let d = SurfaceDomain::cylinder(2.0, 8, 8).unwrap();
        let mut w = vec![Point::new(1.0, 0.0, 0.0, 0.0); d.len()];
        w[5] = Point::new(1.1, 0.0, 0.0, 0.0);
        let err = InstantonState::new(d.clone(), w, vec![0.0; d.len()], &m).unwrap_err();
        assert!(matches!(err, LabError::ManifoldViolation { node: 5, .. }));
    }

    #[test]
    fn perturbation_gives_visible_residual() {
        let m = ContactModel::round_sphere();
        let [hopf, _] = axis_orbits(&m, 64).unwrap();
        let d = SurfaceDomain::cylinder(2.0, 32, 32).unwrap();
        let u = explicit_family(&hopf, 0, 1, &d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w: Vec<Point> = u
            .w
            .iter()
            .map(|p| m.retract(&(p + Point::from_fn(|_, _| rng.gen_range(-0.1..0.1)))).unwrap())
            .collect();
        let v = InstantonState::new(d.clone(), w, u.f.clone(), &m).unwrap();
        assert!(residual(&v, &m).unwrap().norms(&d).sup > 1e-3);
    }

    #[test]
    fn r1_lies_in_xi() {
        let m = ContactModel::ellipsoid(1.0, 1.3).unwrap();
        let d = SurfaceDomain::cylinder(1.0, 16, 16).unwrap();
        let u = InstantonState::from_fn(d, &m, |tau, t| {
            let s = 2.0 * std::f64::consts::PI * t;
            (m.retract(&Point::new(0.8 + 0.1 * tau, 0.3 * s.cos(), 0.4 * s.sin(), 0.2)).unwrap(), t)
        })
        .unwrap();
        let pb = Pullback::new(&u, &m).unwrap();
        let r = residual_from_pullback(&u, &pb).unwrap();
        for k in 0..u.w.len() {
            let f = &pb.frames[k];
            assert!(f.lambda_of(&r.r1_tau[k]).abs() <= 1e-10);
            let jt = f.j_xi * r.r1_tau[k];
            assert!((r.r1_t[k] + jt).amax() <= 1e-12);
        }
    }
}
