use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fourier::differentiate;
use crate::instanton::{InstantonState, Pullback};
use crate::model::ContactModel;
use crate::surface::{DomainKind, End};

/// Charges below this are treated as zero when classifying an end.
pub const CHARGE_ZERO_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndClass {
    Removable,
    /// `T = 0` but `Q != 0`: a pure charge end.
    ChargeOnly,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EndCharge {
    pub end: End,
    /// `int (w^* lambda o j)(d/dt) dt` on the outermost slice, read through
    /// the equation as the `t`-period of `f^* d theta`.
    pub q: f64,
    /// `int (w^* lambda)(d/dt) dt` on the outermost slice.
    pub t: f64,
    /// The same charge computed directly from `w`, `-int lambda(w_tau) dt`.
    pub q_from_w: f64,
    /// `q` with the opposite orientation sign, kept so convention drift shows.
    pub q_opposite_sign: f64,
    pub class: EndClass,
}

fn classify(end: End, q: f64, t: f64) -> EndClass {
    let q0 = q.abs() <= CHARGE_ZERO_TOL;
    let t0 = t.abs() <= CHARGE_ZERO_TOL;
    match (q0, t0) {
        (true, true) => EndClass::Removable,
        (false, true) => EndClass::ChargeOnly,
        _ => {
            let side = match end {
                End::Positive => 1.0,
                End::Negative => -1.0,
            };
            if t * side > 0.0 { EndClass::Positive } else { EndClass::Negative }
        }
    }
}

/// Asymptotic charge pair `(Q, T)` at one end of a cylinder, read off the
/// outermost slice. `t`-derivatives along the slice are spectral.
pub fn hicks_charge(u: &InstantonState, model: &ContactModel, end: End) -> Result<EndCharge> {
    let d = &u.domain;
    if d.kind() != DomainKind::Cylinder {
        return Err(LabError::InvalidSpec("charges are defined on cylinder ends".into()));
    }
    let i = d.end_slice(end);
    let nt = d.n_t_nodes();
    let slice: Vec<usize> = (0..nt).map(|j| d.idx(i, j)).collect();
    let mut w_t = vec![crate::model::Point::zeros(); nt];
    for c in 0..4 {
        let comp: Vec<f64> = slice.iter().map(|&k| u.w[k][c]).collect();
        for (v, x) in w_t.iter_mut().zip(differentiate(&comp, 1.0)) {
            v[c] = x;
        }
    }
    let h = 1.0 / nt as f64;
    let mut t = 0.0;
    for (j, &k) in slice.iter().enumerate() {
        let p = &u.w[k];
        let lam = model.lambda(p);
        t += h * lam.dot(&w_t[j]);
    }
    let pb = Pullback::new(u, model)?;
    let q_from_w = -slice.iter().map(|&k| h * pb.lambda_form.a[k]).sum::<f64>();
    let q = d.t_period(&u.f_form()?, i);
    Ok(EndCharge { end, q, t, q_from_w, q_opposite_sign: -q, class: classify(end, q, t) })
}

/// `Q` on every `tau`-slice, from `w` directly. On-shell these agree up to
/// the residual, which is how slice independence is checked.
pub fn slice_charges(u: &InstantonState, model: &ContactModel) -> Result<Vec<f64>> {
    let pb = Pullback::new(u, model)?;
    let jl = u.domain.compose_j(&pb.lambda_form);
    Ok(u.domain.slice_periods(&jl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instanton::explicit_family;
    use crate::model::Point;
    use crate::reeb::orbit::axis_orbits;
    use crate::surface::SurfaceDomain;
    use std::f64::consts::PI;

    #[test]
    fn spiral_family_charges() {
        let m = ContactModel::round_sphere();
        let [hopf, _] = axis_orbits(&m, 32).unwrap();
        let d = SurfaceDomain::cylinder(5.0, 128, 64).unwrap();
        let u = explicit_family(&hopf, 0, 1, &d).unwrap();
        for end in [End::Negative, End::Positive] {
            let c = hicks_charge(&u, &m, end).unwrap();
            assert!((c.q - 1.0).abs() <= 1e-6 && c.t.abs() <= 1e-6, "{c:?}");
            assert_eq!(c.class, EndClass::ChargeOnly);
            assert_eq!(c.q_opposite_sign, -c.q);
            // the direct read carries the one-sided stencil error
            assert!((c.q_from_w - 1.0).abs() <= 1e-2);
        }
        // interior slices are second order and agree with the charge
        let qs = slice_charges(&u, &m).unwrap();
        let h = d.h_tau;
        let chord = (2.0 * h).sin() / (2.0 * h);
        for q in &qs[1..qs.len() - 1] {
            assert!((q - chord).abs() <= 1e-12);
        }
    }

    #[test]
    fn orbit_cylinder_charges() {
        let m = ContactModel::round_sphere();
        let [hopf, _] = axis_orbits(&m, 32).unwrap();
        let d = SurfaceDomain::cylinder(2.0, 64, 64).unwrap();
        let u = explicit_family(&hopf, 1, 0, &d).unwrap();
        let minus = hicks_charge(&u, &m, End::Negative).unwrap();
        let plus = hicks_charge(&u, &m, End::Positive).unwrap();
        for c in [minus, plus] {
            assert!(c.q.abs() <= 1e-6 && (c.t - PI).abs() <= 1e-6, "{c:?}");
        }
        assert_eq!(plus.class, EndClass::Positive);
        assert_eq!(minus.class, EndClass::Negative);
    }

    #[test]
    fn constant_map_is_removable() {
        let m = ContactModel::round_sphere();
        let d = SurfaceDomain::cylinder(2.0, 16, 16).unwrap();
        let u = InstantonState::constant(d, &m, Point::new(0.0, 0.0, 1.0, 0.0), 0.7).unwrap();
        let c = hicks_charge(&u, &m, End::Positive).unwrap();
        assert_eq!((c.q, c.t, c.class), (0.0, 0.0, EndClass::Removable));
    }

    #[test]
    fn torus_has_no_ends() {
        let m = ContactModel::round_sphere();
        let d = SurfaceDomain::torus(1.0, 8, 8).unwrap();
        let u = InstantonState::constant(d, &m, Point::new(1.0, 0.0, 0.0, 0.0), 0.0).unwrap();
        assert!(hicks_charge(&u, &m, End::Positive).is_err());
    }
}
