use crate::error::{LabError, Result};
use crate::instanton::InstantonState;
use crate::reeb::orbit::ReebOrbit;
use crate::surface::{DomainKind, SurfaceDomain};

/// `w(tau, t) = gamma(-nu tau + k T t)`, `f(tau, t) = k T tau + nu t`, which
/// solves the equation exactly in the continuum with `j d/dtau = d/dt`.
/// `gamma` is evaluated through the model flow, so there is no
/// interpolation error.
pub fn explicit_family(orbit: &ReebOrbit, k: i64, nu: i64, domain: &SurfaceDomain) -> Result<InstantonState> {
    family_with_speed(orbit, k, nu, 1.0, domain)
}

fn family_with_speed(orbit: &ReebOrbit, k: i64, nu: i64, speed: f64, domain: &SurfaceDomain) -> Result<InstantonState> {
    let period = orbit.period;
    let (kf, nuf) = (k as f64, nu as f64);
    if domain.kind() == DomainKind::Torus {
        let span = 2.0 * domain.spec.half_length;
        let w_shift = nuf * speed * span / period;
        let f_shift = kf * period * span;
        if (w_shift - w_shift.round()).abs() > 1e-9 || (f_shift - f_shift.round()).abs() > 1e-9 {
            return Err(LabError::InvalidSpec(format!(
                "family (k={k}, nu={nu}) is not periodic on a torus of tau-period {span}"
            )));
        }
    }
    let model = orbit.model;
    InstantonState::from_fn(domain.clone(), &model, |tau, t| {
        let s = -nuf * speed * tau + kf * period * t;
        let w = orbit.point_at(s).expect("flow from an orbit point");
        (w, kf * period * tau + nuf * t)
    })
}

/// Half-length of the torus on which the uniformly sampled `(0, nu)` family
/// along `gamma` satisfies the discrete equation exactly: centred chords of a
/// uniformly rotated circle shrink by `sin(x)/x`, which the `tau` speed
/// compensates, and the period fixes the step.
pub fn lattice_half_length(period: f64, nu: i64, n_tau: usize) -> f64 {
    let x = 2.0 * std::f64::consts::PI / n_tau as f64;
    period * x.sin() / (x * 2.0 * nu.unsigned_abs() as f64)
}

/// The `(k = 0, nu)` family on a torus whose half-length is
/// [`lattice_half_length`], sampled at the compensated speed. It is an exact
/// zero of the discrete residual for orbits that are uniformly rotated
/// circles.
pub fn lattice_torus_family(orbit: &ReebOrbit, nu: i64, n_tau: usize, n_t: usize) -> Result<InstantonState> {
    if nu == 0 {
        return Err(LabError::InvalidSpec("the lattice family needs nu != 0".into()));
    }
    let half = lattice_half_length(orbit.period, nu, n_tau);
    let domain = SurfaceDomain::torus(half, n_tau, n_t)?;
    let x = 2.0 * std::f64::consts::PI / n_tau as f64;
    family_with_speed(orbit, 0, nu, x / x.sin(), &domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instanton::residual;
    use crate::model::{ContactModel, Point};
    use crate::reeb::orbit::axis_orbits;

    #[test]
    fn trivial_parameters_give_constant_map() {
        let m = ContactModel::round_sphere();
        let [hopf, _] = axis_orbits(&m, 32).unwrap();
        let d = SurfaceDomain::cylinder(5.0, 16, 16).unwrap();
        let u = explicit_family(&hopf, 0, 0, &d).unwrap();
        assert!(u.w.iter().all(|p| *p == Point::new(1.0, 0.0, 0.0, 0.0)));
        assert!(u.f.iter().all(|f| *f == 0.0));
    }

    #[test]
    fn charge_class_is_nu() {
        let m = ContactModel::round_sphere();
        let [hopf, _] = axis_orbits(&m, 32).unwrap();
        let d = SurfaceDomain::cylinder(5.0, 128, 64).unwrap();
        assert_eq!(explicit_family(&hopf, 0, 1, &d).unwrap().charge_class().unwrap(), vec![1]);
        assert_eq!(explicit_family(&hopf, 0, 3, &d).unwrap().charge_class().unwrap(), vec![3]);
    }

    #[test]
    fn residual_matches_chord_factor() {
        // sup residual of the (0, 1) family is 1 - sin(2h)/(2h)
        let m = ContactModel::round_sphere();
        let [hopf, _] = axis_orbits(&m, 32).unwrap();
        let d = SurfaceDomain::cylinder(5.0, 128, 64).unwrap();
        let u = explicit_family(&hopf, 0, 1, &d).unwrap();
        let r = residual(&u, &m).unwrap().norms(&d);
        let h = d.h_tau;
        let expected = 1.0 - (2.0 * h).sin() / (2.0 * h);
        assert!(r.sup_r1 < 1e-12);
        assert!((r.sup_r2 - expected).abs() < 1e-12, "{} vs {expected}", r.sup_r2);
    }

    #[test]
    fn lattice_family_is_a_discrete_zero() {
        for m in [ContactModel::round_sphere(), ContactModel::ellipsoid(1.0, 1.3).unwrap()] {
            let [short, long] = axis_orbits(&m, 32).unwrap();
            for o in [short, long] {
                let u = lattice_torus_family(&o, 1, 64, 64).unwrap();
                let r = residual(&u, &m).unwrap().norms(&u.domain);
                assert!(r.sup <= 1e-12, "{r:?}");
                assert_eq!(u.charge_class().unwrap(), vec![0, 1]);
            }
        }
    }

    #[test]
    fn non_periodic_torus_family_rejected() {
        let m = ContactModel::round_sphere();
        let [hopf, _] = axis_orbits(&m, 32).unwrap();
        let d = SurfaceDomain::torus(1.0, 16, 16).unwrap();
        assert!(matches!(explicit_family(&hopf, 0, 1, &d), Err(LabError::InvalidSpec(_))));
        let ok = SurfaceDomain::torus(std::f64::consts::FRAC_PI_2, 16, 16).unwrap();
        assert!(explicit_family(&hopf, 0, 1, &ok).is_ok());
    }
}
