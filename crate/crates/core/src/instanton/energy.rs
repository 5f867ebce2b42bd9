use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::instanton::charges::{hicks_charge, EndCharge};
use crate::instanton::{InstantonState, Pullback};
use crate::model::ContactModel;
use crate::surface::{DiscreteScalar, DomainKind, End};

/// `E^pi = 1/2 int |d^pi w|^2 dA` (trapezoid quadrature).
pub fn pi_energy(u: &InstantonState, model: &ContactModel) -> Result<f64> {
    Ok(pi_energy_from(u, &Pullback::new(u, model)?))
}

pub(crate) fn pi_energy_from(u: &InstantonState, pb: &Pullback) -> f64 {
    0.5 * u.domain.integrate(&pb.dpi_norm2())
}

/// `int w^* d lambda`, the on-shell value of the pi-energy.
pub fn dlambda_integral(u: &InstantonState, model: &ContactModel) -> Result<f64> {
    let pb = Pullback::new(u, model)?;
    Ok(u.domain.integrate(&pb.dlambda_density()))
}

fn bump_normalizer() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| {
        // the integrand is flat at both ends, so the trapezoid rule converges fast
        let n = 20_000;
        let h = 2.0 / n as f64;
        (1..n).map(|k| raw_bump(-1.0 + k as f64 * h)).sum::<f64>() * h
    })
}

fn raw_bump(r: f64) -> f64 {
    if r.abs() >= 1.0 { 0.0 } else { (-1.0 / (1.0 - r * r)).exp() }
}

/// Unit-mass bump supported in `[-1, 1]`.
pub fn unit_bump(r: f64) -> f64 {
    raw_bump(r) / bump_normalizer()
}

/// `s^-1 phi_0((r - c) / s)`.
pub fn scaled_bump(r: f64, centre: f64, scale: f64) -> f64 {
    unit_bump((r - centre) / scale) / scale
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerticalEnergy {
    pub value: f64,
    pub centre: f64,
    pub scale: f64,
    /// Smallest integral over the tested bumps.
    pub min_sample: f64,
}

/// Sup over a finite family of unit-mass bumps of
/// `int phi(f~) d f~ ^ w^* lambda`. Centres: 64 points across the range of
/// `f~` padded by one bump width; widths: range/4, range/8, range/16.
pub fn vertical_energy(u: &InstantonState, model: &ContactModel, potential: &DiscreteScalar) -> Result<VerticalEnergy> {
    let pb = Pullback::new(u, model)?;
    Ok(vertical_energy_from(u, &pb, potential))
}

pub(crate) fn vertical_energy_from(u: &InstantonState, pb: &Pullback, potential: &DiscreteScalar) -> VerticalEnergy {
    let d = &u.domain;
    let lo = potential.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = potential.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let zero = VerticalEnergy { value: 0.0, centre: lo, scale: 0.0, min_sample: 0.0 };
    if !(range > 1e-12) {
        return zero;
    }
    let df = d.d_scalar(potential);
    let lam = &pb.lambda_form;
    let wedge: Vec<f64> = (0..d.len()).map(|k| df.a[k] * lam.b[k] - df.b[k] * lam.a[k]).collect();
    let weights = d.area_weights();
    let mut best = VerticalEnergy { value: f64::NEG_INFINITY, centre: lo, scale: 0.0, min_sample: f64::INFINITY };
    for div in [4.0, 8.0, 16.0] {
        let s = range / div;
        for c in 0..64 {
            let centre = lo - s + (range + 2.0 * s) * c as f64 / 63.0;
            let val: f64 = (0..d.len()).map(|k| weights[k] * scaled_bump(potential.values[k], centre, s) * wedge[k]).sum();
            best.min_sample = best.min_sample.min(val);
            if val > best.value {
                best.value = val;
                best.centre = centre;
                best.scale = s;
            }
        }
    }
    best.value = best.value.max(0.0);
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub e_pi: f64,
    pub e_vert: f64,
    pub e_total: f64,
    pub dlambda_integral: f64,
    pub charge_class: Vec<i64>,
    pub end_charges: Vec<EndCharge>,
}

/// Assembles pi-energy, vertical energy (after the harmonic decomposition of
/// `f^* d theta`), the charge class and, on cylinders, both end charges.
pub fn total_energy(u: &InstantonState, model: &ContactModel) -> Result<EnergyReport> {
    let pb = Pullback::new(u, model)?;
    let e_pi = pi_energy_from(u, &pb);
    let form = u.f_form()?;
    let charge_class = u.domain.cohomology_class(&form)?;
    let e_vert = match u.domain.kind() {
        DomainKind::Disc => 0.0,
        _ => {
            let h = u.domain.harmonic_decompose(&form, 1e-6)?;
            vertical_energy_from(u, &pb, &h.potential).value
        }
    };
    let end_charges = if u.domain.kind() == DomainKind::Cylinder {
        vec![hicks_charge(u, model, End::Negative)?, hicks_charge(u, model, End::Positive)?]
    } else {
        Vec::new()
    };
    Ok(EnergyReport {
        e_pi,
        e_vert,
        e_total: e_pi + e_vert,
        dlambda_integral: u.domain.integrate(&pb.dlambda_density()),
        charge_class,
        end_charges,
    })
}

/// Energies of a proper-potential instanton from its end actions:
/// `(sum A+ - sum A-, sum A+, 2 sum A+ - sum A-)`.
pub fn proper_potential_energy(plus: &[f64], minus: &[f64]) -> Result<(f64, f64, f64)> {
    for &a in plus.iter().chain(minus) {
        if !(a > 0.0) {
            return Err(LabError::NonPositiveAction(a));
        }
    }
    let sp: f64 = plus.iter().sum();
    let sm: f64 = minus.iter().sum();
    Ok((sp - sm, sp, 2.0 * sp - sm))
}
