use serde::Serialize;

use crate::error::{LabError, Result};
use crate::instanton::{dbar_coords, del_coords, norm2, residual_from_pullback, InstantonState, Pullback};
use crate::model::{ContactModel, Point};
use crate::surface::SurfaceDomain;

/// Default bound on the residual sup-norm for [`identities_check`].
pub const ON_SHELL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityReport {
    /// `max | |d^pi w|^2 - |del^pi w|^2 - |dbar^pi w|^2 |`.
    pub split: f64,
    /// `max | 2 w^* d lambda - (|del^pi w|^2 - |dbar^pi w|^2) |` as densities.
    pub area: f64,
    /// `max | w^* lambda ^ w^* lambda o j + |w^* lambda|^2 |` as densities.
    pub lambda_wedge: f64,
    pub residual: f64,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.split.max(self.area).max(self.lambda_wedge)
    }
}

fn oneform_norm2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    norm2(a) + norm2(b)
}

/// Nodal check of the three energy-density identities. Requires the
/// residual sup-norm to be at most `tol`.
pub fn identities_check(u: &InstantonState, model: &ContactModel, tol: f64) -> Result<IdentityReport> {
    let pb = Pullback::new(u, model)?;
    let res = residual_from_pullback(u, &pb)?.norms(&u.domain).sup;
    if !(res <= tol) {
        return Err(LabError::OffShellInput { residual: res, tol });
    }
    let jl = u.domain.compose_j(&pb.lambda_form);
    let dens = pb.dlambda_density();
    let mut rep = IdentityReport { split: 0.0, area: 0.0, lambda_wedge: 0.0, residual: res };
    for k in 0..u.domain.len() {
        let (ct, cs) = (&pb.c_tau[k], &pb.c_t[k]);
        let (bt, bs) = dbar_coords(ct, cs);
        let (dt, ds) = del_coords(ct, cs);
        let full = oneform_norm2(ct, cs);
        let (del, dbar) = (oneform_norm2(&dt, &ds), oneform_norm2(&bt, &bs));
        rep.split = rep.split.max((full - del - dbar).abs());
        rep.area = rep.area.max((2.0 * dens[k] - (del - dbar)).abs());
        let (la, lb) = (pb.lambda_form.a[k], pb.lambda_form.b[k]);
        let wedge = la * jl.b[k] - lb * jl.a[k];
        rep.lambda_wedge = rep.lambda_wedge.max((wedge + la * la + lb * lb).abs());
    }
    Ok(rep)
}

const ORACLE_STEP: f64 = 1e-3;

/// Compares the discrete `|d^pi w|^2` of the sampled map with
/// `|del^pi w|^2 + |dbar^pi w|^2` built from fourth-order pointwise
/// derivatives of the smooth map. Returns the max nodal discrepancy, which
/// is the discretization error of the split.
pub fn identity_one_against_smooth<F>(domain: &SurfaceDomain, model: &ContactModel, map: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Point,
{
    let u = InstantonState::from_fn(domain.clone(), model, |tau, t| (map(tau, t), 0.0))?;
    let pb = Pullback::new(&u, model)?;
    let discrete = pb.dpi_norm2();
    let h = ORACLE_STEP;
    let d4 = |g: &dyn Fn(f64) -> Point, x: f64| -> Point {
        (g(x - 2.0 * h) - g(x - h) * 8.0 + g(x + h) * 8.0 - g(x + 2.0 * h)) / (12.0 * h)
    };
    let mut worst: f64 = 0.0;
    for (k, disc) in discrete.iter().enumerate() {
        let (tau, t) = domain.node_position(k);
        let frame = &pb.frames[k];
        let wt = d4(&|x| map(x, t), tau);
        let ws = d4(&|x| map(tau, x), t);
        let (ct, cs) = (frame.xi_coords(&wt), frame.xi_coords(&ws));
        let (bt, bs) = dbar_coords(&ct, &cs);
        let (dt, ds) = del_coords(&ct, &cs);
        let oracle = oneform_norm2(&dt, &ds) + oneform_norm2(&bt, &bs);
        worst = worst.max((disc - oracle).abs());
    }
    Ok(worst)
}
