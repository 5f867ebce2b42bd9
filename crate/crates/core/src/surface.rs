//! Flat discretized Riemann surfaces, their difference calculus, the
//! rotation `alpha -> alpha o j` and the harmonic decomposition of closed
//! one-forms.
//!
//! Nodes are indexed `(i, j)` with `i` along `tau` and `j` along `t`, stored
//! row-major as `i * n_t_nodes + j`. The complex structure is `j d/dtau = d/dt`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::model::Point;
use crate::sparse::{conjugate_gradient, Csr};

/// Neighbouring angle samples closer than this to half a turn are rejected.
pub const ANGLE_ALIAS_GUARD: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Torus,
    Cylinder,
    Disc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// Cylinder and disc cover `tau in [-L, L]`; the torus has `tau`-period `2L`.
    pub half_length: f64,
    pub n_tau: usize,
    pub n_t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum End {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Tau,
    T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDomain {
    pub spec: DomainSpec,
    pub h_tau: f64,
    pub h_t: f64,
    n_tau_nodes: usize,
    n_t_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScalar {
    pub values: Vec<f64>,
}

/// `a dtau + b dt`, nodal components.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOneForm {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl DiscreteScalar {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl DiscreteOneForm {
    pub fn zeros(n: usize) -> Self {
        Self { a: vec![0.0; n], b: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Largest pointwise Euclidean length.
    pub fn sup(&self) -> f64 {
        self.a.iter().zip(&self.b).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn sub(&self, o: &DiscreteOneForm) -> DiscreteOneForm {
        DiscreteOneForm {
            a: self.a.iter().zip(&o.a).map(|(x, y)| x - y).collect(),
            b: self.b.iter().zip(&o.b).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn add(&self, o: &DiscreteOneForm) -> DiscreteOneForm {
        DiscreteOneForm {
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&o.b).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> DiscreteOneForm {
        DiscreteOneForm { a: self.a.iter().map(|x| x * s).collect(), b: self.b.iter().map(|x| x * s).collect() }
    }
}

/// Output of [`SurfaceDomain::harmonic_decompose`].
#[derive(Debug, Clone)]
pub struct HodgeDecomposition {
    pub beta: DiscreteOneForm,
    pub potential: DiscreteScalar,
    /// Largest of the co-closedness and curl residuals of `beta`.
    pub laplacian_residual: f64,
    pub cg_iterations: usize,
}

pub fn wrap_half(x: f64) -> f64 {
    x - x.round()
}

impl SurfaceDomain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        if spec.n_tau < 8 || spec.n_t < 8 {
            return Err(LabError::InvalidSpec(format!("grid counts must be at least 8, got {}x{}", spec.n_tau, spec.n_t)));
        }
        if !(spec.half_length > 0.0 && spec.half_length.is_finite()) {
            return Err(LabError::InvalidSpec(format!("half length must be positive, got {}", spec.half_length)));
        }
        let h_tau = 2.0 * spec.half_length / spec.n_tau as f64;
        let h_t = 1.0 / spec.n_t as f64;
        let (n_tau_nodes, n_t_nodes) = match spec.kind {
            DomainKind::Torus => (spec.n_tau, spec.n_t),
            DomainKind::Cylinder => (spec.n_tau + 1, spec.n_t),
            DomainKind::Disc => (spec.n_tau + 1, spec.n_t + 1),
        };
        Ok(Self { spec, h_tau, h_t, n_tau_nodes, n_t_nodes })
    }

    pub fn cylinder(half_length: f64, n_tau: usize, n_t: usize) -> Result<Self> {
        Self::new(DomainSpec { kind: DomainKind::Cylinder, half_length, n_tau, n_t })
    }

    pub fn torus(half_length: f64, n_tau: usize, n_t: usize) -> Result<Self> {
        Self::new(DomainSpec { kind: DomainKind::Torus, half_length, n_tau, n_t })
    }

    pub fn disc(half_length: f64, n_tau: usize, n_t: usize) -> Result<Self> {
        Self::new(DomainSpec { kind: DomainKind::Disc, half_length, n_tau, n_t })
    }

    pub fn kind(&self) -> DomainKind {
        self.spec.kind
    }

    pub fn genus(&self) -> usize {
        usize::from(self.spec.kind == DomainKind::Torus)
    }

    pub fn n_tau_nodes(&self) -> usize {
        self.n_tau_nodes
    }

    pub fn n_t_nodes(&self) -> usize {
        self.n_t_nodes
    }

    pub fn len(&self) -> usize {
        self.n_tau_nodes * self.n_t_nodes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_t_nodes + j
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_t_nodes, idx % self.n_t_nodes)
    }

    pub fn tau(&self, i: usize) -> f64 {
        -self.spec.half_length + i as f64 * self.h_tau
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.h_t
    }

    pub fn node_position(&self, idx: usize) -> (f64, f64) {
        let (i, j) = self.coords(idx);
        (self.tau(i), self.t(j))
    }

    pub fn periodic(&self, axis: Axis) -> bool {
        match axis {
            Axis::Tau => self.spec.kind == DomainKind::Torus,
            Axis::T => self.spec.kind != DomainKind::Disc,
        }
    }

    fn axis_len(&self, axis: Axis) -> usize {
        match axis {
            Axis::Tau => self.n_tau_nodes,
            Axis::T => self.n_t_nodes,
        }
    }

    fn spacing(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Tau => self.h_tau,
            Axis::T => self.h_t,
        }
    }

    fn node_along(&self, axis: Axis, fixed: usize, k: usize) -> usize {
        match axis {
            Axis::Tau => self.idx(k, fixed),
            Axis::T => self.idx(fixed, k),
        }
    }

    /// Difference stencil at position `k` along an axis as `(offset, weight)`
    /// pairs with offsets relative to `k` (already divided by the spacing).
    /// Centred in the interior; third-order one-sided at boundary nodes, so
    /// the boundary error stays below the interior one.
    fn stencil(&self, axis: Axis, k: usize) -> [(isize, f64); 4] {
        let m = self.axis_len(axis);
        let h = self.spacing(axis);
        if self.periodic(axis) || (k > 0 && k + 1 < m) {
            [(-1, -0.5 / h), (0, 0.0), (1, 0.5 / h), (0, 0.0)]
        } else {
            let s: isize = if k == 0 { 1 } else { -1 };
            let sf = s as f64 / (6.0 * h);
            [(0, -11.0 * sf), (s, 18.0 * sf), (2 * s, -9.0 * sf), (3 * s, 2.0 * sf)]
        }
    }

    fn shifted(&self, axis: Axis, k: usize, off: isize) -> usize {
        let m = self.axis_len(axis) as isize;
        (k as isize + off).rem_euclid(m) as usize
    }

    /// Second-order derivative of nodal values along an axis.
    pub fn diff(&self, values: &[f64], axis: Axis) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let other = match axis {
            Axis::Tau => self.n_t_nodes,
            Axis::T => self.n_tau_nodes,
        };
        for fixed in 0..other {
            for k in 0..self.axis_len(axis) {
                let mut acc = 0.0;
                for (off, w) in self.stencil(axis, k) {
                    if w != 0.0 {
                        acc += w * values[self.node_along(axis, fixed, self.shifted(axis, k, off))];
                    }
                }
                out[self.node_along(axis, fixed, k)] = acc;
            }
        }
        out
    }

    /// Derivative of ambient point fields, componentwise.
    pub fn diff_points(&self, values: &[Point], axis: Axis) -> Vec<Point> {
        let mut out = vec![Point::zeros(); self.len()];
        for c in 0..4 {
            let comp: Vec<f64> = values.iter().map(|p| p[c]).collect();
            for (o, d) in out.iter_mut().zip(self.diff(&comp, axis)) {
                o[c] = d;
            }
        }
        out
    }

    /// Derivative of an `R/Z`-valued field: the stencil is applied to the
    /// local lift obtained by chaining wrapped increments from the centre.
    pub fn diff_angle(&self, values: &[f64], axis: Axis) -> Result<Vec<f64>> {
        (0..self.len()).map(|idx| self.diff_angle_at(values, axis, idx)).collect()
    }

    /// `(node, offset, weight)` entries of the difference stencil at a node.
    pub(crate) fn stencil_nodes(&self, axis: Axis, idx: usize) -> [(usize, isize, f64); 4] {
        let (i, j) = self.coords(idx);
        let (k, fixed) = match axis {
            Axis::Tau => (i, j),
            Axis::T => (j, i),
        };
        self.stencil(axis, k).map(|(off, w)| (self.node_along(axis, fixed, self.shifted(axis, k, off)), off, w))
    }

    pub(crate) fn diff_at<T>(&self, values: &[T], axis: Axis, idx: usize) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
    {
        let mut acc = values[idx] - values[idx];
        for (node, _, w) in self.stencil_nodes(axis, idx) {
            if w != 0.0 {
                acc = acc + values[node] * w;
            }
        }
        acc
    }

    pub(crate) fn diff_angle_at(&self, values: &[f64], axis: Axis, idx: usize) -> Result<f64> {
        let (i, j) = self.coords(idx);
        let (k, fixed) = match axis {
            Axis::Tau => (i, j),
            Axis::T => (j, i),
        };
        let at = |kk: usize| values[self.node_along(axis, fixed, kk)];
        let centre = values[idx];
        let mut acc = 0.0;
        for (off, w) in self.stencil(axis, k) {
            if w == 0.0 || off == 0 {
                continue;
            }
            // lift relative to the centre node
            let step = off.signum();
            let mut lift = 0.0;
            let mut prev = centre;
            for s in 1..=off.abs() {
                let kk = self.shifted(axis, k, step * s);
                let jump = wrap_half(at(kk) - prev);
                if jump.abs() > ANGLE_ALIAS_GUARD {
                    return Err(LabError::AngleAliasing { node: self.node_along(axis, fixed, kk), jump });
                }
                lift += jump;
                prev = at(kk);
            }
            acc += w * lift;
        }
        Ok(acc)
    }

    pub fn d_scalar(&self, s: &DiscreteScalar) -> DiscreteOneForm {
        DiscreteOneForm { a: self.diff(&s.values, Axis::Tau), b: self.diff(&s.values, Axis::T) }
    }

    /// Differential of an angle-valued map, `f^* d theta`.
    pub fn d_angle(&self, f: &[f64]) -> Result<DiscreteOneForm> {
        Ok(DiscreteOneForm { a: self.diff_angle(f, Axis::Tau)?, b: self.diff_angle(f, Axis::T)? })
    }

    /// Density of `d alpha` against `dtau ^ dt`.
    pub fn d_oneform(&self, alpha: &DiscreteOneForm) -> DiscreteScalar {
        let db = self.diff(&alpha.b, Axis::Tau);
        let da = self.diff(&alpha.a, Axis::T);
        DiscreteScalar::new(db.iter().zip(&da).map(|(x, y)| x - y).collect())
    }

    /// `(a dtau + b dt) o j = b dtau - a dt`.
    pub fn compose_j(&self, alpha: &DiscreteOneForm) -> DiscreteOneForm {
        DiscreteOneForm { a: alpha.b.clone(), b: alpha.a.iter().map(|x| -x).collect() }
    }

    fn axis_weight(&self, axis: Axis, k: usize) -> f64 {
        let h = self.spacing(axis);
        if !self.periodic(axis) && (k == 0 || k + 1 == self.axis_len(axis)) {
            0.5 * h
        } else {
            h
        }
    }

    /// Trapezoid area weights.
    pub fn area_weights(&self) -> Vec<f64> {
        (0..self.len())
            .map(|idx| {
                let (i, j) = self.coords(idx);
                self.axis_weight(Axis::Tau, i) * self.axis_weight(Axis::T, j)
            })
            .collect()
    }

    pub fn integrate(&self, density: &[f64]) -> f64 {
        self.area_weights().iter().zip(density).map(|(w, v)| w * v).sum()
    }

    /// `int alpha(d/dt) dt` over the slice `tau = tau_i`.
    pub fn t_period(&self, alpha: &DiscreteOneForm, i: usize) -> f64 {
        (0..self.n_t_nodes).map(|j| self.axis_weight(Axis::T, j) * alpha.b[self.idx(i, j)]).sum()
    }

    /// `int alpha(d/dtau) dtau` over the slice `t = t_j`.
    pub fn tau_period(&self, alpha: &DiscreteOneForm, j: usize) -> f64 {
        (0..self.n_tau_nodes).map(|i| self.axis_weight(Axis::Tau, i) * alpha.a[self.idx(i, j)]).sum()
    }

    /// `t`-periods over every `tau`-slice.
    pub fn slice_periods(&self, alpha: &DiscreteOneForm) -> Vec<f64> {
        (0..self.n_tau_nodes).map(|i| self.t_period(alpha, i)).collect()
    }

    /// Row index of the outermost slice at an end of the cylinder.
    pub fn end_slice(&self, end: End) -> usize {
        match end {
            End::Negative => 0,
            End::Positive => self.n_tau_nodes - 1,
        }
    }

    /// Periods over the homology generators: `(tau-loop, t-loop)` on the
    /// torus, the `t`-loop on the cylinder, none on the disc.
    pub fn generator_periods(&self, alpha: &DiscreteOneForm) -> Vec<f64> {
        match self.spec.kind {
            DomainKind::Torus => vec![self.tau_period(alpha, 0), self.t_period(alpha, 0)],
            DomainKind::Cylinder => vec![self.t_period(alpha, 0)],
            DomainKind::Disc => Vec::new(),
        }
    }

    pub fn cohomology_class(&self, alpha: &DiscreteOneForm) -> Result<Vec<i64>> {
        self.generator_periods(alpha)
            .into_iter()
            .map(|p| {
                let r = p.round();
                if (p - r).abs() > 0.1 || !p.is_finite() {
                    Err(LabError::NonIntegralPeriod { period: p })
                } else {
                    Ok(r as i64)
                }
            })
            .collect()
    }

    /// The discrete gradient as a `2N x N` matrix, `tau` rows first.
    pub fn gradient_matrix(&self) -> Csr {
        let n = self.len();
        let mut g = Csr::with_cols(n);
        for axis in [Axis::Tau, Axis::T] {
            for idx in 0..n {
                let (i, j) = self.coords(idx);
                let (k, fixed) = match axis {
                    Axis::Tau => (i, j),
                    Axis::T => (j, i),
                };
                let entries: Vec<(usize, f64)> = self
                    .stencil(axis, k)
                    .iter()
                    .filter(|(_, w)| *w != 0.0)
                    .map(|&(off, w)| (self.node_along(axis, fixed, self.shifted(axis, k, off)), w))
                    .collect();
                g.push_row(&entries);
            }
        }
        g
    }

    /// Splits a closed one-form as `alpha = beta + d f` with `f` the
    /// area-weighted least-squares potential (zero mean) and `beta`
    /// discretely co-closed. On the cylinder this is the Neumann problem, so
    /// `beta` carries only the `t`-period.
    pub fn harmonic_decompose(&self, alpha: &DiscreteOneForm, closed_tol: f64) -> Result<HodgeDecomposition> {
        if self.spec.kind == DomainKind::Disc {
            return Err(LabError::InvalidSpec("harmonic decomposition needs a torus or cylinder".into()));
        }
        let n = self.len();
        if alpha.len() != n {
            return Err(LabError::ShapeMismatch { expected: n, got: alpha.len() });
        }
        let curl = self.d_oneform(alpha).sup();
        if curl > closed_tol {
            return Err(LabError::NonClosedInput { curl, tol: closed_tol });
        }
        let grad = self.gradient_matrix();
        let w = self.area_weights();
        let mut wa = Vec::with_capacity(2 * n);
        wa.extend(alpha.a.iter().zip(&w).map(|(x, w)| x * w));
        wa.extend(alpha.b.iter().zip(&w).map(|(x, w)| x * w));
        let mut rhs = vec![0.0; n];
        grad.matvec_transpose(&wa, &mut rhs);
        let normal = |x: &[f64], y: &mut [f64]| {
            let mut gx = vec![0.0; 2 * n];
            grad.matvec(x, &mut gx);
            for (k, v) in gx.iter_mut().enumerate() {
                *v *= w[k % n];
            }
            grad.matvec_transpose(&gx, y);
        };
        let mut f = vec![0.0; n];
        let outcome = conjugate_gradient(normal, &rhs, &mut f, 1e-13, 10 * n)?;
        let total: f64 = w.iter().sum();
        let mean = w.iter().zip(&f).map(|(w, f)| w * f).sum::<f64>() / total;
        f.iter_mut().for_each(|v| *v -= mean);
        let potential = DiscreteScalar::new(f);
        let beta = alpha.sub(&self.d_scalar(&potential));
        let laplacian_residual = self.co_closed_residual(&beta).max(self.d_oneform(&beta).sup());
        Ok(HodgeDecomposition { beta, potential, laplacian_residual, cg_iterations: outcome.iterations })
    }

    /// Sup-norm of the discrete codifferential `D^T W beta / W`.
    pub fn co_closed_residual(&self, beta: &DiscreteOneForm) -> f64 {
        let n = self.len();
        let w = self.area_weights();
        let grad = self.gradient_matrix();
        let mut wb = Vec::with_capacity(2 * n);
        wb.extend(beta.a.iter().zip(&w).map(|(x, w)| x * w));
        wb.extend(beta.b.iter().zip(&w).map(|(x, w)| x * w));
        let mut div = vec![0.0; n];
        grad.matvec_transpose(&wb, &mut div);
        div.iter().zip(&w).fold(0.0, |m, (d, w)| m.max((d / w).abs()))
    }

    pub fn scalar_from_fn<F: Fn(f64, f64) -> f64>(&self, f: F) -> DiscreteScalar {
        DiscreteScalar::new((0..self.len()).map(|k| {
            let (tau, t) = self.node_position(k);
            f(tau, t)
        }).collect())
    }

    pub fn oneform_from_fn<F: Fn(f64, f64) -> (f64, f64)>(&self, f: F) -> DiscreteOneForm {
        let mut out = DiscreteOneForm::zeros(self.len());
        for k in 0..self.len() {
            let (tau, t) = self.node_position(k);
            let (a, b) = f(tau, t);
            out.a[k] = a;
            out.b[k] = b;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bump(tau: f64) -> f64 {
        (-tau * tau).exp()
    }

    #[test]
    fn build_examples() {
        let d = SurfaceDomain::cylinder(5.0, 128, 64).unwrap();
        assert_eq!(d.h_tau, 10.0 / 128.0);
        assert_eq!(d.len(), 129 * 64);
        let t = SurfaceDomain::torus(1.0, 64, 64).unwrap();
        assert_eq!(t.genus(), 1);
        assert_eq!(t.generator_periods(&DiscreteOneForm::zeros(t.len())).len(), 2);
        assert!(matches!(SurfaceDomain::cylinder(5.0, 4, 64), Err(LabError::InvalidSpec(_))));
        assert!(SurfaceDomain::cylinder(0.0, 16, 16).is_err());
    }

    #[test]
    fn gradient_of_coordinates() {
        let d = SurfaceDomain::cylinder(2.0, 16, 16).unwrap();
        let g = d.d_scalar(&d.scalar_from_fn(|tau, _| tau));
        assert!(g.a.iter().all(|v| (v - 1.0).abs() < 1e-13));
        assert!(g.b.iter().all(|v| v.abs() < 1e-13));
        let dt = d.oneform_from_fn(|_, _| (0.0, 1.0));
        assert!(d.d_oneform(&dt).sup() <= 1e-12);
    }

    #[test]
    fn d_squared_vanishes() {
        for kind in [DomainKind::Cylinder, DomainKind::Torus, DomainKind::Disc] {
            let d = SurfaceDomain::new(DomainSpec { kind, half_length: 1.0, n_tau: 32, n_t: 24 }).unwrap();
            let s = d.scalar_from_fn(|tau, t| (2.0 * PI * t).sin() * (1.0 + tau * tau) + tau.cos());
            assert!(d.d_oneform(&d.d_scalar(&s)).sup() <= 1e-11);
        }
    }

    #[test]
    fn derivative_is_second_order() {
        let errs: Vec<f64> = [16usize, 32, 64]
            .iter()
            .map(|&n| {
                let d = SurfaceDomain::cylinder(1.0, n, n).unwrap();
                let s = d.scalar_from_fn(|tau, t| (2.0 * PI * t).sin() * tau.exp());
                let g = d.d_scalar(&s);
                (0..d.len())
                    .map(|k| {
                        let (tau, t) = d.node_position(k);
                        let ea = (2.0 * PI * t).sin() * tau.exp();
                        let eb = 2.0 * PI * (2.0 * PI * t).cos() * tau.exp();
                        (g.a[k] - ea).abs().max((g.b[k] - eb).abs())
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
        }
    }

    #[test]
    fn compose_j_convention() {
        let d = SurfaceDomain::torus(1.0, 8, 8).unwrap();
        let dtau = d.oneform_from_fn(|_, _| (1.0, 0.0));
        let r = d.compose_j(&dtau);
        assert!(r.a.iter().all(|v| *v == 0.0) && r.b.iter().all(|v| *v == -1.0));
        let dt = d.oneform_from_fn(|_, _| (0.0, 1.0));
        let r = d.compose_j(&dt);
        assert!(r.a.iter().all(|v| *v == 1.0) && r.b.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn angle_derivative_handles_wrap() {
        let d = SurfaceDomain::cylinder(1.0, 16, 16).unwrap();
        let f: Vec<f64> = (0..d.len()).map(|k| (d.node_position(k).1 * 3.0).rem_euclid(1.0)).collect();
        let df = d.d_angle(&f).unwrap();
        assert!(df.b.iter().all(|v| (v - 3.0).abs() < 1e-12));
        assert_eq!(d.cohomology_class(&df).unwrap(), vec![3]);
        let aliased: Vec<f64> = (0..d.len()).map(|k| (d.node_position(k).1 * 8.0).rem_euclid(1.0)).collect();
        assert!(matches!(d.d_angle(&aliased), Err(LabError::AngleAliasing { .. })));
    }

    #[test]
    fn cohomology_examples() {
        let d = SurfaceDomain::cylinder(5.0, 32, 16).unwrap();
        assert_eq!(d.cohomology_class(&d.oneform_from_fn(|_, _| (0.0, 1.0))).unwrap(), vec![1]);
        assert_eq!(d.cohomology_class(&DiscreteOneForm::zeros(d.len())).unwrap(), vec![0]);
        assert!(matches!(d.cohomology_class(&d.oneform_from_fn(|_, _| (0.0, 0.5))), Err(LabError::NonIntegralPeriod { .. })));
    }

    #[test]
    fn decomposition_of_exact_plus_harmonic() {
        let d = SurfaceDomain::cylinder(5.0, 64, 32).unwrap();
        let bump_s = d.scalar_from_fn(|tau, t| bump(tau) * (1.0 + 0.3 * (2.0 * PI * t).cos()));
        let alpha = d.oneform_from_fn(|_, _| (0.0, 1.0)).add(&d.d_scalar(&bump_s));
        let h = d.harmonic_decompose(&alpha, 1e-6).unwrap();
        assert!(h.beta.a.iter().all(|v| v.abs() < 1e-6));
        assert!(h.beta.b.iter().all(|v| (v - 1.0).abs() < 1e-6));
        assert!(h.laplacian_residual <= 1e-8, "{}", h.laplacian_residual);
        let mean = d.integrate(&bump_s.values) / d.integrate(&vec![1.0; d.len()]);
        let err = h.potential.values.iter().zip(&bump_s.values).fold(0.0f64, |m, (f, b)| m.max((f - (b - mean)).abs()));
        assert!(err < 1e-6, "{err}");
        assert_eq!(d.cohomology_class(&alpha).unwrap(), d.cohomology_class(&h.beta).unwrap());
    }

    #[test]
    fn constant_forms_are_harmonic_on_torus() {
        let d = SurfaceDomain::torus(1.0, 32, 32).unwrap();
        let alpha = d.oneform_from_fn(|_, _| (3.0, -2.0));
        let h = d.harmonic_decompose(&alpha, 1e-6).unwrap();
        assert_eq!(h.beta, alpha);
        assert!(h.potential.sup() == 0.0);
        let dt = SurfaceDomain::cylinder(2.0, 16, 16).unwrap();
        let h = dt.harmonic_decompose(&dt.oneform_from_fn(|_, _| (0.0, 1.0)), 1e-6).unwrap();
        assert!(h.potential.sup() < 1e-12);
    }

    #[test]
    fn non_closed_input_is_rejected() {
        let d = SurfaceDomain::cylinder(1.0, 16, 16).unwrap();
        let alpha = d.oneform_from_fn(|tau, _| (0.0, tau));
        assert!(matches!(d.harmonic_decompose(&alpha, 1e-6), Err(LabError::NonClosedInput { .. })));
    }

    #[test]
    fn slice_periods_agree_for_closed_forms() {
        let d = SurfaceDomain::cylinder(3.0, 48, 32).unwrap();
        let s = d.scalar_from_fn(|tau, t| tau.sin() * (2.0 * PI * t).cos());
        let alpha = d.oneform_from_fn(|_, _| (0.0, 2.0)).add(&d.d_scalar(&s));
        let p = d.slice_periods(&alpha);
        assert!(p.iter().all(|v| (v - p[0]).abs() <= 1e-8));
    }
}
