//! Analytic model contact manifolds, their contact frames, Reeb flows and the
//! Banyaga lcs form on `Q x S^1`.
//!
//! Every model is realised as a level set in `R^4` so points, tangent vectors
//! and covectors share one fixed-size representation:
//!
//! * `round-s3` / `ellipsoid-s3`: `|z1|^2/a + |z2|^2/b = 1` in `C^2`, coordinates
//!   `(x1, y1, x2, y2)`, with `lambda = 1/2 sum (x dy - y dx)`.
//! * `standard-r3`: the hyperplane `x4 = 0`, coordinates `(x, y, z, 0)`, with
//!   `lambda = dz - y dx`.

use nalgebra::{Matrix2, Matrix4, Matrix5, SymmetricEigen, Vector4, Vector5};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::ode::{integrate_adaptive, AdaptiveOptions};

pub type Point = Vector4<f64>;
pub type Vec4 = Vector4<f64>;
pub type Mat4 = Matrix4<f64>;

/// Default membership tolerance for points handed to frame evaluation.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;
/// Trust region of the retraction.
pub const RETRACT_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelKind {
    RoundS3,
    EllipsoidS3 { a: f64, b: f64 },
    StandardR3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactModel {
    kind: ModelKind,
    weights: (f64, f64),
}

/// Contact data at one point. All linear maps act on ambient vectors and are
/// meant to be applied to tangent vectors of `Q`.
#[derive(Debug, Clone)]
pub struct ContactFrame {
    pub point: Point,
    /// Ambient covector of the contact form.
    pub lambda: Vec4,
    pub reeb: Vec4,
    /// `d lambda(v, w) = v^T d_lambda w`.
    pub d_lambda: Mat4,
    pub j_xi: Mat4,
    /// `v -> v - lambda(v) R`.
    pub proj_xi: Mat4,
    /// `J`-complex symplectic basis of `xi`: `d lambda(e1, e2) = 1`, `J e1 = e2`.
    pub xi_basis: [Vec4; 2],
    /// Euclidean orthonormal basis of `T_p Q`.
    pub tangent_basis: [Vec4; 3],
    pub normal: Vec4,
}

/// Worst violations of the frame axioms at a point.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct FrameAxioms {
    pub lambda_reeb: f64,
    pub reeb_d_lambda: f64,
    pub j_squared: f64,
    pub proj_idempotent: f64,
    pub metric_asymmetry: f64,
    pub metric_min_eigenvalue: f64,
    pub product_j_theta: f64,
}

impl FrameAxioms {
    pub fn merge(self, o: FrameAxioms) -> FrameAxioms {
        FrameAxioms {
            lambda_reeb: self.lambda_reeb.max(o.lambda_reeb),
            reeb_d_lambda: self.reeb_d_lambda.max(o.reeb_d_lambda),
            j_squared: self.j_squared.max(o.j_squared),
            proj_idempotent: self.proj_idempotent.max(o.proj_idempotent),
            metric_asymmetry: self.metric_asymmetry.max(o.metric_asymmetry),
            metric_min_eigenvalue: self.metric_min_eigenvalue.min(o.metric_min_eigenvalue),
            product_j_theta: self.product_j_theta.max(o.product_j_theta),
        }
    }
}

/// A point of the lcs-fication `Q x S^1`; `theta` is kept in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcsPoint {
    pub q: Point,
    pub theta: f64,
}

impl LcsPoint {
    pub fn new(q: Point, theta: f64) -> Self {
        Self { q, theta: theta.rem_euclid(1.0) }
    }
}

/// Multiplication by `i` on `C^2 = R^4`.
pub fn complex_structure() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 1)] = -1.0;
    m[(1, 0)] = 1.0;
    m[(2, 3)] = -1.0;
    m[(3, 2)] = 1.0;
    m
}

/// Left multiplication by the quaternion `j` on `H = C^2`: `(z1, z2) -> (-conj z2, conj z1)`.
fn quaternion_j() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 2)] = -1.0;
    m[(1, 3)] = 1.0;
    m[(2, 0)] = 1.0;
    m[(3, 1)] = -1.0;
    m
}

fn rotation_block(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

impl ContactModel {
    pub fn new(kind: ModelKind) -> Result<Self> {
        let weights = match kind {
            ModelKind::RoundS3 => (1.0, 1.0),
            ModelKind::EllipsoidS3 { a, b } => {
                if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(LabError::InvalidSpec(format!("ellipsoid weights must be positive, got a={a}, b={b}")));
                }
                (a, b)
            }
            ModelKind::StandardR3 => (1.0, 1.0),
        };
        Ok(Self { kind, weights })
    }

    pub fn round_sphere() -> Self {
        Self { kind: ModelKind::RoundS3, weights: (1.0, 1.0) }
    }

    pub fn ellipsoid(a: f64, b: f64) -> Result<Self> {
        Self::new(ModelKind::EllipsoidS3 { a, b })
    }

    pub fn standard_r3() -> Self {
        Self { kind: ModelKind::StandardR3, weights: (1.0, 1.0) }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn is_sphere_like(&self) -> bool {
        !matches!(self.kind, ModelKind::StandardR3)
    }

    /// Ellipsoid weights `(a, b)`; `(1, 1)` for the round sphere.
    pub fn weights(&self) -> (f64, f64) {
        self.weights
    }

    pub fn ambient_dim(&self) -> usize {
        if self.is_sphere_like() { 4 } else { 3 }
    }

    pub fn contact_dim(&self) -> usize {
        3
    }

    /// `n` with `dim Q = 2n - 1`.
    pub fn half_dim(&self) -> usize {
        2
    }

    pub fn name(&self) -> String {
        match self.kind {
            ModelKind::RoundS3 => "round-s3".into(),
            ModelKind::EllipsoidS3 { a, b } => format!("ellipsoid-s3({a},{b})"),
            ModelKind::StandardR3 => "standard-r3".into(),
        }
    }

    fn level(&self, p: &Point) -> f64 {
        let (a, b) = self.weights;
        if self.is_sphere_like() {
            (p[0] * p[0] + p[1] * p[1]) / a + (p[2] * p[2] + p[3] * p[3]) / b
        } else {
            p[3]
        }
    }

    pub fn level_residual(&self, p: &Point) -> f64 {
        if self.is_sphere_like() { (self.level(p) - 1.0).abs() } else { p[3].abs() }
    }

    /// Half the gradient of the level function (a normal vector of `Q`).
    pub fn normal(&self, p: &Point) -> Vec4 {
        let (a, b) = self.weights;
        if self.is_sphere_like() {
            Vec4::new(p[0] / a, p[1] / a, p[2] / b, p[3] / b)
        } else {
            Vec4::new(0.0, 0.0, 0.0, 1.0)
        }
    }

    pub fn lambda(&self, p: &Point) -> Vec4 {
        if self.is_sphere_like() {
            complex_structure() * p * 0.5
        } else {
            Vec4::new(-p[1], 0.0, 1.0, 0.0)
        }
    }

    /// `d lambda` is constant in ambient coordinates for every model.
    pub fn d_lambda(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        m[(0, 1)] = 1.0;
        m[(1, 0)] = -1.0;
        if self.is_sphere_like() {
            m[(2, 3)] = 1.0;
            m[(3, 2)] = -1.0;
        }
        m
    }

    pub fn reeb(&self, p: &Point) -> Vec4 {
        if self.is_sphere_like() {
            complex_structure() * self.normal(p) * 2.0
        } else {
            Vec4::new(0.0, 0.0, 1.0, 0.0)
        }
    }

    /// Ambient derivative of the Reeb field.
    pub fn reeb_jacobian(&self, _p: &Point) -> Mat4 {
        if self.is_sphere_like() {
            let (a, b) = self.weights;
            let n = Mat4::from_diagonal(&Vec4::new(1.0 / a, 1.0 / a, 1.0 / b, 1.0 / b));
            complex_structure() * n * 2.0
        } else {
            Mat4::zeros()
        }
    }

    fn check_on(&self, p: &Point) -> Result<()> {
        let residual = self.level_residual(p);
        if residual > ON_MANIFOLD_TOL || !residual.is_finite() {
            return Err(LabError::PointOffManifold { residual, tol: ON_MANIFOLD_TOL });
        }
        Ok(())
    }

    /// A basis `(u1, u2)` of `xi` with `J u1 = u2`, not yet normalised.
    fn xi_pair(&self, p: &Point) -> Result<(Vec4, Vec4)> {
        if !self.is_sphere_like() {
            return Ok((Vec4::new(1.0, 0.0, p[1], 0.0), Vec4::new(0.0, 1.0, 0.0, 0.0)));
        }
        // xi is the Euclidean complement of {n, i p}; project the quaternionic
        // directions j n and k n into it. The projection never degenerates
        // because <i p, i n> = H(p) = 1.
        let n = self.normal(p);
        let ip = complex_structure() * p;
        let m = ip / ip.norm();
        let jn = quaternion_j() * n;
        let kn = complex_structure() * jn;
        let mut e1 = jn - m * m.dot(&jn);
        let l1 = e1.norm();
        if l1 < 1e-12 {
            return Err(LabError::FrameDegeneracy);
        }
        e1 /= l1;
        let mut e2 = kn - m * m.dot(&kn) - e1 * e1.dot(&kn);
        let l2 = e2.norm();
        if l2 < 1e-12 {
            return Err(LabError::FrameDegeneracy);
        }
        e2 /= l2;
        // J rotates xi by a quarter turn in the orientation of d lambda.
        if e1.dot(&(self.d_lambda() * e2)) < 0.0 {
            e2 = -e2;
        }
        Ok((e1, e2))
    }

    pub fn eval_frame(&self, p: &Point) -> Result<ContactFrame> {
        self.check_on(p)?;
        Ok(self.frame_unchecked(p)?)
    }

    /// Frame evaluation without the membership test, for points already
    /// produced by retraction or the flow.
    pub(crate) fn frame_unchecked(&self, p: &Point) -> Result<ContactFrame> {
        let lambda = self.lambda(p);
        let reeb = self.reeb(p);
        let d_lambda = self.d_lambda();
        let (u1, u2) = self.xi_pair(p)?;
        let s = u1.dot(&(d_lambda * u2));
        if s <= 1e-14 {
            return Err(LabError::FrameDegeneracy);
        }
        let e1 = u1 / s.sqrt();
        let e2 = u2 / s.sqrt();
        let proj_xi = Mat4::identity() - reeb * lambda.transpose();
        // coordinates on xi: c1 = d lambda(v, e2), c2 = d lambda(e1, v)
        let row1 = (d_lambda * e2).transpose();
        let row2 = e1.transpose() * d_lambda;
        let j_xi = (e2 * row1 - e1 * row2) * proj_xi;
        let normal = self.normal(p);
        let tangent_basis = gram_schmidt3([e1, e2, reeb]);
        Ok(ContactFrame { point: *p, lambda, reeb, d_lambda, j_xi, proj_xi, xi_basis: [e1, e2], tangent_basis, normal })
    }

    /// Reeb flow `phi^s(p)`: closed-form bi-rotation on the sphere models and
    /// adaptive integration on `R^3`.
    pub fn reeb_flow(&self, p: &Point, s: f64) -> Result<Point> {
        self.check_on(p)?;
        if s == 0.0 {
            return Ok(*p);
        }
        if self.is_sphere_like() {
            Ok(self.linear_flow(s) * p)
        } else {
            let q = integrate_adaptive(|x| self.reeb(x), *p, s, AdaptiveOptions::default())?;
            Ok(Point::new(q[0], q[1], q[2], 0.0))
        }
    }

    /// The linear map `phi^s` of the sphere models.
    fn linear_flow(&self, s: f64) -> Mat4 {
        let (a, b) = self.weights;
        let mut u = Mat4::zeros();
        u.fixed_view_mut::<2, 2>(0, 0).copy_from(&rotation_block(2.0 * s / a));
        u.fixed_view_mut::<2, 2>(2, 2).copy_from(&rotation_block(2.0 * s / b));
        u
    }

    /// Ambient differential `d phi^s` at `p`.
    pub fn flow_jacobian(&self, p: &Point, s: f64) -> Result<Mat4> {
        self.check_on(p)?;
        if self.is_sphere_like() {
            return Ok(self.linear_flow(s));
        }
        let h = 1e-5;
        let mut jac = Mat4::zeros();
        for k in 0..3 {
            let mut dp = Vec4::zeros();
            dp[k] = h;
            let plus = self.reeb_flow(&(p + dp), s)?;
            let minus = self.reeb_flow(&(p - dp), s)?;
            jac.set_column(k, &((plus - minus) / (2.0 * h)));
        }
        jac[(3, 3)] = 1.0;
        Ok(jac)
    }

    fn pushed_j(&self, p: &Point, s: f64) -> Result<Mat4> {
        let q = self.reeb_flow(p, s)?;
        let forward = self.flow_jacobian(p, s)?;
        let back = self.flow_jacobian(&q, -s)?;
        Ok(back * self.frame_unchecked(&q)?.j_xi * forward)
    }

    /// `(L_R J)(p)` by central differencing of `(phi^s)^* J`, refined until the
    /// Richardson error estimate drops below `1e-6`.
    pub fn lie_derivative_j(&self, p: &Point) -> Result<Mat4> {
        self.check_on(p)?;
        let central = |eps: f64| -> Result<Mat4> { Ok((self.pushed_j(p, eps)? - self.pushed_j(p, -eps)?) / (2.0 * eps)) };
        let mut eps = 1e-2;
        let mut coarse = central(eps)?;
        for _ in 0..12 {
            let fine = central(eps / 2.0)?;
            let estimate = (fine - coarse).amax() / 3.0;
            let extrapolated = (fine * 4.0 - coarse) / 3.0;
            if estimate <= 1e-6 {
                return Ok(extrapolated);
            }
            coarse = fine;
            eps /= 2.0;
        }
        Ok(coarse)
    }

    /// The lcs form `d lambda + d theta ^ lambda` in the product frame
    /// `(e1, e2, R, d/d theta)`.
    pub fn lcs_form(&self, mp: &LcsPoint) -> Result<Mat4> {
        let frame = self.eval_frame(&mp.q)?;
        let vecs = product_frame(&frame);
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = lcs_pair(&frame, &vecs[i], &vecs[j]);
            }
        }
        Ok(m)
    }

    /// The lambda-admissible almost complex structure on `T(Q x S^1)` in the
    /// product frame: `J|xi` from the frame, `J d/d theta = R`, `J R = -d/d theta`.
    pub fn lcs_j() -> Mat4 {
        let mut j = Mat4::zeros();
        j[(1, 0)] = 1.0;
        j[(0, 1)] = -1.0;
        j[(2, 3)] = 1.0;
        j[(3, 2)] = -1.0;
        j
    }

    /// The lcs form as an ambient two-form on `R^4 x R` (theta last).
    pub fn lcs_form_ambient(&self, q: &Point) -> Matrix5<f64> {
        let dl = self.d_lambda();
        let l = self.lambda(q);
        let mut m = Matrix5::zeros();
        m.fixed_view_mut::<4, 4>(0, 0).copy_from(&dl);
        for i in 0..4 {
            m[(4, i)] = l[i];
            m[(i, 4)] = -l[i];
        }
        m
    }

    /// Largest component of `d omega + d theta ^ omega` for the ambient lcs
    /// form, with the exterior derivative taken by central differences.
    pub fn lcs_closedness_residual(&self, mp: &LcsPoint, h: f64) -> f64 {
        let x = Vector5::new(mp.q[0], mp.q[1], mp.q[2], mp.q[3], mp.theta);
        let omega_at = |y: &Vector5<f64>| self.lcs_form_ambient(&Point::new(y[0], y[1], y[2], y[3]));
        let mut grads = Vec::with_capacity(5);
        for k in 0..5 {
            let mut dx = Vector5::zeros();
            dx[k] = h;
            grads.push((omega_at(&(x + dx)) - omega_at(&(x - dx))) / (2.0 * h));
        }
        let omega = omega_at(&x);
        let lee = Vector5::new(0.0, 0.0, 0.0, 0.0, 1.0);
        let mut worst: f64 = 0.0;
        for i in 0..5 {
            for j in (i + 1)..5 {
                for k in (j + 1)..5 {
                    let d = grads[i][(j, k)] - grads[j][(i, k)] + grads[k][(i, j)];
                    let wedge = lee[i] * omega[(j, k)] - lee[j] * omega[(i, k)] + lee[k] * omega[(i, j)];
                    worst = worst.max((d + wedge).abs());
                }
            }
        }
        worst
    }

    /// Nearest-point style projection: weighted radial scaling on the sphere
    /// models, identity on `R^3`.
    pub fn retract(&self, x: &Point) -> Result<Point> {
        let y = if self.is_sphere_like() {
            let h = self.level(x);
            if h <= 0.0 || !h.is_finite() {
                return Err(LabError::TooFar { distance: f64::INFINITY });
            }
            x / h.sqrt()
        } else {
            Point::new(x[0], x[1], x[2], 0.0)
        };
        let distance = (y - x).norm();
        if distance > RETRACT_RADIUS {
            return Err(LabError::TooFar { distance });
        }
        Ok(y)
    }

    /// A random point of the manifold (uniform direction, retracted, for the
    /// sphere models; a bounded box for `R^3`).
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Point {
        if self.is_sphere_like() {
            loop {
                let v = Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                let n = v.norm();
                if n > 0.1 && n <= 1.0 {
                    let v = v / n;
                    return v / self.level(&v).sqrt();
                }
            }
        } else {
            Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), 0.0)
        }
    }

    /// Pullback discrepancy `|(phi^s)^* lambda - lambda|` on the tangent space at `p`.
    pub fn flow_lambda_defect(&self, p: &Point, s: f64) -> Result<f64> {
        let frame = self.eval_frame(p)?;
        let q = self.reeb_flow(p, s)?;
        let dphi = self.flow_jacobian(p, s)?;
        let lq = self.lambda(&q);
        let mut worst: f64 = 0.0;
        for v in frame.tangent_basis.iter() {
            worst = worst.max((lq.dot(&(dphi * v)) - frame.lambda.dot(v)).abs());
        }
        Ok(worst)
    }
}

fn gram_schmidt3(vs: [Vec4; 3]) -> [Vec4; 3] {
    let mut out = [Vec4::zeros(); 3];
    for i in 0..3 {
        let mut v = vs[i];
        for u in out.iter().take(i) {
            v -= u * u.dot(&v);
        }
        out[i] = v / v.norm();
    }
    out
}

/// Product-frame vectors `(e1, e2, R, d/d theta)` as `(Q-part, theta-part)`.
fn product_frame(frame: &ContactFrame) -> [(Vec4, f64); 4] {
    [(frame.xi_basis[0], 0.0), (frame.xi_basis[1], 0.0), (frame.reeb, 0.0), (Vec4::zeros(), 1.0)]
}

fn lcs_pair(frame: &ContactFrame, x: &(Vec4, f64), y: &(Vec4, f64)) -> f64 {
    x.0.dot(&(frame.d_lambda * y.0)) + x.1 * frame.lambda.dot(&y.0) - y.1 * frame.lambda.dot(&x.0)
}

impl ContactFrame {
    pub fn d_lambda_of(&self, v: &Vec4, w: &Vec4) -> f64 {
        v.dot(&(self.d_lambda * w))
    }

    pub fn lambda_of(&self, v: &Vec4) -> f64 {
        self.lambda.dot(v)
    }

    /// Triad metric `g = d lambda(pi ., J pi .) + lambda (x) lambda`.
    pub fn metric(&self, v: &Vec4, w: &Vec4) -> f64 {
        let pv = self.proj_xi * v;
        let pw = self.proj_xi * w;
        self.d_lambda_of(&pv, &(self.j_xi * pw)) + self.lambda_of(v) * self.lambda_of(w)
    }

    /// Coordinates of `pi v` in the symplectic basis of `xi`; they are
    /// orthonormal coordinates for the triad metric.
    pub fn xi_coords(&self, v: &Vec4) -> [f64; 2] {
        let pv = self.proj_xi * v;
        [self.d_lambda_of(&pv, &self.xi_basis[1]), self.d_lambda_of(&self.xi_basis[0], &pv)]
    }

    pub fn xi_norm2(&self, v: &Vec4) -> f64 {
        let c = self.xi_coords(v);
        c[0] * c[0] + c[1] * c[1]
    }

    pub fn axioms(&self) -> FrameAxioms {
        let lambda_reeb = (self.lambda_of(&self.reeb) - 1.0).abs();
        let mut reeb_d_lambda: f64 = 0.0;
        let mut j_squared: f64 = 0.0;
        let mut proj_idempotent: f64 = 0.0;
        for v in self.tangent_basis.iter() {
            reeb_d_lambda = reeb_d_lambda.max(self.d_lambda_of(&self.reeb, v).abs());
            let jj = self.j_xi * (self.j_xi * v) + self.proj_xi * v;
            j_squared = j_squared.max(jj.amax());
            let pp = self.proj_xi * (self.proj_xi * v) - self.proj_xi * v;
            proj_idempotent = proj_idempotent.max(pp.amax());
        }
        let mut g = nalgebra::Matrix3::<f64>::zeros();
        for i in 0..3 {
            for j in 0..3 {
                g[(i, j)] = self.metric(&self.tangent_basis[i], &self.tangent_basis[j]);
            }
        }
        let metric_asymmetry = (g - g.transpose()).amax();
        let sym = (g + g.transpose()) * 0.5;
        let metric_min_eigenvalue = SymmetricEigen::new(sym).eigenvalues.min();
        // J on the product in the frame (e1, e2, R, d/d theta) against the
        // frame's own J on xi.
        let jp = ContactModel::lcs_j();
        let img_theta = frame_vector(self, &jp.column(3).into_owned());
        let img_e1 = frame_vector(self, &jp.column(0).into_owned());
        let product_j_theta = (img_theta.0 - self.reeb).amax().max(img_theta.1.abs())
            + (img_e1.0 - self.j_xi * self.xi_basis[0]).amax();
        FrameAxioms {
            lambda_reeb,
            reeb_d_lambda,
            j_squared,
            proj_idempotent,
            metric_asymmetry,
            metric_min_eigenvalue,
            product_j_theta,
        }
    }
}

fn frame_vector(frame: &ContactFrame, c: &Vec4) -> (Vec4, f64) {
    (frame.xi_basis[0] * c[0] + frame.xi_basis[1] * c[1] + frame.reeb * c[2], c[3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn e(i: usize) -> Point {
        let mut v = Point::zeros();
        v[i] = 1.0;
        v
    }

    #[test]
    fn round_sphere_frame_at_base_point() {
        let m = ContactModel::round_sphere();
        let f = m.eval_frame(&e(0)).unwrap();
        assert!((f.lambda - Vec4::new(0.0, 0.5, 0.0, 0.0)).norm() < 1e-15);
        assert!((f.reeb - Vec4::new(0.0, 2.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((f.lambda_of(&f.reeb) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn r3_frame_at_origin() {
        let m = ContactModel::standard_r3();
        let f = m.eval_frame(&Point::zeros()).unwrap();
        assert_eq!(f.lambda, Vec4::new(0.0, 0.0, 1.0, 0.0));
        assert_eq!(f.reeb, Vec4::new(0.0, 0.0, 1.0, 0.0));
        // J (d/dx + y d/dz) = d/dy
        assert!((f.j_xi * Vec4::new(1.0, 0.0, 0.0, 0.0) - Vec4::new(0.0, 1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn off_manifold_is_rejected() {
        let m = ContactModel::round_sphere();
        let err = m.eval_frame(&Point::new(1.0 + 1e-6, 0.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, LabError::PointOffManifold { .. }));
    }

    #[test]
    fn frame_axioms_hold_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [ContactModel::round_sphere(), ContactModel::ellipsoid(1.0, 1.3).unwrap(), ContactModel::standard_r3()] {
            for _ in 0..200 {
                let p = m.random_point(&mut rng);
                let ax = m.eval_frame(&p).unwrap().axioms();
                assert!(ax.lambda_reeb <= 1e-10, "{ax:?}");
                assert!(ax.reeb_d_lambda <= 1e-8, "{ax:?}");
                assert!(ax.j_squared <= 1e-8, "{ax:?}");
                assert!(ax.proj_idempotent <= 1e-12);
                assert!(ax.metric_asymmetry <= 1e-10 && ax.metric_min_eigenvalue > 0.0, "{ax:?}");
                assert!(ax.product_j_theta <= 1e-12);
            }
        }
    }

    #[test]
    fn hopf_flow_quarter_and_full_period() {
        let m = ContactModel::round_sphere();
        let q = m.reeb_flow(&e(0), PI / 2.0).unwrap();
        assert!((q - Point::new(-1.0, 0.0, 0.0, 0.0)).norm() < 1e-12);
        let p = m.random_point(&mut ChaCha8Rng::seed_from_u64(1));
        assert!((m.reeb_flow(&p, PI).unwrap() - p).norm() < 1e-9);
        assert_eq!(m.reeb_flow(&p, 0.0).unwrap(), p);
    }

    #[test]
    fn r3_flow_is_translation() {
        let m = ContactModel::standard_r3();
        let p = Point::new(0.3, -1.2, 0.5, 0.0);
        let q = m.reeb_flow(&p, 2.5).unwrap();
        assert!((q - Point::new(0.3, -1.2, 3.0, 0.0)).norm() < 1e-10);
        assert_eq!(m.reeb_flow(&p, 0.0).unwrap(), p);
    }

    #[test]
    fn flow_preserves_lambda_and_level_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [ContactModel::round_sphere(), ContactModel::ellipsoid(1.0, 1.3).unwrap(), ContactModel::standard_r3()] {
            for _ in 0..20 {
                let p = m.random_point(&mut rng);
                let s = rng.gen_range(-10.0..10.0);
                assert!(m.level_residual(&m.reeb_flow(&p, s).unwrap()) <= 1e-9);
                assert!(m.flow_lambda_defect(&p, s).unwrap() <= 1e-6);
            }
        }
    }

    #[test]
    fn lie_derivative_vanishes_on_round_sphere() {
        let m = ContactModel::round_sphere();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = m.random_point(&mut rng);
            assert!(m.lie_derivative_j(&p).unwrap().amax() <= 1e-6);
        }
    }

    #[test]
    fn lie_derivative_on_ellipsoid_and_reeb_annihilation() {
        // The bi-rotation is unitary and preserves every ingredient of the
        // frame construction, so J is flow invariant here as well.
        let m = ContactModel::ellipsoid(1.0, 1.3).unwrap();
        let p = m.retract(&Point::new(0.6, 0.2, 0.5, -0.4)).unwrap();
        let l = m.lie_derivative_j(&p).unwrap();
        assert!(l.amax() <= 1e-6, "{l}");
        let f = m.eval_frame(&p).unwrap();
        assert!((f.proj_xi * l * f.reeb).amax() <= 1e-6);
    }

    #[test]
    fn lcs_form_entries_and_closedness() {
        let m = ContactModel::round_sphere();
        let w = m.lcs_form(&LcsPoint::new(e(0), 0.0)).unwrap();
        assert!(w.determinant().abs() > 1e-6);
        assert!((w[(2, 3)] + 1.0).abs() < 1e-15);
        assert!((w[(3, 2)] - 1.0).abs() < 1e-15);
        assert!((w[(0, 1)] - 1.0).abs() < 1e-12 && (w[(1, 0)] + 1.0).abs() < 1e-12);
        assert!(m.lcs_closedness_residual(&LcsPoint::new(e(0), 0.25), 1e-4) <= 1e-6);
        let p = m.random_point(&mut ChaCha8Rng::seed_from_u64(5));
        assert!(m.lcs_closedness_residual(&LcsPoint::new(p, 0.7), 1e-4) <= 1e-6);
    }

    #[test]
    fn lcs_j_is_compatible() {
        let m = ContactModel::ellipsoid(1.0, 1.3).unwrap();
        let p = m.random_point(&mut ChaCha8Rng::seed_from_u64(2));
        let w = m.lcs_form(&LcsPoint::new(p, 0.1)).unwrap();
        let j = ContactModel::lcs_j();
        let g = w * j;
        assert!((g - g.transpose()).amax() < 1e-12);
        assert!(SymmetricEigen::new(g).eigenvalues.min() > 0.0);
    }

    #[test]
    fn retract_examples() {
        let m = ContactModel::round_sphere();
        assert!((m.retract(&Point::new(1.2, 0.0, 0.0, 0.0)).unwrap() - e(0)).norm() < 1e-15);
        assert!(matches!(m.retract(&Point::new(2.0, 0.0, 0.0, 0.0)), Err(LabError::TooFar { .. })));
        let r3 = ContactModel::standard_r3();
        let p = Point::new(1.0, 2.0, 3.0, 0.0);
        assert_eq!(r3.retract(&p).unwrap(), p);
        let x = Point::new(0.3, -0.8, 0.4, 0.35);
        let y = m.retract(&x).unwrap();
        assert!((m.retract(&y).unwrap() - y).norm() <= 1e-12);
    }

    #[test]
    fn invalid_ellipsoid_weights() {
        assert!(ContactModel::ellipsoid(0.0, 1.0).is_err());
        assert!(ContactModel::ellipsoid(1.0, -2.0).is_err());
    }
}
