//! Small explicit integrators for autonomous vector fields on `R^4`.

use nalgebra::{Matrix4, Vector4};

use crate::error::{LabError, Result};

/// Dormand-Prince 5(4) tableau. Only autonomous fields are integrated, so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub min_step: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-13, max_steps: 200_000, min_step: 1e-14 }
    }
}

/// Integrates `x' = field(x)` from 0 to `duration` (either sign) with step control.
pub fn integrate_adaptive<F>(field: F, x0: Vector4<f64>, duration: f64, opts: AdaptiveOptions) -> Result<Vector4<f64>>
where
    F: Fn(&Vector4<f64>) -> Vector4<f64>,
{
    if duration == 0.0 {
        return Ok(x0);
    }
    let dir = duration.signum();
    let total = duration.abs();
    let mut t = 0.0;
    let mut x = x0;
    let mut h = (total * 0.01).max(1e-6).min(total);
    let mut k = [Vector4::zeros(); 7];
    for _ in 0..opts.max_steps {
        if t >= total {
            return Ok(x);
        }
        if t + h > total {
            h = total - t;
        }
        for s in 0..7 {
            let mut xs = x;
            for (r, a) in A[s].iter().enumerate().take(s) {
                xs += k[r] * (a * h * dir);
            }
            k[s] = field(&xs);
        }
        let mut x5 = x;
        let mut x4 = x;
        for s in 0..7 {
            x5 += k[s] * (B5[s] * h * dir);
            x4 += k[s] * (B4[s] * h * dir);
        }
        let scale = opts.atol + opts.rtol * x.amax().max(x5.amax());
        let err = (x5 - x4).amax() / scale;
        if err <= 1.0 {
            t += h;
            x = x5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < opts.min_step && t < total {
            return Err(LabError::IntegrationFailure(format!("step size underflow at t = {t:.6e}")));
        }
    }
    Err(LabError::IntegrationFailure("maximum number of steps exceeded".into()))
}

/// One classical RK4 step for the linear variational system `Y' = M(s) Y`.
pub fn rk4_linear_step<F>(jac: F, s: f64, y: &Matrix4<f64>, h: f64) -> Matrix4<f64>
where
    F: Fn(f64) -> Matrix4<f64>,
{
    let m0 = jac(s);
    let mh = jac(s + 0.5 * h);
    let m1 = jac(s + h);
    let k1 = m0 * y;
    let k2 = mh * (y + k1 * (0.5 * h));
    let k3 = mh * (y + k2 * (0.5 * h));
    let k4 = m1 * (y + k3 * h);
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}
