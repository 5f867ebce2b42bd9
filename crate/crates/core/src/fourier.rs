//! Trigonometric collocation on uniform periodic grids.

use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Spectral first-derivative matrix for `n` equispaced samples of a
/// function with the given period.
pub fn derivative_matrix(n: usize, period: f64) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    let h = 2.0 * PI / n as f64;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let diff = j as f64 - k as f64;
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            let x = diff * h / 2.0;
            d[(j, k)] = if n % 2 == 0 { 0.5 * sign / x.tan() } else { 0.5 * sign / x.sin() };
        }
    }
    d * (2.0 * PI / period)
}

/// Applies the spectral derivative to a single periodic sample vector.
pub fn differentiate(values: &[f64], period: f64) -> Vec<f64> {
    let d = derivative_matrix(values.len(), period);
    (0..values.len()).map(|j| (0..values.len()).map(|k| d[(j, k)] * values[k]).sum()).collect()
}
