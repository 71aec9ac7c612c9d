//! Mean and variance of the k-th order statistic of `n` i.i.d.
//! Uniform[0, 1] samples.

use super::check_rank;
use crate::error::Result;

/// `k / (n + 1)`.
pub fn order_stat_mean(n: usize, k: usize) -> Result<f64> {
    check_rank(k, n)?;
    Ok(k as f64 / (n as f64 + 1.0))
}

/// `k (n + 1 - k) / ((n + 1)^2 (n + 2))`. Numerator and denominator are
/// formed in integers, so the only rounding is the final division.
pub fn order_stat_variance(n: usize, k: usize) -> Result<f64> {
    check_rank(k, n)?;
    let (n, k) = (n as u128, k as u128);
    let num = k * (n + 1 - k);
    let den = (n + 1) * (n + 1) * (n + 2);
    Ok(num as f64 / den as f64)
}
