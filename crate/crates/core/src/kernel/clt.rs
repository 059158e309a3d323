//! Central-limit diagnostics for convolution powers: mass decay inside a
//! fixed ball and uniform distance to the limiting Gaussian.

use crate::error::{Error, Result};
use crate::grid::ball_mask_radius;
use crate::kernel::conv::power_steps_full;
use crate::kernel::RescaledKernel;

/// Masses `m_k = ∫_{B_R} (rho∗)^k` for `k = 1..=k_max`.
///
/// Each `m_k` lies in `[0, 1]`; once the support of the power exceeds the
/// ball the sequence decays like `k^{-N/2}` (local central limit theorem).
pub fn ball_mass_decay(rk: &RescaledKernel, ball_radius: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(ball_radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ball radius must be positive, got {ball_radius}"
        )));
    }
    if k_max < 2 {
        return Err(Error::InvalidArgument(format!(
            "k_max must be at least 2, got {k_max}"
        )));
    }
    let grid = *rk.grid();
    let ball = ball_mask_radius(grid, ball_radius)?;
    let members = ball.members();
    let hn = grid.cell_volume();
    let mut masses = Vec::with_capacity(k_max);
    power_steps_full(rk, k_max, |_, cur| {
        let mut s = 0.0;
        for &c in &members {
            s += cur.value(c);
        }
        masses.push(s * hn);
    })?;
    Ok(masses)
}

/// Uniform distance between the rescaled `k`-th convolution power and the
/// standard Gaussian density.
///
/// With `s = sigma_axis * sqrt(k)` (per-axis standard deviation of `rho`),
/// returns `max over grid cells y of |s^N (rho∗)^k(y) - Phi(y/s)|` where
/// `Phi` is the N-dimensional standard normal density. Sampling is at the
/// exact cell centers, the nearest-cell special case of evaluating at
/// rescaled points.
pub fn gaussian_deviation(rk: &RescaledKernel, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let grid = *rk.grid();
    let dim = grid.dim();
    let power = super::convolution_power(rk, k, super::ConvMode::Full)?;
    let sigma_axis2 = rk.sigma2_rho() / dim as f64;
    let s = (sigma_axis2 * k as f64).sqrt();
    let jac = s.powi(dim as i32);
    let norm = (2.0 * std::f64::consts::PI).powf(-(dim as f64) / 2.0);
    let mut dev: f64 = 0.0;
    for c in 0..grid.total_cells() {
        let r2 = grid.radius2(c);
        let phi = norm * (-0.5 * r2 / (s * s)).exp();
        dev = dev.max((jac * power.value(c) - phi).abs());
    }
    Ok(dev)
}
