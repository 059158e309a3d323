//! Radially non-increasing convolution kernels and their rescalings.
//!
//! A [`Kernel`] samples a named radial profile at the cell centers inside
//! its support ball and renormalizes to exact discrete unit mass. The
//! second moment `sigma2` and the constant `c1 = 2 / sigma2` are discrete
//! moments of the renormalized samples; analytic values serve as test
//! oracles only. A [`RescaledKernel`] resamples the profile at support
//! `epsilon * base_support` (again unit mass) and carries the scale factor
//! `c1 / epsilon^2` that turns the unit-mass kernel into the diffusion
//! kernel of the nonlocal operator.

mod clt;
mod conv;

pub use clt::{ball_mass_decay, gaussian_deviation};
pub use conv::{convolve, convolve_on, convolve_seq, convolution_power, ConvMode};

use crate::error::{Error, Result};
use crate::grid::{ball_mask_radius, GridField, GridSpec};
use crate::rearrange::is_radially_nonincreasing;

/// Named kernel profiles; all are bounded and compactly supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelProfile {
    /// Constant on the support ball.
    UniformBall,
    /// `1 - |x| / radius`.
    Tent,
    /// `exp(-|x|^2 / (2 s^2))` with `s = radius / 3`, clipped at the
    /// support radius and renormalized.
    TruncatedGaussian,
}

impl KernelProfile {
    pub fn name(&self) -> &'static str {
        match self {
            KernelProfile::UniformBall => "uniform-ball",
            KernelProfile::Tent => "tent",
            KernelProfile::TruncatedGaussian => "truncated-gaussian",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform-ball" => Ok(KernelProfile::UniformBall),
            "tent" => Ok(KernelProfile::Tent),
            "truncated-gaussian" => Ok(KernelProfile::TruncatedGaussian),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel profile {other:?}"
            ))),
        }
    }

    /// Profile shape as a function of squared radius. Computed from `r^2`
    /// so that cells at exactly equal radius get bitwise-equal values.
    fn shape_r2(&self, r2: f64, radius: f64) -> f64 {
        match self {
            KernelProfile::UniformBall => 1.0,
            KernelProfile::Tent => 1.0 - r2.sqrt() / radius,
            KernelProfile::TruncatedGaussian => (-4.5 * r2 / (radius * radius)).exp(),
        }
    }
}

/// A sampled kernel with exact discrete unit mass.
#[derive(Debug, Clone)]
pub struct Kernel {
    grid: GridSpec,
    profile: KernelProfile,
    support_radius: f64,
    field: GridField,
    mass: f64,
    sigma2: f64,
    c1: f64,
}

/// Samples `profile` on the ball `|x| <= support_radius` and renormalizes
/// to unit discrete mass.
pub fn make_kernel(
    profile: KernelProfile,
    support_radius: f64,
    grid: GridSpec,
) -> Result<Kernel> {
    let (field, sigma2) = sample_profile(profile, support_radius, grid)?;
    let c1 = 2.0 / sigma2;
    let mass = field.mass();
    debug_assert!((mass - 1.0).abs() < 1e-12);
    debug_assert!(is_radially_nonincreasing(&field, 0.0));
    Ok(Kernel {
        grid,
        profile,
        support_radius,
        field,
        mass,
        sigma2,
        c1,
    })
}

fn sample_profile(
    profile: KernelProfile,
    support_radius: f64,
    grid: GridSpec,
) -> Result<(GridField, f64)> {
    if !(support_radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "support radius must be positive, got {support_radius}"
        )));
    }
    if support_radius < 2.0 * grid.h() {
        return Err(Error::Resolution(format!(
            "support radius {support_radius} below resolution (need >= 2h = {})",
            2.0 * grid.h()
        )));
    }
    let mask = ball_mask_radius(grid, support_radius)?;
    let raw = GridField::from_fn(mask, |c| {
        profile.shape_r2(c[0] * c[0] + c[1] * c[1], support_radius)
    })?;
    let raw_mass = raw.mass();
    if !(raw_mass > 0.0) {
        return Err(Error::NumericalFailure(
            "kernel samples have non-positive mass".into(),
        ));
    }
    let field = raw.map(|v| v / raw_mass)?;
    let mut sigma2 = 0.0;
    field
        .mask()
        .for_each_member(|c| sigma2 += grid.radius2(c) * field.value(c));
    sigma2 *= grid.cell_volume();
    if !(sigma2 > 0.0) {
        return Err(Error::NumericalFailure(
            "kernel second moment is not positive".into(),
        ));
    }
    Ok((field, sigma2))
}

impl Kernel {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn profile(&self) -> KernelProfile {
        self.profile
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// The unit-mass samples.
    pub fn field(&self) -> &GridField {
        &self.field
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Discrete second moment `∫ |x|^2 J`.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `2 / sigma2`: the rescaling constant that makes the nonlocal
    /// operator converge to the Laplacian.
    pub fn c1(&self) -> f64 {
        self.c1
    }
}

/// A kernel resampled at support `epsilon * base_support`, unit mass, plus
/// the diffusion scale `jeps_scale = c1 / epsilon^2`.
#[derive(Debug, Clone)]
pub struct RescaledKernel {
    grid: GridSpec,
    profile: KernelProfile,
    epsilon: f64,
    support_radius: f64,
    rho: GridField,
    sigma2_rho: f64,
    c1: f64,
    jeps_scale: f64,
}

/// Resamples the kernel's profile at support `epsilon * base_support`.
pub fn rescale(kernel: &Kernel, epsilon: f64) -> Result<RescaledKernel> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let support = epsilon * kernel.support_radius;
    let (rho, sigma2_rho) = sample_profile(kernel.profile, support, kernel.grid)?;
    Ok(RescaledKernel {
        grid: kernel.grid,
        profile: kernel.profile,
        epsilon,
        support_radius: support,
        rho,
        sigma2_rho,
        c1: kernel.c1,
        jeps_scale: kernel.c1 / (epsilon * epsilon),
    })
}

impl RescaledKernel {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn profile(&self) -> KernelProfile {
        self.profile
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// The unit-mass rescaled samples `rho`.
    pub fn rho(&self) -> &GridField {
        &self.rho
    }

    /// Discrete second moment of `rho` (approximately `epsilon^2 sigma2`).
    pub fn sigma2_rho(&self) -> f64 {
        self.sigma2_rho
    }

    /// The base kernel's `c1`.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// `c1 / epsilon^2`, so the diffusion kernel is `jeps_scale * rho`.
    pub fn jeps_scale(&self) -> f64 {
        self.jeps_scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn uniform_1d_moments() {
        // continuum J = chi_[-1,1] / 2: sigma2 = 1/3, C1 = 6.
        // Midpoint sampling of the discontinuous profile converges at O(h).
        let mut last = f64::INFINITY;
        for n in [129usize, 257, 513] {
            let g = make_grid(1, 2.0, n).unwrap();
            let k = make_kernel(KernelProfile::UniformBall, 1.0, g).unwrap();
            assert!((k.mass() - 1.0).abs() < 1e-12);
            let err = (k.sigma2() - 1.0 / 3.0).abs();
            assert!(err < 1.5 * g.h(), "sigma2 err {err} at h {}", g.h());
            assert!(err <= last * 0.75);
            last = err;
            assert!((k.c1() - 6.0).abs() < 12.0 * g.h());
        }
    }

    #[test]
    fn tent_1d_moments() {
        // J(x) = 1 - |x| on [-1,1]: sigma2 = 1/6, C1 = 12 (O(h^2) here,
        // the profile is continuous).
        let g = make_grid(1, 2.0, 513).unwrap();
        let k = make_kernel(KernelProfile::Tent, 1.0, g).unwrap();
        assert!((k.sigma2() - 1.0 / 6.0).abs() < 3.0 * g.h() * g.h());
        assert!((k.c1() - 12.0).abs() < 250.0 * g.h() * g.h());
    }

    #[test]
    fn uniform_disc_moments() {
        // J = 1/pi on the unit disc: sigma2 = 1/2, C1 = 4.
        let g = make_grid(2, 1.5, 193).unwrap();
        let k = make_kernel(KernelProfile::UniformBall, 1.0, g).unwrap();
        assert!((k.sigma2() - 0.5).abs() < 2.0 * g.h());
        assert!((k.c1() - 4.0).abs() < 16.0 * g.h());
    }

    #[test]
    fn rescale_identity_and_half() {
        let g = make_grid(1, 2.0, 513).unwrap();
        let k = make_kernel(KernelProfile::UniformBall, 1.0, g).unwrap();
        let r1 = rescale(&k, 1.0).unwrap();
        for c in 0..g.total_cells() {
            assert_eq!(r1.rho().value(c).to_bits(), k.field().value(c).to_bits());
        }
        assert_eq!(r1.jeps_scale(), k.c1());

        let rh = rescale(&k, 0.5).unwrap();
        assert!((rh.rho().mass() - 1.0).abs() < 1e-12);
        assert!((rh.sigma2_rho() - 1.0 / 12.0).abs() < 1.0 * g.h());
        assert_eq!(rh.support_radius(), 0.5);
    }

    #[test]
    fn rescale_below_resolution() {
        let g = make_grid(1, 2.0, 65).unwrap();
        let k = make_kernel(KernelProfile::UniformBall, 1.0, g).unwrap();
        assert!(matches!(rescale(&k, 0.01), Err(Error::Resolution(_))));
    }

    #[test]
    fn kernels_are_radially_nonincreasing_with_zero_tol() {
        for profile in [
            KernelProfile::UniformBall,
            KernelProfile::Tent,
            KernelProfile::TruncatedGaussian,
        ] {
            let g = make_grid(2, 1.5, 65).unwrap();
            let k = make_kernel(profile, 1.0, g).unwrap();
            assert!(is_radially_nonincreasing(k.field(), 0.0), "{:?}", profile);
        }
    }
}
