//! Nonlocal diffusion solvers and Schwarz symmetrization machinery on
//! uniform Cartesian grids.
//!
//! The library provides:
//!
//! - [`grid`]: uniform origin-centered grids, cell-set domain masks,
//!   zero-extended grid fields, and discrete `L^p` norms;
//! - [`rearrange`]: discrete Schwarz symmetrization (sort-and-place along
//!   the radial cell order) and the rearrangement inequalities
//!   (equimeasurability, Hardy–Littlewood, Riesz, radial monotonicity);
//! - [`kernel`]: radially non-increasing convolution kernels, their
//!   rescalings, dense convolutions (full and domain-restricted),
//!   convolution powers, and central-limit decay diagnostics;
//! - [`nonlocal`]: the stationary fixed-point solver and the explicit
//!   evolution scheme for nonlocal Dirichlet problems;
//! - [`local`]: finite-difference reference solvers for the local
//!   (Laplacian) problems;
//! - [`analysis`]: comparison experiments between a problem and its
//!   symmetrized version and convergence sweeps;
//! - [`suite`]: seeded generators for the randomized experiment suites.
//!
//! Everything is deterministic: reductions use fixed summation orders, so
//! results are independent of thread count (convolutions parallelize over
//! output cells only, behind the `parallel` feature).

pub mod analysis;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod local;
pub mod nonlocal;
pub mod rearrange;
pub mod suite;

pub use error::{Error, Result};
pub use grid::{lp_norm, make_grid, DomainMask, GridField, GridSpec};
pub use kernel::{
    ball_mass_decay, convolution_power, convolve, convolve_seq, gaussian_deviation, make_kernel,
    rescale, ConvMode, Kernel, KernelProfile, RescaledKernel,
};
pub use rearrange::{
    check_equimeasurable, hardy_littlewood_gap, is_radially_nonincreasing, riesz_gap,
    schwarz_rearrange, RadialOrder,
};
