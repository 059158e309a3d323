//! Finite-difference reference solvers for the local Dirichlet problems:
//! `-ΔW + cW = F` (3/5-point Laplacian, direct banded Cholesky) and the
//! explicit heat scheme. The Dirichlet condition is imposed by zeroing all
//! cells outside the mask, mirroring the nonlocal problems' extension by
//! zero so that nonlocal-to-local comparisons are like for like.

use crate::error::{Error, Result};
use crate::grid::{DomainMask, GridField};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct LocalStationaryProblem {
    domain: Arc<DomainMask>,
    forcing: GridField,
    absorption: f64,
}

impl LocalStationaryProblem {
    pub fn new(
        domain: impl Into<Arc<DomainMask>>,
        forcing: GridField,
        absorption: f64,
    ) -> Result<Self> {
        let domain = domain.into();
        if domain.grid() != forcing.grid() || !forcing.mask().subset_of(&domain) {
            return Err(Error::InvalidArgument(
                "forcing must live on the domain's grid and be supported in the domain".into(),
            ));
        }
        if forcing.min_value() < 0.0 {
            return Err(Error::InvalidArgument("forcing must be non-negative".into()));
        }
        if !(absorption >= 0.0) {
            return Err(Error::InvalidArgument("absorption must be >= 0".into()));
        }
        Ok(LocalStationaryProblem {
            domain,
            forcing,
            absorption,
        })
    }

    pub fn domain(&self) -> &Arc<DomainMask> {
        &self.domain
    }
}

/// In-mask axis neighbors of a cell, as flat indices.
fn neighbors(mask: &DomainMask, flat: usize) -> [Option<usize>; 4] {
    let grid = mask.grid();
    let n = grid.cells_per_axis();
    let [i, j] = grid.axis_indices(flat);
    let mut out = [None; 4];
    if i > 0 && mask.contains(flat - 1) {
        out[0] = Some(flat - 1);
    }
    if i + 1 < n && mask.contains(flat + 1) {
        out[1] = Some(flat + 1);
    }
    if grid.dim() == 2 {
        if j > 0 && mask.contains(flat - n) {
            out[2] = Some(flat - n);
        }
        if j + 1 < n && mask.contains(flat + n) {
            out[3] = Some(flat + n);
        }
    }
    out
}

/// Solves `-ΔW + cW = F` on the mask (zero outside) by banded Cholesky.
///
/// The system matrix is symmetric positive definite (diagonal `c + 2N/h²`,
/// in-mask neighbor entries `-1/h²`); the factorization is exact up to
/// rounding and the residual is checked against `tol`.
pub fn solve_poisson(problem: &LocalStationaryProblem, tol: f64) -> Result<GridField> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mask = &problem.domain;
    let grid = mask.grid();
    let members = mask.members();
    let m = members.len();
    let mut pos = vec![usize::MAX; grid.total_cells()];
    for (k, &c) in members.iter().enumerate() {
        pos[c] = k;
    }
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let diag_val = problem.absorption + 2.0 * grid.dim() as f64 * inv_h2;

    let mut bw = 0usize;
    for (k, &c) in members.iter().enumerate() {
        for nb in neighbors(mask, c).into_iter().flatten() {
            let kk = pos[nb];
            if kk < k {
                bw = bw.max(k - kk);
            }
        }
    }

    // lower band, row-major: band[k][d] = A[k, k - bw + d], d in 0..=bw
    let w = bw + 1;
    let mut band = vec![0.0f64; m * w];
    for (k, &c) in members.iter().enumerate() {
        band[k * w + bw] = diag_val;
        for nb in neighbors(mask, c).into_iter().flatten() {
            let kk = pos[nb];
            if kk < k {
                band[k * w + (kk + bw - k)] = -inv_h2;
            }
        }
    }

    // in-place Cholesky A = L L^T
    for k in 0..m {
        let lo = k.saturating_sub(bw);
        for j in lo..=k {
            let ilo = lo.max(j.saturating_sub(bw));
            let mut s = band[k * w + (j + bw - k)];
            for i in ilo..j {
                s -= band[k * w + (i + bw - k)] * band[j * w + (i + bw - j)];
            }
            if j < k {
                band[k * w + (j + bw - k)] = s / band[j * w + bw];
            } else {
                if s <= 0.0 {
                    return Err(Error::NumericalFailure(format!(
                        "Cholesky breakdown at row {k} (pivot {s})"
                    )));
                }
                band[k * w + bw] = s.sqrt();
            }
        }
    }

    let rhs: Vec<f64> = members.iter().map(|&c| problem.forcing.value(c)).collect();
    // forward solve L y = F
    let mut y = rhs.clone();
    for k in 0..m {
        let lo = k.saturating_sub(bw);
        let mut s = y[k];
        for i in lo..k {
            s -= band[k * w + (i + bw - k)] * y[i];
        }
        y[k] = s / band[k * w + bw];
    }
    // backward solve L^T x = y
    let mut x = y;
    for k in (0..m).rev() {
        let hi = (k + bw).min(m - 1);
        let mut s = x[k];
        for i in (k + 1)..=hi {
            s -= band[i * w + (k + bw - i)] * x[i];
        }
        x[k] = s / band[k * w + bw];
    }

    let sol = GridField::from_member_values(mask.clone(), &x)?;
    // residual of the discrete system
    let mut resid: f64 = 0.0;
    for (k, &c) in members.iter().enumerate() {
        let mut ax = diag_val * x[k];
        for nb in neighbors(mask, c).into_iter().flatten() {
            ax -= inv_h2 * x[pos[nb]];
        }
        resid = resid.max((ax - rhs[k]).abs());
    }
    if resid > tol {
        return Err(Error::NumericalFailure(format!(
            "direct solve residual {resid:e} exceeds tolerance {tol:e}"
        )));
    }
    Ok(sol)
}

#[derive(Debug, Clone)]
pub struct LocalEvolutionProblem {
    domain: Arc<DomainMask>,
    forcing: Vec<GridField>,
    initial: GridField,
    absorption: f64,
    tau: f64,
    steps: usize,
}

impl LocalEvolutionProblem {
    pub fn new(
        domain: impl Into<Arc<DomainMask>>,
        forcing: Vec<GridField>,
        initial: GridField,
        absorption: f64,
        tau: f64,
        steps: usize,
    ) -> Result<Self> {
        let domain = domain.into();
        let grid = *domain.grid();
        if steps == 0 || forcing.len() != steps {
            return Err(Error::InvalidArgument(
                "need one forcing field per step".into(),
            ));
        }
        if initial.grid() != &grid || !initial.mask().subset_of(&domain) {
            return Err(Error::InvalidArgument(
                "initial data must live in the domain".into(),
            ));
        }
        if initial.min_value() < 0.0
            || forcing
                .iter()
                .any(|g| g.min_value() < 0.0 || !g.mask().subset_of(&domain))
        {
            return Err(Error::InvalidArgument(
                "data must be non-negative and supported in the domain".into(),
            ));
        }
        if !(absorption >= 0.0) {
            return Err(Error::InvalidArgument("absorption must be >= 0".into()));
        }
        // explicit-scheme stability: tau * (2N/h^2 + c) <= 1
        let h2 = grid.h() * grid.h();
        let bound = 1.0 / (2.0 * grid.dim() as f64 / h2 + absorption);
        if !(tau > 0.0) || tau > bound {
            return Err(Error::InvalidArgument(format!(
                "time step {tau} violates the explicit stability bound {bound}"
            )));
        }
        Ok(LocalEvolutionProblem {
            domain,
            forcing,
            initial,
            absorption,
            tau,
            steps,
        })
    }
}

/// Explicit heat scheme `W_{n+1} = W_n + tau (ΔW_n - c W_n + G_n)` with
/// homogeneous Dirichlet imposed by the mask at every step.
pub fn solve_heat(problem: &LocalEvolutionProblem) -> Result<Vec<GridField>> {
    let mask = &problem.domain;
    let grid = mask.grid();
    let members = mask.members();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let deg = 2.0 * grid.dim() as f64;

    let mut traj = Vec::with_capacity(problem.steps + 1);
    let w0: Vec<f64> = members.iter().map(|&c| problem.initial.value(c)).collect();
    traj.push(GridField::from_member_values(mask.clone(), &w0)?);
    for n in 0..problem.steps {
        let cur = traj.last().unwrap();
        let g = &problem.forcing[n];
        let vals: Vec<f64> = members
            .iter()
            .map(|&c| {
                let mut lap = -deg * cur.value(c);
                for nb in neighbors(mask, c).into_iter().flatten() {
                    lap += cur.value(nb);
                }
                lap *= inv_h2;
                cur.value(c)
                    + problem.tau * (lap - problem.absorption * cur.value(c) + g.value(c))
            })
            .collect();
        traj.push(GridField::from_member_values(mask.clone(), &vals)?);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ball_mask_radius, make_grid, DomainMask, GridField};

    #[test]
    fn poisson_1d_parabola() {
        // Omega = (-1,1), c = 0, F = 1: V(x) = (1 - x^2)/2. With the ghost
        // centers aligned at +-1 the 3-point stencil is exact for the
        // quadratic solution.
        let g = make_grid(1, 1.27, 127).unwrap(); // h = 0.02, centers hit +-1
        let dom = DomainMask::from_predicate(g, |c| c[0].abs() < 1.0).unwrap();
        let f = GridField::from_fn(dom.clone(), |_| 1.0).unwrap();
        let p = LocalStationaryProblem::new(dom.clone(), f, 0.0).unwrap();
        let v = solve_poisson(&p, 1e-9).unwrap();
        let mut err: f64 = 0.0;
        dom.for_each_member(|c| {
            let x = g.center(c)[0];
            err = err.max((v.value(c) - (1.0 - x * x) / 2.0).abs());
        });
        assert!(err < 1e-11, "err = {err}");
    }

    #[test]
    fn poisson_zero_forcing() {
        let g = make_grid(1, 1.2, 61).unwrap();
        let dom = DomainMask::from_predicate(g, |c| c[0].abs() < 1.0).unwrap();
        let p =
            LocalStationaryProblem::new(dom.clone(), GridField::zeros(dom), 0.0).unwrap();
        let v = solve_poisson(&p, 1e-10).unwrap();
        assert_eq!(v.max_abs(), 0.0);
    }

    #[test]
    fn poisson_2d_disc() {
        // unit disc, c = 0, F = 1: V(0) = 1/4, masked boundary is O(h)
        let g = make_grid(2, 1.3, 65).unwrap();
        let dom = ball_mask_radius(g, 1.0).unwrap();
        let f = GridField::from_fn(dom.clone(), |_| 1.0).unwrap();
        let p = LocalStationaryProblem::new(dom, f, 0.0).unwrap();
        let v = solve_poisson(&p, 1e-8).unwrap();
        let center = g.flat_index([32, 32]);
        assert!((v.value(center) - 0.25).abs() < 2.0 * g.h());
    }

    #[test]
    fn poisson_second_order_on_aligned_grids() {
        // F = cos(pi x / 2) on (-1,1): V = (2/pi)^2 cos(pi x / 2). Grids
        // chosen so centers hit +-1 at both levels; h halves exactly.
        let errs: Vec<f64> = [(1.27, 127usize), (1.275, 255)]
            .iter()
            .map(|&(half, n)| {
                let g = make_grid(1, half, n).unwrap();
                // exclude the center sitting on the boundary itself (float
                // jitter there would move the ghost by a whole cell)
                let cut = 1.0 - 0.5 * g.h();
                let dom = DomainMask::from_predicate(g, move |c| c[0].abs() < cut).unwrap();
                let f = GridField::from_fn(dom.clone(), |c| {
                    (std::f64::consts::FRAC_PI_2 * c[0]).cos()
                })
                .unwrap();
                let p = LocalStationaryProblem::new(dom.clone(), f, 0.0).unwrap();
                let v = solve_poisson(&p, 1e-9).unwrap();
                let mut err: f64 = 0.0;
                dom.for_each_member(|c| {
                    let x = g.center(c)[0];
                    let exact = (2.0 / std::f64::consts::PI).powi(2)
                        * (std::f64::consts::FRAC_PI_2 * x).cos();
                    err = err.max((v.value(c) - exact).abs());
                });
                err
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!(
            (ratio - 4.0).abs() <= 0.8,
            "second-order ratio {ratio}, errs {errs:?}"
        );
    }

    #[test]
    fn maximum_principle_nonnegative() {
        let g = make_grid(2, 1.2, 33).unwrap();
        let dom = DomainMask::from_predicate(g, |c| c[0].abs() < 1.0 && c[1].abs() < 0.7)
            .unwrap();
        let f = GridField::from_fn(dom.clone(), |c| (c[0] * 13.0).sin().abs()).unwrap();
        let p = LocalStationaryProblem::new(dom, f, 1.0).unwrap();
        let v = solve_poisson(&p, 1e-8).unwrap();
        assert!(v.min_value() >= -1e-14);
    }

    #[test]
    fn heat_zero_and_mass_decay() {
        let g = make_grid(1, 1.2, 121).unwrap();
        let dom = DomainMask::from_predicate(g, |c| c[0].abs() < 1.0).unwrap();
        let h2 = g.h() * g.h();
        let tau = 0.4 * h2; // below h^2/2
        let zeros: Vec<GridField> = (0..6).map(|_| GridField::zeros(dom.clone())).collect();
        let p = LocalEvolutionProblem::new(
            dom.clone(),
            zeros.clone(),
            GridField::zeros(dom.clone()),
            0.0,
            tau,
            6,
        )
        .unwrap();
        let traj = solve_heat(&p).unwrap();
        assert!(traj.iter().all(|w| w.max_abs() == 0.0));

        let v0 = GridField::from_fn(dom.clone(), |c| (1.0 - c[0] * c[0]).max(0.0)).unwrap();
        let p = LocalEvolutionProblem::new(dom, zeros, v0, 0.0, tau, 6).unwrap();
        let traj = solve_heat(&p).unwrap();
        for pair in traj.windows(2) {
            assert!(pair[1].mass() <= pair[0].mass() * (1.0 + 1e-12));
            assert!(pair[1].min_value() >= 0.0);
        }
    }

    #[test]
    fn heat_rejects_unstable_step() {
        let g = make_grid(1, 1.2, 121).unwrap();
        let dom = DomainMask::from_predicate(g, |c| c[0].abs() < 1.0).unwrap();
        let tau = g.h() * g.h(); // above h^2/2
        let zeros: Vec<GridField> = (0..2).map(|_| GridField::zeros(dom.clone())).collect();
        assert!(matches!(
            LocalEvolutionProblem::new(dom.clone(), zeros, GridField::zeros(dom), 0.0, tau, 2),
            Err(Error::InvalidArgument(_))
        ));
    }
}
