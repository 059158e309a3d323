//! Comparison experiments between a Dirichlet problem and its symmetrized
//! version: norm inequalities, radial verdicts, local-limit sweeps.
//!
//! The symmetrized domain is the radial-order prefix with exactly as many
//! cells as the original domain, so rearrangement is a pure value
//! permutation and the norm identities are exact at the discrete level.
//! Theorem-type inequalities are asserted with slack
//! `1e-6 * scale + 2 * (sum of solver tolerances)`.

use crate::error::{Error, Result};
use crate::grid::{lp_norm, DomainMask, GridField, GridSpec};
use crate::kernel::{make_kernel, rescale, KernelProfile, RescaledKernel};
use crate::local::{solve_poisson, LocalStationaryProblem};
use crate::nonlocal::{
    solve_evolution, solve_stationary, EvolutionProblem, Interpolant, StationaryProblem,
};
use crate::rearrange::{equal_radius_spread, radial_violation, schwarz_rearrange, RadialOrder};
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Kernel profile plus base support radius (support of the rescaled kernel
/// is `epsilon * support_radius`).
#[derive(Debug, Clone, Copy)]
pub struct KernelSpec {
    pub profile: KernelProfile,
    pub support_radius: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            profile: KernelProfile::UniformBall,
            support_radius: 1.0,
        }
    }
}

impl KernelSpec {
    pub fn build(&self, grid: GridSpec, epsilon: f64) -> Result<RescaledKernel> {
        let base = make_kernel(self.profile, self.support_radius, grid)?;
        rescale(&base, epsilon)
    }
}

/// Fixed-point solver settings, applied identically to both solves of a
/// comparison.
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

/// Slack for theorem inequalities: `1e-6 * scale + 2 * solver_tol`.
pub fn slack_policy(scale: f64, solver_tol: f64) -> f64 {
    1e-6 * scale + 2.0 * solver_tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonKind {
    Stationary,
    Evolution,
    Corollary,
}

impl ComparisonKind {
    pub fn name(&self) -> &'static str {
        match self {
            ComparisonKind::Stationary => "stationary",
            ComparisonKind::Evolution => "evolution",
            ComparisonKind::Corollary => "corollary",
        }
    }
}

/// Outcome of one comparison experiment.
///
/// `gap = norm_symmetrized - norm_original` is recorded even when negative
/// (a negative value beyond the slack is a test failure, not a data error).
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub kind: ComparisonKind,
    pub dim: usize,
    pub cells_per_axis: usize,
    pub domain_cells: usize,
    pub profile: Option<KernelProfile>,
    pub epsilon: Option<f64>,
    pub absorption: f64,
    pub p: f64,
    pub norm_original: f64,
    pub norm_symmetrized: f64,
    pub gap: f64,
    pub slack: f64,
    pub comparison_ok: bool,
    /// Tolerance used for the radial verdict on the symmetrized solution.
    pub radial_tol: f64,
    /// Measured worst radial violation of the symmetrized solution.
    pub radial_violation: f64,
    pub radial_ok: bool,
    pub iterations_original: usize,
    pub iterations_symmetrized: usize,
    pub residual_original: f64,
    pub residual_symmetrized: f64,
    /// Evolution only: per-step `|u_n|_p - |v_n|_p`.
    pub per_step_gaps: Vec<f64>,
    /// Evolution only: per-step `max(|u_n|_p, |v_n|_p)`.
    pub per_step_scales: Vec<f64>,
    /// Evolution only: worst radial violation over the steps.
    pub per_step_radial_violation: Vec<f64>,
    /// Evolution only: equal-radius tie spread of the symmetrized inputs
    /// (the scheme cannot amplify it; see radial_tol).
    pub input_tie_spread: f64,
    pub steps: Option<usize>,
    pub tau: Option<f64>,
    pub wall_time: Duration,
}

impl ComparisonReport {
    pub fn per_step_min_gap(&self) -> Option<f64> {
        self.per_step_gaps
            .iter()
            .copied()
            .fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.min(g))))
    }
}

/// Symmetrized domain (radial prefix with the same cell count) and
/// symmetrized forcing.
pub fn symmetrize(domain: &DomainMask, forcing: &GridField) -> Result<(DomainMask, GridField)> {
    let order = RadialOrder::new(*domain.grid());
    let star = order.prefix_mask(domain.len())?;
    let f_star = schwarz_rearrange(forcing)?;
    Ok((star, f_star))
}

/// Solves `SNP(domain, F)` and `SNP(domain*, F*)` with identical settings
/// and reports norms, gap, and the radial verdict on the symmetrized
/// solution (tolerance `1e-8 * max u`).
#[allow(clippy::too_many_arguments)]
pub fn compare_stationary(
    domain: &DomainMask,
    forcing: &GridField,
    epsilon: f64,
    absorption: f64,
    p: f64,
    kernel_spec: &KernelSpec,
    settings: &SolverSettings,
) -> Result<ComparisonReport> {
    let start = Instant::now();
    let grid = *domain.grid();
    let rk = kernel_spec.build(grid, epsilon)?;
    let (star, f_star) = symmetrize(domain, forcing)?;

    let orig = StationaryProblem::new(domain.clone(), forcing.clone(), absorption, rk.clone())?;
    let (v, rep_v) = solve_stationary(&orig, settings.tol, settings.max_iter)?;
    let sym = StationaryProblem::new(star, f_star, absorption, rk)?;
    let (u, rep_u) = solve_stationary(&sym, settings.tol, settings.max_iter)?;

    let nv = lp_norm(&v, p)?;
    let nu = lp_norm(&u, p)?;
    let gap = nu - nv;
    let scale = nu.max(nv);
    let slack = slack_policy(scale, settings.tol);
    let radial_tol = 1e-8 * u.max_abs();
    let viol = radial_violation(&u);
    Ok(ComparisonReport {
        kind: ComparisonKind::Stationary,
        dim: grid.dim(),
        cells_per_axis: grid.cells_per_axis(),
        domain_cells: domain.len(),
        profile: Some(kernel_spec.profile),
        epsilon: Some(epsilon),
        absorption,
        p,
        norm_original: nv,
        norm_symmetrized: nu,
        gap,
        slack,
        comparison_ok: gap >= -slack,
        radial_tol,
        radial_violation: viol,
        radial_ok: viol <= radial_tol,
        iterations_original: rep_v.iterations,
        iterations_symmetrized: rep_u.iterations,
        residual_original: rep_v.final_residual.unwrap_or(0.0),
        residual_symmetrized: rep_u.final_residual.unwrap_or(0.0),
        per_step_gaps: Vec::new(),
        per_step_scales: Vec::new(),
        per_step_radial_violation: Vec::new(),
        input_tie_spread: 0.0,
        steps: None,
        tau: None,
        wall_time: start.elapsed(),
    })
}

/// Runs the explicit scheme for `ENP(domain, G, v0)` and its symmetrized
/// version; reports space-time norms of the piecewise-constant
/// interpolants, per-step gaps, and per-step radial verdicts.
///
/// The radial tolerance is `input_tie_spread + 1e-8 * max u_n`: the scheme
/// coefficients are non-negative and sum to at most one, so the
/// equal-radius tie spread that sort-and-place rearrangement gives the
/// symmetrized inputs propagates without amplification.
#[allow(clippy::too_many_arguments)]
pub fn compare_evolution(
    domain: &DomainMask,
    forcing: &[GridField],
    initial: &GridField,
    epsilon: f64,
    absorption: f64,
    total_time: f64,
    tau: f64,
    p: f64,
    kernel_spec: &KernelSpec,
) -> Result<ComparisonReport> {
    compare_evolution_with_trajectories(
        domain, forcing, initial, epsilon, absorption, total_time, tau, p, kernel_spec,
    )
    .map(|(rep, _, _)| rep)
}

/// [`compare_evolution`] plus both trajectories (for snapshot writers).
#[allow(clippy::too_many_arguments)]
pub fn compare_evolution_with_trajectories(
    domain: &DomainMask,
    forcing: &[GridField],
    initial: &GridField,
    epsilon: f64,
    absorption: f64,
    total_time: f64,
    tau: f64,
    p: f64,
    kernel_spec: &KernelSpec,
) -> Result<(ComparisonReport, Vec<GridField>, Vec<GridField>)> {
    let start = Instant::now();
    let grid = *domain.grid();
    if !(tau > 0.0) || !(total_time > 0.0) {
        return Err(Error::InvalidArgument(
            "tau and total_time must be positive".into(),
        ));
    }
    let steps_f = total_time / tau;
    let steps = steps_f.round() as usize;
    if steps == 0 || (steps_f - steps as f64).abs() > 1e-9 * steps_f {
        return Err(Error::InvalidArgument(format!(
            "horizon {total_time} is not an integer multiple of tau {tau}"
        )));
    }
    if forcing.len() != steps {
        return Err(Error::InvalidArgument(format!(
            "need {steps} forcing fields, got {}",
            forcing.len()
        )));
    }
    let rk = kernel_spec.build(grid, epsilon)?;

    let order = RadialOrder::new(grid);
    let star = Arc::new(order.prefix_mask(domain.len())?);
    let v0_star = schwarz_rearrange(initial)?;
    let g_star: Vec<GridField> = forcing
        .iter()
        .map(schwarz_rearrange)
        .collect::<Result<_>>()?;

    let mut tie_spread = equal_radius_spread(&v0_star);
    for g in &g_star {
        tie_spread = tie_spread.max(equal_radius_spread(g));
    }

    let orig = EvolutionProblem::new(
        domain.clone(),
        forcing.to_vec(),
        initial.clone(),
        absorption,
        rk.clone(),
        tau,
        steps,
    )?;
    let sym = EvolutionProblem::new(star, g_star, v0_star, absorption, rk, tau, steps)?;
    let (traj_v, rep_v) = solve_evolution(&orig)?;
    let (traj_u, rep_u) = solve_evolution(&sym)?;

    let mut per_step_gaps = Vec::with_capacity(steps + 1);
    let mut per_step_scales = Vec::with_capacity(steps + 1);
    let mut per_step_radial = Vec::with_capacity(steps + 1);
    let mut max_u: f64 = 0.0;
    for (vn, un) in traj_v.iter().zip(&traj_u) {
        let nv = lp_norm(vn, p)?;
        let nu = lp_norm(un, p)?;
        per_step_gaps.push(nu - nv);
        per_step_scales.push(nu.max(nv));
        per_step_radial.push(radial_violation(un));
        max_u = max_u.max(un.max_abs());
    }
    let nv = Interpolant::new(&traj_v, tau)?.space_time_norm(p)?;
    let nu = Interpolant::new(&traj_u, tau)?.space_time_norm(p)?;
    let gap = nu - nv;
    let scale = nu.max(nv);
    let slack = slack_policy(scale, 0.0);
    let radial_tol = tie_spread + 1e-8 * max_u;
    let worst_radial = per_step_radial.iter().copied().fold(0.0f64, f64::max);

    let report = ComparisonReport {
        kind: ComparisonKind::Evolution,
        dim: grid.dim(),
        cells_per_axis: grid.cells_per_axis(),
        domain_cells: domain.len(),
        profile: Some(kernel_spec.profile),
        epsilon: Some(epsilon),
        absorption,
        p,
        norm_original: nv,
        norm_symmetrized: nu,
        gap,
        slack,
        comparison_ok: gap >= -slack
            && per_step_gaps
                .iter()
                .zip(&per_step_scales)
                .all(|(g, s)| *g >= -slack_policy(*s, 0.0)),
        radial_tol,
        radial_violation: worst_radial,
        radial_ok: worst_radial <= radial_tol,
        iterations_original: rep_v.iterations,
        iterations_symmetrized: rep_u.iterations,
        residual_original: 0.0,
        residual_symmetrized: 0.0,
        per_step_gaps,
        per_step_scales,
        per_step_radial_violation: per_step_radial,
        input_tie_spread: tie_spread,
        steps: Some(steps),
        tau: Some(tau),
        wall_time: start.elapsed(),
    };
    Ok((report, traj_v, traj_u))
}

/// Solves `SLP(domain, F)` and `SLP(domain*, F*)` with the direct local
/// solver; the gap contract is asserted against measured discretization
/// slack by the refinement harness, not at a single resolution.
pub fn corollary_check(
    domain: &DomainMask,
    forcing: &GridField,
    absorption: f64,
    p: f64,
    tol: f64,
) -> Result<ComparisonReport> {
    let start = Instant::now();
    let grid = *domain.grid();
    let (star, f_star) = symmetrize(domain, forcing)?;
    let v = solve_poisson(
        &LocalStationaryProblem::new(domain.clone(), forcing.clone(), absorption)?,
        tol,
    )?;
    let u = solve_poisson(&LocalStationaryProblem::new(star, f_star, absorption)?, tol)?;
    let nv = lp_norm(&v, p)?;
    let nu = lp_norm(&u, p)?;
    let gap = nu - nv;
    let scale = nu.max(nv);
    let slack = slack_policy(scale, tol);
    let radial_tol = 1e-8 * u.max_abs();
    let viol = radial_violation(&u);
    Ok(ComparisonReport {
        kind: ComparisonKind::Corollary,
        dim: grid.dim(),
        cells_per_axis: grid.cells_per_axis(),
        domain_cells: domain.len(),
        profile: None,
        epsilon: None,
        absorption,
        p,
        norm_original: nv,
        norm_symmetrized: nu,
        gap,
        slack,
        comparison_ok: gap >= -slack,
        radial_tol,
        radial_violation: viol,
        radial_ok: viol <= radial_tol,
        iterations_original: 1,
        iterations_symmetrized: 1,
        residual_original: 0.0,
        residual_symmetrized: 0.0,
        per_step_gaps: Vec::new(),
        per_step_scales: Vec::new(),
        per_step_radial_violation: Vec::new(),
        input_tie_spread: 0.0,
        steps: None,
        tau: None,
        wall_time: start.elapsed(),
    })
}

/// Local solutions of the corollary problems, for refinement studies.
pub fn corollary_solutions(
    domain: &DomainMask,
    forcing: &GridField,
    absorption: f64,
    tol: f64,
) -> Result<(GridField, GridField)> {
    let (star, f_star) = symmetrize(domain, forcing)?;
    let v = solve_poisson(
        &LocalStationaryProblem::new(domain.clone(), forcing.clone(), absorption)?,
        tol,
    )?;
    let u = solve_poisson(&LocalStationaryProblem::new(star, f_star, absorption)?, tol)?;
    Ok((v, u))
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub epsilon: f64,
    pub err_original: f64,
    pub err_symmetrized: f64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub norm_local_original: f64,
    pub norm_local_symmetrized: f64,
}

/// For each epsilon (strictly decreasing), solves the nonlocal problems on
/// `domain` and `domain*` and tabulates `|v_eps - V|_p` and `|u_eps - U|_p`
/// against the local solutions.
pub fn convergence_sweep(
    domain: &DomainMask,
    forcing: &GridField,
    absorption: f64,
    p: f64,
    kernel_spec: &KernelSpec,
    epsilons: &[f64],
    settings: &SolverSettings,
) -> Result<SweepTable> {
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon sweep".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "epsilons must be strictly decreasing".into(),
        ));
    }
    let (star, f_star) = symmetrize(domain, forcing)?;
    let big_v = solve_poisson(
        &LocalStationaryProblem::new(domain.clone(), forcing.clone(), absorption)?,
        settings.tol.max(1e-9),
    )?;
    let big_u = solve_poisson(
        &LocalStationaryProblem::new(star.clone(), f_star.clone(), absorption)?,
        settings.tol.max(1e-9),
    )?;
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let rk = kernel_spec.build(*domain.grid(), eps)?;
        let (v, _) = solve_stationary(
            &StationaryProblem::new(domain.clone(), forcing.clone(), absorption, rk.clone())?,
            settings.tol,
            settings.max_iter,
        )?;
        let (u, _) = solve_stationary(
            &StationaryProblem::new(star.clone(), f_star.clone(), absorption, rk)?,
            settings.tol,
            settings.max_iter,
        )?;
        rows.push(SweepRow {
            epsilon: eps,
            err_original: masked_diff_norm(&v, &big_v, p)?,
            err_symmetrized: masked_diff_norm(&u, &big_u, p)?,
        });
    }
    Ok(SweepTable {
        rows,
        norm_local_original: lp_norm(&big_v, p)?,
        norm_local_symmetrized: lp_norm(&big_u, p)?,
    })
}

/// `L^p` norm of `a - b` over the mask of `a` (`b` read with zero
/// extension).
pub fn masked_diff_norm(a: &GridField, b: &GridField, p: f64) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::InvalidArgument("grid mismatch".into()));
    }
    let vals: Vec<f64> = a
        .mask()
        .members()
        .into_iter()
        .map(|c| a.value(c) - b.value(c))
        .collect();
    let diff = GridField::from_member_values(a.mask().clone(), &vals)?;
    lp_norm(&diff, p)
}

/// Restriction of a field on a `2n`-cell grid to the matching `n`-cell
/// grid, averaging the `2^N` fine cells inside each coarse cell (fine
/// values read with zero extension). Used as the measured-discretization
/// proxy in refinement studies.
pub fn restrict_mean_2x(fine: &GridField, coarse: GridSpec) -> Result<GridField> {
    let fg = *fine.grid();
    if fg.dim() != coarse.dim()
        || fg.cells_per_axis() != 2 * coarse.cells_per_axis()
        || (fg.half_extent() - coarse.half_extent()).abs() > 1e-12 * coarse.half_extent()
    {
        return Err(Error::InvalidArgument(
            "fine grid must be the 2x refinement of the coarse grid".into(),
        ));
    }
    let full = DomainMask::full(coarse);
    let nf = fg.cells_per_axis();
    let vals: Vec<f64> = full
        .members()
        .into_iter()
        .map(|c| {
            let [i, j] = coarse.axis_indices(c);
            match coarse.dim() {
                1 => 0.5 * (fine.value(2 * i) + fine.value(2 * i + 1)),
                _ => {
                    let f = |a: usize, b: usize| fine.value(a + b * nf);
                    0.25 * (f(2 * i, 2 * j)
                        + f(2 * i + 1, 2 * j)
                        + f(2 * i, 2 * j + 1)
                        + f(2 * i + 1, 2 * j + 1))
                }
            }
        })
        .collect();
    GridField::from_member_values(full, &vals)
}
