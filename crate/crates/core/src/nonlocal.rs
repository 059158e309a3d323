//! Solvers for the nonlocal Dirichlet problems.
//!
//! The stationary problem `-∫J_eps(x-y)(w(y)-w(x))dy + c w = F` on a
//! domain (zero outside) is solved through its fixed-point form
//! `w = alpha * rho ⊛_domain w + xi` with `alpha = C1/(C1 + c eps^2)` and
//! `xi = eps^2 F / (C1 + c eps^2)`, iterated from `w_0 = xi`. The evolution
//! problem uses the explicit scheme
//! `w_{n+1} = (tau C1/eps^2) rho ⊛ w_n + beta w_n + tau G_n` with
//! `beta = 1 - tau (c + C1/eps^2)`, stable (and order-preserving) for
//! `tau < 1/(c + C1/eps^2)`.

use crate::error::{Error, Result};
use crate::grid::{DomainMask, GridField};
use crate::kernel::{convolve_on, ConvMode, RescaledKernel};
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Stationary nonlocal Dirichlet problem on a domain mask.
#[derive(Debug, Clone)]
pub struct StationaryProblem {
    domain: Arc<DomainMask>,
    forcing: GridField,
    absorption: f64,
    kernel: RescaledKernel,
}

impl StationaryProblem {
    pub fn new(
        domain: impl Into<Arc<DomainMask>>,
        forcing: GridField,
        absorption: f64,
        kernel: RescaledKernel,
    ) -> Result<Self> {
        let domain = domain.into();
        if domain.grid() != forcing.grid() || domain.grid() != kernel.grid() {
            return Err(Error::InvalidArgument(
                "domain, forcing, and kernel must share one grid".into(),
            ));
        }
        if !forcing.mask().subset_of(&domain) {
            return Err(Error::InvalidArgument(
                "forcing must be supported in the domain".into(),
            ));
        }
        if forcing.min_value() < 0.0 {
            return Err(Error::InvalidArgument("forcing must be non-negative".into()));
        }
        if !(absorption >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "absorption must be non-negative, got {absorption}"
            )));
        }
        Ok(StationaryProblem {
            domain,
            forcing,
            absorption,
            kernel,
        })
    }

    pub fn domain(&self) -> &Arc<DomainMask> {
        &self.domain
    }

    pub fn forcing(&self) -> &GridField {
        &self.forcing
    }

    pub fn absorption(&self) -> f64 {
        self.absorption
    }

    pub fn kernel(&self) -> &RescaledKernel {
        &self.kernel
    }
}

/// Coefficients of the fixed-point form `w = alpha * rho ⊛ w + xi`.
#[derive(Debug, Clone)]
pub struct AuxCoefficients {
    pub alpha: f64,
    pub xi: GridField,
}

/// `alpha = C1 / (C1 + c eps^2)`, `xi = eps^2 F / (C1 + c eps^2)`,
/// with `xi` carried on the domain mask.
pub fn aux_coefficients(problem: &StationaryProblem) -> Result<AuxCoefficients> {
    let eps2 = problem.kernel.epsilon() * problem.kernel.epsilon();
    let denom = problem.kernel.c1() + problem.absorption * eps2;
    let alpha = problem.kernel.c1() / denom;
    let scale = eps2 / denom;
    let vals: Vec<f64> = problem
        .domain
        .members()
        .into_iter()
        .map(|c| problem.forcing.value(c) * scale)
        .collect();
    let xi = GridField::from_member_values(problem.domain.clone(), &vals)?;
    Ok(AuxCoefficients { alpha, xi })
}

/// Metadata of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Fixed-point iterations (stationary) or time steps (evolution).
    pub iterations: usize,
    /// Sup-norm fixed-point residual of the returned field (stationary).
    pub final_residual: Option<f64>,
    pub alpha: f64,
    pub beta: Option<f64>,
    /// `tau_max - tau` for the evolution scheme.
    pub stability_margin: Option<f64>,
    pub wall_time: Duration,
}

/// Default iteration budget: scales with `(diam(domain)/eps)^2`, the
/// mixing time of the kernel random walk that drives convergence at c = 0.
pub fn default_max_iter(problem: &StationaryProblem) -> usize {
    let ratio = problem.domain.diameter() / problem.kernel.epsilon();
    200 + (20.0 * ratio * ratio).ceil() as usize
}

/// Solves the stationary problem by the fixed-point recursion
/// `w_k = alpha * rho ⊛_domain w_{k-1} + xi`, `w_0 = xi`.
///
/// Returns the first iterate whose exact sup-norm fixed-point residual is
/// at most `tol`. Each iteration checks the restricted-convolution mass
/// bound and that the residual never grows (both hold structurally for the
/// non-negative iteration).
pub fn solve_stationary(
    problem: &StationaryProblem,
    tol: f64,
    max_iter: Option<usize>,
) -> Result<(GridField, SolveReport)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(problem)).max(1);
    let start = Instant::now();
    let aux = aux_coefficients(problem)?;
    let mut w = aux.xi.clone();
    let mut prev_residual = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let t = convolve_on(
            problem.domain.clone(),
            problem.kernel.rho(),
            &w,
            ConvMode::Restricted(&problem.domain),
            true,
        )?;
        // restricted convolution against a unit-mass kernel cannot gain mass
        if t.mass() > w.mass() * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::NumericalFailure(format!(
                "restricted convolution gained mass: {} -> {}",
                w.mass(),
                t.mass()
            )));
        }
        let w_next = aux.xi.add_scaled(&t, aux.alpha)?;
        residual = sup_diff(&w_next, &w);
        if residual > prev_residual * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::NumericalFailure(format!(
                "fixed-point residual grew: {prev_residual} -> {residual}"
            )));
        }
        prev_residual = residual;
        if residual <= tol {
            // `residual` is the exact fixed-point defect of `w`
            let report = SolveReport {
                iterations: it,
                final_residual: Some(residual),
                alpha: aux.alpha,
                beta: None,
                stability_margin: None,
                wall_time: start.elapsed(),
            };
            return Ok((w, report));
        }
        w = w_next;
    }
    Err(Error::ConvergenceFailure {
        iterations: max_iter,
        residual,
    })
}

fn sup_diff(a: &GridField, b: &GridField) -> f64 {
    let mut m: f64 = 0.0;
    a.mask()
        .for_each_member(|c| m = m.max((a.value(c) - b.value(c)).abs()));
    m
}

/// Largest stable time step `tau_max = 1 / (c + C1/eps^2)`; callers must
/// use tau strictly below it.
pub fn stability_max_tau(c: f64, kernel: &RescaledKernel) -> f64 {
    stability_max_tau_parts(c, kernel.c1(), kernel.epsilon())
}

/// `1 / (c + C1/eps^2)` from raw constants.
pub fn stability_max_tau_parts(c: f64, c1: f64, epsilon: f64) -> f64 {
    1.0 / (c + c1 / (epsilon * epsilon))
}

/// Evolution nonlocal Dirichlet problem with left-endpoint forcing samples.
#[derive(Debug, Clone)]
pub struct EvolutionProblem {
    domain: Arc<DomainMask>,
    forcing: Vec<GridField>,
    initial: GridField,
    absorption: f64,
    kernel: RescaledKernel,
    tau: f64,
    steps: usize,
}

impl EvolutionProblem {
    /// `forcing[n]` is `G(t_n, ·)`; the horizon is `steps * tau`.
    pub fn new(
        domain: impl Into<Arc<DomainMask>>,
        forcing: Vec<GridField>,
        initial: GridField,
        absorption: f64,
        kernel: RescaledKernel,
        tau: f64,
        steps: usize,
    ) -> Result<Self> {
        let domain = domain.into();
        if domain.grid() != initial.grid() || domain.grid() != kernel.grid() {
            return Err(Error::InvalidArgument(
                "domain, initial data, and kernel must share one grid".into(),
            ));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("need at least one time step".into()));
        }
        if forcing.len() != steps {
            return Err(Error::InvalidArgument(format!(
                "need one forcing field per step: {} != {steps}",
                forcing.len()
            )));
        }
        if !(absorption >= 0.0) {
            return Err(Error::InvalidArgument("absorption must be >= 0".into()));
        }
        let tau_max = stability_max_tau(absorption, &kernel);
        if !(tau > 0.0) || tau >= tau_max {
            return Err(Error::InvalidArgument(format!(
                "time step {tau} violates the stability bound tau < {tau_max}"
            )));
        }
        for (n, g) in forcing.iter().enumerate() {
            if g.grid() != domain.grid() || !g.mask().subset_of(&domain) {
                return Err(Error::InvalidArgument(format!(
                    "forcing at step {n} not supported in the domain"
                )));
            }
            if g.min_value() < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "forcing at step {n} must be non-negative"
                )));
            }
        }
        if !initial.mask().subset_of(&domain) || initial.min_value() < 0.0 {
            return Err(Error::InvalidArgument(
                "initial data must be non-negative and supported in the domain".into(),
            ));
        }
        Ok(EvolutionProblem {
            domain,
            forcing,
            initial,
            absorption,
            kernel,
            tau,
            steps,
        })
    }

    pub fn domain(&self) -> &Arc<DomainMask> {
        &self.domain
    }

    pub fn kernel(&self) -> &RescaledKernel {
        &self.kernel
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.tau
    }

    pub fn absorption(&self) -> f64 {
        self.absorption
    }
}

/// Runs the explicit scheme; the trajectory has `steps + 1` states with
/// `w_0` the initial data. All scheme coefficients are non-negative under
/// the stability condition, so non-negative data stay non-negative.
pub fn solve_evolution(problem: &EvolutionProblem) -> Result<(Vec<GridField>, SolveReport)> {
    let tau_max = stability_max_tau(problem.absorption, &problem.kernel);
    if problem.tau >= tau_max {
        return Err(Error::InvalidArgument(format!(
            "time step {} violates the stability bound tau < {tau_max}",
            problem.tau
        )));
    }
    let start = Instant::now();
    let a = problem.tau * problem.kernel.jeps_scale();
    let beta = 1.0 - problem.tau * (problem.absorption + problem.kernel.jeps_scale());
    let members = problem.domain.members();

    let mut traj = Vec::with_capacity(problem.steps + 1);
    let w0: Vec<f64> = members.iter().map(|&c| problem.initial.value(c)).collect();
    traj.push(GridField::from_member_values(problem.domain.clone(), &w0)?);

    for n in 0..problem.steps {
        let cur = traj.last().unwrap();
        let conv = convolve_on(
            problem.domain.clone(),
            problem.kernel.rho(),
            cur,
            ConvMode::Restricted(&problem.domain),
            true,
        )?;
        let g = &problem.forcing[n];
        let vals: Vec<f64> = members
            .iter()
            .map(|&c| a * conv.value(c) + beta * cur.value(c) + problem.tau * g.value(c))
            .collect();
        traj.push(GridField::from_member_values(problem.domain.clone(), &vals)?);
    }
    let report = SolveReport {
        iterations: problem.steps,
        final_residual: None,
        alpha: a,
        beta: Some(beta),
        stability_margin: Some(tau_max - problem.tau),
        wall_time: start.elapsed(),
    };
    Ok((traj, report))
}

/// Piecewise-constant-in-time reading of a trajectory:
/// `w(t) = w_n` for `t ∈ (t_n, t_{n+1}]`, `w(0) = w_0`.
pub struct Interpolant<'a> {
    trajectory: &'a [GridField],
    tau: f64,
}

impl<'a> Interpolant<'a> {
    pub fn new(trajectory: &'a [GridField], tau: f64) -> Result<Self> {
        if trajectory.is_empty() {
            return Err(Error::InvalidArgument("empty trajectory".into()));
        }
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument("tau must be positive".into()));
        }
        Ok(Interpolant { trajectory, tau })
    }

    pub fn horizon(&self) -> f64 {
        (self.trajectory.len() - 1) as f64 * self.tau
    }

    pub fn eval(&self, t: f64) -> Result<&GridField> {
        if !(t >= 0.0) || t > self.horizon() * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "time {t} outside [0, {}]",
                self.horizon()
            )));
        }
        if t == 0.0 || self.trajectory.len() == 1 {
            return Ok(&self.trajectory[0]);
        }
        // find n with t in ((n-1) tau, n tau]; guard against division rounding
        let mut n = (t / self.tau).ceil() as usize;
        if n >= 1 && t <= (n - 1) as f64 * self.tau {
            n -= 1;
        }
        if t > n as f64 * self.tau {
            n += 1;
        }
        let idx = (n.max(1) - 1).min(self.trajectory.len() - 2);
        Ok(&self.trajectory[idx])
    }

    /// Space-time norm `(sum_n tau * |w_n|_p^p)^(1/p)` over the interpolant
    /// intervals, the max over steps for `p = inf`.
    pub fn space_time_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "p must be >= 1 or infinite, got {p}"
            )));
        }
        let states = &self.trajectory[..self.trajectory.len() - 1];
        if states.is_empty() {
            return Ok(0.0);
        }
        if p.is_infinite() {
            let mut m: f64 = 0.0;
            for w in states {
                m = m.max(crate::grid::lp_norm(w, p)?);
            }
            return Ok(m);
        }
        let mut s = 0.0;
        for w in states {
            s += self.tau * crate::grid::lp_norm(w, p)?.powf(p);
        }
        Ok(s.powf(1.0 / p))
    }
}
