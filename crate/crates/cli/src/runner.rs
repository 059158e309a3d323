//! Experiment orchestration: builds inputs from a [`Config`], runs the
//! requested command, and writes the report files.
//!
//! Data files (`report.csv`, `summary.txt`, `deviation.csv`, `failures/*`)
//! are pure functions of the config and seed; wall-clock metadata goes to
//! `run_meta.txt` only, so re-runs are byte-identical regardless of thread
//! count.

use crate::config::{fmt_num, Command, Config, DomainKind, FieldSection};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use talenti_core::analysis::{
    compare_evolution, compare_stationary, convergence_sweep, corollary_check, ComparisonReport,
    KernelSpec, SolverSettings,
};
use talenti_core::grid::lp_norm;
use talenti_core::kernel::{ball_mass_decay, convolve, gaussian_deviation, ConvMode};
use talenti_core::nonlocal::stability_max_tau;
use talenti_core::rearrange::{
    check_equimeasurable, hardy_littlewood_gap, radial_violation, riesz_gap, schwarz_rearrange,
};
use talenti_core::suite;
use talenti_core::GridField;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub violations: Vec<String>,
    /// Deterministic data files written (relative to the out dir).
    pub data_files: Vec<PathBuf>,
}

pub const COMPARE_HEADER: &str = "instance,kind,dim,cells_per_axis,domain_cells,profile,epsilon,c,p,norm_original,norm_symmetrized,gap,slack,comparison_ok,radial_tol,radial_violation,radial_ok,iterations_original,iterations_symmetrized,residual_original,residual_symmetrized,steps,tau,per_step_min_gap";
pub const SWEEP_HEADER: &str = "epsilon,err_original,err_symmetrized";
pub const DECAY_HEADER: &str = "k,mass";
pub const DEVIATION_HEADER: &str = "k,deviation";
pub const CHECK_HEADER: &str = "instance,check,dim,value,threshold,ok";

struct CommandOutput {
    report: String,
    extra_files: Vec<(PathBuf, String)>,
    summary_body: String,
    violations: Vec<String>,
    replays: Vec<(u64, Config)>,
    min_gap: Option<f64>,
}

/// Runs the configured experiment, writing artifacts under `out_dir`.
pub fn run(cfg: &Config, out_dir: &Path) -> Result<RunOutcome, RunError> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        return Err(RunError::Config(violations.join("; ")));
    }
    let started = std::time::Instant::now();
    std::fs::create_dir_all(out_dir)?;

    let out = match cfg.command {
        Command::CompareStationary => run_compare_stationary(cfg),
        Command::CompareEvolution => run_compare_evolution(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::Corollary => run_corollary(cfg),
        Command::CltDecay => run_clt_decay(cfg),
        Command::CheckInequalities => run_check_inequalities(cfg),
    }
    .map_err(RunError::Config)?;

    let mut data_files = Vec::new();
    let report_path = out_dir.join("report.csv");
    std::fs::write(&report_path, &out.report)?;
    data_files.push(PathBuf::from("report.csv"));
    for (name, content) in &out.extra_files {
        let path = out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, content)?;
        data_files.push(name.clone());
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "command: {}", cfg.command.name());
    let _ = writeln!(summary, "seed: {}", cfg.seed);
    let _ = writeln!(summary, "strict: {}", cfg.strict);
    summary.push_str(&out.summary_body);
    let _ = writeln!(
        summary,
        "min_gap: {}",
        out.min_gap.map(fmt_num).unwrap_or_else(|| "n/a".into())
    );
    let _ = writeln!(summary, "failures: {}", out.violations.len());
    std::fs::write(out_dir.join("summary.txt"), &summary)?;
    data_files.push(PathBuf::from("summary.txt"));

    if !out.violations.is_empty() {
        let fail_dir = out_dir.join("failures");
        std::fs::create_dir_all(&fail_dir)?;
        let mut manifest = String::new();
        for v in &out.violations {
            let _ = writeln!(manifest, "{v}");
        }
        std::fs::write(fail_dir.join("manifest.txt"), &manifest)?;
        data_files.push(PathBuf::from("failures/manifest.txt"));
        for (idx, replay) in &out.replays {
            let name = format!("replay_{idx:04}.cfg");
            std::fs::write(fail_dir.join(&name), replay.to_text())?;
            data_files.push(PathBuf::from("failures").join(name));
        }
    }

    // wall-clock metadata segregated from the deterministic data files
    let meta = format!(
        "timestamp_unix_ms: {}\nwall_ms: {}\n",
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        started.elapsed().as_millis()
    );
    std::fs::write(out_dir.join("run_meta.txt"), meta)?;

    Ok(RunOutcome {
        violations: out.violations,
        data_files,
    })
}

fn comparison_pass(rep: &ComparisonReport, strict: bool) -> bool {
    if strict {
        rep.gap >= 0.0 && rep.per_step_gaps.iter().all(|&g| g >= 0.0)
    } else {
        rep.comparison_ok
    }
}

fn compare_row(idx: u64, rep: &ComparisonReport) -> String {
    format!(
        "{idx},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        rep.kind.name(),
        rep.dim,
        rep.cells_per_axis,
        rep.domain_cells,
        rep.profile.map(|p| p.name()).unwrap_or(""),
        rep.epsilon.map(fmt_num).unwrap_or_default(),
        fmt_num(rep.absorption),
        fmt_num(rep.p),
        fmt_num(rep.norm_original),
        fmt_num(rep.norm_symmetrized),
        fmt_num(rep.gap),
        fmt_num(rep.slack),
        rep.comparison_ok,
        fmt_num(rep.radial_tol),
        fmt_num(rep.radial_violation),
        rep.radial_ok,
        rep.iterations_original,
        rep.iterations_symmetrized,
        fmt_num(rep.residual_original),
        fmt_num(rep.residual_symmetrized),
        rep.steps.map(|s| s.to_string()).unwrap_or_default(),
        rep.tau.map(fmt_num).unwrap_or_default(),
        rep.per_step_min_gap().map(fmt_num).unwrap_or_default(),
    )
}

fn replay_config(cfg: &Config, idx: u64) -> Config {
    let mut c = cfg.clone();
    c.replay_instance = Some(idx);
    c
}

fn run_compare_stationary(cfg: &Config) -> Result<CommandOutput, String> {
    let spec = KernelSpec {
        profile: cfg.profile,
        support_radius: cfg.support_radius,
    };
    let settings = SolverSettings {
        tol: cfg.tol,
        max_iter: None,
    };
    let mut report = String::from(COMPARE_HEADER);
    report.push('\n');
    let mut violations = Vec::new();
    let mut replays = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut count = 0usize;

    let mut run_one = |idx: u64,
                       domain: &talenti_core::DomainMask,
                       forcing: &GridField,
                       eps: f64,
                       c: f64,
                       p: f64,
                       report: &mut String|
     -> Result<(), String> {
        match compare_stationary(domain, forcing, eps, c, p, &spec, &settings) {
            Ok(rep) => {
                min_gap = min_gap.min(rep.gap);
                report.push_str(&compare_row(idx, &rep));
                report.push('\n');
                if !comparison_pass(&rep, cfg.strict) {
                    violations.push(format!(
                        "instance {idx}: gap {} below slack {}",
                        fmt_num(rep.gap),
                        fmt_num(rep.slack)
                    ));
                    replays.push((idx, replay_config(cfg, idx)));
                }
            }
            Err(e) => {
                violations.push(format!("instance {idx}: solver error: {e}"));
                replays.push((idx, replay_config(cfg, idx)));
            }
        }
        Ok(())
    };

    if cfg.domain_kind == DomainKind::RandomSuite {
        let total_1d = cfg.instances as u64;
        let total_2d = cfg.instances_2d as u64;
        let indices: Vec<u64> = match cfg.replay_instance {
            Some(r) => vec![r],
            None => (0..total_1d + total_2d).collect(),
        };
        for idx in indices {
            let dim = if idx < total_1d { 1 } else { 2 };
            let inst =
                suite::stationary_instance(cfg.seed, idx, dim).map_err(|e| e.to_string())?;
            run_one(
                idx,
                &inst.domain,
                &inst.forcing,
                inst.epsilon,
                inst.absorption,
                inst.p,
                &mut report,
            )?;
            count += 1;
        }
    } else {
        let grid = cfg.build_grid()?;
        let domain = cfg.build_domain(grid)?;
        let forcing = cfg.build_field(FieldSection::Forcing, &domain, cfg.seed)?;
        run_one(
            0,
            &domain,
            &forcing,
            cfg.epsilon,
            cfg.absorption,
            cfg.p,
            &mut report,
        )?;
        count += 1;
    }

    Ok(CommandOutput {
        report,
        extra_files: Vec::new(),
        summary_body: format!("instances: {count}\n"),
        violations,
        replays,
        min_gap: if count > 0 { Some(min_gap) } else { None },
    })
}

fn run_compare_evolution(cfg: &Config) -> Result<CommandOutput, String> {
    let spec = KernelSpec {
        profile: cfg.profile,
        support_radius: cfg.support_radius,
    };
    let mut report = String::from(COMPARE_HEADER);
    report.push('\n');
    let mut violations = Vec::new();
    let mut replays = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut count = 0usize;

    if cfg.domain_kind == DomainKind::RandomSuite {
        let indices: Vec<u64> = match cfg.replay_instance {
            Some(r) => vec![r],
            None => (0..cfg.instances as u64).collect(),
        };
        for idx in indices {
            let inst = suite::evolution_instance(cfg.seed, idx).map_err(|e| e.to_string())?;
            let rk = spec
                .build(*inst.domain.grid(), inst.epsilon)
                .map_err(|e| e.to_string())?;
            let tau = 0.9 * stability_max_tau(inst.absorption, &rk);
            match compare_evolution(
                &inst.domain,
                &inst.forcing,
                &inst.initial,
                inst.epsilon,
                inst.absorption,
                tau * inst.steps as f64,
                tau,
                inst.p,
                &spec,
            ) {
                Ok(rep) => {
                    min_gap = min_gap.min(rep.gap);
                    report.push_str(&compare_row(idx, &rep));
                    report.push('\n');
                    if !comparison_pass(&rep, cfg.strict) {
                        violations.push(format!(
                            "instance {idx}: evolution comparison failed (gap {}, per-step min {})",
                            fmt_num(rep.gap),
                            rep.per_step_min_gap().map(fmt_num).unwrap_or_default()
                        ));
                        replays.push((idx, replay_config(cfg, idx)));
                    }
                }
                Err(e) => {
                    violations.push(format!("instance {idx}: solver error: {e}"));
                    replays.push((idx, replay_config(cfg, idx)));
                }
            }
            count += 1;
        }
        Ok(CommandOutput {
            report,
            extra_files: Vec::new(),
            summary_body: format!("instances: {count}\n"),
            violations,
            replays,
            min_gap: if count > 0 { Some(min_gap) } else { None },
        })
    } else {
        let grid = cfg.build_grid()?;
        let domain = cfg.build_domain(grid)?;
        let forcing = cfg.build_field(FieldSection::Forcing, &domain, cfg.seed)?;
        let initial = cfg.build_field(FieldSection::Initial, &domain, cfg.seed ^ 1)?;
        let rk = spec.build(grid, cfg.epsilon).map_err(|e| e.to_string())?;
        let tau = if cfg.tau > 0.0 {
            cfg.tau
        } else {
            0.9 * stability_max_tau(cfg.absorption, &rk)
        };
        let forcing_seq: Vec<GridField> = (0..cfg.steps).map(|_| forcing.clone()).collect();
        let (rep, traj_v, traj_u) = talenti_core::analysis::compare_evolution_with_trajectories(
            &domain,
            &forcing_seq,
            &initial,
            cfg.epsilon,
            cfg.absorption,
            tau * cfg.steps as f64,
            tau,
            cfg.p,
            &spec,
        )
        .map_err(|e| e.to_string())?;
        min_gap = min_gap.min(rep.gap);
        report.push_str(&compare_row(0, &rep));
        report.push('\n');
        if !comparison_pass(&rep, cfg.strict) {
            violations.push(format!(
                "evolution comparison failed (gap {}, per-step min {})",
                fmt_num(rep.gap),
                rep.per_step_min_gap().map(fmt_num).unwrap_or_default()
            ));
        }
        // trajectory snapshots every snapshot_stride steps
        let mut extra_files = Vec::new();
        if cfg.snapshot_stride > 0 {
            for (name, traj) in [("original", &traj_v), ("symmetrized", &traj_u)] {
                for (n, state) in traj.iter().enumerate().step_by(cfg.snapshot_stride) {
                    let mut buf = Vec::new();
                    state
                        .write_table(&mut buf)
                        .map_err(|e| format!("snapshot write: {e}"))?;
                    extra_files.push((
                        PathBuf::from(format!("snapshots/{name}_step_{n:04}.csv")),
                        String::from_utf8(buf).expect("field tables are ascii"),
                    ));
                }
            }
        }
        Ok(CommandOutput {
            report,
            extra_files,
            summary_body: "instances: 1\n".into(),
            violations,
            replays,
            min_gap: Some(min_gap),
        })
    }
}

fn run_sweep(cfg: &Config) -> Result<CommandOutput, String> {
    let grid = cfg.build_grid()?;
    let domain = cfg.build_domain(grid)?;
    let forcing = cfg.build_field(FieldSection::Forcing, &domain, cfg.seed)?;
    let spec = KernelSpec {
        profile: cfg.profile,
        support_radius: cfg.support_radius,
    };
    let settings = SolverSettings {
        tol: cfg.tol,
        max_iter: None,
    };
    let table = convergence_sweep(
        &domain,
        &forcing,
        cfg.absorption,
        cfg.p,
        &spec,
        &cfg.epsilons,
        &settings,
    )
    .map_err(|e| e.to_string())?;

    let mut report = String::from(SWEEP_HEADER);
    report.push('\n');
    for row in &table.rows {
        let _ = writeln!(
            report,
            "{},{},{}",
            fmt_num(row.epsilon),
            fmt_num(row.err_original),
            fmt_num(row.err_symmetrized)
        );
    }
    let mut violations = Vec::new();
    let slack_factor = if cfg.strict { 1.0 } else { 1.1 };
    for w in table.rows.windows(2) {
        if w[1].err_original > w[0].err_original * slack_factor {
            violations.push(format!(
                "original error column not decreasing: {} -> {} at epsilon {}",
                fmt_num(w[0].err_original),
                fmt_num(w[1].err_original),
                fmt_num(w[1].epsilon)
            ));
        }
        if w[1].err_symmetrized > w[0].err_symmetrized * slack_factor {
            violations.push(format!(
                "symmetrized error column not decreasing: {} -> {} at epsilon {}",
                fmt_num(w[0].err_symmetrized),
                fmt_num(w[1].err_symmetrized),
                fmt_num(w[1].epsilon)
            ));
        }
    }
    let summary_body = format!(
        "rows: {}\nnorm_local_original: {}\nnorm_local_symmetrized: {}\n",
        table.rows.len(),
        fmt_num(table.norm_local_original),
        fmt_num(table.norm_local_symmetrized)
    );
    Ok(CommandOutput {
        report,
        extra_files: Vec::new(),
        summary_body,
        violations,
        replays: Vec::new(),
        min_gap: None,
    })
}

fn run_corollary(cfg: &Config) -> Result<CommandOutput, String> {
    let grid = cfg.build_grid()?;
    let domain = cfg.build_domain(grid)?;
    let forcing = cfg.build_field(FieldSection::Forcing, &domain, cfg.seed)?;
    let rep = corollary_check(&domain, &forcing, cfg.absorption, cfg.p, cfg.tol.max(1e-9))
        .map_err(|e| e.to_string())?;
    let mut report = String::from(COMPARE_HEADER);
    report.push('\n');
    report.push_str(&compare_row(0, &rep));
    report.push('\n');
    let mut violations = Vec::new();
    if !comparison_pass(&rep, cfg.strict) {
        violations.push(format!(
            "corollary gap {} below slack {}",
            fmt_num(rep.gap),
            fmt_num(rep.slack)
        ));
    }
    Ok(CommandOutput {
        report,
        extra_files: Vec::new(),
        summary_body: String::new(),
        violations,
        replays: Vec::new(),
        min_gap: Some(rep.gap),
    })
}

fn run_clt_decay(cfg: &Config) -> Result<CommandOutput, String> {
    let grid = cfg.build_grid()?;
    let spec = KernelSpec {
        profile: cfg.profile,
        support_radius: cfg.support_radius,
    };
    let rk = spec.build(grid, cfg.epsilon).map_err(|e| e.to_string())?;
    let masses =
        ball_mass_decay(&rk, cfg.ball_radius, cfg.k_max).map_err(|e| e.to_string())?;
    let mut report = String::from(DECAY_HEADER);
    report.push('\n');
    for (i, m) in masses.iter().enumerate() {
        let _ = writeln!(report, "{},{}", i + 1, fmt_num(*m));
    }
    let mut violations = Vec::new();
    for k in 4..masses.len() {
        if masses[k] > masses[k - 1] * (1.0 + 1e-12) {
            violations.push(format!(
                "ball mass not non-increasing at k = {}: {} -> {}",
                k + 1,
                fmt_num(masses[k - 1]),
                fmt_num(masses[k])
            ));
        }
    }

    let mut dev = String::from(DEVIATION_HEADER);
    dev.push('\n');
    let mut prev: Option<f64> = None;
    for &k in &cfg.deviation_ks {
        let d = gaussian_deviation(&rk, k).map_err(|e| e.to_string())?;
        let _ = writeln!(dev, "{k},{}", fmt_num(d));
        if let Some(p) = prev {
            if d >= p {
                violations.push(format!(
                    "gaussian deviation not strictly decreasing at k = {k}: {} -> {}",
                    fmt_num(p),
                    fmt_num(d)
                ));
            }
        }
        prev = Some(d);
    }
    let summary_body = format!(
        "k_max: {}\nlast_mass: {}\n",
        cfg.k_max,
        fmt_num(*masses.last().unwrap())
    );
    Ok(CommandOutput {
        report,
        extra_files: vec![(PathBuf::from("deviation.csv"), dev)],
        summary_body,
        violations,
        replays: Vec::new(),
        min_gap: None,
    })
}

fn run_check_inequalities(cfg: &Config) -> Result<CommandOutput, String> {
    let mut report = String::from(CHECK_HEADER);
    report.push('\n');
    let mut violations = Vec::new();
    let mut replays = Vec::new();
    let n = cfg.instances;

    // equimeasurability and norm preservation
    for idx in 0..n as u64 {
        let f = suite::rearrangement_field(cfg.seed, idx).map_err(|e| e.to_string())?;
        let star = schwarz_rearrange(&f).map_err(|e| e.to_string())?;
        let equi = check_equimeasurable(&f, &star);
        let _ = writeln!(
            report,
            "{idx},equimeasurable,{},{},0,{equi}",
            f.grid().dim(),
            if equi { 1 } else { 0 }
        );
        if !equi {
            violations.push(format!("instance {idx}: rearrangement not equimeasurable"));
            replays.push((idx, replay_config(cfg, idx)));
        }
        for p in [1.0, 2.0, f64::INFINITY] {
            let a = lp_norm(&f, p).map_err(|e| e.to_string())?;
            let b = lp_norm(&star, p).map_err(|e| e.to_string())?;
            let thr = 1e-12 * a.abs().max(1.0);
            let ok = (a - b).abs() <= thr;
            let _ = writeln!(
                report,
                "{idx},norm_preserved_p{},{},{},{},{ok}",
                fmt_num(p),
                f.grid().dim(),
                fmt_num((a - b).abs()),
                fmt_num(thr)
            );
            if !ok {
                violations.push(format!(
                    "instance {idx}: |f|_{} changed under rearrangement by {}",
                    fmt_num(p),
                    fmt_num((a - b).abs())
                ));
                replays.push((idx, replay_config(cfg, idx)));
            }
        }
    }

    // Hardy-Littlewood
    for idx in 0..(n / 2) as u64 {
        let (f1, f2) = suite::rearrangement_pair(cfg.seed, idx).map_err(|e| e.to_string())?;
        let gap = hardy_littlewood_gap(&f1, &f2).map_err(|e| e.to_string())?;
        let scale = lp_norm(&f1, f64::INFINITY).map_err(|e| e.to_string())?
            * lp_norm(&f2, 1.0).map_err(|e| e.to_string())?;
        let thr = -1e-12 * scale.max(1e-300);
        let ok = gap >= thr;
        let _ = writeln!(
            report,
            "{idx},hardy_littlewood,{},{},{},{ok}",
            f1.grid().dim(),
            fmt_num(gap),
            fmt_num(thr)
        );
        if !ok {
            violations.push(format!(
                "instance {idx}: Hardy-Littlewood gap {} below {}",
                fmt_num(gap),
                fmt_num(thr)
            ));
            replays.push((idx, replay_config(cfg, idx)));
        }
    }

    // Riesz in 1D
    for idx in 0..(n / 3) as u64 {
        let [f1, f2, f3] = suite::riesz_triple_1d(cfg.seed, idx).map_err(|e| e.to_string())?;
        let gap = riesz_gap(&f1, &f2, &f3).map_err(|e| e.to_string())?;
        let scale = lp_norm(&f1, f64::INFINITY).map_err(|e| e.to_string())?
            * lp_norm(&f2, 1.0).map_err(|e| e.to_string())?
            * lp_norm(&f3, 1.0).map_err(|e| e.to_string())?;
        let thr = -1e-12 * scale.max(1e-300);
        let ok = gap >= thr;
        let _ = writeln!(report, "{idx},riesz_1d,1,{},{},{ok}", fmt_num(gap), fmt_num(thr));
        if !ok {
            violations.push(format!(
                "instance {idx}: 1D Riesz gap {} below {}",
                fmt_num(gap),
                fmt_num(thr)
            ));
            replays.push((idx, replay_config(cfg, idx)));
        }
    }

    // radial-monotonicity closure under convolution
    for dim in [1usize, 2] {
        for idx in 0..(n / 5).max(4) as u64 {
            let f = suite::radial_field(cfg.seed, idx, dim).map_err(|e| e.to_string())?;
            let g = suite::radial_field(cfg.seed ^ 0x9e37, idx, dim).map_err(|e| e.to_string())?;
            let out = convolve(&f, &g, ConvMode::Full).map_err(|e| e.to_string())?;
            let viol = radial_violation(&out);
            let thr = 1e-12 * out.max_abs();
            let ok = viol <= thr;
            let _ = writeln!(
                report,
                "{idx},radial_closure,{dim},{},{},{ok}",
                fmt_num(viol),
                fmt_num(thr)
            );
            if !ok {
                violations.push(format!(
                    "instance {idx}: {dim}D radial closure violated by {} (tol {})",
                    fmt_num(viol),
                    fmt_num(thr)
                ));
                replays.push((idx, replay_config(cfg, idx)));
            }
        }
    }

    Ok(CommandOutput {
        report,
        extra_files: Vec::new(),
        summary_body: format!("fields: {n}\n"),
        violations,
        replays,
        min_gap: None,
    })
}
