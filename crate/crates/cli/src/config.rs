//! Flat sectioned key-value experiment configs.
//!
//! ```text
//! [experiment]
//! command = compare-stationary
//! seed = 42
//! ...
//! ```
//!
//! `#` starts a comment; keys and sections are validated strictly so typos
//! surface as named violations instead of silently falling back to
//! defaults.

use std::fmt::Write as _;
use talenti_core::grid::{ball_mask, make_grid, DomainMask, GridField, GridSpec};
use talenti_core::KernelProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CompareStationary,
    CompareEvolution,
    Sweep,
    Corollary,
    CltDecay,
    CheckInequalities,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "compare-stationary" => Ok(Command::CompareStationary),
            "compare-evolution" => Ok(Command::CompareEvolution),
            "sweep" => Ok(Command::Sweep),
            "corollary" => Ok(Command::Corollary),
            "clt-decay" => Ok(Command::CltDecay),
            "check-inequalities" => Ok(Command::CheckInequalities),
            other => Err(format!("unknown command {other:?}")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::CompareStationary => "compare-stationary",
            Command::CompareEvolution => "compare-evolution",
            Command::Sweep => "sweep",
            Command::Corollary => "corollary",
            Command::CltDecay => "clt-decay",
            Command::CheckInequalities => "check-inequalities",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Interval,
    Rectangle,
    Ball,
    UnionOfBoxes,
    RandomSuite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingKind {
    Zero,
    Constant,
    Bump,
    Random,
    File,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub command: Command,
    pub seed: u64,
    pub instances: usize,
    pub instances_2d: usize,
    pub strict: bool,
    /// When set on a random-suite command, run only this instance.
    pub replay_instance: Option<u64>,

    pub dimension: usize,
    pub half_extent: f64,
    pub cells_per_axis: usize,

    pub profile: KernelProfile,
    pub support_radius: f64,
    pub epsilon: f64,

    pub absorption: f64,
    pub p: f64,
    pub tol: f64,
    /// 0 means auto (0.9 * tau_max).
    pub tau: f64,
    pub steps: usize,
    pub epsilons: Vec<f64>,
    pub k_max: usize,
    pub ball_radius: f64,
    pub deviation_ks: Vec<usize>,
    /// Evolution single runs: write every n-th trajectory state as a
    /// field table (0 = off).
    pub snapshot_stride: usize,

    pub domain_kind: DomainKind,
    pub interval: [f64; 2],
    pub rectangle: [f64; 4],
    pub domain_radius: f64,
    pub boxes: Vec<Vec<f64>>,

    pub forcing_kind: ForcingKind,
    pub forcing_value: f64,
    pub forcing_center: [f64; 2],
    pub forcing_width: f64,
    pub forcing_amplitude: f64,
    pub forcing_path: String,

    pub initial_kind: ForcingKind,
    pub initial_value: f64,
    pub initial_center: [f64; 2],
    pub initial_width: f64,
    pub initial_amplitude: f64,
    pub initial_path: String,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            command: Command::CompareStationary,
            seed: 42,
            instances: 50,
            instances_2d: 10,
            strict: false,
            replay_instance: None,
            dimension: 1,
            half_extent: 2.2,
            cells_per_axis: 449,
            profile: KernelProfile::UniformBall,
            support_radius: 1.0,
            epsilon: 0.5,
            absorption: 0.0,
            p: 2.0,
            tol: 1e-10,
            tau: 0.0,
            steps: 10,
            epsilons: vec![0.4, 0.2, 0.1],
            k_max: 256,
            ball_radius: 1.0,
            deviation_ks: vec![4, 16, 64, 256],
            snapshot_stride: 0,
            domain_kind: DomainKind::RandomSuite,
            interval: [-1.0, 1.0],
            rectangle: [-1.0, 1.0, -1.0, 1.0],
            domain_radius: 1.0,
            boxes: Vec::new(),
            forcing_kind: ForcingKind::Constant,
            forcing_value: 1.0,
            forcing_center: [0.0, 0.0],
            forcing_width: 0.2,
            forcing_amplitude: 1.0,
            forcing_path: String::new(),
            initial_kind: ForcingKind::Zero,
            initial_value: 0.0,
            initial_center: [0.0, 0.0],
            initial_width: 0.2,
            initial_amplitude: 1.0,
            initial_path: String::new(),
        }
    }
}

fn parse_f64(v: &str, key: &str) -> Result<f64, String> {
    let v = v.trim();
    match v {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => v.parse().map_err(|e| format!("bad value for {key}: {e}")),
    }
}

fn parse_usize(v: &str, key: &str) -> Result<usize, String> {
    v.trim()
        .parse()
        .map_err(|e| format!("bad value for {key}: {e}"))
}

fn parse_list_f64(v: &str, key: &str) -> Result<Vec<f64>, String> {
    v.split(',')
        .map(|s| parse_f64(s, key))
        .collect::<Result<Vec<_>, _>>()
}

fn parse_list_usize(v: &str, key: &str) -> Result<Vec<usize>, String> {
    v.split(',')
        .map(|s| parse_usize(s, key))
        .collect::<Result<Vec<_>, _>>()
}

fn forcing_kind(v: &str) -> Result<ForcingKind, String> {
    match v {
        "zero" => Ok(ForcingKind::Zero),
        "constant" => Ok(ForcingKind::Constant),
        "bump" => Ok(ForcingKind::Bump),
        "random" => Ok(ForcingKind::Random),
        "file" => Ok(ForcingKind::File),
        other => Err(format!("unknown forcing kind {other:?}")),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, String> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                match section.as_str() {
                    "experiment" | "grid" | "kernel" | "problem" | "domain" | "forcing"
                    | "initial" => {}
                    other => return Err(format!("line {}: unknown section [{other}]", lineno + 1)),
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply(&section, key, value)
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        match (section, key) {
            ("experiment", "command") => self.command = Command::parse(value)?,
            ("experiment", "seed") => {
                self.seed = value
                    .parse()
                    .map_err(|e| format!("bad value for seed: {e}"))?
            }
            ("experiment", "instances") => self.instances = parse_usize(value, key)?,
            ("experiment", "instances_2d") => self.instances_2d = parse_usize(value, key)?,
            ("experiment", "strict") => {
                self.strict = value
                    .parse()
                    .map_err(|e| format!("bad value for strict: {e}"))?
            }
            ("experiment", "replay_instance") => {
                self.replay_instance = Some(
                    value
                        .parse()
                        .map_err(|e| format!("bad value for replay_instance: {e}"))?,
                )
            }
            ("grid", "dimension") => self.dimension = parse_usize(value, key)?,
            ("grid", "half_extent") => self.half_extent = parse_f64(value, key)?,
            ("grid", "cells_per_axis") => self.cells_per_axis = parse_usize(value, key)?,
            ("kernel", "profile") => {
                self.profile = KernelProfile::parse(value).map_err(|e| e.to_string())?
            }
            ("kernel", "support_radius") => self.support_radius = parse_f64(value, key)?,
            ("kernel", "epsilon") => self.epsilon = parse_f64(value, key)?,
            ("problem", "c") => self.absorption = parse_f64(value, key)?,
            ("problem", "p") => self.p = parse_f64(value, key)?,
            ("problem", "tol") => self.tol = parse_f64(value, key)?,
            ("problem", "tau") => self.tau = parse_f64(value, key)?,
            ("problem", "steps") => self.steps = parse_usize(value, key)?,
            ("problem", "epsilons") => self.epsilons = parse_list_f64(value, key)?,
            ("problem", "k_max") => self.k_max = parse_usize(value, key)?,
            ("problem", "ball_radius") => self.ball_radius = parse_f64(value, key)?,
            ("problem", "deviation_ks") => self.deviation_ks = parse_list_usize(value, key)?,
            ("problem", "snapshot_stride") => self.snapshot_stride = parse_usize(value, key)?,
            ("domain", "kind") => {
                self.domain_kind = match value {
                    "interval" => DomainKind::Interval,
                    "rectangle" => DomainKind::Rectangle,
                    "ball" => DomainKind::Ball,
                    "union-of-boxes" => DomainKind::UnionOfBoxes,
                    "random-suite" => DomainKind::RandomSuite,
                    other => return Err(format!("unknown domain kind {other:?}")),
                }
            }
            ("domain", "a") => self.interval[0] = parse_f64(value, key)?,
            ("domain", "b") => self.interval[1] = parse_f64(value, key)?,
            ("domain", "x0") => self.rectangle[0] = parse_f64(value, key)?,
            ("domain", "x1") => self.rectangle[1] = parse_f64(value, key)?,
            ("domain", "y0") => self.rectangle[2] = parse_f64(value, key)?,
            ("domain", "y1") => self.rectangle[3] = parse_f64(value, key)?,
            ("domain", "radius") => self.domain_radius = parse_f64(value, key)?,
            ("domain", "boxes") => {
                self.boxes = value
                    .split(';')
                    .map(|b| {
                        b.split(':')
                            .map(|s| parse_f64(s, key))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
            ("forcing", "kind") => self.forcing_kind = forcing_kind(value)?,
            ("forcing", "value") => self.forcing_value = parse_f64(value, key)?,
            ("forcing", "center") => self.forcing_center[0] = parse_f64(value, key)?,
            ("forcing", "center_y") => self.forcing_center[1] = parse_f64(value, key)?,
            ("forcing", "width") => self.forcing_width = parse_f64(value, key)?,
            ("forcing", "amplitude") => self.forcing_amplitude = parse_f64(value, key)?,
            ("forcing", "path") => self.forcing_path = value.to_string(),
            ("initial", "kind") => self.initial_kind = forcing_kind(value)?,
            ("initial", "value") => self.initial_value = parse_f64(value, key)?,
            ("initial", "center") => self.initial_center[0] = parse_f64(value, key)?,
            ("initial", "center_y") => self.initial_center[1] = parse_f64(value, key)?,
            ("initial", "width") => self.initial_width = parse_f64(value, key)?,
            ("initial", "amplitude") => self.initial_amplitude = parse_f64(value, key)?,
            ("initial", "path") => self.initial_path = value.to_string(),
            (s, k) => return Err(format!("unknown key {k:?} in section [{s}]")),
        }
        Ok(())
    }

    /// Serializes back to config text (used for replay files).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "command = {}", self.command.name());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "instances = {}", self.instances);
        let _ = writeln!(s, "instances_2d = {}", self.instances_2d);
        let _ = writeln!(s, "strict = {}", self.strict);
        if let Some(r) = self.replay_instance {
            let _ = writeln!(s, "replay_instance = {r}");
        }
        let _ = writeln!(s, "\n[grid]");
        let _ = writeln!(s, "dimension = {}", self.dimension);
        let _ = writeln!(s, "half_extent = {}", self.half_extent);
        let _ = writeln!(s, "cells_per_axis = {}", self.cells_per_axis);
        let _ = writeln!(s, "\n[kernel]");
        let _ = writeln!(s, "profile = {}", self.profile.name());
        let _ = writeln!(s, "support_radius = {}", self.support_radius);
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "\n[problem]");
        let _ = writeln!(s, "c = {}", self.absorption);
        let _ = writeln!(s, "p = {}", fmt_num(self.p));
        let _ = writeln!(s, "tol = {}", self.tol);
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(
            s,
            "epsilons = {}",
            self.epsilons
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(s, "k_max = {}", self.k_max);
        let _ = writeln!(s, "ball_radius = {}", self.ball_radius);
        let _ = writeln!(s, "snapshot_stride = {}", self.snapshot_stride);
        let _ = writeln!(
            s,
            "deviation_ks = {}",
            self.deviation_ks
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(s, "\n[domain]");
        let kind = match self.domain_kind {
            DomainKind::Interval => "interval",
            DomainKind::Rectangle => "rectangle",
            DomainKind::Ball => "ball",
            DomainKind::UnionOfBoxes => "union-of-boxes",
            DomainKind::RandomSuite => "random-suite",
        };
        let _ = writeln!(s, "kind = {kind}");
        let _ = writeln!(s, "a = {}", self.interval[0]);
        let _ = writeln!(s, "b = {}", self.interval[1]);
        let _ = writeln!(s, "x0 = {}", self.rectangle[0]);
        let _ = writeln!(s, "x1 = {}", self.rectangle[1]);
        let _ = writeln!(s, "y0 = {}", self.rectangle[2]);
        let _ = writeln!(s, "y1 = {}", self.rectangle[3]);
        let _ = writeln!(s, "radius = {}", self.domain_radius);
        if !self.boxes.is_empty() {
            let boxes = self
                .boxes
                .iter()
                .map(|b| {
                    b.iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(":")
                })
                .collect::<Vec<_>>()
                .join(";");
            let _ = writeln!(s, "boxes = {boxes}");
        }
        let _ = writeln!(s, "\n[forcing]");
        write_forcing(
            &mut s,
            self.forcing_kind,
            self.forcing_value,
            self.forcing_center,
            self.forcing_width,
            self.forcing_amplitude,
            &self.forcing_path,
        );
        let _ = writeln!(s, "\n[initial]");
        write_forcing(
            &mut s,
            self.initial_kind,
            self.initial_value,
            self.initial_center,
            self.initial_width,
            self.initial_amplitude,
            &self.initial_path,
        );
        s
    }

    /// Violations that would prevent `run` from starting; empty iff valid.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let conv_command = matches!(
            self.command,
            Command::CompareStationary | Command::CompareEvolution | Command::Sweep
                | Command::CltDecay
        );
        if self.dimension != 1 && self.dimension != 2 {
            v.push(format!("grid dimension must be 1 or 2, got {}", self.dimension));
        }
        if !(self.half_extent > 0.0) {
            v.push("grid half_extent must be positive".into());
        }
        if self.cells_per_axis < 3 {
            v.push("grid cells_per_axis must be at least 3".into());
        }
        if self.p.is_nan() || self.p < 1.0 {
            v.push(format!(
                "norm precondition violated: p must be >= 1 or inf, got {}",
                fmt_num(self.p)
            ));
        }
        if !(self.tol > 0.0) {
            v.push("solver tolerance must be positive".into());
        }
        if !(self.absorption >= 0.0) {
            v.push("absorption c must be non-negative".into());
        }
        if !(self.support_radius > 0.0) {
            v.push("kernel support_radius must be positive".into());
        }
        if !(self.epsilon > 0.0) {
            v.push("kernel epsilon must be positive".into());
        }
        let single_instance = self.domain_kind != DomainKind::RandomSuite;
        let h = 2.0 * self.half_extent / self.cells_per_axis.max(1) as f64;
        if conv_command && single_instance {
            if self.cells_per_axis % 2 == 0 {
                v.push("convolution commands need an odd cells_per_axis".into());
            }
            if self.epsilon * self.support_radius < 2.0 * h {
                v.push(format!(
                    "resolution violated: epsilon * support_radius = {} below 2h = {}",
                    self.epsilon * self.support_radius,
                    2.0 * h
                ));
            }
        }
        match self.command {
            Command::CompareEvolution => {
                if self.steps == 0 {
                    v.push("evolution needs at least one step".into());
                }
                if self.tau > 0.0 && single_instance {
                    // tau_max needs the discrete C1; build the kernel to check
                    match make_grid(self.dimension, self.half_extent, self.cells_per_axis)
                        .and_then(|g| {
                            talenti_core::make_kernel(self.profile, self.support_radius, g)
                        }) {
                        Ok(k) => {
                            let tau_max = talenti_core::nonlocal::stability_max_tau_parts(
                                self.absorption,
                                k.c1(),
                                self.epsilon,
                            );
                            if self.tau >= tau_max {
                                v.push(format!(
                                    "stability precondition violated: tau = {} >= tau_max = {tau_max}",
                                    self.tau
                                ));
                            }
                        }
                        Err(e) => v.push(format!("kernel not constructible: {e}")),
                    }
                }
            }
            Command::Sweep => {
                if self.epsilons.is_empty() {
                    v.push("sweep needs a non-empty epsilons list".into());
                }
                if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
                    v.push("sweep epsilons must be strictly decreasing".into());
                }
                if let Some(&last) = self.epsilons.last() {
                    if last * self.support_radius < 2.0 * h {
                        v.push(format!(
                            "resolution violated: smallest epsilon {} under-resolves the kernel",
                            last
                        ));
                    }
                }
            }
            Command::CltDecay => {
                if self.k_max < 2 {
                    v.push("clt-decay needs k_max >= 2".into());
                }
                let reach = self.k_max as f64 * self.epsilon * self.support_radius;
                if reach > self.half_extent - 0.5 * h {
                    v.push(format!(
                        "domain too small: {}-fold support radius {reach} exceeds the box",
                        self.k_max
                    ));
                }
                if !(self.ball_radius > 0.0) {
                    v.push("clt-decay ball_radius must be positive".into());
                }
            }
            _ => {}
        }
        if single_instance {
            match self.domain_kind {
                DomainKind::Interval => {
                    if !(self.interval[0] < self.interval[1]) {
                        v.push("domain interval must have a < b".into());
                    }
                }
                DomainKind::Rectangle => {
                    if !(self.rectangle[0] < self.rectangle[1])
                        || !(self.rectangle[2] < self.rectangle[3])
                    {
                        v.push("domain rectangle must have x0 < x1 and y0 < y1".into());
                    }
                    if self.dimension != 2 {
                        v.push("rectangle domains need dimension = 2".into());
                    }
                }
                DomainKind::Ball => {
                    if !(self.domain_radius > 0.0) {
                        v.push("domain radius must be positive".into());
                    }
                    if self.domain_radius > self.half_extent {
                        v.push("domain ball exceeds the grid box".into());
                    }
                }
                DomainKind::UnionOfBoxes => {
                    let want = if self.dimension == 1 { 2 } else { 4 };
                    if self.boxes.is_empty()
                        || self.boxes.iter().any(|b| b.len() != want)
                    {
                        v.push(format!(
                            "union-of-boxes needs boxes of {want} coordinates each"
                        ));
                    }
                }
                DomainKind::RandomSuite => {}
            }
            if self.forcing_kind == ForcingKind::File && self.forcing_path.is_empty() {
                v.push("forcing kind file needs a path".into());
            }
        }
        v
    }

    /// Builds the grid for single-instance commands.
    pub fn build_grid(&self) -> Result<GridSpec, String> {
        make_grid(self.dimension, self.half_extent, self.cells_per_axis)
            .map_err(|e| e.to_string())
    }

    /// Builds the domain mask for single-instance commands.
    pub fn build_domain(&self, grid: GridSpec) -> Result<DomainMask, String> {
        let mask = match self.domain_kind {
            DomainKind::Interval => {
                let [a, b] = self.interval;
                DomainMask::from_predicate(grid, move |c| c[0] > a && c[0] < b)
            }
            DomainKind::Rectangle => {
                let [x0, x1, y0, y1] = self.rectangle;
                DomainMask::from_predicate(grid, move |c| {
                    c[0] > x0 && c[0] < x1 && c[1] > y0 && c[1] < y1
                })
            }
            DomainKind::Ball => {
                ball_mask(grid, ball_volume(grid.dim(), self.domain_radius))
            }
            DomainKind::UnionOfBoxes => {
                let boxes = self.boxes.clone();
                let dim = grid.dim();
                DomainMask::from_predicate(grid, move |c| {
                    boxes.iter().any(|b| match dim {
                        1 => c[0] > b[0] && c[0] < b[1],
                        _ => c[0] > b[0] && c[0] < b[1] && c[1] > b[2] && c[1] < b[3],
                    })
                })
            }
            DomainKind::RandomSuite => {
                return Err("random-suite has no single domain".into())
            }
        };
        mask.map_err(|e| e.to_string())
    }

    /// Builds a data field described by a forcing-style section.
    pub fn build_field(
        &self,
        which: FieldSection,
        domain: &DomainMask,
        seed: u64,
    ) -> Result<GridField, String> {
        let (kind, value, center, width, amplitude, path) = match which {
            FieldSection::Forcing => (
                self.forcing_kind,
                self.forcing_value,
                self.forcing_center,
                self.forcing_width,
                self.forcing_amplitude,
                &self.forcing_path,
            ),
            FieldSection::Initial => (
                self.initial_kind,
                self.initial_value,
                self.initial_center,
                self.initial_width,
                self.initial_amplitude,
                &self.initial_path,
            ),
        };
        let field = match kind {
            ForcingKind::Zero => Ok(GridField::zeros(domain.clone())),
            ForcingKind::Constant => GridField::from_fn(domain.clone(), move |_| value),
            ForcingKind::Bump => GridField::from_fn(domain.clone(), move |c| {
                let dx = c[0] - center[0];
                let dy = c[1] - center[1];
                amplitude * (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
            }),
            ForcingKind::Random => {
                use rand::Rng;
                let mut rng = talenti_core::suite::rng_for(seed, 0);
                let vals: Vec<f64> = (0..domain.len())
                    .map(|_| amplitude * rng.random::<f64>())
                    .collect();
                GridField::from_member_values(domain.clone(), &vals)
            }
            ForcingKind::File => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read field file {path:?}: {e}"))?;
                let f = GridField::read_table(*domain.grid(), &mut text.as_bytes())
                    .map_err(|e| e.to_string())?;
                if !f.mask().subset_of(domain) {
                    return Err(format!("field file {path:?} not supported in the domain"));
                }
                return Ok(f);
            }
        };
        field.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy)]
pub enum FieldSection {
    Forcing,
    Initial,
}

fn ball_volume(dim: usize, radius: f64) -> f64 {
    match dim {
        1 => 2.0 * radius,
        _ => std::f64::consts::PI * radius * radius,
    }
}

fn write_forcing(
    s: &mut String,
    kind: ForcingKind,
    value: f64,
    center: [f64; 2],
    width: f64,
    amplitude: f64,
    path: &str,
) {
    let kind = match kind {
        ForcingKind::Zero => "zero",
        ForcingKind::Constant => "constant",
        ForcingKind::Bump => "bump",
        ForcingKind::Random => "random",
        ForcingKind::File => "file",
    };
    let _ = writeln!(s, "kind = {kind}");
    let _ = writeln!(s, "value = {value}");
    let _ = writeln!(s, "center = {}", center[0]);
    let _ = writeln!(s, "center_y = {}", center[1]);
    let _ = writeln!(s, "width = {width}");
    let _ = writeln!(s, "amplitude = {amplitude}");
    if !path.is_empty() {
        let _ = writeln!(s, "path = {path}");
    }
}

/// Full round-trip decimal formatting, `inf` for infinity.
pub fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let cfg = Config::default();
        let text = cfg.to_text();
        let back = Config::parse(&text).unwrap();
        assert_eq!(back.command, cfg.command);
        assert_eq!(back.seed, cfg.seed);
        assert_eq!(back.epsilons, cfg.epsilons);
        assert_eq!(back.p, cfg.p);
    }

    #[test]
    fn valid_config_has_no_violations() {
        let cfg = Config::default();
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
    }

    #[test]
    fn bad_p_is_named() {
        let mut cfg = Config::default();
        cfg.p = 0.5;
        let v = cfg.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("norm precondition"), "{v:?}");
    }

    #[test]
    fn under_resolved_kernel_is_named() {
        let mut cfg = Config::default();
        cfg.domain_kind = DomainKind::Interval;
        cfg.epsilon = 1e-4;
        let v = cfg.validate();
        assert!(v.iter().any(|m| m.contains("resolution")), "{v:?}");
    }

    #[test]
    fn unstable_tau_is_named() {
        let mut cfg = Config::default();
        cfg.command = Command::CompareEvolution;
        cfg.domain_kind = DomainKind::Interval;
        cfg.cells_per_axis = 221;
        cfg.tau = 10.0;
        let v = cfg.validate();
        assert!(v.iter().any(|m| m.contains("stability")), "{v:?}");
    }

    #[test]
    fn unknown_key_rejected_at_parse() {
        let r = Config::parse("[grid]\nnonsense = 3\n");
        assert!(r.is_err());
    }

    #[test]
    fn comments_and_inf() {
        let cfg = Config::parse(
            "[problem] # section\np = inf # max norm\n[experiment]\ncommand = sweep\n",
        )
        .unwrap();
        assert!(cfg.p.is_infinite());
        assert_eq!(cfg.command, Command::Sweep);
    }
}
