use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use talenti_cli::{run, Config, RunError};

/// Nonlocal diffusion and symmetrization comparison experiments.
///
/// Exit status: 0 all asserted contracts hold, 1 contract violations
/// (see failures/manifest.txt), 2 config rejected, 3 I/O error.
#[derive(Parser)]
#[command(name = "talenti", version)]
struct Args {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the convolution engine (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Turn slack-covered violations into failures (zero-slack policy).
    #[arg(long)]
    strict: bool,
    /// Only validate the config and list violations.
    #[arg(long)]
    validate: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read config {:?}: {e}", args.config);
            return ExitCode::from(3);
        }
    };
    let mut cfg = match Config::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config rejected: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.strict {
        cfg.strict = true;
    }

    let violations = cfg.validate();
    if args.validate {
        for v in &violations {
            println!("{v}");
        }
        return if violations.is_empty() {
            println!("config ok");
            ExitCode::SUCCESS
        } else {
            ExitCode::from(2)
        };
    }
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("config rejected: {v}");
        }
        return ExitCode::from(2);
    }

    if let Some(threads) = args.threads {
        // results are independent of the pool size; this only affects speed
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match run(&cfg, &args.out) {
        Ok(outcome) => {
            if outcome.violations.is_empty() {
                println!("ok: all asserted contracts hold ({})", args.out.display());
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "{} contract violation(s); see {}",
                    outcome.violations.len(),
                    args.out.join("failures/manifest.txt").display()
                );
                ExitCode::from(1)
            }
        }
        Err(RunError::Config(e)) => {
            eprintln!("config rejected: {e}");
            ExitCode::from(2)
        }
        Err(RunError::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(3)
        }
    }
}
