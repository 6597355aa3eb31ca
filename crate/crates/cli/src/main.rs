//! `qab`: batch driver for residual certification, time evolution and the
//! solenoid experiment.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or the
//! computation aborts (the report is still written), 2 for usage or
//! configuration errors (nothing is written).

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{load, SplitConfig};
use report::{Outcome, UsageError};

#[derive(Parser)]
#[command(name = "qab", version, about = "Quaternionic phase solutions and the Aharonov-Bohm setup")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "qab-out")]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplies every configured tolerance.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Residuals of a phase family against every constraint.
    Verify(Common),
    /// Time evolution with conservation diagnostics.
    Evolve(Common),
    /// Two-path interference pattern around the solenoid.
    AbPattern(Common),
    /// Path-pair and loop holonomies.
    Holonomy(Common),
    /// Symplectic split identity on random matrix models.
    SplitCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Sampled potentials, curls and the radial-force map.
    Fields(Common),
}

fn required(c: &Common) -> Result<&Path, UsageError> {
    c.config.as_deref().ok_or_else(|| UsageError("--config is required".into()))
}

fn run(cli: Cli) -> Result<(Outcome, PathBuf), UsageError> {
    let common = match &cli.command {
        Command::Verify(c) | Command::Evolve(c) | Command::AbPattern(c) | Command::Holonomy(c) | Command::Fields(c) => c,
        Command::SplitCheck { common, .. } => common,
    };
    let scale = common.tolerance_scale;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(UsageError(format!("--tolerance-scale must be positive, got {scale}")));
    }
    let seed = common.seed;
    let outcome = match &cli.command {
        Command::Verify(c) => {
            let mut cfg: config::VerifyConfig = load(required(c)?)?;
            cfg.seed = seed.or(cfg.seed);
            commands::verify(cfg, scale)?
        }
        Command::Evolve(c) => {
            let mut cfg: config::EvolveConfig = load(required(c)?)?;
            cfg.seed = seed.or(cfg.seed);
            commands::evolve_cmd(cfg, scale)?
        }
        Command::AbPattern(c) => {
            let mut cfg: config::PatternConfig = load(required(c)?)?;
            cfg.seed = seed.or(cfg.seed);
            commands::ab_pattern(cfg, scale)?
        }
        Command::Holonomy(c) => {
            let mut cfg: config::HolonomyConfig = load(required(c)?)?;
            cfg.seed = seed.or(cfg.seed);
            commands::holonomy(cfg, scale)?
        }
        Command::SplitCheck { common: c, dim, samples } => {
            let mut cfg = match &c.config {
                Some(p) => load::<SplitConfig>(p)?,
                None => SplitConfig::default(),
            };
            cfg.dim = dim.unwrap_or(cfg.dim);
            cfg.samples = samples.unwrap_or(cfg.samples);
            cfg.seed = seed.unwrap_or(cfg.seed);
            commands::split_check(cfg, scale)?
        }
        Command::Fields(c) => {
            let mut cfg: config::FieldsConfig = load(required(c)?)?;
            cfg.seed = seed.or(cfg.seed);
            commands::fields(cfg, scale)?
        }
    };
    Ok((outcome, common.out.clone()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, out) = match run(cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("qab: {e}");
            return ExitCode::from(2);
        }
    };
    match outcome.write(&out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("qab: cannot write output to {}: {e}", out.display());
            return ExitCode::from(2);
        }
    }
    if let Some(e) = &outcome.error {
        eprintln!("qab: {} aborted: {e}", outcome.command);
        return ExitCode::from(1);
    }
    for c in outcome.checks.iter().filter(|c| !c.pass) {
        eprintln!("qab: check {} failed: {:e} {} {:e} violated", c.name, c.value, c.relation, c.limit);
    }
    if outcome.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) }
}
