//! Command-line driver. Every command prints one JSON report
//! `{schema, command, claim, status, config, report}`; the exit code is 0 when
//! the check passes, 1 when it fails and 2 on configuration errors or
//! inapplicable combinations.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub use commands::execute;

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "CALABI_KIT_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "calabi-kit",
    version,
    about = "Diastasis, resolvability and lcK immersion checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Calabi matrix of the diastasis at the covering's center: PSD and rank.
    Resolvability(RunArgs),
    /// Negative-eigenvalue witness for the Gauduchon–Ornea potential.
    Witness(RunArgs),
    /// Pullback of the flat metric under the surface's immersion.
    Verify(RunArgs),
    /// Equivariance of the immersion under deck maps.
    Descent(RunArgs),
    /// Homothety factors of deck maps and the rank of the character.
    Character(RunArgs),
    /// The lcK condition dω = θ ∧ ω at sample points.
    Lck(RunArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Surface selector, e.g. `parton:k=3`, `hopf:alpha=2,beta=2i`, `inoue`.
    #[arg(long)]
    pub surface: Option<String>,
    /// Truncation degree (per side) of the diastasis expansion.
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Largest index searched by `witness`.
    #[arg(long)]
    pub jmax: Option<u32>,
    /// Comma-separated deck map names.
    #[arg(long)]
    pub deck: Option<String>,
    /// |α| for `witness`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// |β| for `witness`.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the Calabi matrix as CSV (`resolvability`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Resolvability(_) => "resolvability",
            Command::Witness(_) => "witness",
            Command::Verify(_) => "verify",
            Command::Descent(_) => "descent",
            Command::Character(_) => "character",
            Command::Lck(_) => "lck",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Resolvability(a)
            | Command::Witness(a)
            | Command::Verify(a)
            | Command::Descent(a)
            | Command::Character(a)
            | Command::Lck(a) => a,
        }
    }
}

/// Validated configuration with per-command defaults filled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub surface: Option<String>,
    pub d: u32,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub jmax: u32,
    pub deck: Option<Vec<String>>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_command(cmd: &Command) -> Result<Self> {
        let a = cmd.args();
        let name = cmd.name();
        let (default_tol, default_samples) = match cmd {
            Command::Resolvability(_) | Command::Witness(_) => (crate::calabi::DEFAULT_EIGEN_TOL, 1),
            Command::Verify(_) => (crate::immersions::VERIFY_TOL, 100),
            Command::Descent(_) => (crate::immersions::DESCENT_TOL, 20),
            Command::Character(_) => (crate::geometry::HOMOTHETY_SPREAD_TOL, 20),
            Command::Lck(_) => (crate::geometry::LCK_RESIDUAL_TOL, 50),
        };
        let cfg = RunConfig {
            command: name.to_string(),
            surface: a.surface.clone(),
            d: a.d.unwrap_or(4),
            samples: a.samples.unwrap_or(default_samples),
            seed: a.seed.unwrap_or(1),
            tol: a.tol.unwrap_or(default_tol),
            jmax: a.jmax.unwrap_or(40),
            deck: a.deck.as_ref().map(|s| {
                s.split(',')
                    .map(|t| t.trim().to_string())
                    .filter(|t| !t.is_empty())
                    .collect()
            }),
            alpha: a.alpha,
            beta: a.beta,
            out: a.out.clone(),
            csv: a.csv.clone(),
        };
        if cfg.samples < 1 {
            return Err(Error::Config("--samples must be at least 1".into()));
        }
        if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
            return Err(Error::Config(format!("--tol must be positive, got {}", cfg.tol)));
        }
        if !(1..=8).contains(&cfg.d) {
            return Err(Error::Config(format!("--d must be in 1..=8, got {}", cfg.d)));
        }
        if cfg.jmax < 2 {
            return Err(Error::Config(format!("--jmax must be at least 2, got {}", cfg.jmax)));
        }
        if cfg.surface.is_none() && name != "witness" {
            return Err(Error::Config(format!("{name} needs --surface")));
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::NotApplicable => 2,
        }
    }

    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// A finished command: its status and the full JSON document.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub document: Value,
}

pub(crate) fn envelope(
    cfg: &RunConfig,
    command: &str,
    claim: &str,
    status: Status,
    notice: Option<String>,
    report: Value,
) -> Outcome {
    let mut doc = json!({
        "schema": SCHEMA_VERSION,
        "command": command,
        "claim": claim,
        "status": status,
        "config": cfg,
        "report": report,
    });
    if let Some(n) = notice {
        doc["notice"] = Value::String(n);
    }
    Outcome { status, document: doc }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // a second initialization in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = configure_threads()
        .and_then(|_| RunConfig::from_command(&cli.command))
        .and_then(|cfg| execute(&cli.command, &cfg));
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let text = serde_json::to_string_pretty(&outcome.document).expect("report serializes") + "\n";
    match &cli.command.args().out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    outcome.status.exit_code()
}
