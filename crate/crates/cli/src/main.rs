mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Casimir-Polder potentials and transition rates inside cylindrical metal cavities.
#[derive(Parser, Debug)]
#[command(name = "cpcavity", version, about)]
pub struct Cli {
    /// Scenario file (TOML)
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output CSV path; sidecar JSON goes next to it. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent sweep points
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Contour rotation angle override, rad
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Relative quadrature tolerance override
    #[arg(long = "rel-tol", global = true)]
    rel_tol: Option<f64>,
    /// Force a single worker (byte-identical reruns)
    #[arg(long, global = true)]
    serial: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum Command {
    /// Observable versus cavity radius around a resonance
    RadiusScan,
    /// Radial profiles at the resonant radii of the listed modes
    Profile,
    /// Refined resonant radii, peak values and widths for the listed modes
    Resonances,
    /// Peak scaling with |ε|, arg ε, ω or principal quantum number
    Scaling,
    /// Self-tests: half-space limit, contour invariance, convergence
    Validate,
}

/// Bad input that maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// A self-test outside its tolerance; exit code 3.
#[derive(Debug)]
pub struct CheckFailed(pub usize);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} validation check(s) failed", self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if cause.is::<CheckFailed>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<cpcavity::Error>() {
            return match e {
                cpcavity::Error::NonConvergence(_)
                | cpcavity::Error::BracketEdge(_)
                | cpcavity::Error::Overflow { .. }
                | cpcavity::Error::Pole(_) => 3,
                _ => 2,
            };
        }
        if cause.is::<std::io::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
