//! `imexstab`: coefficient tables, stability regions, numerical ranges,
//! certification and convergence studies for delta-family ImEx schemes.
//!
//! Exit status: 0 on success, 2 on invalid input, 3 on numerical failure.
//! `IMEXSTAB_THREADS` caps the worker pool.

mod commands;
mod grid;
mod matrix_io;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<imexstab::Error> for CliError {
    fn from(e: imexstab::Error) -> Self {
        use imexstab::Error as E;
        match e {
            E::EigenSolverFailed | E::SingularImplicitOperator | E::NonFiniteState { .. } | E::DegenerateErrorConstant(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "imexstab", version, about = "Stability analysis and time stepping for delta-family ImEx multistep schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficients (a, b, c) with order-condition residual and zero stability
    Coeffs(CoeffsArgs),
    /// Boundary of the stability region D_y (exact curve and boundary locus)
    Region(RegionArgs),
    /// Boundary of W_p and the generalized spectrum of a splitting
    Wrange(WrangeArgs),
    /// Unconditional-stability verdict for a splitting and scheme
    Certify(CertifyArgs),
    /// Run the recursion and record state norms
    Simulate(SimulateArgs),
    /// Time-step convergence table for the variable-coefficient diffusion problem
    Convergence(ConvergenceArgs),
    /// Global truncation error against delta for u' = -u
    Gte(GteArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SchemeArgs {
    /// Order, 1 to 5
    #[arg(long)]
    pub r: usize,
    /// Family parameter in (0, 1]; 1 gives SBDF
    #[arg(long)]
    pub delta: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SplitArgs {
    /// Built-in problem: paper-vardiff, paper-scalar or paper-gte
    #[arg(long, conflicts_with_all = ["a", "b"])]
    pub problem: Option<String>,
    /// Matrix file for A (symmetric negative definite)
    #[arg(long, requires = "b")]
    pub a: Option<PathBuf>,
    /// Matrix file for B
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    /// Chebyshev polynomial degree for paper-vardiff
    #[arg(long = "N", default_value_t = 40)]
    pub n: usize,
    /// Stabilization constant for paper-vardiff
    #[arg(long, default_value_t = 2.5)]
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Output file (standard output when omitted)
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct RegionArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Finite y < 0; omit for y = -infinity
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// Samples per curve
    #[arg(long, default_value_t = 2048)]
    pub samples: usize,
    /// Include G(delta) in the summary
    #[arg(long)]
    pub g: bool,
    #[arg(long, default_value_t = 200)]
    pub g_ny: usize,
    #[arg(long, default_value_t = 200)]
    pub g_ntheta: usize,
    /// Summary JSON path (defaults to <out>.summary.json when --out is set)
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct WrangeArgs {
    #[command(flatten)]
    pub split: SplitArgs,
    /// Weight exponent of W_p
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub p: f64,
    /// Support angles
    #[arg(long, default_value_t = 256)]
    pub angles: usize,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, default_value_t = 256)]
    pub angles: usize,
    /// Also report the largest certified delta on a grid of this spacing
    #[arg(long)]
    pub scan_step: Option<f64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Time step
    #[arg(long)]
    pub k: f64,
    /// Steps after the starting values
    #[arg(long)]
    pub steps: usize,
    /// Initial vector file (N x 1); defaults to all ones. Ignored for paper-vardiff,
    /// which starts from the manufactured solution and is forced to follow it.
    #[arg(long)]
    pub u0: Option<PathBuf>,
    /// Keep every n-th state in the output
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ConvergenceArgs {
    #[arg(long, default_value = "paper-vardiff")]
    pub problem: String,
    #[arg(long = "N", default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 2.5)]
    pub alpha: f64,
    #[arg(long)]
    pub delta: f64,
    /// Orders, e.g. 1..5
    #[arg(long, default_value = "1..5")]
    pub orders: String,
    /// Time steps, e.g. 2^-6..2^-13
    #[arg(long)]
    pub k: String,
    #[arg(long, default_value_t = 1.0)]
    pub t_final: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GteArgs {
    #[arg(long, default_value = "1..3")]
    pub orders: String,
    /// Values of delta, e.g. 2^0..2^-6
    #[arg(long)]
    pub deltas: String,
    /// Fixed time step (default 1e-3 unless --k-divisor is given)
    #[arg(long, conflicts_with = "k_divisor")]
    pub k: Option<f64>,
    /// Use k = delta / q
    #[arg(long)]
    pub k_divisor: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t_final: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("IMEXSTAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("IMEXSTAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Coeffs(a) => commands::coeffs(a),
        Command::Region(a) => commands::region(a),
        Command::Wrange(a) => commands::wrange(a),
        Command::Certify(a) => commands::certify(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Convergence(a) => commands::convergence(a),
        Command::Gte(a) => commands::gte(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("imexstab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(imexstab::Error::OrderOutOfRange(7)).exit_code(), 2);
        assert_eq!(CliError::from(imexstab::Error::DeltaOutOfRange(2.0)).exit_code(), 2);
        assert_eq!(CliError::from(imexstab::Error::EigenSolverFailed).exit_code(), 3);
        assert_eq!(CliError::from(imexstab::Error::NonFiniteState { index: 4 }).exit_code(), 3);
        assert_eq!(CliError::from(imexstab::Error::SingularImplicitOperator).exit_code(), 3);
    }
}
