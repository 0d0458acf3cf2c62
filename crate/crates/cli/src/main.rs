//! `densejump` command-line driver.
//!
//! Exit status: 0 when every check passes, 1 when a claim check fails or a
//! golden file differs, 2 on usage or numerical errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod output;
mod parse;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(densejump::Error),
    /// A verification ran to completion and did not pass.
    Check(String),
}

impl From<densejump::Error> for Failure {
    fn from(e: densejump::Error) -> Self {
        Failure::Numerical(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "densejump", version, about = "Entropy solutions with dense jump sets")]
pub struct Cli {
    /// Machine-readable reports.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub group: Group,
}

#[derive(Subcommand, Debug)]
pub enum Group {
    /// Dyadic enumeration and level partitions.
    Dyadic {
        #[command(subcommand)]
        cmd: DyadicCmd,
    },
    /// Scalar backward construction and its checks.
    Scalar {
        #[command(subcommand)]
        cmd: ScalarCmd,
    },
    /// Multi-dimensional lifts.
    Multid {
        #[command(subcommand)]
        cmd: MultidCmd,
    },
    /// Systems: wave curves, construction, front tracking.
    System {
        #[command(subcommand)]
        cmd: SystemCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum DyadicCmd {
    /// CSV of `(k, r_k_num, r_k_den, y_k)`.
    Dump(DumpArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct DumpArgs {
    #[arg(long)]
    pub level: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Compare against a golden CSV instead of printing.
    #[arg(long)]
    #[serde(skip)]
    pub check: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ScalarCmd {
    /// Build the level-k initial data and write it as JSON.
    Build(ScalarBuildArgs),
    /// Evaluate a stored profile at `(x, t)` points.
    Evaluate(EvaluateArgs),
    /// Claim and entropy checks.
    Verify {
        #[command(subcommand)]
        cmd: ScalarVerifyCmd,
    },
    /// Entropy dissipation densities from box balances.
    Dissipation(DissipationArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct FluxArgs {
    /// Kind name, inline JSON or JSON file.
    #[arg(long, default_value = "burgers")]
    pub flux: String,
    /// Working interval `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct ScalarBuildArgs {
    #[command(flatten)]
    pub flux: FluxArgs,
    #[arg(long)]
    pub level: usize,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// `x,t`; repeatable.
    #[arg(long, required = true, allow_hyphen_values = true)]
    pub at: Vec<String>,
    /// Use the variational oracle instead of the closed form.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ScalarVerifyCmd {
    /// Speed gap across `z_j` at time `t0`.
    Claim(ScalarClaimArgs),
    /// Kružkov and weak residuals of a level solution.
    Entropy(EntropyArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct ScalarClaimArgs {
    #[command(flatten)]
    pub flux: FluxArgs,
    #[arg(long, default_value_t = 3)]
    pub j: u64,
    #[arg(long, default_value_t = 0.5)]
    pub t0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub stab_tol: f64,
    #[arg(long, default_value_t = (1 << 20) - 1)]
    pub max_level: usize,
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub flux: FluxArgs,
    #[arg(long, default_value_t = 32)]
    pub level: usize,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 20)]
    pub bumps: usize,
    #[arg(long, default_value_t = 41)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct DissipationArgs {
    #[command(flatten)]
    pub flux: FluxArgs,
    #[arg(long, default_value_t = 0.5)]
    pub t0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Scan a grid instead of the points `z_1..z_{j-max}`.
    #[arg(long)]
    pub scan: bool,
    /// `lo:hi:step` for the scan.
    #[arg(long, default_value = "-0.2:1.2:0.0078125", allow_hyphen_values = true)]
    pub grid: String,
    /// Box radius for the scan.
    #[arg(long, default_value_t = 0.0078125)]
    pub radius: f64,
    #[arg(long, default_value_t = 4)]
    pub j_max: u64,
    /// Use this level instead of the limit solution.
    #[arg(long)]
    pub level: Option<usize>,
    /// Stabilization tolerance of the limit evaluation.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum MultidCmd {
    /// Classify each flux component on a window.
    Analyze(AnalyzeArgs),
    /// Tensor solution checks and the 2D dissipation scan.
    Verify(MultidVerifyArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    /// One per component.
    #[arg(long, required = true)]
    pub flux: Vec<String>,
    /// `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub window: String,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub floor: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct MultidVerifyArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0.5)]
    pub t0: f64,
    #[arg(long, default_value_t = 32)]
    pub level: usize,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Flux of the second component.
    #[arg(long, default_value = r#"{"kind":"poly","params":{"coeffs":[0,0,0,1]}}"#)]
    pub transverse_flux: String,
    /// `lo:hi:step` in `x_1`.
    #[arg(long, default_value = "-0.2:1.2:0.0625", allow_hyphen_values = true)]
    pub grid: String,
    /// `x_2` values.
    #[arg(long, default_value = "-0.5,0,0.5", allow_hyphen_values = true)]
    pub x2: String,
    #[arg(long, default_value_t = 0.03125)]
    pub radius: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SystemCmd {
    /// Sample a wave curve.
    Curves(CurvesArgs),
    /// Genuinely nonlinear construction at level N.
    Build(SystemBuildArgs),
    /// Front tracking of a stored profile.
    Track(TrackArgs),
    /// Claim checks.
    Verify {
        #[command(subcommand)]
        cmd: SystemVerifyCmd,
    },
    /// Linearly degenerate contact staircase.
    BuildLd(BuildLdArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct FixtureArgs {
    /// isentropic | euler3 | linear | burgers
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long, default_value_t = 1.4)]
    pub gamma: f64,
    /// Diagonal of a linear fixture, `a,b,...`.
    #[arg(long, allow_hyphen_values = true)]
    pub diagonal: Option<String>,
    /// Base state `u1,u2,...`; defaults to the fixture's.
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub system: FixtureArgs,
    #[arg(long, default_value_t = 1)]
    pub field: usize,
    /// `lo:hi:step`
    #[arg(long, default_value = "-0.1:0.1:0.005", allow_hyphen_values = true)]
    pub sigma: String,
    /// shock | rarefaction | composite | contact
    #[arg(long, default_value = "shock")]
    pub branch: String,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SystemBuildArgs {
    #[command(flatten)]
    pub system: FixtureArgs,
    #[arg(long, default_value_t = 1)]
    pub field: usize,
    #[arg(long, default_value_t = 0.05)]
    pub sigma0: f64,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct TrackArgs {
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps_fan: f64,
    /// Snapshot times `a,b,...`; the final time is always included.
    #[arg(long, allow_hyphen_values = true)]
    pub snapshots: Option<String>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SystemVerifyCmd {
    /// `λ_i` gap across `z_j` for the Helly limit.
    Claim(SystemClaimArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SystemClaimArgs {
    #[command(flatten)]
    pub system: FixtureArgs,
    #[arg(long, default_value_t = 1)]
    pub field: usize,
    #[arg(long, default_value_t = 0.05)]
    pub sigma0: f64,
    #[arg(long, default_value_t = 3)]
    pub j: u64,
    #[arg(long, default_value_t = 0.5)]
    pub t0: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub stab_tol: f64,
    #[arg(long, default_value_t = 9)]
    pub max_depth: u32,
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    /// Fan resolution; defaults to `min(1e-3, σ0/100)`.
    #[arg(long)]
    pub eps_fan: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildLdArgs {
    #[command(flatten)]
    pub system: FixtureArgs,
    #[arg(long, default_value_t = 2)]
    pub field: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta0: f64,
    /// Number of staircase terms.
    #[arg(long, default_value_t = 12)]
    pub levels: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("DENSEJUMP_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| Failure::Usage(format!("DENSEJUMP_THREADS: expected a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
