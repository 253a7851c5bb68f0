use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "rrs",
    version,
    about = "Restarted randomized surrounding solvers: experiments and reports"
)]
pub struct Cli {
    /// key=value file supplying defaults for any long flag; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a test problem directory.
    Gen(GenArgs),
    /// Run one solver and write its trace.
    Solve(SolveArgs),
    /// Multi-trial benchmark with averaged IT / CPU / convergence fraction.
    Bench(RunArgs),
    /// Convergence curves (CSV + SVG), one run per method.
    Curve(RunArgs),
    /// Noisy parallel-beam reconstruction with SNR and PGM images.
    Tomo(TomoArgs),
    /// Spectral report and rate constants for a matrix.
    Bound(BoundArgs),
}

/// Flags accepted by every subcommand.
#[derive(Debug, Args, Default)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Squared relative error threshold (default 1e-6).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Reflection budget (default 5000).
    #[arg(long)]
    pub max_reflections: Option<usize>,
    /// Trials per method (default 40).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Restart length; repeat for several.
    #[arg(long = "q")]
    pub q: Vec<usize>,
    /// ERR reference: constructed, minnorm or auto.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for concurrent trials (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Record wall-clock times in CSV output (makes it run-dependent).
    #[arg(long)]
    pub timing: bool,
}

/// Where the linear system comes from.
#[derive(Debug, Args, Default)]
pub struct Source {
    /// Gaussian system, e.g. 3000x100.
    #[arg(long, value_name = "MxN")]
    pub gaussian: Option<String>,
    /// Matrix Market file; b = A·1.
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Directory written by `rrs gen`.
    #[arg(long, value_name = "DIR")]
    pub problem: Option<PathBuf>,
    /// Storage for loaded matrices: auto, dense or csr.
    #[arg(long)]
    pub repr: Option<String>,
    /// Relative noise level added to b.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: Common,
    /// Gaussian system, e.g. 3000x100.
    #[arg(long, value_name = "MxN")]
    pub gaussian: Option<String>,
    /// Parallel-beam tomography problem instead of a Gaussian one.
    #[arg(long)]
    pub tomo: bool,
    #[command(flatten)]
    pub geometry: Geometry,
    /// Relative noise level added to b.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct Geometry {
    /// Image is N×N pixels.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub angles: Option<usize>,
    #[arg(long)]
    pub detectors: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub source: Source,
    /// rs, rrs, rrs-weighted or kaczmarz.
    #[arg(long)]
    pub method: Option<String>,
    /// Comma-separated convex weights for rrs-weighted.
    #[arg(long)]
    pub weights: Option<String>,
    /// Reflections between trace points.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Random stream id.
    #[arg(long)]
    pub stream: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub source: Source,
    /// Methods to run (rs, rrs, kaczmarz); rrs expands over every --q.
    #[arg(long)]
    pub method: Vec<String>,
    /// Reflections between trace points.
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub geometry: Geometry,
    /// Relative noise level (default 0.01).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub method: Vec<String>,
    /// Reflection budget as a multiple of the row count (default 100).
    #[arg(long)]
    pub budget_multiplier: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub source: Source,
    /// Largest restart count in the comparison series (default 20).
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Also write bound.csv to --out.
    #[arg(long)]
    pub csv: bool,
}
