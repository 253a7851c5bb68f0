//! Experiment drivers: multi-trial benchmarks, convergence curves,
//! tomography reconstructions and bound reports.
//!
//! Every driver is deterministic in its inputs and seed. Trials may run
//! concurrently; results are always collected in (method, trial) order.

mod bench;
mod bound;
mod curve;
pub mod output;
mod tomo;

pub use bench::{run_bench, BenchReport, BenchSpec, MethodSummary, TrialRecord};
pub use bound::{run_bound, BoundRun};
pub use curve::{run_curve, CurveReport, CurveSeries};
pub use tomo::{run_tomo, TomoReport, TomoResult, TomoSpec};

use std::fmt;
use std::str::FromStr;

use crate::analysis::min_norm_solution;
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::solver::{Method, SolveConfig};

/// Stream id reserved for problem generation (trials use `0..trials`).
pub const PROBLEM_STREAM: u64 = 1 << 40;
/// Stream id reserved for right-hand-side noise.
pub const NOISE_STREAM: u64 = (1 << 40) + 1;

/// One solver variant in a benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    pub q: usize,
    pub weights: Option<Vec<f64>>,
}

impl MethodSpec {
    pub fn rs() -> Self {
        MethodSpec {
            method: Method::Rs,
            q: 1,
            weights: None,
        }
    }

    pub fn rrs(q: usize) -> Self {
        MethodSpec {
            method: Method::Rrs,
            q,
            weights: None,
        }
    }

    pub fn kaczmarz() -> Self {
        MethodSpec {
            method: Method::Kaczmarz,
            q: 1,
            weights: None,
        }
    }

    pub fn weighted(weights: Vec<f64>) -> Self {
        MethodSpec {
            method: Method::RrsWeighted,
            q: weights.len(),
            weights: Some(weights),
        }
    }

    /// The usual line-up: RS, then RRS(q) for each `q`.
    pub fn standard(qs: &[usize]) -> Vec<MethodSpec> {
        std::iter::once(MethodSpec::rs())
            .chain(qs.iter().map(|&q| MethodSpec::rrs(q)))
            .collect()
    }

    pub fn config(&self) -> SolveConfig {
        SolveConfig {
            method: self.method,
            q: self.q,
            weights: self.weights.clone(),
            ..SolveConfig::default()
        }
    }

    pub fn label(&self) -> String {
        self.config().label()
    }

    /// `q` as written to CSV files; empty for methods without restarts.
    pub fn q_field(&self) -> String {
        if self.method.is_restarted() {
            self.q.to_string()
        } else {
            String::new()
        }
    }
}

/// Point against which ERR is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    /// Minimum-norm solution for underdetermined systems, the constructed
    /// solution otherwise.
    #[default]
    Auto,
    Constructed,
    MinNorm,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Auto => "auto",
            Target::Constructed => "constructed",
            Target::MinNorm => "minnorm",
        })
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Target::Auto),
            "constructed" => Ok(Target::Constructed),
            "minnorm" | "min-norm" => Ok(Target::MinNorm),
            other => Err(Error::arg(format!(
                "unknown target '{other}' (expected constructed, minnorm or auto)"
            ))),
        }
    }
}

/// Resolves the ERR reference vector of `problem`.
pub fn resolve_target(problem: &Problem, target: Target) -> Result<Vec<f64>> {
    let use_min_norm = match target {
        Target::MinNorm => true,
        Target::Constructed => false,
        Target::Auto => problem.nrows() < problem.ncols() || problem.x_ref.is_none(),
    };
    if use_min_norm {
        min_norm_solution(&problem.a, &problem.b)
    } else {
        problem
            .x_ref
            .clone()
            .ok_or_else(|| Error::arg("problem has no constructed reference solution"))
    }
}

pub(crate) fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::arg("--jobs must be at least 1"));
        }
        builder = builder.num_threads(j);
    }
    builder
        .build()
        .map_err(|e| Error::arg(format!("cannot build thread pool: {e}")))
}
