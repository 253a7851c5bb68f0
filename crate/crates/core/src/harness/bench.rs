use rayon::prelude::*;

use super::{thread_pool, MethodSpec};
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::solver::{solve, ErrOracle, DEFAULT_MAX_REFLECTIONS, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub methods: Vec<MethodSpec>,
    pub trials: usize,
    pub tol: f64,
    pub max_reflections: usize,
    pub seed: u64,
    pub checkpoint_stride: Option<usize>,
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            methods: MethodSpec::standard(&[5, 10, 20]),
            trials: 40,
            tol: DEFAULT_TOL,
            max_reflections: DEFAULT_MAX_REFLECTIONS,
            seed: 0,
            checkpoint_stride: None,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: MethodSpec,
    pub trial: usize,
    pub seed: u64,
    /// Reflections to convergence, or `max_reflections` if not converged.
    pub it_reflections: usize,
    pub restarts: usize,
    pub err_final: f64,
    pub elapsed_s: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: MethodSpec,
    pub trials: usize,
    pub mean_it: f64,
    pub mean_restarts: f64,
    pub mean_elapsed_s: f64,
    pub converged_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<MethodSummary>,
}

impl BenchReport {
    pub fn summary_for(&self, label: &str) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method.label() == label)
    }

    /// Per-trial CSV. Wall-clock times are written only when `timing` is
    /// set (as 0 otherwise) so that repeated runs produce identical bytes.
    pub fn trials_csv(&self, timing: bool) -> String {
        let mut out = String::from(
            "method,q,trial,seed,it_reflections,restarts,err_final,elapsed_s,converged\n",
        );
        for t in &self.trials {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:e},{},{}\n",
                t.method.method,
                t.method.q_field(),
                t.trial,
                t.seed,
                t.it_reflections,
                t.restarts,
                t.err_final,
                if timing {
                    format!("{:.6}", t.elapsed_s)
                } else {
                    "0".into()
                },
                u8::from(t.converged)
            ));
        }
        out
    }

    pub fn summary_csv(&self, timing: bool) -> String {
        let mut out = String::from(
            "method,q,label,trials,mean_it_reflections,mean_restarts,mean_elapsed_s,converged_fraction\n",
        );
        for s in &self.summary {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.method.method,
                s.method.q_field(),
                s.method.label(),
                s.trials,
                s.mean_it,
                s.mean_restarts,
                if timing {
                    format!("{:.6}", s.mean_elapsed_s)
                } else {
                    "0".into()
                },
                s.converged_fraction
            ));
        }
        out
    }

    /// Fixed-width table in the layout of the IT / CPU result tables.
    pub fn summary_table(&self) -> String {
        let mut out = format!(
            "{:<10} {:>10} {:>10} {:>12} {:>10}\n",
            "method", "IT", "restarts", "CPU (s)", "conv"
        );
        for s in &self.summary {
            out.push_str(&format!(
                "{:<10} {:>10.1} {:>10.1} {:>12.6} {:>10.3}\n",
                s.method.label(),
                s.mean_it,
                s.mean_restarts,
                s.mean_elapsed_s,
                s.converged_fraction
            ));
        }
        out
    }
}

/// Runs every method for `spec.trials` trials on `problem` from `x0 = 0`.
/// Trial `t` uses the random stream `(spec.seed, t)`.
pub fn run_bench(problem: &Problem, x_ref: &[f64], spec: &BenchSpec) -> Result<BenchReport> {
    if spec.trials == 0 {
        return Err(Error::arg("trials must be at least 1"));
    }
    if spec.methods.is_empty() {
        return Err(Error::arg("no methods to benchmark"));
    }
    let x0 = vec![0.0; problem.ncols()];
    let oracle = ErrOracle::new(x_ref, &x0)?;
    let configs = spec
        .methods
        .iter()
        .map(|m| {
            let mut c = m
                .config()
                .with_tol(spec.tol)
                .with_budget(spec.max_reflections);
            c.checkpoint_stride = spec.checkpoint_stride;
            c.validate().map(|_| c)
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|mi| (0..spec.trials).map(move |t| (mi, t)))
        .collect();
    let pool = thread_pool(spec.jobs)?;
    let trials = pool.install(|| {
        jobs.par_iter()
            .map(|&(mi, t)| {
                let cfg = configs[mi].clone().with_stream(spec.seed, t as u64);
                let trace = solve(&problem.a, &problem.b, &x0, &cfg, &oracle)?;
                let converged = trace.converged();
                Ok(TrialRecord {
                    method: spec.methods[mi].clone(),
                    trial: t,
                    seed: spec.seed,
                    it_reflections: if converged {
                        trace.iterations()
                    } else {
                        spec.max_reflections
                    },
                    restarts: trace.restarts(),
                    err_final: trace.final_err(),
                    elapsed_s: trace.elapsed(),
                    converged,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let summary = spec
        .methods
        .iter()
        .enumerate()
        .map(|(mi, m)| {
            let rows = &trials[mi * spec.trials..(mi + 1) * spec.trials];
            let k = rows.len() as f64;
            MethodSummary {
                method: m.clone(),
                trials: rows.len(),
                mean_it: rows.iter().map(|r| r.it_reflections as f64).sum::<f64>() / k,
                mean_restarts: rows.iter().map(|r| r.restarts as f64).sum::<f64>() / k,
                mean_elapsed_s: rows.iter().map(|r| r.elapsed_s).sum::<f64>() / k,
                converged_fraction: rows.iter().filter(|r| r.converged).count() as f64 / k,
            }
        })
        .collect();
    Ok(BenchReport { trials, summary })
}
