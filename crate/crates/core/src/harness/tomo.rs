use super::{MethodSpec, NOISE_STREAM};
use crate::analysis::snr;
use crate::error::{Error, Result};
use crate::problems::{add_noise, gen_parallel_tomo, Phantom, Problem, TomoGeometry};
use crate::sampling::RngStream;
use crate::solver::{solve, ErrOracle};

#[derive(Debug, Clone, PartialEq)]
pub struct TomoSpec {
    pub geometry: TomoGeometry,
    pub phantom: Phantom,
    /// Relative noise level; 0 keeps the right-hand side exact.
    pub delta: f64,
    pub methods: Vec<MethodSpec>,
    /// Each method runs for `budget_multiplier · m` reflections.
    pub budget_multiplier: usize,
    pub seed: u64,
}

impl Default for TomoSpec {
    fn default() -> Self {
        TomoSpec {
            geometry: TomoGeometry::uniform(32, 60, 45),
            phantom: Phantom::head(),
            delta: 0.01,
            methods: MethodSpec::standard(&[5, 10, 20]),
            budget_multiplier: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomoResult {
    pub method: MethodSpec,
    pub snr_db: f64,
    pub image: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TomoReport {
    pub problem: Problem,
    pub budget: usize,
    pub results: Vec<TomoResult>,
}

impl TomoReport {
    pub fn clean_image(&self) -> &[f64] {
        self.problem.x_ref.as_deref().unwrap_or(&[])
    }

    pub fn snr_for(&self, label: &str) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.method.label() == label)
            .map(|r| r.snr_db)
    }

    pub fn snr_csv(&self) -> String {
        let mut out = String::from("method,q,snr_db\n");
        for r in &self.results {
            let v = if r.snr_db.is_infinite() {
                "inf".to_string()
            } else {
                format!("{:.6}", r.snr_db)
            };
            out.push_str(&format!(
                "{},{},{}\n",
                r.method.method,
                r.method.q_field(),
                v
            ));
        }
        out
    }
}

/// Builds the scan, adds noise from stream `(seed, NOISE_STREAM)` and runs
/// each method from zero with stream `(seed, 0)`.
pub fn run_tomo(spec: &TomoSpec) -> Result<TomoReport> {
    if spec.budget_multiplier == 0 {
        return Err(Error::arg("budget multiplier must be at least 1"));
    }
    if !(spec.delta.is_finite() && spec.delta >= 0.0) {
        return Err(Error::arg(format!(
            "noise level {} must be >= 0",
            spec.delta
        )));
    }
    let mut problem = gen_parallel_tomo(&spec.geometry, &spec.phantom)?;
    if spec.delta > 0.0 {
        problem = add_noise(
            problem,
            spec.delta,
            &mut RngStream::new(spec.seed, NOISE_STREAM),
        )?;
    }
    let clean = problem
        .x_ref
        .clone()
        .expect("tomography problems carry the phantom");
    let x0 = vec![0.0; problem.ncols()];
    let oracle = ErrOracle::new(&clean, &x0)?;
    let budget = spec.budget_multiplier * problem.nrows();
    let results = spec
        .methods
        .iter()
        .map(|m| {
            let cfg = m
                .config()
                .with_tol(0.0)
                .with_budget(budget)
                .with_stride(budget)
                .with_stream(spec.seed, 0);
            let trace = solve(&problem.a, &problem.b, &x0, &cfg, &oracle)?;
            Ok(TomoResult {
                method: m.clone(),
                snr_db: snr(&clean, &trace.solution)?,
                image: trace.solution,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TomoReport {
        problem,
        budget,
        results,
    })
}
