use super::output::{convergence_svg, Series};
use super::MethodSpec;
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::solver::{solve, Checkpoint, ErrOracle};

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    pub method: MethodSpec,
    pub checkpoints: Vec<Checkpoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveReport {
    pub series: Vec<CurveSeries>,
}

impl CurveReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("reflections,method,q,err\n");
        for s in &self.series {
            for cp in &s.checkpoints {
                out.push_str(&format!(
                    "{},{},{},{:e}\n",
                    cp.reflections,
                    s.method.method,
                    s.method.q_field(),
                    cp.err
                ));
            }
        }
        out
    }

    pub fn svg(&self, title: &str) -> String {
        let series: Vec<Series> = self
            .series
            .iter()
            .map(|s| Series {
                label: s.method.label(),
                points: s
                    .checkpoints
                    .iter()
                    .map(|c| (c.reflections as f64, c.err))
                    .collect(),
            })
            .collect();
        convergence_svg(title, &series)
    }
}

/// One run per method from `x0 = 0` with stream `(seed, 0)`, recording ERR
/// at every checkpoint until `tol` or `budget` reflections. `stride`
/// overrides each method's default checkpoint spacing.
pub fn run_curve(
    problem: &Problem,
    x_ref: &[f64],
    methods: &[MethodSpec],
    budget: usize,
    tol: f64,
    seed: u64,
    stride: Option<usize>,
) -> Result<CurveReport> {
    if budget == 0 {
        return Err(Error::arg("curve budget must be at least 1"));
    }
    let x0 = vec![0.0; problem.ncols()];
    let oracle = ErrOracle::new(x_ref, &x0)?;
    let series = methods
        .iter()
        .map(|m| {
            let mut cfg = m
                .config()
                .with_tol(tol)
                .with_budget(budget)
                .with_stream(seed, 0);
            if let Some(s) = stride {
                cfg = cfg.with_stride(s);
            }
            let trace = solve(&problem.a, &problem.b, &x0, &cfg, &oracle)?;
            Ok(CurveSeries {
                method: m.clone(),
                checkpoints: trace.checkpoints,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveReport { series })
}
