//! Row-action iterations built on the implicit Householder reflection
//! `x ← x + 2 (bᵢ − aᵢᵀx) / ‖aᵢ‖² · aᵢ`.
//!
//! * RS: reflect repeatedly, report the running mean of the reflected points.
//! * RRS(q): from the current point take q−1 reflections, average the q
//!   visited points (start included) and restart from the average.
//! * Weighted RRS: as RRS with a convex combination instead of the mean.
//! * Kaczmarz: projection (step factor 1) with the same row sampling.
//!
//! IT is counted in reflections. An RRS restart costs q−1 of them.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, RowView};
use crate::sampling::{RngStream, RowSampler};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_REFLECTIONS: usize = 5000;
/// Checkpoint stride (in reflections) for RS and Kaczmarz when none is set.
pub const DEFAULT_POINTWISE_STRIDE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Rs,
    Rrs,
    RrsWeighted,
    Kaczmarz,
}

impl Method {
    pub fn is_restarted(self) -> bool {
        matches!(self, Method::Rrs | Method::RrsWeighted)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Rs => "rs",
            Method::Rrs => "rrs",
            Method::RrsWeighted => "rrs-weighted",
            Method::Kaczmarz => "kaczmarz",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "rs" => Ok(Method::Rs),
            "rrs" => Ok(Method::Rrs),
            "rrs-weighted" | "wrrs" => Ok(Method::RrsWeighted),
            "kaczmarz" | "rk" => Ok(Method::Kaczmarz),
            other => Err(Error::arg(format!(
                "unknown method '{other}' (expected rs, rrs, rrs-weighted or kaczmarz)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub method: Method,
    /// Points averaged per restart (RRS only).
    pub q: usize,
    /// Convex weights for [`Method::RrsWeighted`], length `q`.
    pub weights: Option<Vec<f64>>,
    /// Threshold on the squared relative error.
    pub tol: f64,
    pub max_reflections: usize,
    /// Reflections between trace points; `None` picks the method default.
    pub checkpoint_stride: Option<usize>,
    pub seed: u64,
    pub stream: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            method: Method::Rrs,
            q: 5,
            weights: None,
            tol: DEFAULT_TOL,
            max_reflections: DEFAULT_MAX_REFLECTIONS,
            checkpoint_stride: None,
            seed: 0,
            stream: 0,
        }
    }
}

impl SolveConfig {
    pub fn rs() -> Self {
        SolveConfig {
            method: Method::Rs,
            ..Default::default()
        }
    }

    pub fn rrs(q: usize) -> Self {
        SolveConfig {
            method: Method::Rrs,
            q,
            ..Default::default()
        }
    }

    pub fn rrs_weighted(weights: Vec<f64>) -> Self {
        SolveConfig {
            method: Method::RrsWeighted,
            q: weights.len(),
            weights: Some(weights),
            ..Default::default()
        }
    }

    pub fn kaczmarz() -> Self {
        SolveConfig {
            method: Method::Kaczmarz,
            ..Default::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_budget(mut self, max_reflections: usize) -> Self {
        self.max_reflections = max_reflections;
        self
    }

    pub fn with_stream(mut self, seed: u64, stream: u64) -> Self {
        self.seed = seed;
        self.stream = stream;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.checkpoint_stride = Some(stride);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Config(format!(
                "tolerance {} must be finite and >= 0",
                self.tol
            )));
        }
        if self.checkpoint_stride == Some(0) {
            return Err(Error::Config("checkpoint stride must be positive".into()));
        }
        match self.method {
            Method::Rrs | Method::RrsWeighted if self.q < 2 => {
                return Err(Error::Config(format!(
                    "restart length q = {} makes no progress; RRS needs q >= 2",
                    self.q
                )))
            }
            _ => {}
        }
        match (self.method, &self.weights) {
            (Method::RrsWeighted, None) => {
                return Err(Error::Config("weighted RRS requires weights".into()))
            }
            (Method::RrsWeighted, Some(w)) => {
                if w.len() != self.q {
                    return Err(Error::Config(format!(
                        "{} weights given for q = {}",
                        w.len(),
                        self.q
                    )));
                }
                if w.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
                    return Err(Error::Config("weights must be positive".into()));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!("weights sum to {sum}, expected 1")));
                }
            }
            (_, Some(_)) => {
                return Err(Error::Config(format!(
                    "weights are only meaningful for rrs-weighted, not {}",
                    self.method
                )))
            }
            _ => {}
        }
        Ok(())
    }

    /// Short label used in tables and plots, e.g. `RS`, `RRS(5)`.
    pub fn label(&self) -> String {
        match self.method {
            Method::Rs => "RS".into(),
            Method::Rrs => format!("RRS({})", self.q),
            Method::RrsWeighted => format!("WRRS({})", self.q),
            Method::Kaczmarz => "RK".into(),
        }
    }

    fn stride(&self) -> usize {
        self.checkpoint_stride
            .unwrap_or(if self.method.is_restarted() {
                self.q - 1
            } else {
                DEFAULT_POINTWISE_STRIDE
            })
    }

    fn restart_weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) if self.method == Method::RrsWeighted => w.clone(),
            _ => vec![1.0 / self.q as f64; self.q],
        }
    }
}

/// ERR = ‖x − x_ref‖² / ‖x0 − x_ref‖².
///
/// When `x0 == x_ref` the denominator is zero; the oracle then reports the
/// absolute squared distance, so the start point scores 0 and converges.
#[derive(Debug, Clone)]
pub struct ErrOracle<'a> {
    x_ref: &'a [f64],
    denom: f64,
}

impl<'a> ErrOracle<'a> {
    pub fn new(x_ref: &'a [f64], x0: &[f64]) -> Result<Self> {
        if x_ref.len() != x0.len() {
            return Err(Error::arg(format!(
                "reference length {} does not match start length {}",
                x_ref.len(),
                x0.len()
            )));
        }
        Ok(ErrOracle {
            x_ref,
            denom: sq_dist(x0, x_ref),
        })
    }

    pub fn x_ref(&self) -> &[f64] {
        self.x_ref
    }

    pub fn initial_sq_error(&self) -> f64 {
        self.denom
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_scaled(x, 1.0)
    }

    /// ERR of `scale * x`, used for running means without a temporary.
    fn eval_scaled(&self, x: &[f64], scale: f64) -> f64 {
        let num: f64 = x
            .iter()
            .zip(self.x_ref)
            .map(|(&v, &r)| {
                let d = scale * v - r;
                d * d
            })
            .sum();
        if self.denom > 0.0 {
            num / self.denom
        } else {
            num
        }
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[inline]
fn relax(row: RowView<'_>, bi: f64, row_sq: f64, factor: f64, x: &mut [f64]) {
    let step = factor * (bi - row.dot(x)) / row_sq;
    row.axpy(step, x);
}

fn check_dims(a: &Matrix, b: &[f64], x: &[f64]) -> Result<()> {
    if b.len() != a.nrows() {
        return Err(Error::arg(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.nrows()
        )));
    }
    if x.len() != a.ncols() {
        return Err(Error::arg(format!(
            "iterate has length {}, matrix has {} columns",
            x.len(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Reflects `x` in place across the hyperplane `aᵢᵀx = bᵢ`.
pub fn reflect(x: &mut [f64], a: &Matrix, b: &[f64], i: usize) -> Result<()> {
    check_dims(a, b, x)?;
    let row = a.row(i)?;
    let sq = a.row_sq_norm(i);
    if sq == 0.0 {
        return Err(Error::Domain(format!(
            "row {i} has zero norm; reflection undefined"
        )));
    }
    relax(row, b[i], sq, 2.0, x);
    Ok(())
}

/// Orthogonal projection of `x` onto the hyperplane `aᵢᵀx = bᵢ`.
pub fn project(x: &mut [f64], a: &Matrix, b: &[f64], i: usize) -> Result<()> {
    check_dims(a, b, x)?;
    let row = a.row(i)?;
    let sq = a.row_sq_norm(i);
    if sq == 0.0 {
        return Err(Error::Domain(format!(
            "row {i} has zero norm; projection undefined"
        )));
    }
    relax(row, b[i], sq, 1.0, x);
    Ok(())
}

/// Mutable state of one solver run.
///
/// `running_sum` holds the (weighted) sum of the points that form the next
/// reported approximation: all reflected points so far for RS, the points of
/// the current restart block for RRS.
#[derive(Debug, Clone)]
pub struct SolverState<'a> {
    a: &'a Matrix,
    b: &'a [f64],
    x: Vec<f64>,
    running_sum: Vec<f64>,
    summed: usize,
    reflections: usize,
    restarts: usize,
    sampler: RowSampler,
}

impl<'a> SolverState<'a> {
    pub fn new(a: &'a Matrix, b: &'a [f64], x0: &[f64], rng: RngStream) -> Result<Self> {
        check_dims(a, b, x0)?;
        if let Some(v) = b.iter().chain(x0).find(|v| !v.is_finite()) {
            return Err(Error::arg(format!("non-finite input value {v}")));
        }
        let sampler = RowSampler::new(a, rng)?;
        Ok(SolverState {
            a,
            b,
            x: x0.to_vec(),
            running_sum: vec![0.0; x0.len()],
            summed: 0,
            reflections: 0,
            restarts: 0,
            sampler,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn running_sum(&self) -> &[f64] {
        &self.running_sum
    }

    /// Number of points accumulated into `running_sum`.
    pub fn summed(&self) -> usize {
        self.summed
    }

    pub fn reflections(&self) -> usize {
        self.reflections
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }

    #[inline]
    fn step(&mut self, factor: f64) -> usize {
        // the sampler never returns zero-norm rows
        let i = self.sampler.draw();
        relax(
            self.a.row_unchecked(i),
            self.b[i],
            self.a.row_sq_norm(i),
            factor,
            &mut self.x,
        );
        self.reflections += 1;
        i
    }

    /// One random reflection of the current point. Returns the row used.
    pub fn reflect_step(&mut self) -> usize {
        self.step(2.0)
    }

    /// One random projection of the current point. Returns the row used.
    pub fn project_step(&mut self) -> usize {
        self.step(1.0)
    }

    /// `running_sum += w * x`
    pub fn accumulate(&mut self, w: f64) {
        for (s, &v) in self.running_sum.iter_mut().zip(&self.x) {
            *s += w * v;
        }
        self.summed += 1;
    }

    pub fn clear_sum(&mut self) {
        self.running_sum.iter_mut().for_each(|s| *s = 0.0);
        self.summed = 0;
    }

    /// Running mean `running_sum / summed` (the start point if nothing was summed).
    pub fn mean(&self) -> Vec<f64> {
        if self.summed == 0 {
            return self.x.clone();
        }
        let k = self.summed as f64;
        self.running_sum.iter().map(|s| s / k).collect()
    }

    /// One restart block: `y⁰ = x`, `q−1` reflections, then
    /// `x ← Σ wᵢ yⁱ` with `q = weights.len()`.
    pub fn restart(&mut self, weights: &[f64]) {
        self.clear_sum();
        self.accumulate(weights[0]);
        for &w in &weights[1..] {
            self.reflect_step();
            self.accumulate(w);
        }
        self.x.copy_from_slice(&self.running_sum);
        self.restarts += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    BudgetExhausted,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::BudgetExhausted => "budget_exhausted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub reflections: usize,
    pub restarts: usize,
    pub err: f64,
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    /// Strictly increasing in `reflections`; the first is the start point.
    pub checkpoints: Vec<Checkpoint>,
    pub termination: Termination,
    /// Approximate solution reported at the last checkpoint.
    pub solution: Vec<f64>,
}

impl SolveTrace {
    /// Reflections performed when the run stopped.
    pub fn iterations(&self) -> usize {
        self.last().reflections
    }

    pub fn restarts(&self) -> usize {
        self.last().restarts
    }

    pub fn final_err(&self) -> f64 {
        self.last().err
    }

    pub fn elapsed(&self) -> f64 {
        self.last().elapsed
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    fn last(&self) -> &Checkpoint {
        self.checkpoints
            .last()
            .expect("trace has a start checkpoint")
    }
}

/// Called at every checkpoint with the reported approximate solution.
pub type Observer<'o> = dyn FnMut(&Checkpoint, &[f64]) + 'o;

struct Recorder<'o, 'r> {
    start: Instant,
    tol: f64,
    stride: usize,
    checkpoints: Vec<Checkpoint>,
    observer: Option<&'o mut Observer<'r>>,
}

impl<'o, 'r> Recorder<'o, 'r> {
    fn new(config: &SolveConfig, observer: Option<&'o mut Observer<'r>>) -> Self {
        Recorder {
            start: Instant::now(),
            tol: config.tol,
            stride: config.stride(),
            checkpoints: Vec::new(),
            observer,
        }
    }

    fn due(&self, reflections: usize) -> bool {
        self.checkpoints
            .last()
            .is_none_or(|c| reflections >= c.reflections + self.stride)
    }

    fn already_recorded(&self, reflections: usize) -> bool {
        self.checkpoints.last().map(|c| c.reflections) == Some(reflections)
    }

    /// Records a checkpoint and reports whether the tolerance is met.
    fn record(&mut self, reflections: usize, restarts: usize, err: f64, solution: &[f64]) -> bool {
        let cp = Checkpoint {
            reflections,
            restarts,
            err,
            elapsed: self.start.elapsed().as_secs_f64(),
        };
        if let Some(obs) = self.observer.as_mut() {
            obs(&cp, solution);
        }
        self.checkpoints.push(cp);
        err <= self.tol
    }

    fn finish(self, termination: Termination, solution: Vec<f64>) -> SolveTrace {
        SolveTrace {
            checkpoints: self.checkpoints,
            termination,
            solution,
        }
    }
}

fn prepare<'a>(
    a: &'a Matrix,
    b: &'a [f64],
    x0: &[f64],
    config: &SolveConfig,
    oracle: &ErrOracle<'_>,
    allowed: &[Method],
) -> Result<SolverState<'a>> {
    config.validate()?;
    if !allowed.contains(&config.method) {
        return Err(Error::Config(format!(
            "method {} cannot be run by this driver",
            config.method
        )));
    }
    if oracle.x_ref.len() != a.ncols() {
        return Err(Error::arg(
            "reference solution length does not match matrix columns",
        ));
    }
    SolverState::new(a, b, x0, RngStream::new(config.seed, config.stream))
}

/// Dispatches to the driver for `config.method`.
pub fn solve(
    a: &Matrix,
    b: &[f64],
    x0: &[f64],
    config: &SolveConfig,
    oracle: &ErrOracle<'_>,
) -> Result<SolveTrace> {
    solve_observed(a, b, x0, config, oracle, None)
}

pub fn solve_observed(
    a: &Matrix,
    b: &[f64],
    x0: &[f64],
    config: &SolveConfig,
    oracle: &ErrOracle<'_>,
    observer: Option<&mut Observer<'_>>,
) -> Result<SolveTrace> {
    match config.method {
        Method::Rs => run_rs(a, b, x0, config, oracle, observer),
        Method::Rrs | Method::RrsWeighted => run_rrs(a, b, x0, config, oracle, observer),
        Method::Kaczmarz => run_kaczmarz(a, b, x0, config, oracle, observer),
    }
}

/// Randomized surrounding: the reported solution after `k` reflections is
/// the mean of the `k` reflected points (the start point is not included).
pub fn solve_rs(
    a: &Matrix,
    b: &[f64],
    x0: &[f64],
    config: &SolveConfig,
    oracle: &ErrOracle<'_>,
) -> Result<SolveTrace> {
    run_rs(a, b, x0, config, oracle, None)
}

/// Restarted randomized surrounding, plain or weighted.
pub fn solve_rrs(
    a: &Matrix,
    b: &[f64],
    x0: &[f64],
    config: &SolveConfig,
    oracle: &ErrOracle<'_>,
) -> Result<SolveTrace> {
    run_rrs(a, b, x0, config, oracle, None)
}

/// Randomized Kaczmarz baseline (projection instead of reflection).
pub fn solve_kaczmarz(
    a: &Matrix,
    b: &[f64],
    x0: &[f64],
    config: &SolveConfig,
    oracle: &ErrOracle<'_>,
) -> Result<SolveTrace> {
    run_kaczmarz(a, b, x0, config, oracle, None)
}

fn run_rs(
    a: &Matrix,
    b: &[f64],
    x0: &[f64],
    config: &SolveConfig,
    oracle: &ErrOracle<'_>,
    observer: Option<&mut Observer<'_>>,
) -> Result<SolveTrace> {
    let mut st = prepare(a, b, x0, config, oracle, &[Method::Rs])?;
    let mut rec = Recorder::new(config, observer);
    if rec.record(0, 0, oracle.eval(x0), x0) {
        return Ok(rec.finish(Termination::Converged, x0.to_vec()));
    }
    while st.reflections < config.max_reflections {
        st.reflect_step();
        st.accumulate(1.0);
        let k = st.reflections;
        if rec.due(k) || k == config.max_reflections {
            let err = oracle.eval_scaled(&st.running_sum, 1.0 / k as f64);
            if rec.observer.is_some() {
                let mean = st.mean();
                if rec.record(k, 0, err, &mean) {
                    return Ok(rec.finish(Termination::Converged, mean));
                }
            } else if rec.record(k, 0, err, &[]) {
                return Ok(rec.finish(Termination::Converged, st.mean()));
            }
        }
    }
    Ok(rec.finish(Termination::BudgetExhausted, st.mean()))
}

fn run_rrs(
    a: &Matrix,
    b: &[f64],
    x0: &[f64],
    config: &SolveConfig,
    oracle: &ErrOracle<'_>,
    observer: Option<&mut Observer<'_>>,
) -> Result<SolveTrace> {
    let mut st = prepare(
        a,
        b,
        x0,
        config,
        oracle,
        &[Method::Rrs, Method::RrsWeighted],
    )?;
    let weights = config.restart_weights();
    let per_restart = config.q - 1;
    let mut rec = Recorder::new(config, observer);
    let mut err = oracle.eval(x0);
    if rec.record(0, 0, err, x0) {
        return Ok(rec.finish(Termination::Converged, x0.to_vec()));
    }
    while st.reflections + per_restart <= config.max_reflections {
        st.restart(&weights);
        err = oracle.eval(&st.x);
        let last_block = st.reflections + per_restart > config.max_reflections;
        if (rec.due(st.reflections) || err <= config.tol || last_block)
            && rec.record(st.reflections, st.restarts, err, &st.x)
        {
            return Ok(rec.finish(Termination::Converged, st.x));
        }
    }
    if !rec.already_recorded(st.reflections) {
        rec.record(st.reflections, st.restarts, err, &st.x);
    }
    Ok(rec.finish(Termination::BudgetExhausted, st.x))
}

fn run_kaczmarz(
    a: &Matrix,
    b: &[f64],
    x0: &[f64],
    config: &SolveConfig,
    oracle: &ErrOracle<'_>,
    observer: Option<&mut Observer<'_>>,
) -> Result<SolveTrace> {
    let mut st = prepare(a, b, x0, config, oracle, &[Method::Kaczmarz])?;
    let mut rec = Recorder::new(config, observer);
    if rec.record(0, 0, oracle.eval(x0), x0) {
        return Ok(rec.finish(Termination::Converged, x0.to_vec()));
    }
    while st.reflections < config.max_reflections {
        st.project_step();
        let k = st.reflections;
        if (rec.due(k) || k == config.max_reflections)
            && rec.record(k, 0, oracle.eval(&st.x), &st.x)
        {
            return Ok(rec.finish(Termination::Converged, st.x));
        }
    }
    Ok(rec.finish(Termination::BudgetExhausted, st.x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> (Matrix, Vec<f64>) {
        (Matrix::from_rows(&[[1.0, 0.0]]).unwrap(), vec![1.0])
    }

    #[test]
    fn reflect_across_vertical_line() {
        let (a, b) = line();
        let mut x = vec![3.0, 4.0];
        reflect(&mut x, &a, &b, 0).unwrap();
        assert_eq!(x, vec![-1.0, 4.0]);
    }

    #[test]
    fn reflect_fixes_points_on_hyperplane() {
        let a = Matrix::from_rows(&[[1.0, 2.0, -1.0]]).unwrap();
        let mut x = vec![1.0, 1.0, 1.0];
        reflect(&mut x, &a, &[2.0], 0).unwrap();
        assert_eq!(x, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn reflect_twice_is_identity() {
        let a = Matrix::from_rows(&[[0.3, -1.2, 2.5], [1.0, 1.0, 1.0]]).unwrap();
        let b = [0.7, -2.0];
        let x0 = vec![4.0, -1.5, 0.25];
        let mut x = x0.clone();
        reflect(&mut x, &a, &b, 0).unwrap();
        reflect(&mut x, &a, &b, 0).unwrap();
        let diff: f64 = sq_dist(&x, &x0).sqrt();
        assert!(diff <= 1e-12 * 4.3);
    }

    #[test]
    fn reflect_errors() {
        let a = Matrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
        let mut x = vec![0.0, 0.0];
        assert!(matches!(
            reflect(&mut x, &a, &[1.0, 1.0], 1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            reflect(&mut x, &a, &[1.0, 1.0], 2),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            reflect(&mut x, &a, &[1.0], 0),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            reflect(&mut [0.0], &a, &[1.0, 1.0], 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn projection_step() {
        let (a, b) = line();
        let mut x = vec![3.0, 4.0];
        project(&mut x, &a, &b, 0).unwrap();
        assert_eq!(x, vec![1.0, 4.0]);
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig::rrs(1).validate().is_err());
        assert!(SolveConfig::rrs(2).validate().is_ok());
        assert!(SolveConfig::rs().validate().is_ok());
        assert!(SolveConfig::rrs_weighted(vec![0.5, 0.5]).validate().is_ok());
        assert!(SolveConfig::rrs_weighted(vec![0.6, 0.6])
            .validate()
            .is_err());
        assert!(SolveConfig::rrs_weighted(vec![1.5, -0.5])
            .validate()
            .is_err());
        assert!(SolveConfig::rrs_weighted(vec![1.0]).validate().is_err());
        let mut c = SolveConfig::rrs_weighted(vec![0.5, 0.5]);
        c.q = 3;
        assert!(c.validate().is_err());
        let mut c = SolveConfig::rs();
        c.weights = Some(vec![1.0]);
        assert!(c.validate().is_err());
        assert!(SolveConfig::rs().with_stride(0).validate().is_err());
        assert!(SolveConfig::rs().with_tol(f64::NAN).validate().is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("RS".parse::<Method>().unwrap(), Method::Rs);
        assert_eq!(
            "rrs_weighted".parse::<Method>().unwrap(),
            Method::RrsWeighted
        );
        assert!("gmres".parse::<Method>().is_err());
        assert_eq!(SolveConfig::rrs(10).label(), "RRS(10)");
    }

    #[test]
    fn oracle_degenerate_start() {
        let r = [1.0, 2.0];
        let o = ErrOracle::new(&r, &r).unwrap();
        assert_eq!(o.eval(&r), 0.0);
        assert_eq!(o.eval(&[1.0, 3.0]), 1.0);
    }

    #[test]
    fn rs_two_point_alternation() {
        let (a, b) = line();
        let x0 = [3.0, 4.0];
        // reflected points alternate [-1,4], [3,4], ...; the mean after an
        // even count is the projection [1,4]
        let x_ref = [1.0, 4.0];
        let oracle = ErrOracle::new(&x_ref, &x0).unwrap();
        let cfg = SolveConfig::rs()
            .with_budget(10)
            .with_stride(1)
            .with_tol(0.0);
        let trace = solve_rs(&a, &b, &x0, &cfg, &oracle).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.iterations(), 2);
        assert_eq!(trace.solution, vec![1.0, 4.0]);
        assert_eq!(trace.checkpoints[1].err, 1.0);

        let origin = [0.0, 0.0];
        let oracle = ErrOracle::new(&origin, &x0).unwrap();
        let mut seen = Vec::new();
        let mut obs = |cp: &Checkpoint, x: &[f64]| seen.push((cp.reflections, x.to_vec()));
        let trace = solve_observed(&a, &b, &x0, &cfg, &oracle, Some(&mut obs)).unwrap();
        assert_eq!(trace.termination, Termination::BudgetExhausted);
        assert_eq!(trace.iterations(), 10);
        assert_eq!(seen[1].1, vec![-1.0, 4.0]);
        assert_eq!(seen[2].1, vec![1.0, 4.0]);
        assert_eq!(seen[3].1, vec![1.0 / 3.0, 4.0]);
        assert_eq!(seen[10].1, vec![1.0, 4.0]);
        // ‖[1/3, 4]‖² / ‖[3, 4]‖²
        assert!((trace.checkpoints[3].err - (1.0 / 9.0 + 16.0) / 25.0).abs() < 1e-15);
        assert_eq!(trace.checkpoints[10].err, 17.0 / 25.0);
    }

    #[test]
    fn rrs_q2_projects_in_one_restart() {
        let (a, b) = line();
        let x_ref = [1.0, 4.0];
        let x0 = [3.0, 4.0];
        let oracle = ErrOracle::new(&x_ref, &x0).unwrap();
        let trace = solve_rrs(&a, &b, &x0, &SolveConfig::rrs(2), &oracle).unwrap();
        assert_eq!(trace.solution, vec![1.0, 4.0]);
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.iterations(), 1);
        assert_eq!(trace.restarts(), 1);
    }

    #[test]
    fn kaczmarz_single_step_and_orthogonal_rows() {
        let (a, b) = line();
        let x0 = [3.0, 4.0];
        let x_ref = [1.0, 4.0];
        let oracle = ErrOracle::new(&x_ref, &x0).unwrap();
        let cfg = SolveConfig::kaczmarz().with_stride(1);
        let t = solve_kaczmarz(&a, &b, &x0, &cfg, &oracle).unwrap();
        assert_eq!(t.solution, vec![1.0, 4.0]);
        assert_eq!(t.iterations(), 1);

        // identity: exact once both rows have been visited
        let a = Matrix::identity(2);
        let b = [1.0, 1.0];
        let x0 = [0.0, 0.0];
        let x_ref = [1.0, 1.0];
        let oracle = ErrOracle::new(&x_ref, &x0).unwrap();
        let mut st = SolverState::new(&a, &b, &x0, RngStream::new(3, 0)).unwrap();
        let mut visited = [false; 2];
        while !(visited[0] && visited[1]) {
            visited[st.project_step()] = true;
        }
        assert_eq!(st.x(), &[1.0, 1.0]);
        let t = solve_kaczmarz(&a, &b, &x0, &cfg.with_stream(3, 0), &oracle).unwrap();
        assert!(t.converged());
        assert_eq!(t.solution, vec![1.0, 1.0]);
    }

    #[test]
    fn fixed_point_converges_at_start() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]]).unwrap();
        let x = [1.0, 1.0];
        let b = a.mul_vec(&x).unwrap();
        let oracle = ErrOracle::new(&x, &x).unwrap();
        for cfg in [
            SolveConfig::rs(),
            SolveConfig::rrs(5),
            SolveConfig::rrs_weighted(vec![0.2, 0.3, 0.5]),
            SolveConfig::kaczmarz(),
        ] {
            let t = solve(&a, &b, &x, &cfg, &oracle).unwrap();
            assert!(t.converged());
            assert_eq!(t.iterations(), 0);
            assert_eq!(t.solution, x.to_vec());
        }
    }

    #[test]
    fn budget_and_accounting() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 2.5]]).unwrap();
        let b = [1.0, 0.0, 2.0];
        let x0 = [0.0, 0.0];
        let x_ref = [10.0, 10.0];
        let oracle = ErrOracle::new(&x_ref, &x0).unwrap();
        let t = solve(&a, &b, &x0, &SolveConfig::rrs(20).with_budget(100), &oracle).unwrap();
        assert_eq!(t.termination, Termination::BudgetExhausted);
        // 5 restarts of 19 reflections fit in 100
        assert_eq!(t.iterations(), 95);
        for cp in &t.checkpoints {
            assert_eq!(cp.reflections, 19 * cp.restarts);
        }
        let t = solve(&a, &b, &x0, &SolveConfig::rs().with_budget(101), &oracle).unwrap();
        assert_eq!(t.iterations(), 101);
        let ks: Vec<_> = t.checkpoints.iter().map(|c| c.reflections).collect();
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ks[..3], [0, 5, 10]);
        let t = solve(&a, &b, &x0, &SolveConfig::rrs(5).with_budget(3), &oracle).unwrap();
        assert_eq!(t.iterations(), 0);
        assert_eq!(t.checkpoints.len(), 1);
    }

    #[test]
    fn running_sum_matches_recomputation() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 0.0], [0.0, -1.0, 4.0], [2.0, 0.5, 0.5]]).unwrap();
        let b = [1.0, 2.0, 3.0];
        let mut st = SolverState::new(&a, &b, &[0.5, 0.0, -1.0], RngStream::new(8, 2)).unwrap();
        let mut pts = Vec::new();
        for _ in 0..7 {
            st.reflect_step();
            st.accumulate(1.0);
            pts.push(st.x().to_vec());
        }
        for j in 0..3 {
            let direct: f64 = pts.iter().map(|p| p[j]).sum();
            assert!((st.running_sum()[j] - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
        assert_eq!(st.summed(), 7);
    }

    #[test]
    fn wrong_driver_rejected() {
        let (a, b) = line();
        let x0 = [0.0, 0.0];
        let r = [1.0, 0.0];
        let o = ErrOracle::new(&r, &x0).unwrap();
        assert!(solve_rs(&a, &b, &x0, &SolveConfig::rrs(3), &o).is_err());
        assert!(solve_rrs(&a, &b, &x0, &SolveConfig::rs(), &o).is_err());
    }
}
