//! Spectral quantities, convergence constants and reference solutions.
//!
//! Everything here is dense and meant for desk-scale matrices: the Gram
//! matrix of the smaller dimension is formed explicitly and diagonalized by
//! cyclic Jacobi rotations.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Largest `min(m, n)` accepted by the dense routines.
pub const DENSE_THRESHOLD: usize = 600;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const SPD_BREAKDOWN: f64 = 1e-13;
const RESIDUAL_TOL: f64 = 1e-8;

/// Eigenvalues of a dense symmetric `n × n` matrix (row-major), ascending.
///
/// Cyclic Jacobi: sweeps over all `(p, q)` pairs until the off-diagonal
/// Frobenius norm drops below `1e-12 · ‖S‖_F`.
pub fn symmetric_eigenvalues(mut s: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    if s.len() != n * n {
        return Err(Error::arg(format!(
            "expected {} entries for a {n}x{n} matrix",
            n * n
        )));
    }
    for p in 0..n {
        for q in (p + 1)..n {
            let (x, y) = (s[p * n + q], s[q * n + p]);
            if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                return Err(Error::arg(format!("matrix is not symmetric at ({p}, {q})")));
            }
        }
    }
    let total: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let off_norm = |s: &[f64]| -> f64 {
        let mut acc = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                acc += 2.0 * s[p * n + q] * s[p * n + q];
            }
        }
        acc.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&s) > JACOBI_TOL * total {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(sweeps));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = s[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = s[p * n + p];
                let aqq = s[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = s[k * n + p];
                    let akq = s[k * n + q];
                    let new_kp = c * akp - sn * akq;
                    let new_kq = sn * akp + c * akq;
                    s[k * n + p] = new_kp;
                    s[p * n + k] = new_kp;
                    s[k * n + q] = new_kq;
                    s[q * n + k] = new_kq;
                }
                s[p * n + p] = app - t * apq;
                s[q * n + q] = aqq + t * apq;
                s[p * n + q] = 0.0;
                s[q * n + p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| s[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Gram matrix of the smaller dimension: `AᵀA` when `m ≥ n`, else `AAᵀ`.
/// Returns the row-major values and the dimension.
pub fn small_gram(a: &Matrix) -> (Vec<f64>, usize) {
    let (m, n) = (a.nrows(), a.ncols());
    if m >= n {
        let mut g = vec![0.0; n * n];
        for row in a.rows() {
            let entries: Vec<(usize, f64)> = row.iter().collect();
            for &(j, vj) in &entries {
                for &(k, vk) in &entries {
                    g[j * n + k] += vj * vk;
                }
            }
        }
        (g, n)
    } else {
        let mut g = vec![0.0; m * m];
        let mut dense = vec![0.0; n];
        for i in 0..m {
            let ri = a.row_unchecked(i);
            for (j, v) in ri.iter() {
                dense[j] = v;
            }
            for l in i..m {
                let d = a.row_unchecked(l).dot(&dense);
                g[i * m + l] = d;
                g[l * m + i] = d;
            }
            for (j, _) in ri.iter() {
                dense[j] = 0.0;
            }
        }
        (g, m)
    }
}

fn check_size(a: &Matrix, limit: usize) -> Result<()> {
    let dim = a.nrows().min(a.ncols());
    if dim > limit {
        return Err(Error::Size { dim, limit });
    }
    if dim == 0 {
        return Err(Error::arg("matrix has no rows or no columns"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub rows: usize,
    pub cols: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub frobenius: f64,
    /// Spectral norm of `I − (2/‖A‖²_F) AᵀA`, from the exact spectrum.
    pub l_norm: f64,
    /// The upper estimate `1 − 2σ²_min/‖A‖²_F`.
    pub l_norm_bound: f64,
    pub cond: f64,
    /// Singular values of the smaller Gram matrix, descending.
    pub singular_values: Vec<f64>,
}

pub fn spectral_report(a: &Matrix) -> Result<SpectralReport> {
    spectral_report_with_limit(a, DENSE_THRESHOLD)
}

pub fn spectral_report_with_limit(a: &Matrix, limit: usize) -> Result<SpectralReport> {
    check_size(a, limit)?;
    let (g, dim) = small_gram(a);
    let eig = symmetric_eigenvalues(g, dim)?;
    let fro_sq = a.frobenius_sq();
    if fro_sq == 0.0 {
        return Err(Error::Rank("matrix is zero".into()));
    }
    let lam_min = eig[0].max(0.0);
    let lam_max = eig[dim - 1].max(0.0);
    // AᵀA has n − m extra zero eigenvalues when m < n
    let mut l_norm = eig
        .iter()
        .map(|&l| (1.0 - 2.0 * l.max(0.0) / fro_sq).abs())
        .fold(0.0, f64::max);
    if a.nrows() < a.ncols() {
        l_norm = l_norm.max(1.0);
    }
    let sigma_min = lam_min.sqrt();
    let sigma_max = lam_max.sqrt();
    Ok(SpectralReport {
        rows: a.nrows(),
        cols: a.ncols(),
        sigma_min,
        sigma_max,
        frobenius: fro_sq.sqrt(),
        l_norm,
        l_norm_bound: 1.0 - 2.0 * lam_min / fro_sq,
        cond: if sigma_min > 0.0 {
            sigma_max / sigma_min
        } else {
            f64::INFINITY
        },
        singular_values: eig.iter().rev().map(|l| l.max(0.0).sqrt()).collect(),
    })
}

/// Per-restart contraction `γ(q) = 1/q + (2/q²) Σ_{i=1}^{q−1} (q−i) ℓⁱ`
/// of the expected squared error, with `ℓ = ‖I − (2/‖A‖²_F)AᵀA‖`.
pub fn gamma_bound(q: usize, l_norm: f64) -> Result<f64> {
    if q == 0 {
        return Err(Error::arg("restart length must be at least 1"));
    }
    if !(0.0..=1.0).contains(&l_norm) {
        return Err(Error::arg(format!("l_norm {l_norm} outside [0, 1]")));
    }
    let qf = q as f64;
    let mut sum = 0.0;
    let mut power = 1.0;
    for i in 1..q {
        power *= l_norm;
        sum += (q - i) as f64 * power;
    }
    Ok(1.0 / qf + 2.0 / (qf * qf) * sum)
}

/// `1 + ‖A‖_F / σ_min`, the coefficient of the `1/√M` law for RS.
pub fn rs_bound_coefficient(report: &SpectralReport) -> Result<f64> {
    if report.sigma_min <= 0.0 {
        return Err(Error::Rank("smallest singular value is zero".into()));
    }
    Ok(1.0 + report.frobenius / report.sigma_min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub q: usize,
    pub gamma: f64,
    pub rs_coefficient: f64,
}

impl BoundReport {
    pub fn new(report: &SpectralReport, q: usize) -> Result<Self> {
        Ok(BoundReport {
            q,
            gamma: gamma_bound(q, report.l_norm.min(1.0))?,
            rs_coefficient: rs_bound_coefficient(report)?,
        })
    }

    /// `γᵏ`, the RRS bound after `k` restarts.
    pub fn rrs_after(&self, k: usize) -> f64 {
        libm::pow(self.gamma, k as f64)
    }

    /// `(1 + ‖A‖_F/σ_min) / √(kq)`, the RS bound at the same reflection count.
    pub fn rs_after(&self, k: usize) -> f64 {
        self.rs_coefficient / ((k * self.q) as f64).sqrt()
    }
}

/// Solves `S x = r` for dense symmetric positive definite `S` by Cholesky.
fn spd_solve(mut s: Vec<f64>, dim: usize, rhs: &[f64]) -> Result<Vec<f64>> {
    let trace: f64 = (0..dim).map(|i| s[i * dim + i]).sum();
    let floor = SPD_BREAKDOWN * trace;
    for j in 0..dim {
        let mut d = s[j * dim + j];
        for k in 0..j {
            d -= s[j * dim + k] * s[j * dim + k];
        }
        if d.is_nan() || d <= floor {
            return Err(Error::Rank(format!(
                "Gram matrix is numerically singular (pivot {d:e} at {j})"
            )));
        }
        let d = d.sqrt();
        s[j * dim + j] = d;
        for i in (j + 1)..dim {
            let mut v = s[i * dim + j];
            for k in 0..j {
                v -= s[i * dim + k] * s[j * dim + k];
            }
            s[i * dim + j] = v / d;
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..dim {
        for k in 0..i {
            y[i] -= s[i * dim + k] * y[k];
        }
        y[i] /= s[i * dim + i];
    }
    for i in (0..dim).rev() {
        for k in (i + 1)..dim {
            y[i] -= s[k * dim + i] * y[k];
        }
        y[i] /= s[i * dim + i];
    }
    Ok(y)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimum-norm solution `A⁺b` of a consistent system with full row rank
/// (`m ≤ n`) or full column rank (`m > n`).
pub fn min_norm_solution(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    min_norm_solution_with_limit(a, b, DENSE_THRESHOLD)
}

pub fn min_norm_solution_with_limit(a: &Matrix, b: &[f64], limit: usize) -> Result<Vec<f64>> {
    check_size(a, limit)?;
    if b.len() != a.nrows() {
        return Err(Error::arg(format!(
            "right-hand side length {} does not match {} rows",
            b.len(),
            a.nrows()
        )));
    }
    let (g, dim) = small_gram(a);
    let x = if a.nrows() <= a.ncols() {
        let y = spd_solve(g, dim, b)?;
        a.mul_transpose_vec(&y)?
    } else {
        spd_solve(g, dim, &a.mul_transpose_vec(b)?)?
    };
    let ax = a.mul_vec(&x)?;
    let resid: Vec<f64> = ax.iter().zip(b).map(|(u, v)| u - v).collect();
    let (r, bn) = (norm(&resid), norm(b));
    if r > RESIDUAL_TOL * bn {
        return Err(Error::Inconsistent(format!(
            "residual {r:e} exceeds {RESIDUAL_TOL:e} * ‖b‖ = {:e}",
            RESIDUAL_TOL * bn
        )));
    }
    Ok(x)
}

/// Orthogonal projection of `v` onto `range(Aᵀ)`, computed as `A⁺(A v)`.
pub fn row_space_projection(a: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    let av = a.mul_vec(v)?;
    if av.iter().all(|&x| x == 0.0) {
        return Ok(vec![0.0; v.len()]);
    }
    min_norm_solution(a, &av)
}

/// Squared relative error `‖x − x_ref‖² / ‖x0 − x_ref‖²`.
pub fn err(x: &[f64], x_ref: &[f64], x0: &[f64]) -> Result<f64> {
    if x.len() != x_ref.len() || x0.len() != x_ref.len() {
        return Err(Error::arg("vectors have different lengths"));
    }
    let denom: f64 = x0.iter().zip(x_ref).map(|(a, b)| (a - b) * (a - b)).sum();
    if denom == 0.0 {
        return Err(Error::Domain(
            "start point equals the reference; ERR is undefined".into(),
        ));
    }
    let num: f64 = x.iter().zip(x_ref).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(num / denom)
}

/// `10 log₁₀(Σ xᵢ² / Σ (xᵢ − x̂ᵢ)²)` in decibels; `+∞` for exact recovery.
pub fn snr(clean: &[f64], estimate: &[f64]) -> Result<f64> {
    if clean.len() != estimate.len() {
        return Err(Error::arg("signals have different lengths"));
    }
    let signal: f64 = clean.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::arg("clean signal is zero; SNR is undefined"));
    }
    let noise: f64 = clean
        .iter()
        .zip(estimate)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * libm::log10(signal / noise))
}
