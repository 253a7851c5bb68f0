use crate::analysis::{spectral_report, BoundReport, SpectralReport};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRun {
    pub spectral: SpectralReport,
    pub bounds: Vec<BoundReport>,
    /// Restart counts listed in the comparison series, `1..=k_max`.
    pub k_max: usize,
    pub warnings: Vec<String>,
}

/// Spectral report plus, per restart length, the RRS constant and the
/// comparison of `γᵏ` against the RS bound at `kq` reflections.
pub fn run_bound(a: &Matrix, qs: &[usize], k_max: usize) -> Result<BoundRun> {
    if qs.is_empty() {
        return Err(Error::arg("at least one q is required"));
    }
    let spectral = spectral_report(a)?;
    let mut warnings = Vec::new();
    if spectral.sigma_min <= 0.0 {
        return Err(Error::Rank(
            "matrix is rank deficient; the RS bound coefficient is undefined".into(),
        ));
    }
    if a.nrows() < a.ncols() {
        warnings.push(
            "underdetermined matrix: ‖L‖ = 1 (n − m zero singular values), so γ = 1".to_string(),
        );
    }
    let mut bounds = Vec::with_capacity(qs.len());
    for &q in qs {
        if q == 1 {
            warnings.push("q = 1 gives γ = 1; RRS requires q >= 2".to_string());
        }
        bounds.push(BoundReport::new(&spectral, q)?);
    }
    Ok(BoundRun {
        spectral,
        bounds,
        k_max,
        warnings,
    })
}

impl BoundRun {
    /// Smallest `k ≥ k_min` with `γᵏ ≥ (1 + ‖A‖_F/σ_min)/√(kq)`, if any.
    ///
    /// `log(γᵏ √(kq))` is decreasing for `k > 1/(2 ln(1/γ))`, so checking up
    /// to that point (plus one) covers all `k`.
    pub fn first_rs_win(bound: &BoundReport, k_min: usize) -> Option<usize> {
        let k_min = k_min.max(1);
        let last = if bound.gamma >= 1.0 {
            return Some(k_min);
        } else if bound.gamma <= 0.0 {
            k_min
        } else {
            let turn = 1.0 / (2.0 * (1.0 / bound.gamma).ln());
            k_min.max(turn.ceil() as usize + 1)
        };
        (k_min..=last).find(|&k| bound.rrs_after(k) >= bound.rs_after(k))
    }

    pub fn text(&self) -> String {
        let s = &self.spectral;
        let mut out = String::new();
        let kv = |out: &mut String, k: &str, v: String| out.push_str(&format!("{k:<16} {v}\n"));
        kv(&mut out, "rows", s.rows.to_string());
        kv(&mut out, "cols", s.cols.to_string());
        kv(&mut out, "sigma_min", format!("{:.10e}", s.sigma_min));
        kv(&mut out, "sigma_max", format!("{:.10e}", s.sigma_max));
        kv(&mut out, "frobenius", format!("{:.10e}", s.frobenius));
        kv(&mut out, "cond", format!("{:.6}", s.cond));
        kv(&mut out, "l_norm", format!("{:.12}", s.l_norm));
        kv(&mut out, "l_norm_bound", format!("{:.12}", s.l_norm_bound));
        if let Some(b) = self.bounds.first() {
            kv(
                &mut out,
                "rs_coefficient",
                format!("{:.10}", b.rs_coefficient),
            );
        }
        for b in &self.bounds {
            out.push('\n');
            kv(&mut out, "q", b.q.to_string());
            kv(&mut out, "gamma", format!("{:.12}", b.gamma));
            match Self::first_rs_win(b, 3) {
                None => kv(&mut out, "rrs_below_rs", "all k >= 3".into()),
                Some(k) => kv(&mut out, "rrs_below_rs", format!("fails at k = {k}")),
            }
            out.push_str(&format!(
                "{:>6} {:>16} {:>16}\n",
                "k", "gamma^k", "rs/sqrt(kq)"
            ));
            for k in 1..=self.k_max {
                out.push_str(&format!(
                    "{k:>6} {:>16.8e} {:>16.8e}\n",
                    b.rrs_after(k),
                    b.rs_after(k)
                ));
            }
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("q,k,reflections,gamma,gamma_pow_k,rs_bound\n");
        for b in &self.bounds {
            for k in 1..=self.k_max {
                out.push_str(&format!(
                    "{},{k},{},{:e},{:e},{:e}\n",
                    b.q,
                    k * b.q,
                    b.gamma,
                    b.rrs_after(k),
                    b.rs_after(k)
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_q5() {
        let r = run_bound(&Matrix::identity(10), &[5], 4).unwrap();
        assert!((r.spectral.l_norm - 0.8).abs() < 1e-14);
        assert!((r.bounds[0].gamma - 0.724288).abs() < 1e-12);
        assert!(r.text().contains("gamma"));
        assert_eq!(r.csv().lines().count(), 5);
    }

    #[test]
    fn q1_warns() {
        let r = run_bound(&Matrix::identity(3), &[1, 2], 2).unwrap();
        assert_eq!(r.bounds[0].gamma, 1.0);
        assert!(r.warnings.iter().any(|w| w.contains("q >= 2")));
        assert!(r.text().contains("warning"));
    }

    #[test]
    fn diag_q2() {
        let r = run_bound(&Matrix::diagonal(&[1.0, 2.0]).unwrap(), &[2], 1).unwrap();
        assert!((r.bounds[0].gamma - 0.8).abs() < 1e-14);
    }

    #[test]
    fn rs_win_search() {
        let b = BoundReport {
            q: 4,
            gamma: 0.5,
            rs_coefficient: 10.0,
        };
        assert_eq!(BoundRun::first_rs_win(&b, 3), None);
        let b = BoundReport {
            q: 4,
            gamma: 0.999,
            rs_coefficient: 1.0,
        };
        assert_eq!(BoundRun::first_rs_win(&b, 3), Some(3));
    }
}
