//! Seeded row selection with probability proportional to squared row norms.
//!
//! The generator is xoshiro256** seeded through SplitMix64, implemented here
//! so that a `(seed, stream)` pair yields the same draws on every platform.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random stream identified by a seed and a stream id
/// (typically the trial index).
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    s: [u64; 4],
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        // hash the stream id on its own so that neighbouring (seed, stream)
        // pairs do not produce overlapping SplitMix sequences
        let mut k = stream ^ 0x6A09_E667_F3BC_C908;
        let mut sm = seed ^ splitmix64(&mut k);
        let mut s = [0u64; 4];
        for w in &mut s {
            *w = splitmix64(&mut sm);
        }
        if s == [0; 4] {
            s[0] = GOLDEN_GAMMA;
        }
        RngStream {
            seed,
            stream,
            s,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate (Box–Muller, both outputs used).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], so the log is finite
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        // libm rather than std: std may lower sin+cos to a platform sincos
        // whose last bit differs, which would make problems build-dependent
        let r = (-2.0 * libm::log(u1)).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.next_normal()).collect()
    }
}

/// Draws row indices `i` with probability `‖aᵢ‖² / ‖A‖²_F`.
#[derive(Debug, Clone)]
pub struct RowSampler {
    cumulative: Vec<f64>,
    total: f64,
    rng: RngStream,
}

impl RowSampler {
    /// Zero rows are allowed and get probability zero; an all-zero matrix is
    /// rejected.
    pub fn new(a: &Matrix, rng: RngStream) -> Result<Self> {
        Self::from_weights(a.row_sq_norms(), rng)
    }

    pub fn from_weights(weights: &[f64], rng: RngStream) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::arg(format!(
                "sampling weight {w} is not a finite nonnegative value"
            )));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if acc <= 0.0 {
            return Err(Error::Domain(
                "cannot sample rows of a matrix whose rows are all zero".into(),
            ));
        }
        Ok(RowSampler {
            cumulative,
            total: acc,
            rng,
        })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn probability(&self, i: usize) -> f64 {
        let lo = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (self.cumulative[i] - lo) / self.total
    }

    /// Uniform `u` in `[0, total)`, then the first row whose cumulative
    /// weight exceeds `u`. A `u` equal to a boundary goes to the higher row,
    /// so zero-weight rows are never returned.
    #[inline]
    pub fn draw(&mut self) -> usize {
        let u = self.rng.next_f64() * self.total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        // guards u rounding up to total
        i.min(self.last_positive())
    }

    fn last_positive(&self) -> usize {
        let last = *self.cumulative.last().unwrap();
        self.cumulative.partition_point(|&c| c < last)
    }
}
