//! Test problems: Gaussian systems, noisy right-hand sides and a small
//! parallel-beam tomography operator over an `N × N` pixel grid.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{read_matrix_market_file, write_matrix_market, Matrix, Representation};
use crate::sampling::RngStream;

/// Largest tomography grid accepted by [`gen_parallel_tomo`].
pub const MAX_TOMO_GRID: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Gaussian,
    MatrixMarket,
    TomoParallel,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Gaussian => "gaussian",
            ProblemKind::MatrixMarket => "matrix_market",
            ProblemKind::TomoParallel => "tomo_parallel",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(ProblemKind::Gaussian),
            "matrix_market" => Ok(ProblemKind::MatrixMarket),
            "tomo_parallel" => Ok(ProblemKind::TomoParallel),
            other => Err(Error::arg(format!("unknown problem kind '{other}'"))),
        }
    }
}

/// A linear system with its reference solution and provenance.
#[derive(Debug, Clone)]
pub struct Problem {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub x_ref: Option<Vec<f64>>,
    pub consistent: bool,
    /// Relative noise level of `b`, 0 for exact right-hand sides.
    pub noise_level: f64,
    pub kind: ProblemKind,
    /// Free-form provenance (seed, geometry, source file, ...).
    pub meta: BTreeMap<String, String>,
}

impl Problem {
    /// Consistent system `b = A x_ref` built from a given matrix.
    pub fn from_solution(a: Matrix, x_ref: Vec<f64>, kind: ProblemKind) -> Result<Self> {
        let b = a.mul_vec(&x_ref)?;
        Ok(Problem {
            a,
            b,
            x_ref: Some(x_ref),
            consistent: true,
            noise_level: 0.0,
            kind,
            meta: BTreeMap::new(),
        })
    }

    /// Matrix file with `b = A·1`, the all-ones reference solution.
    pub fn from_matrix_file(path: impl AsRef<Path>, repr: Representation) -> Result<Self> {
        let a = read_matrix_market_file(path.as_ref())?.with_representation(repr);
        let n = a.ncols();
        let mut p = Problem::from_solution(a, vec![1.0; n], ProblemKind::MatrixMarket)?;
        p.meta
            .insert("source".into(), path.as_ref().display().to_string());
        Ok(p)
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    /// Writes `matrix.mtx`, `b.txt`, `x_ref.txt` (if present) and `meta.txt`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        write_matrix_market(
            &self.a,
            BufWriter::new(File::create(dir.join("matrix.mtx"))?),
        )?;
        write_vector(dir.join("b.txt"), &self.b)?;
        if let Some(x) = &self.x_ref {
            write_vector(dir.join("x_ref.txt"), x)?;
        }
        let mut meta = self.meta.clone();
        meta.insert("kind".into(), self.kind.to_string());
        meta.insert("m".into(), self.nrows().to_string());
        meta.insert("n".into(), self.ncols().to_string());
        meta.insert("consistent".into(), self.consistent.to_string());
        meta.insert("delta".into(), self.noise_level.to_string());
        let mut f = BufWriter::new(File::create(dir.join("meta.txt"))?);
        for (k, v) in &meta {
            writeln!(f, "{k}={v}")?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn read_dir(dir: impl AsRef<Path>, repr: Representation) -> Result<Self> {
        let dir = dir.as_ref();
        let a = read_matrix_market_file(dir.join("matrix.mtx"))?.with_representation(repr);
        let b = read_vector(dir.join("b.txt"))?;
        let x_path = dir.join("x_ref.txt");
        let x_ref = if x_path.exists() {
            Some(read_vector(x_path)?)
        } else {
            None
        };
        let mut meta = read_key_values(dir.join("meta.txt"))?;
        let kind = meta
            .remove("kind")
            .map(|k| k.parse())
            .transpose()?
            .unwrap_or(ProblemKind::MatrixMarket);
        let consistent = meta
            .remove("consistent")
            .map_or(Ok(true), |v| v.parse::<bool>())
            .map_err(|_| Error::Format("meta.txt: 'consistent' must be true or false".into()))?;
        let noise_level = meta
            .remove("delta")
            .map_or(Ok(0.0), |v| v.parse::<f64>())
            .map_err(|_| Error::Format("meta.txt: 'delta' must be a number".into()))?;
        meta.remove("m");
        meta.remove("n");
        if b.len() != a.nrows() {
            return Err(Error::Format(format!(
                "b.txt has {} values, matrix has {} rows",
                b.len(),
                a.nrows()
            )));
        }
        if let Some(x) = &x_ref {
            if x.len() != a.ncols() {
                return Err(Error::Format(format!(
                    "x_ref.txt has {} values, matrix has {} columns",
                    x.len(),
                    a.ncols()
                )));
            }
        }
        Ok(Problem {
            a,
            b,
            x_ref,
            consistent,
            noise_level,
            kind,
            meta,
        })
    }
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    for x in v {
        writeln!(f, "{x:e}")?;
    }
    f.flush()?;
    Ok(())
}

/// Plain-text vector, one value per line; blank lines and `#` comments skipped.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let f = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (k, line) in f.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(t.parse::<f64>().map_err(|_| {
            Error::Format(format!("{}:{}: cannot parse '{t}'", path.display(), k + 1))
        })?);
    }
    Ok(out)
}

/// `key=value` lines; blank lines and `#` comments skipped.
pub fn read_key_values(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_key_values(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn parse_key_values(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (key, value) = t
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", k + 1))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// `A = randn(m, n)`, `x_ref = 1`, `b = A x_ref`.
pub fn gen_gaussian(m: usize, n: usize, stream: &mut RngStream) -> Result<Problem> {
    if m == 0 || n == 0 {
        return Err(Error::arg("Gaussian problem needs m, n >= 1"));
    }
    let values = stream.normal_vec(m * n);
    let a = Matrix::from_dense(m, n, values)?;
    let mut p = Problem::from_solution(a, vec![1.0; n], ProblemKind::Gaussian)?;
    p.meta.insert("seed".into(), stream.seed().to_string());
    p.meta
        .insert("stream".into(), stream.stream_id().to_string());
    Ok(p)
}

/// Replaces `b` by `A x_ref + e` with `‖e‖ = delta ‖A x_ref‖` and `e` along an
/// isotropic Gaussian direction.
pub fn add_noise(mut p: Problem, delta: f64, stream: &mut RngStream) -> Result<Problem> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::arg(format!("noise level {delta} must be positive")));
    }
    if !p.consistent || p.noise_level > 0.0 {
        return Err(Error::arg("problem already carries noise"));
    }
    let x_ref = p
        .x_ref
        .as_ref()
        .ok_or_else(|| Error::arg("noise needs a reference solution"))?;
    let clean = p.a.mul_vec(x_ref)?;
    let clean_norm = clean.iter().map(|v| v * v).sum::<f64>().sqrt();
    if clean_norm == 0.0 {
        return Err(Error::arg("A x_ref is zero; relative noise is undefined"));
    }
    let g = stream.normal_vec(clean.len());
    let g_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = delta * clean_norm / g_norm;
    p.b = clean.iter().zip(&g).map(|(c, e)| c + scale * e).collect();
    p.noise_level = delta;
    p.consistent = false;
    p.meta
        .insert("noise_seed".into(), stream.seed().to_string());
    p.meta
        .insert("noise_stream".into(), stream.stream_id().to_string());
    Ok(p)
}

/// Parallel-beam scan of the unit square divided into `grid_size²` pixels.
///
/// Rays at angle `θ` travel along `(cos θ, sin θ)`; detector offsets are
/// measured along `(−sin θ, cos θ)` from the grid centre and cover the
/// diagonal `[−√2/2, √2/2]` at evenly spaced bin centres.
#[derive(Debug, Clone, PartialEq)]
pub struct TomoGeometry {
    pub grid_size: usize,
    pub angles: Vec<f64>,
    pub detectors: usize,
}

impl TomoGeometry {
    /// `num_angles` angles `kπ/num_angles`, `k = 0..num_angles`.
    pub fn uniform(grid_size: usize, num_angles: usize, detectors: usize) -> Self {
        let angles = (0..num_angles)
            .map(|k| k as f64 * std::f64::consts::PI / num_angles as f64)
            .collect();
        TomoGeometry {
            grid_size,
            angles,
            detectors,
        }
    }

    pub fn offsets(&self) -> Vec<f64> {
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let d = self.detectors as f64;
        (0..self.detectors)
            .map(|j| -half + (j as f64 + 0.5) * 2.0 * half / d)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size == 0 || self.grid_size > MAX_TOMO_GRID {
            return Err(Error::Geometry(format!(
                "grid size {} outside 1..={MAX_TOMO_GRID}",
                self.grid_size
            )));
        }
        if self.angles.is_empty() || self.detectors == 0 {
            return Err(Error::Geometry(
                "need at least one angle and one detector".into(),
            ));
        }
        if let Some(a) = self
            .angles
            .iter()
            .find(|a| !(a.is_finite() && (0.0..std::f64::consts::PI).contains(*a)))
        {
            return Err(Error::Geometry(format!("angle {a} outside [0, π)")));
        }
        Ok(())
    }
}

impl fmt::Display for TomoGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parallel N={} angles={} detectors={}",
            self.grid_size,
            self.angles.len(),
            self.detectors
        )
    }
}

/// Intersection lengths of one ray with the pixels of an `n × n` grid over
/// the unit square, as `(pixel index, length)` sorted by pixel. Pixel
/// `(row, col)` covers `[col/n, (col+1)/n] × [row/n, (row+1)/n]` and has
/// index `row·n + col`. The ray passes through `origin` with direction
/// `dir` (unit length).
pub fn trace_ray(n: usize, origin: [f64; 2], dir: [f64; 2]) -> Vec<(usize, f64)> {
    const PARALLEL: f64 = 1e-15;
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for axis in 0..2 {
        if dir[axis].abs() < PARALLEL {
            if origin[axis] < 0.0 || origin[axis] > 1.0 {
                return Vec::new();
            }
        } else {
            let t0 = -origin[axis] / dir[axis];
            let t1 = (1.0 - origin[axis]) / dir[axis];
            t_lo = t_lo.max(t0.min(t1));
            t_hi = t_hi.min(t0.max(t1));
        }
    }
    if (t_hi - t_lo).is_nan() || t_hi - t_lo <= 1e-14 {
        return Vec::new();
    }

    let nf = n as f64;
    let mut ts = vec![t_lo, t_hi];
    for axis in 0..2 {
        if dir[axis].abs() < PARALLEL {
            continue;
        }
        for k in 0..=n {
            let t = (k as f64 / nf - origin[axis]) / dir[axis];
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);

    let mut row: BTreeMap<usize, f64> = BTreeMap::new();
    for w in ts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let px = ((origin[0] + mid * dir[0]) * nf)
            .floor()
            .clamp(0.0, nf - 1.0) as usize;
        let py = ((origin[1] + mid * dir[1]) * nf)
            .floor()
            .clamp(0.0, nf - 1.0) as usize;
        *row.entry(py * n + px).or_insert(0.0) += len;
    }
    row.into_iter().collect()
}

/// Ray for `(angle, offset)` in the [`TomoGeometry`] convention.
pub fn ray(angle: f64, offset: f64) -> ([f64; 2], [f64; 2]) {
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    let origin = [0.5 - offset * s, 0.5 + offset * c];
    (origin, [c, s])
}

/// Sparse system matrix of the scan, one row per ray that meets the grid.
/// Rows are ordered by angle, then detector.
pub fn tomo_matrix(geom: &TomoGeometry) -> Result<Matrix> {
    geom.validate()?;
    let n = geom.grid_size;
    let offsets = geom.offsets();
    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for &theta in &geom.angles {
        for &s in &offsets {
            let (origin, dir) = ray(theta, s);
            let entries = trace_ray(n, origin, dir);
            if entries.is_empty() {
                continue;
            }
            for (j, v) in entries {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
    }
    let m = row_ptr.len() - 1;
    if m == 0 {
        return Err(Error::Geometry("no ray intersects the grid".into()));
    }
    Matrix::from_csr(m, n * n, row_ptr, cols, vals)
}

/// Constant-intensity ellipse in unit-square coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    /// Semi-axis along the rotated x direction.
    pub rx: f64,
    pub ry: f64,
    /// Rotation in radians.
    pub angle: f64,
    pub intensity: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = (libm::sin(self.angle), libm::cos(self.angle));
        let (dx, dy) = (x - self.cx, y - self.cy);
        let u = (c * dx + s * dy) / self.rx;
        let v = (-s * dx + c * dy) / self.ry;
        u * u + v * v <= 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub ellipses: Vec<Ellipse>,
}

impl Phantom {
    /// Four-ellipse head-like test object: a bright shell, a darker interior
    /// and two inclusions of different contrast.
    pub fn head() -> Self {
        let e = |cx, cy, rx, ry, angle, intensity| Ellipse {
            cx,
            cy,
            rx,
            ry,
            angle,
            intensity,
        };
        Phantom {
            ellipses: vec![
                e(0.5, 0.5, 0.35, 0.45, 0.0, 1.0),
                e(0.5, 0.49, 0.31, 0.41, 0.0, -0.7),
                e(0.40, 0.56, 0.08, 0.16, 0.3, 0.5),
                e(0.62, 0.40, 0.10, 0.07, -0.4, 0.4),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ellipses.is_empty() {
            return Err(Error::arg("phantom needs at least one ellipse"));
        }
        for e in &self.ellipses {
            let inside = |v: f64| (0.0..=1.0).contains(&v);
            if !(inside(e.cx) && inside(e.cy))
                || !(e.rx > 0.0 && e.ry > 0.0 && e.rx <= 1.0 && e.ry <= 1.0)
            {
                return Err(Error::arg(format!(
                    "ellipse {e:?} lies outside the unit square"
                )));
            }
            if !(e.angle.is_finite() && e.intensity.is_finite()) {
                return Err(Error::arg("ellipse parameters must be finite"));
            }
        }
        Ok(())
    }
}

/// Image of length `n²` (pixel index `row·n + col`): sum of intensities of
/// the ellipses covering each pixel centre, clamped to `[0, 1]`.
pub fn rasterize_phantom(phantom: &Phantom, n: usize) -> Result<Vec<f64>> {
    phantom.validate()?;
    let nf = n as f64;
    let mut img = Vec::with_capacity(n * n);
    for r in 0..n {
        let y = (r as f64 + 0.5) / nf;
        for c in 0..n {
            let x = (c as f64 + 0.5) / nf;
            let v: f64 = phantom
                .ellipses
                .iter()
                .filter(|e| e.contains(x, y))
                .map(|e| e.intensity)
                .sum();
            img.push(v.clamp(0.0, 1.0));
        }
    }
    Ok(img)
}

/// Parallel-beam problem with `x_ref` the rasterized phantom and `b = A x_ref`.
pub fn gen_parallel_tomo(geom: &TomoGeometry, phantom: &Phantom) -> Result<Problem> {
    let a = tomo_matrix(geom)?;
    let x = rasterize_phantom(phantom, geom.grid_size)?;
    let mut p = Problem::from_solution(a, x, ProblemKind::TomoParallel)?;
    p.meta.insert("geometry".into(), geom.to_string());
    Ok(p)
}
