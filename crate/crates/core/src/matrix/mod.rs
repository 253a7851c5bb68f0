//! Dense row-major and CSR matrix storage with O(1) row access.
//!
//! Squared row norms and the squared Frobenius norm are computed once at
//! construction. Matrices are immutable afterwards, so they can be shared by
//! reference across concurrent solver trials.

mod market;

pub use market::{read_matrix_market, read_matrix_market_file, write_matrix_market};

use crate::error::{Error, Result};

/// Files sparser than this are stored as CSR by [`Matrix::auto_representation`].
pub const AUTO_CSR_DENSITY: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense {
        values: Vec<f64>,
    },
    Csr {
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    },
}

/// Storage selection used by loaders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Representation {
    #[default]
    Auto,
    Dense,
    Csr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    m: usize,
    n: usize,
    storage: Storage,
    row_sq_norms: Vec<f64>,
    frobenius_sq: f64,
}

/// Borrowed view of a single matrix row.
#[derive(Debug, Clone, Copy)]
pub enum RowView<'a> {
    Dense(&'a [f64]),
    Sparse { cols: &'a [usize], vals: &'a [f64] },
}

impl<'a> RowView<'a> {
    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        match *self {
            RowView::Dense(row) => row.iter().zip(x).map(|(a, b)| a * b).sum(),
            RowView::Sparse { cols, vals } => cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum(),
        }
    }

    /// `y += alpha * row`
    #[inline]
    pub fn axpy(&self, alpha: f64, y: &mut [f64]) {
        match *self {
            RowView::Dense(row) => {
                for (yi, &a) in y.iter_mut().zip(row) {
                    *yi += alpha * a;
                }
            }
            RowView::Sparse { cols, vals } => {
                for (&j, &v) in cols.iter().zip(vals) {
                    y[j] += alpha * v;
                }
            }
        }
    }

    /// Nonzero `(column, value)` pairs of the row, in column order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        let (dense, sparse) = match *self {
            RowView::Dense(row) => (Some(row), None),
            RowView::Sparse { cols, vals } => (None, Some((cols, vals))),
        };
        let d = dense
            .into_iter()
            .flat_map(|row| row.iter().copied().enumerate().filter(|&(_, v)| v != 0.0));
        let s = sparse
            .into_iter()
            .flat_map(|(cols, vals)| cols.iter().copied().zip(vals.iter().copied()));
        d.chain(s)
    }

    pub fn sq_norm(&self) -> f64 {
        match *self {
            RowView::Dense(row) => row.iter().map(|v| v * v).sum(),
            RowView::Sparse { vals, .. } => vals.iter().map(|v| v * v).sum(),
        }
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::arg(format!(
            "matrix entries must be finite, found {v}"
        )));
    }
    Ok(())
}

impl Matrix {
    /// Dense matrix from row-major values.
    pub fn from_dense(m: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != m * n {
            return Err(Error::arg(format!(
                "dense data has {} values, expected {m}x{n} = {}",
                values.len(),
                m * n
            )));
        }
        check_values(&values)?;
        Ok(Self::with_storage(m, n, Storage::Dense { values }))
    }

    /// Dense matrix from a slice of equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(m * n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::arg(format!(
                    "row {i} has {} columns, expected {n}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::from_dense(m, n, values)
    }

    /// CSR matrix from raw arrays. Column indices must be strictly increasing
    /// within each row.
    pub fn from_csr(
        m: usize,
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != m + 1 {
            return Err(Error::arg(format!(
                "row pointer array has length {}, expected {}",
                row_ptr.len(),
                m + 1
            )));
        }
        if row_ptr[0] != 0 || row_ptr[m] != col_idx.len() || col_idx.len() != values.len() {
            return Err(Error::arg("inconsistent CSR array lengths"));
        }
        for i in 0..m {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::arg(format!("row pointers decrease at row {i}")));
            }
            let cols = &col_idx[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::arg(format!(
                    "column indices of row {i} are not strictly increasing"
                )));
            }
            if let Some(&j) = cols.last() {
                if j >= n {
                    return Err(Error::arg(format!(
                        "column index {j} out of range in row {i}"
                    )));
                }
            }
        }
        check_values(&values)?;
        Ok(Self::with_storage(
            m,
            n,
            Storage::Csr {
                row_ptr,
                col_idx,
                values,
            },
        ))
    }

    /// CSR matrix from 0-based `(row, col, value)` triplets. Duplicates are
    /// summed; entries that sum to exactly zero are dropped.
    pub fn from_triplets(m: usize, n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(i, j, _) in &sorted {
            if i >= m || j >= n {
                return Err(Error::arg(format!("entry ({i}, {j}) outside {m}x{n}")));
            }
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; m + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut rows = Vec::with_capacity(sorted.len());
        for (i, j, v) in sorted {
            if rows.last() == Some(&i) && col_idx.last() == Some(&j) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(i);
                col_idx.push(j);
                values.push(v);
            }
        }
        let mut keep_cols = Vec::with_capacity(col_idx.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((i, j), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v != 0.0 {
                row_ptr[i + 1] += 1;
                keep_cols.push(j);
                keep_vals.push(v);
            }
        }
        for i in 0..m {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self::from_csr(m, n, row_ptr, keep_cols, keep_vals)
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &triplets).expect("identity is valid")
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut values = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            values[i * n + i] = v;
        }
        Self::from_dense(n, n, values)
    }

    fn with_storage(m: usize, n: usize, storage: Storage) -> Self {
        let mut a = Matrix {
            m,
            n,
            storage,
            row_sq_norms: Vec::new(),
            frobenius_sq: 0.0,
        };
        a.row_sq_norms = (0..m).map(|i| a.row_unchecked(i).sq_norm()).collect();
        a.frobenius_sq = a.row_sq_norms.iter().sum();
        a
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.n
    }

    pub fn is_csr(&self) -> bool {
        matches!(self.storage, Storage::Csr { .. })
    }

    /// Number of stored nonzero entries.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense { values } => values.iter().filter(|v| **v != 0.0).count(),
            Storage::Csr { values, .. } => values.iter().filter(|v| **v != 0.0).count(),
        }
    }

    /// Fraction of nonzero entries, `nnz / (m n)`.
    pub fn density(&self) -> Result<f64> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::arg("density of an empty matrix is undefined"));
        }
        Ok(self.nnz() as f64 / (self.m as f64 * self.n as f64))
    }

    #[inline]
    pub fn row_sq_norms(&self) -> &[f64] {
        &self.row_sq_norms
    }

    #[inline]
    pub fn row_sq_norm(&self, i: usize) -> f64 {
        self.row_sq_norms[i]
    }

    #[inline]
    pub fn frobenius_sq(&self) -> f64 {
        self.frobenius_sq
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq.sqrt()
    }

    pub fn row(&self, i: usize) -> Result<RowView<'_>> {
        if i >= self.m {
            return Err(Error::arg(format!(
                "row index {i} out of range for {} rows",
                self.m
            )));
        }
        Ok(self.row_unchecked(i))
    }

    /// Row accessor for hot loops. Panics if `i >= nrows()`.
    #[inline]
    pub fn row_unchecked(&self, i: usize) -> RowView<'_> {
        match &self.storage {
            Storage::Dense { values } => RowView::Dense(&values[i * self.n..(i + 1) * self.n]),
            Storage::Csr {
                row_ptr,
                col_idx,
                values,
            } => {
                let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
                RowView::Sparse {
                    cols: &col_idx[lo..hi],
                    vals: &values[lo..hi],
                }
            }
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = RowView<'_>> {
        (0..self.m).map(move |i| self.row_unchecked(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.row_unchecked(i) {
            RowView::Dense(row) => row[j],
            RowView::Sparse { cols, vals } => match cols.binary_search(&j) {
                Ok(k) => vals[k],
                Err(_) => 0.0,
            },
        }
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::arg(format!(
                "vector length {} does not match {} columns",
                x.len(),
                self.n
            )));
        }
        Ok(self.rows().map(|r| r.dot(x)).collect())
    }

    /// `Aᵀ y`
    pub fn mul_transpose_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.m {
            return Err(Error::arg(format!(
                "vector length {} does not match {} rows",
                y.len(),
                self.m
            )));
        }
        let mut out = vec![0.0; self.n];
        for (r, &yi) in self.rows().zip(y) {
            r.axpy(yi, &mut out);
        }
        Ok(out)
    }

    /// 0-based `(row, col, value)` triplets of all nonzero entries, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.rows()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn to_dense(&self) -> Matrix {
        match &self.storage {
            Storage::Dense { .. } => self.clone(),
            Storage::Csr { .. } => {
                let mut values = vec![0.0; self.m * self.n];
                for (i, j, v) in self.triplets() {
                    values[i * self.n + j] = v;
                }
                Self::with_storage(self.m, self.n, Storage::Dense { values })
            }
        }
    }

    pub fn to_csr(&self) -> Matrix {
        match &self.storage {
            Storage::Csr { .. } => self.clone(),
            Storage::Dense { .. } => Self::from_triplets(self.m, self.n, &self.triplets())
                .expect("dense matrix converts to valid CSR"),
        }
    }

    /// Row-major dense copy of the entries.
    pub fn dense_values(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense { values } => values.clone(),
            Storage::Csr { .. } => match self.to_dense().storage {
                Storage::Dense { values } => values,
                Storage::Csr { .. } => unreachable!(),
            },
        }
    }

    /// Re-stores the matrix as requested. `Auto` picks CSR below
    /// [`AUTO_CSR_DENSITY`] and dense otherwise.
    pub fn with_representation(self, repr: Representation) -> Matrix {
        match repr {
            Representation::Dense => self.to_dense(),
            Representation::Csr => self.to_csr(),
            Representation::Auto => match self.density() {
                Ok(d) if d < AUTO_CSR_DENSITY => self.to_csr(),
                Ok(_) => self.to_dense(),
                Err(_) => self,
            },
        }
    }

    /// Indices of rows whose squared norm is zero.
    pub fn zero_rows(&self) -> Vec<usize> {
        self.row_sq_norms
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(r: RowView<'_>) -> Vec<(usize, f64)> {
        r.iter().collect()
    }

    #[test]
    fn row_view_identity() {
        let a = Matrix::identity(2);
        assert_eq!(pairs(a.row(0).unwrap()), vec![(0, 1.0)]);
        assert_eq!(pairs(a.to_dense().row(0).unwrap()), vec![(0, 1.0)]);
    }

    #[test]
    fn row_view_dense_readback() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(pairs(a.row(1).unwrap()), vec![(0, 3.0), (1, 4.0)]);
    }

    #[test]
    fn row_view_empty_csr_row() {
        let a = Matrix::from_triplets(3, 3, &[(0, 0, 1.0), (2, 1, 5.0)]).unwrap();
        assert!(a.is_csr());
        assert!(pairs(a.row(1).unwrap()).is_empty());
        assert_eq!(a.row_sq_norm(1), 0.0);
        assert_eq!(a.zero_rows(), vec![1]);
    }

    #[test]
    fn row_view_out_of_range() {
        let a = Matrix::identity(2);
        assert!(matches!(a.row(2), Err(Error::Argument(_))));
    }

    #[test]
    fn density_examples() {
        assert_eq!(Matrix::identity(2).density().unwrap(), 0.5);
        let full = Matrix::from_dense(3, 3, (1..=9).map(f64::from).collect()).unwrap();
        assert_eq!(full.density().unwrap(), 1.0);
        let empty = Matrix::from_dense(0, 3, vec![]).unwrap();
        assert!(empty.density().is_err());
    }

    #[test]
    fn cached_norms() {
        let a = Matrix::from_rows(&[[3.0, 4.0, 0.0], [1.0, -1.0, 2.0]]).unwrap();
        assert_eq!(a.row_sq_norms(), &[25.0, 6.0]);
        assert_eq!(a.frobenius_sq(), 31.0);
        let c = a.to_csr();
        assert_eq!(c.row_sq_norms(), a.row_sq_norms());
        assert_eq!(c.frobenius_sq(), 31.0);
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = Matrix::from_triplets(2, 2, &[(0, 1, 1.5), (0, 1, 2.5), (1, 0, 1.0), (1, 0, -1.0)])
            .unwrap();
        assert_eq!(a.get(0, 1), 4.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.nnz(), 1);
    }

    #[test]
    fn csr_validation() {
        assert!(Matrix::from_csr(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(Matrix::from_csr(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
        assert!(Matrix::from_csr(2, 3, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(Matrix::from_csr(2, 3, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
        assert!(Matrix::from_dense(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn products() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [0.0, 1.0]]).unwrap();
        assert_eq!(a.mul_vec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0, 1.0]);
        assert_eq!(
            a.mul_transpose_vec(&[1.0, 0.0, 1.0]).unwrap(),
            vec![1.0, 3.0]
        );
        assert!(a.mul_vec(&[1.0]).is_err());
        assert_eq!(
            a.to_csr().mul_vec(&[1.0, 1.0]).unwrap(),
            vec![3.0, 7.0, 1.0]
        );
    }

    #[test]
    fn auto_representation() {
        let sparse = Matrix::identity(8)
            .to_dense()
            .with_representation(Representation::Auto);
        assert!(sparse.is_csr());
        let dense = Matrix::identity(2).with_representation(Representation::Auto);
        assert!(!dense.is_csr());
    }
}
