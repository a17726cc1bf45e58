//! Interaction matrices: storage, constructors for the standard example
//! families, validation and the scalar / setwise functionals that feed the
//! entropy bounds.

mod builders;
mod functionals;
mod graph;
pub mod io;
mod subset;
mod validate;

pub use builders::{
    build_mean_field, build_random_walk, build_rank_one, build_scaled_adjacency,
    build_sequential, sample_erdos_renyi,
};
pub use functionals::{
    c_of_v, chat_of_v, col_square_sums_squared, p_xi, p_xi_symmetric, q_xi, q_xi_core,
    row_square_sums_squared, sum_cubes, sum_squares,
};
pub use graph::Graph;
pub use subset::SubsetState;
pub use validate::{validate, ValidityReport};

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Below this size a dense row-major mirror is kept for O(1) lookups.
pub const DENSE_MIRROR_LIMIT: usize = 64;

/// Nonnegative `n x n` coupling matrix `xi` stored as row-sorted coordinate
/// triplets, with cached row/column sums and maxima.
///
/// Construction accepts any finite entries so that [`validate`] can report
/// sign and diagonal violations; the engines that need a well-formed matrix
/// check [`InteractionMatrix::is_well_formed`] themselves.
#[derive(Debug, Clone)]
pub struct InteractionMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    dense: Option<Vec<f64>>,
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
    delta: f64,
    delta_i: Vec<f64>,
    symmetric: bool,
}

impl PartialEq for InteractionMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.row_ptr == other.row_ptr
            && self.cols == other.cols
            && self.vals == other.vals
    }
}

impl InteractionMatrix {
    /// Builds from `(i, j, value)` triplets. Duplicates are summed, exact
    /// zeros are dropped.
    pub fn from_triplets<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut trip: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!(
                    "entry ({i}, {j}) out of range for n = {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("entry ({i}, {j}) is not finite")));
            }
            trip.push((i, j, v));
        }
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(trip.len());
        for (i, j, v) in trip {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|t| t.2 != 0.0);
        Ok(Self::from_sorted(n, merged))
    }

    /// Builds from a row-major dense buffer of length `n * n`.
    pub fn from_dense(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, got: data.len() });
        }
        Self::from_triplets(
            n,
            data.iter().enumerate().map(|(k, &v)| (k / n, k % n, v)),
        )
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: r.len() });
            }
            flat.extend_from_slice(r);
        }
        Self::from_dense(n, &flat)
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_sorted(n, Vec::new())
    }

    fn from_sorted(n: usize, trip: Vec<(usize, usize, f64)>) -> Self {
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals = Vec::with_capacity(trip.len());
        for &(i, j, v) in &trip {
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut row_sums = vec![0.0; n];
        let mut col_sums = vec![0.0; n];
        let mut delta_i = vec![0.0f64; n];
        let mut delta = 0.0f64;
        for &(i, j, v) in &trip {
            row_sums[i] += v;
            col_sums[j] += v;
            delta_i[i] = delta_i[i].max(v);
            delta = delta.max(v);
        }
        let dense = (n <= DENSE_MIRROR_LIMIT).then(|| {
            let mut d = vec![0.0; n * n];
            for &(i, j, v) in &trip {
                d[i * n + j] = v;
            }
            d
        });
        let mut m = InteractionMatrix {
            n,
            row_ptr,
            cols,
            vals,
            dense,
            row_sums,
            col_sums,
            delta,
            delta_i,
            symmetric: false,
        };
        let sym = m.triplets().all(|(i, j, v)| m.get(j, i) == v);
        m.symmetric = sym;
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if let Some(d) = &self.dense {
            return d[i * self.n + j];
        }
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[lo..hi].binary_search(&j) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Nonzero entries `(j, xi_ij)` of row `i`, in increasing `j`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi].iter().copied().zip(self.vals[lo..hi].iter().copied())
    }

    /// All nonzero entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    /// `max_ij xi_ij`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Row maxima `max_j xi_ij`.
    pub fn delta_i(&self) -> &[f64] {
        &self.delta_i
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn max_row_sum(&self) -> f64 {
        self.row_sums.iter().fold(0.0, |m: f64, &x| m.max(x))
    }

    pub fn max_col_sum(&self) -> f64 {
        self.col_sums.iter().fold(0.0, |m: f64, &x| m.max(x))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.vals.iter().all(|&v| v >= 0.0)
    }

    pub fn has_zero_diagonal(&self) -> bool {
        self.triplets().all(|(i, j, _)| i != j)
    }

    /// Nonnegative with zero diagonal.
    pub fn is_well_formed(&self) -> bool {
        self.is_nonnegative() && self.has_zero_diagonal()
    }

    pub(crate) fn require_well_formed(&self) -> Result<()> {
        if !self.is_nonnegative() {
            return Err(Error::InvalidParameter("interaction matrix has negative entries".into()));
        }
        if !self.has_zero_diagonal() {
            return Err(Error::InvalidParameter("interaction matrix has a nonzero diagonal".into()));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut trip: Vec<(usize, usize, f64)> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Self::from_sorted(self.n, trip)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_triplets(self.n, self.triplets().map(|(i, j, v)| (i, j, c * v)))
    }

    /// Entrywise square `xi_ij^2`.
    pub fn entrywise_square(&self) -> Self {
        Self::from_sorted(self.n, self.triplets().map(|(i, j, v)| (i, j, v * v)).collect())
    }

    /// `y = xi x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `y = xi^T x`.
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, j, v) in self.triplets() {
            y[j] += v * x[i];
        }
        y
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.dense {
            Some(d) => d.clone(),
            None => {
                let mut d = vec![0.0; self.n * self.n];
                for (i, j, v) in self.triplets() {
                    d[i * self.n + j] = v;
                }
                d
            }
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.to_dense())
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidSize("matrix must be square".into()));
        }
        let n = m.nrows();
        Self::from_triplets(
            n,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, m[(i, j)])),
        )
    }
}
