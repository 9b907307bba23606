//! Row-stochastic kernels stored as compressed sparse rows.

use crate::finite_chain::ChainError;
use crate::real::Real;

/// Row sums must equal 1 within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A transition kernel on `n` labeled states.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel<T> {
    labels: Vec<String>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> FiniteKernel<T> {
    /// Builds from sparse rows of `(column, probability)`. Duplicate columns
    /// within a row are summed; explicit zeros are dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>) -> Result<Self, ChainError> {
        let n = rows.len();
        if n == 0 {
            return Err(ChainError::InvalidKernel("kernel has no states".into()));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let tol = T::tol(ROW_SUM_TOL, 64.0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            let mut sum = T::zero();
            let mut last: Option<usize> = None;
            for (j, p) in row {
                if j >= n {
                    return Err(ChainError::InvalidKernel(format!(
                        "row {i}: column {j} out of range for {n} states"
                    )));
                }
                if !(p >= T::zero()) || !p.is_finite() {
                    return Err(ChainError::InvalidKernel(format!(
                        "row {i}: entry ({i},{j}) = {p} is not a probability"
                    )));
                }
                sum = sum + p;
                if p == T::zero() {
                    continue;
                }
                if last == Some(j) {
                    let v = vals.last_mut().expect("previous entry");
                    *v = *v + p;
                } else {
                    cols.push(j);
                    vals.push(p);
                    last = Some(j);
                }
            }
            if (sum - T::one()).abs() > tol {
                return Err(ChainError::InvalidKernel(format!(
                    "row {i} sums to {sum}, not 1"
                )));
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
            row_ptr,
            cols,
            vals,
        })
    }

    /// Builds from a dense row-major matrix.
    pub fn from_dense(rows: &[Vec<T>]) -> Result<Self, ChainError> {
        let n = rows.len();
        let sparse = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if r.len() != n {
                    return Err(ChainError::InvalidKernel(format!(
                        "row {i} has {} entries, expected {n}",
                        r.len()
                    )));
                }
                Ok(r.iter().copied().enumerate().filter(|e| e.1 != T::zero()).collect())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(sparse)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, ChainError> {
        if labels.len() != self.n() {
            return Err(ChainError::InvalidKernel(format!(
                "{} labels for {} states",
                labels.len(),
                self.n()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero entries `(j, P(i, j))` of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    /// `P(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> T {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&j) {
            Ok(k) => self.vals[a + k],
            Err(_) => T::zero(),
        }
    }

    /// Row vector times kernel: `μP`.
    pub fn left_mul(&self, mu: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n()];
        for (i, &m) in mu.iter().enumerate() {
            if m == T::zero() {
                continue;
            }
            for (j, p) in self.row(i) {
                out[j] = out[j] + m * p;
            }
        }
        out
    }

    /// Kernel times column vector: `Pg`.
    pub fn right_mul(&self, g: &[T]) -> Vec<T> {
        (0..self.n())
            .map(|i| self.row(i).map(|(j, p)| p * g[j]).sum())
            .collect()
    }

    /// Dense copy, for small kernels and tests.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n())
            .map(|i| {
                let mut r = vec![T::zero(); self.n()];
                for (j, p) in self.row(i) {
                    r[j] = p;
                }
                r
            })
            .collect()
    }
}
