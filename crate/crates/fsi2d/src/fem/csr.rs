//! Compressed sparse row matrices with a triplet-based builder.
//!
//! Assembly pushes `(row, col, value)` triplets into a [`Coo`] accumulator;
//! [`Coo::into_csr`] sorts, merges duplicates and produces an immutable
//! [`CsrMatrix`]. All downstream consumers (products, energy forms, the
//! sparse factorizations) work on the CSR form.

use crate::error::{Error, Result};

/// Triplet accumulator for matrix assembly.
#[derive(Debug, Clone)]
pub struct Coo {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Coo {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Coo {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if val != 0.0 {
            self.entries.push((row, col, val));
        }
    }

    /// Adds `scale * a` into this accumulator, remapping indices.
    /// Entries whose row or column maps to `None` are dropped.
    pub fn scatter(
        &mut self,
        a: &CsrMatrix,
        row_map: impl Fn(usize) -> Option<usize>,
        col_map: impl Fn(usize) -> Option<usize>,
        scale: f64,
    ) {
        for (r, c, v) in a.entries() {
            if let (Some(ri), Some(ci)) = (row_map(r), col_map(c)) {
                self.push(ri, ci, scale * v);
            }
        }
    }

    pub fn into_csr(mut self) -> CsrMatrix {
        self.entries
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Immutable sparse matrix in compressed sparse row form.
/// Column indices are sorted and duplicate-free within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
        y
    }

    /// x' A y
    pub fn quadratic_form(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        let mut acc = 0.0;
        for r in 0..self.nrows {
            let mut row = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += self.values[k] * y[self.col_idx[k]];
            }
            acc += x[r] * row;
        }
        acc
    }

    /// Returns `self + scale * other`; the operands must have equal shapes.
    pub fn add_scaled(&self, other: &CsrMatrix, scale: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut coo = Coo::new(self.nrows, self.ncols);
        for (r, c, v) in self.entries() {
            coo.push(r, c, v);
        }
        for (r, c, v) in other.entries() {
            coo.push(r, c, scale * v);
        }
        coo.into_csr()
    }

    pub fn scaled(&self, scale: f64) -> CsrMatrix {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= scale;
        }
        out
    }

    /// Largest |A - A'| entry; 0 for an exactly symmetric matrix.
    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols);
        let mut worst: f64 = 0.0;
        for (r, c, v) in self.entries() {
            let vt = self.get(c, r);
            worst = worst.max((v - vt).abs());
        }
        worst
    }

    /// Value at `(row, col)`, zero if not stored.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&col) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn check_square(&self, what: &str) -> Result<()> {
        if self.nrows != self.ncols {
            return Err(Error::Solver(format!(
                "{what}: matrix is {}x{}, expected square",
                self.nrows, self.ncols
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_and_sort() {
        let mut coo = Coo::new(2, 2);
        coo.push(1, 0, 1.0);
        coo.push(0, 1, 2.0);
        coo.push(1, 0, 3.0);
        coo.push(0, 0, 5.0);
        let a = coo.into_csr();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 0), 4.0);
        assert_eq!(a.get(0, 0), 5.0);
        assert_eq!(a.get(0, 1), 2.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn matvec_and_quadratic_form() {
        let mut coo = Coo::new(2, 2);
        coo.push(0, 0, 2.0);
        coo.push(0, 1, 1.0);
        coo.push(1, 0, 1.0);
        coo.push(1, 1, 2.0);
        let a = coo.into_csr();
        let y = a.mul_vec(&[1.0, 1.0]);
        assert_eq!(y, vec![3.0, 3.0]);
        assert_eq!(a.quadratic_form(&[1.0, 2.0], &[1.0, 1.0]), 9.0);
        assert_eq!(a.max_asymmetry(), 0.0);
    }
}
