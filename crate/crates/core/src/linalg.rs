//! Small dense matrices (dimension at most a handful) with pivoted inversion.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds from a flat row-major buffer; panics on a length mismatch.
    pub fn from_row_major(dim: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), dim * dim, "row-major buffer has wrong length");
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn scale(&self, s: T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Largest |a_ij - a_ji|.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Sub-block with rows/cols in `start..start + len`.
    pub fn block(&self, start: usize, len: usize) -> Self {
        Self::from_fn(len, |i, j| self[(start + i, start + j)])
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting. Returns
    /// `None` when a pivot vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[(r, col)].abs().partial_cmp(&a[(s, col)].abs()).unwrap())
                .unwrap();
            if a[(pivot, col)] == T::zero() || !a[(pivot, col)].is_finite() {
                return None;
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] = a[(col, j)] / p;
                inv[(col, j)] = inv[(col, j)] / p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == T::zero() {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] = a[(r, j)] - factor * a[(col, j)];
                    inv[(r, j)] = inv[(r, j)] - factor * inv[(col, j)];
                }
            }
        }
        Some(inv)
    }

    /// Inverse together with the infinity-norm condition number.
    pub fn inverse_with_condition(&self) -> Option<(Self, T)> {
        let inv = self.inverse()?;
        let cond = self.norm_inf() * inv.norm_inf();
        Some((inv, cond))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.dim {
            self.data.swap(a * self.dim + j, b * self.dim + j);
        }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.dim + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_permuted_matrix() {
        let m = DenseMatrix::from_row_major(3, vec![0.0, 2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -4.0]);
        let inv = m.inverse().unwrap();
        let mut prod = DenseMatrix::<f64>::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                prod[(i, j)] = (0..3).map(|k| m[(i, k)] * inv[(k, j)]).sum();
            }
        }
        assert!(prod.sub(&DenseMatrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = DenseMatrix::from_row_major(2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(m.inverse().is_none() || m.inverse_with_condition().unwrap().1 > 1e12);
    }

    #[test]
    fn condition_of_diagonal() {
        let m = DenseMatrix::from_diagonal(&[1.0f64, -1e-3, 10.0]);
        let (_, c) = m.inverse_with_condition().unwrap();
        assert!((c - 1e4).abs() < 1e-9);
    }
}
