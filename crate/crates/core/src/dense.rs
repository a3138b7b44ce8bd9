//! Small row-major dense matrices for element-level blocks.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `y = Aᵀ x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (yj, a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
        y
    }

    /// `xᵀ A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Copies the sub-block with the given row and column ranges.
    pub fn block(
        &self,
        rows: core::ops::Range<usize>,
        cols: core::ops::Range<usize>,
    ) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(rows.len(), cols.len());
        for (oi, i) in rows.enumerate() {
            for (oj, j) in cols.clone().enumerate() {
                out[(oi, oj)] = self[(i, j)];
            }
        }
        out
    }

    /// `self += alpha * other` on a column range of `self`.
    pub fn add_scaled_columns(&mut self, col_offset: usize, other: &DenseMatrix, alpha: f64) {
        assert_eq!(self.rows, other.rows);
        assert!(col_offset + other.cols <= self.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                self[(i, col_offset + j)] += alpha * other[(i, j)];
            }
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                let d = libm::fabs(self[(i, j)] - self[(j, i)]);
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}
