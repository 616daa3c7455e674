//! Orthonormal 2-D discrete cosine transform (DCT-II) on square matrices.
//!
//! The transform is computed as b * m * b^T where b is the orthonormal DCT-II
//! basis; the inverse is b^T * m * b. Orthonormality makes the pair an exact
//! isometry (Parseval), so watermark energy added in the transform domain maps
//! one-to-one to pixel-domain energy.

use crate::matrix::{Matrix, MatrixError};
use std::f64::consts::PI;

/// Precomputed DCT basis for one transform size.
///
/// Building the basis is O(n^2) and each transform is two matrix products;
/// reuse one plan for all transforms of the same size.
#[derive(Debug, Clone)]
pub struct DctPlan {
    n: usize,
    basis: Matrix,
}

impl DctPlan {
    pub fn new(n: usize) -> Result<Self, MatrixError> {
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut basis = Matrix::zeros(n, n);
        let nf = n as f64;
        for i in 0..n {
            let c = if i == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            for x in 0..n {
                basis[(i, x)] = c * ((2 * x + 1) as f64 * i as f64 * PI / (2.0 * nf)).cos();
            }
        }
        Ok(DctPlan { n, basis })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Row/column DCT basis; row i is the i-th cosine basis vector.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Forward 2-D DCT.
    pub fn dct2(&self, m: &Matrix) -> Result<Matrix, MatrixError> {
        self.check(m)?;
        self.basis.matmul(m)?.matmul_transposed(&self.basis)
    }

    /// Inverse 2-D DCT.
    pub fn idct2(&self, m: &Matrix) -> Result<Matrix, MatrixError> {
        self.check(m)?;
        self.basis.transpose().matmul(&m.matmul(&self.basis)?)
    }

    fn check(&self, m: &Matrix) -> Result<(), MatrixError> {
        if m.rows() != self.n || m.cols() != self.n {
            return Err(MatrixError::Dimension {
                left_rows: self.n,
                left_cols: self.n,
                right_rows: m.rows(),
                right_cols: m.cols(),
            });
        }
        Ok(())
    }
}
