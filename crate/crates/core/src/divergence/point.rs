//! The vector-space interface generators and scalers operate on.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// A point of a finite-dimensional real inner-product space.
///
/// Bregman divergences only need the inner product `⟨x, y⟩` between a point
/// and a gradient, plus the linear operations. Vectors use the Euclidean dot
/// product and symmetric matrices the trace inner product `tr(XᵀY)`.
pub trait Point: Clone + std::fmt::Debug + Send + Sync {
    fn inner(&self, other: &Self) -> f64;
    fn scaled(&self, a: f64) -> Self;
    fn minus(&self, other: &Self) -> Self;
    /// `self += a * other`.
    fn add_scaled(&mut self, a: f64, other: &Self);
    fn is_finite(&self) -> bool;
    /// Number of scalar coordinates.
    fn coord_len(&self) -> usize;
    /// Coordinate `i` in a fixed flattening order.
    fn coord(&self, i: usize) -> f64;
    /// Returns a copy with coordinate `i` perturbed by `h`.
    ///
    /// Symmetric matrices perturb the pair `(i, j)`/`(j, i)` together so the
    /// result stays symmetric.
    fn perturbed(&self, i: usize, h: f64) -> Self;
}

impl Point for Vector {
    fn inner(&self, other: &Self) -> f64 {
        self.dot(other)
    }

    fn scaled(&self, a: f64) -> Self {
        self * a
    }

    fn minus(&self, other: &Self) -> Self {
        self - other
    }

    fn add_scaled(&mut self, a: f64, other: &Self) {
        self.axpy(a, other, 1.0);
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    fn coord_len(&self) -> usize {
        self.len()
    }

    fn coord(&self, i: usize) -> f64 {
        self[i]
    }

    fn perturbed(&self, i: usize, h: f64) -> Self {
        let mut out = self.clone();
        out[i] += h;
        out
    }
}

/// Relative symmetry tolerance for [`SymmetricMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A square real matrix whose entries satisfy
/// `|A[i][j] − A[j][i]| ≤ 1e−12·max(1, |A[i][j]|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(1.0) {
                    return Err(Error::Shape(format!(
                        "asymmetric entries ({i},{j})={a} vs ({j},{i})={b}"
                    )));
                }
            }
        }
        Ok(SymmetricMatrix(m))
    }

    /// Symmetrizes `(m + mᵀ)/2` without checking.
    pub fn symmetrize(m: Matrix) -> Self {
        let t = m.transpose();
        SymmetricMatrix((m + t) * 0.5)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymmetricMatrix(Matrix::from_diagonal(&Vector::from_column_slice(diag)))
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix(Matrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

impl Point for SymmetricMatrix {
    fn inner(&self, other: &Self) -> f64 {
        // tr(XᵀY) = Σ_ij X_ij Y_ij
        self.0.dot(&other.0)
    }

    fn scaled(&self, a: f64) -> Self {
        SymmetricMatrix(&self.0 * a)
    }

    fn minus(&self, other: &Self) -> Self {
        SymmetricMatrix(&self.0 - &other.0)
    }

    fn add_scaled(&mut self, a: f64, other: &Self) {
        self.0 += &other.0 * a;
    }

    fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    fn coord_len(&self) -> usize {
        let n = self.dim();
        n * (n + 1) / 2
    }

    fn coord(&self, i: usize) -> f64 {
        let (r, c) = upper_index(self.dim(), i);
        self.0[(r, c)]
    }

    fn perturbed(&self, i: usize, h: f64) -> Self {
        let (r, c) = upper_index(self.dim(), i);
        let mut m = self.0.clone();
        m[(r, c)] += h;
        if r != c {
            m[(c, r)] += h;
        }
        SymmetricMatrix(m)
    }
}

/// Maps a flat index onto the upper triangle `(r, c)`, `r ≤ c`, row-major.
fn upper_index(n: usize, mut i: usize) -> (usize, usize) {
    for r in 0..n {
        let len = n - r;
        if i < len {
            return (r, r + i);
        }
        i -= len;
    }
    panic!("coordinate index out of range");
}
