//! Small dense symmetric eigendecomposition and spectral matrix functions.

use crate::divergence::{Matrix, SymmetricMatrix, Vector};
use crate::error::{Error, Result};

/// Sweep limit for the cyclic Jacobi method.
pub const MAX_SWEEPS: usize = 100;

/// `A = V·diag(λ)·Vᵀ` with eigenvalues in descending order and orthonormal
/// eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vector,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    /// `V·diag(f(λ))·Vᵀ`.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> Matrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            scaled.column_mut(j).scale_mut(fl);
        }
        scaled * v.transpose()
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_with(|l| l)
    }
}

/// Cyclic Jacobi eigendecomposition.
///
/// Each sweep annihilates every off-diagonal entry once with a plane
/// rotation. Convergence is declared when the off-diagonal Frobenius mass
/// falls below `ε·‖A‖_F`; exceeding [`MAX_SWEEPS`] sweeps is a
/// [`Error::Numerical`].
pub fn sym_eigen(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = Matrix::identity(n, n);
    let scale = m.norm();
    let target = f64::EPSILON * scale;
    let mut converged = scale == 0.0 || n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&m);
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // negligible relative to both diagonal entries: zero it outright
                let tiny = 100.0 * apq.abs();
                if app.abs() + tiny == app.abs() && aqq.abs() + tiny == aqq.abs() {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > target {
        return Err(Error::Numerical(format!(
            "Jacobi eigendecomposition did not converge in {MAX_SWEEPS} sweeps"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let eigenvalues = Vector::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let mut eigenvectors = Matrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        eigenvectors.set_column(k, &v.column(i));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Applies the rotation zeroing `m[(p, q)]` to `m` (two-sided) and `v`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.nrows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// `V·diag(f(λ))·Vᵀ`. `f` returns `None` outside its domain, which is
/// reported as a [`Error::Domain`] on `A`.
pub fn matrix_fn(a: &SymmetricMatrix, f: impl Fn(f64) -> Option<f64>) -> Result<SymmetricMatrix> {
    let eig = sym_eigen(a)?;
    let mut vals = Vec::with_capacity(eig.eigenvalues.len());
    for &l in eig.eigenvalues.iter() {
        match f(l) {
            Some(v) if v.is_finite() => vals.push(v),
            _ => return Err(Error::domain("A", format!("eigenvalue {l:e} outside function domain"))),
        }
    }
    let mut it = vals.into_iter();
    let m = eig.reconstruct_with(|_| it.next().unwrap_or(f64::NAN));
    Ok(SymmetricMatrix::symmetrize(m))
}

/// Principal matrix logarithm of a positive definite matrix.
pub fn matrix_log(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    matrix_fn(a, |l| (l > 0.0).then(|| l.ln()))
}

pub fn matrix_exp(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    matrix_fn(a, |l| Some(l.exp()))
}

/// `A^s` for positive definite `A`.
pub fn matrix_pow(a: &SymmetricMatrix, s: f64) -> Result<SymmetricMatrix> {
    matrix_fn(a, |l| (l > 0.0).then(|| l.powf(s)))
}
