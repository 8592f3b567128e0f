//! Concrete generators and scalers.
//!
//! Vector generators act on `R^d` (or on lifted points in `R^{d+1}` for the
//! sphere and hyperboloid rows); matrix generators act on symmetric
//! matrices with the trace inner product.

use crate::divergence::{Generator, Matrix, Point, Scaler, SymmetricMatrix, Vector};

use super::linalg::{matrix_log, sym_eigen};

/// Smallest admissible entry for logarithmic generators.
pub const POSITIVE_FLOOR: f64 = 1e-300;

/// Below this radius the trigonometric and hyperbolic ratios use series.
pub const SERIES_RADIUS: f64 = 1e-4;

/// `‖x‖_q`.
pub fn lq_norm(x: &Vector, q: f64) -> f64 {
    if q == 2.0 {
        return x.norm();
    }
    let m = x.amax();
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    // factor out the largest entry to avoid overflow for large q
    m * x.iter().map(|v| (v.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q)
}

/// `sign(x) ⊗ |x|^e` with zero entries mapped to zero.
pub fn signed_power(x: &Vector, e: f64) -> Vector {
    x.map(|v| if v == 0.0 { 0.0 } else { v.signum() * v.abs().powf(e) })
}

/// `r·cot r`, tending to 1 at 0.
pub fn r_cot_r(r: f64) -> f64 {
    if r < SERIES_RADIUS {
        1.0 - r * r / 3.0
    } else {
        r * r.cos() / r.sin()
    }
}

/// `r / sin r`, tending to 1 at 0.
pub fn r_over_sin(r: f64) -> f64 {
    if r < SERIES_RADIUS {
        1.0 + r * r / 6.0
    } else {
        r / r.sin()
    }
}

/// `r·coth r`, tending to 1 at 0.
pub fn r_coth_r(r: f64) -> f64 {
    if r < SERIES_RADIUS {
        1.0 + r * r / 3.0
    } else {
        r / r.tanh()
    }
}

/// `r / sinh r`, tending to 1 at 0.
pub fn r_over_sinh(r: f64) -> f64 {
    if r < SERIES_RADIUS {
        1.0 - r * r / 6.0
    } else {
        r / r.sinh()
    }
}

/// `sin r / r`, tending to 1 at 0.
pub fn sinc(r: f64) -> f64 {
    if r < SERIES_RADIUS {
        1.0 - r * r / 6.0
    } else {
        r.sin() / r
    }
}

/// `sinh r / r`, tending to 1 at 0.
pub fn sinhc(r: f64) -> f64 {
    if r < SERIES_RADIUS {
        1.0 + r * r / 6.0
    } else {
        r.sinh() / r
    }
}

/// Euclidean norm of the first `len − 1` coordinates.
fn spatial_norm(z: &Vector) -> f64 {
    z.rows(0, z.len() - 1).norm()
}

/// `φ(x) = (c + ‖x‖₂²)/2`.
#[derive(Debug, Clone, Copy)]
pub struct SquaredNorm {
    offset: f64,
}

impl SquaredNorm {
    pub fn with_offset(offset: f64) -> Self {
        SquaredNorm { offset }
    }
}

impl Generator<Vector> for SquaredNorm {
    fn value(&self, x: &Vector) -> f64 {
        0.5 * (self.offset + x.norm_squared())
    }
    fn gradient(&self, x: &Vector) -> Vector {
        x.clone()
    }
}

/// `φ(x) = (W² + ‖x‖_q²)/2`, gradient `‖x‖_q^{2−q}·sign(x)⊗|x|^{q−1}`.
#[derive(Debug, Clone, Copy)]
pub struct LqSquaredNorm {
    pub q: f64,
    pub w: f64,
}

impl LqSquaredNorm {
    pub fn new(q: f64, w: f64) -> Self {
        LqSquaredNorm { q, w }
    }
}

impl Generator<Vector> for LqSquaredNorm {
    fn value(&self, x: &Vector) -> f64 {
        let n = lq_norm(x, self.q);
        0.5 * (self.w * self.w + n * n)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let n = lq_norm(x, self.q);
        if n == 0.0 {
            return Vector::zeros(x.len());
        }
        signed_power(x, self.q - 1.0) * n.powf(2.0 - self.q)
    }
}

/// `φ(z) = (⟨z, z⟩_M − 1)/2` with the Minkowski form
/// `⟨u, v⟩_M = Σ_{i≤d} u_i v_i − u_{d+1} v_{d+1}`.
///
/// The constant `−1` makes `φ(z) = ⟨z, ∇φ(z)⟩` on the unit hyperboloid
/// `⟨z, z⟩_M = −1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinkowskiGenerator;

/// `⟨u, v⟩_M`.
pub fn minkowski_inner(u: &Vector, v: &Vector) -> f64 {
    let n = u.len();
    u.rows(0, n - 1).dot(&v.rows(0, n - 1)) - u[n - 1] * v[n - 1]
}

impl Generator<Vector> for MinkowskiGenerator {
    fn value(&self, z: &Vector) -> f64 {
        0.5 * (minkowski_inner(z, z) - 1.0)
    }
    fn gradient(&self, z: &Vector) -> Vector {
        let mut g = z.clone();
        let n = g.len();
        g[n - 1] = -g[n - 1];
        g
    }
    fn in_domain(&self, z: &Vector) -> bool {
        z.len() >= 2 && z.is_finite()
    }
}

fn all_positive(x: &Vector) -> bool {
    x.iter().all(|&v| v.is_finite() && v >= POSITIVE_FLOOR)
}

/// `φ(x) = Σ x_i log x_i − x_i` on the positive orthant.
#[derive(Debug, Clone, Copy, Default)]
pub struct KlGenerator;

impl Generator<Vector> for KlGenerator {
    fn value(&self, x: &Vector) -> f64 {
        x.iter().map(|&v| v * v.ln() - v).sum()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        x.map(f64::ln)
    }
    fn in_domain(&self, x: &Vector) -> bool {
        all_positive(x)
    }
}

/// `φ(x) = −d − Σ log x_i` on the positive orthant (Itakura-Saito).
#[derive(Debug, Clone, Copy, Default)]
pub struct BurgGenerator;

impl Generator<Vector> for BurgGenerator {
    fn value(&self, x: &Vector) -> f64 {
        -(x.len() as f64) - x.iter().map(|v| v.ln()).sum::<f64>()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        x.map(|v| -1.0 / v)
    }
    fn in_domain(&self, x: &Vector) -> bool {
        all_positive(x)
    }
}

fn is_positive_definite(x: &SymmetricMatrix) -> bool {
    x.is_finite() && x.as_matrix().clone().cholesky().is_some()
}

/// `φ(X) = tr(X log X − X)` on positive definite matrices.
#[derive(Debug, Clone, Copy, Default)]
pub struct VonNeumannGenerator;

impl Generator<SymmetricMatrix> for VonNeumannGenerator {
    fn value(&self, x: &SymmetricMatrix) -> f64 {
        match sym_eigen(x) {
            Ok(e) => e.eigenvalues.iter().map(|&l| l * l.ln() - l).sum(),
            Err(_) => f64::NAN,
        }
    }
    fn gradient(&self, x: &SymmetricMatrix) -> SymmetricMatrix {
        matrix_log(x).unwrap_or_else(|e| panic!("gradient outside domain: {e}"))
    }
    fn in_domain(&self, x: &SymmetricMatrix) -> bool {
        is_positive_definite(x)
    }
}

/// `φ(X) = −d − log det X` on positive definite matrices.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogDetGenerator;

fn log_det(x: &SymmetricMatrix) -> f64 {
    match x.as_matrix().clone().cholesky() {
        Some(ch) => 2.0 * ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>(),
        None => f64::NAN,
    }
}

fn spd_inverse(x: &SymmetricMatrix) -> SymmetricMatrix {
    let ch = x
        .as_matrix()
        .clone()
        .cholesky()
        .unwrap_or_else(|| panic!("inverse of a matrix that is not positive definite"));
    SymmetricMatrix::symmetrize(ch.inverse())
}

impl Generator<SymmetricMatrix> for LogDetGenerator {
    fn value(&self, x: &SymmetricMatrix) -> f64 {
        -(x.dim() as f64) - log_det(x)
    }
    fn gradient(&self, x: &SymmetricMatrix) -> SymmetricMatrix {
        spd_inverse(x).scaled(-1.0)
    }
    fn in_domain(&self, x: &SymmetricMatrix) -> bool {
        is_positive_definite(x)
    }
}

/// `g(x) = aᵀx + b`.
#[derive(Debug, Clone)]
pub struct AffineScaler {
    pub a: Vector,
    pub b: f64,
}

impl AffineScaler {
    pub fn new(a: Vector, b: f64) -> Self {
        AffineScaler { a, b }
    }

    /// `g(x) = 1ᵀx` in dimension `d`.
    pub fn sum(d: usize) -> Self {
        AffineScaler {
            a: Vector::from_element(d, 1.0),
            b: 0.0,
        }
    }
}

impl Scaler<Vector> for AffineScaler {
    fn value(&self, x: &Vector) -> f64 {
        self.a.dot(x) + self.b
    }
    fn gradient(&self, _x: &Vector) -> Vector {
        self.a.clone()
    }
    fn in_domain(&self, x: &Vector) -> bool {
        x.len() == self.a.len() && x.is_finite() && self.value(x) != 0.0
    }
    fn is_affine(&self) -> bool {
        true
    }
}

/// `g(x) = ‖x‖_q / W` on nonzero vectors.
#[derive(Debug, Clone, Copy)]
pub struct LpNormScaler {
    pub q: f64,
    pub w: f64,
}

impl LpNormScaler {
    pub fn new(q: f64, w: f64) -> Self {
        LpNormScaler { q, w }
    }
}

impl Scaler<Vector> for LpNormScaler {
    fn value(&self, x: &Vector) -> f64 {
        lq_norm(x, self.q) / self.w
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let n = lq_norm(x, self.q);
        signed_power(x, self.q - 1.0) * (n.powf(1.0 - self.q) / self.w)
    }
    fn in_domain(&self, x: &Vector) -> bool {
        x.is_finite() && lq_norm(x, self.q) > 0.0
    }
}

/// `g(x) = 1 + ‖x‖₂`. Not affine; used as a converse probe.
#[derive(Debug, Clone, Copy, Default)]
pub struct OnePlusNormScaler;

impl Scaler<Vector> for OnePlusNormScaler {
    fn value(&self, x: &Vector) -> f64 {
        1.0 + x.norm()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let n = x.norm();
        if n == 0.0 {
            Vector::zeros(x.len())
        } else {
            x / n
        }
    }
}

/// `g(x) = (Π x_i)^{1/d}` on the positive orthant.
#[derive(Debug, Clone, Copy, Default)]
pub struct GeoMeanScaler;

impl Scaler<Vector> for GeoMeanScaler {
    fn value(&self, x: &Vector) -> f64 {
        (x.iter().map(|v| v.ln()).sum::<f64>() / x.len() as f64).exp()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let g = self.value(x);
        let d = x.len() as f64;
        x.map(|v| g / (d * v))
    }
    fn in_domain(&self, x: &Vector) -> bool {
        all_positive(x)
    }
}

/// `g(z) = r / sin r` on lifted points `z ∈ R^{d+1}`, `r = ‖z_{1..d}‖₂ < π`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SphereScaler;

impl Scaler<Vector> for SphereScaler {
    fn value(&self, z: &Vector) -> f64 {
        r_over_sin(spatial_norm(z))
    }
    fn gradient(&self, z: &Vector) -> Vector {
        let r = spatial_norm(z);
        // (d/dr)(r/sin r) / r = (sin r − r cos r)/(r sin² r)
        let k = if r < SERIES_RADIUS {
            1.0 / 3.0 + 7.0 * r * r / 90.0
        } else {
            let s = r.sin();
            (s - r * r.cos()) / (r * s * s)
        };
        let mut g = z * k;
        let n = g.len();
        g[n - 1] = 0.0;
        g
    }
    fn in_domain(&self, z: &Vector) -> bool {
        z.len() >= 2 && z.is_finite() && spatial_norm(z) < std::f64::consts::PI
    }
}

/// `g(z) = −r / sinh r` on lifted points `z ∈ R^{d+1}`, `r = ‖z_{1..d}‖₂`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HyperScaler;

impl Scaler<Vector> for HyperScaler {
    fn value(&self, z: &Vector) -> f64 {
        -r_over_sinh(spatial_norm(z))
    }
    fn gradient(&self, z: &Vector) -> Vector {
        let r = spatial_norm(z);
        // −(d/dr)(r/sinh r) / r = (r cosh r − sinh r)/(r sinh² r)
        let k = if r < SERIES_RADIUS {
            1.0 / 3.0 - 7.0 * r * r / 90.0
        } else {
            let s = r.sinh();
            (r * r.cosh() - s) / (r * s * s)
        };
        let mut g = z * k;
        let n = g.len();
        g[n - 1] = 0.0;
        g
    }
    fn in_domain(&self, z: &Vector) -> bool {
        z.len() >= 2 && z.is_finite() && r_over_sinh(spatial_norm(z)) > 0.0
    }
}

/// `g(X) = tr X`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TraceScaler;

impl Scaler<SymmetricMatrix> for TraceScaler {
    fn value(&self, x: &SymmetricMatrix) -> f64 {
        x.trace()
    }
    fn gradient(&self, x: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix::identity(x.dim())
    }
    fn in_domain(&self, x: &SymmetricMatrix) -> bool {
        x.is_finite() && x.trace() != 0.0
    }
    fn is_affine(&self) -> bool {
        true
    }
}

/// `g(X) = det(X)^{1/d}` on positive definite matrices.
#[derive(Debug, Clone, Copy, Default)]
pub struct DetRootScaler;

impl Scaler<SymmetricMatrix> for DetRootScaler {
    fn value(&self, x: &SymmetricMatrix) -> f64 {
        (log_det(x) / x.dim() as f64).exp()
    }
    fn gradient(&self, x: &SymmetricMatrix) -> SymmetricMatrix {
        let g = self.value(x);
        spd_inverse(x).scaled(g / x.dim() as f64)
    }
    fn in_domain(&self, x: &SymmetricMatrix) -> bool {
        is_positive_definite(x)
    }
}

/// `[x, r·cot r]` with `r = ‖x‖₂`.
pub fn sphere_lift(x: &Vector) -> Vector {
    let r = x.norm();
    let mut z = x.clone().insert_row(x.len(), 0.0);
    z[x.len()] = r_cot_r(r);
    z
}

/// `[x, r·coth r]` with `r = ‖x‖₂` (real time-like last coordinate).
pub fn hyper_lift(x: &Vector) -> Vector {
    let r = x.norm();
    let mut z = x.clone().insert_row(x.len(), 0.0);
    z[x.len()] = r_coth_r(r);
    z
}

/// `tr(X log Y)` for positive definite `Y`.
pub fn trace_x_log_y(x: &SymmetricMatrix, y: &SymmetricMatrix) -> crate::error::Result<f64> {
    let ly = matrix_log(y)?;
    Ok((x.as_matrix() * ly.as_matrix()).trace())
}

/// Random `Q·diag(λ)·Qᵀ` with `Q` Haar-orthogonal and `λ_i ~ U(lo, hi)`.
pub fn random_spd(rng: &mut impl rand::Rng, d: usize, lo: f64, hi: f64) -> SymmetricMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let g = Matrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    // fix column signs so the distribution is Haar
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let lam = Vector::from_fn(d, |_, _| rng.random_range(lo..hi));
    SymmetricMatrix::symmetrize(&q * Matrix::from_diagonal(&lam) * q.transpose())
}
