//! Generators, scalers and the Bregman distortions they induce.
//!
//! A [`Generator`] `φ` is a differentiable scalar function with a domain
//! predicate; its distortion is
//!
//! ```text
//! D_φ(x ‖ y) = φ(x) − φ(y) − ⟨x − y, ∇φ(y)⟩
//! ```
//!
//! which is a Bregman divergence when `φ` is convex. A [`Scaler`] `g` is a
//! nonvanishing differentiable function; together with a generator it
//! defines the perspective-like transform `φ†(x) = g(x)·φ(x/g(x))`
//! ([`ScaledGenerator`]), and the pair satisfies
//!
//! ```text
//! g(x)·D_φ(x/g(x) ‖ y/g(y)) = D_φ†(x ‖ y)
//! ```
//!
//! exactly when `g` is affine or `φ(z) = ⟨z, ∇φ(z)⟩` on the scaled image.

mod deep;
mod expfam;
mod point;
mod scaled;

use std::sync::Arc;

pub use deep::{deep_compose, verify_deep_identity, ChainScaler, DeepComposition};
pub use expfam::{expfam_kl_via_scaled, ExpFamKl};
pub use point::{Matrix, Point, SymmetricMatrix, Vector, SYMMETRY_TOL};
pub use scaled::{
    check_restricted_homogeneity, homogeneity_residual, scaled_generator, scaled_identity_sides,
    verify_scaled_identity, IdentityCheck, ScaledGenerator, HOMOGENEITY_TOL,
};

use crate::error::{Error, Result};

/// A differentiable (usually convex) function inducing a Bregman distortion.
pub trait Generator<P: Point>: Send + Sync {
    fn value(&self, x: &P) -> f64;
    fn gradient(&self, x: &P) -> P;
    fn in_domain(&self, x: &P) -> bool {
        x.is_finite()
    }
}

/// A nonvanishing differentiable function used to rescale points.
pub trait Scaler<P: Point>: Send + Sync {
    fn value(&self, x: &P) -> f64;
    fn gradient(&self, x: &P) -> P;
    fn in_domain(&self, x: &P) -> bool {
        x.is_finite()
    }
    /// Whether the scaler is affine on its whole domain.
    fn is_affine(&self) -> bool {
        false
    }
}

pub type DynGenerator<P> = Arc<dyn Generator<P>>;
pub type DynScaler<P> = Arc<dyn Scaler<P>>;

impl<P: Point, G: Generator<P> + ?Sized> Generator<P> for Arc<G> {
    fn value(&self, x: &P) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &P) -> P {
        (**self).gradient(x)
    }
    fn in_domain(&self, x: &P) -> bool {
        (**self).in_domain(x)
    }
}

impl<P: Point, G: Generator<P> + ?Sized> Generator<P> for &G {
    fn value(&self, x: &P) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &P) -> P {
        (**self).gradient(x)
    }
    fn in_domain(&self, x: &P) -> bool {
        (**self).in_domain(x)
    }
}

impl<P: Point, S: Scaler<P> + ?Sized> Scaler<P> for Arc<S> {
    fn value(&self, x: &P) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &P) -> P {
        (**self).gradient(x)
    }
    fn in_domain(&self, x: &P) -> bool {
        (**self).in_domain(x)
    }
    fn is_affine(&self) -> bool {
        (**self).is_affine()
    }
}

impl<P: Point, S: Scaler<P> + ?Sized> Scaler<P> for &S {
    fn value(&self, x: &P) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &P) -> P {
        (**self).gradient(x)
    }
    fn in_domain(&self, x: &P) -> bool {
        (**self).in_domain(x)
    }
    fn is_affine(&self) -> bool {
        (**self).is_affine()
    }
}

/// Distortion without domain checks. Callers must have validated inputs.
pub(crate) fn raw_divergence<P: Point, G: Generator<P> + ?Sized>(gen: &G, x: &P, y: &P) -> f64 {
    let diff = x.minus(y);
    gen.value(x) - gen.value(y) - diff.inner(&gen.gradient(y))
}

/// `D_φ(x ‖ y) = φ(x) − φ(y) − ⟨x − y, ∇φ(y)⟩`.
///
/// Non-negative for convex `φ`; may be negative for non-convex generators
/// such as scaled generators with a sign-changing scaler.
pub fn bregman_divergence<P: Point, G: Generator<P> + ?Sized>(gen: &G, x: &P, y: &P) -> Result<f64> {
    if !gen.in_domain(x) {
        return Err(Error::domain("x", "outside generator domain"));
    }
    if !gen.in_domain(y) {
        return Err(Error::domain("y", "outside generator domain"));
    }
    Ok(raw_divergence(gen, x, y))
}

/// Trace divergence `φ(X) − φ(Y) − tr(∇φ(Y)ᵀ(X − Y))` between symmetric
/// matrices. Rejects asymmetric inputs with [`Error::Shape`].
pub fn trace_divergence<G: Generator<SymmetricMatrix> + ?Sized>(gen: &G, x: &Matrix, y: &Matrix) -> Result<f64> {
    let xs = SymmetricMatrix::new(x.clone())?;
    let ys = SymmetricMatrix::new(y.clone())?;
    if xs.dim() != ys.dim() {
        return Err(Error::Shape(format!(
            "{}x{} vs {}x{}",
            xs.dim(),
            xs.dim(),
            ys.dim(),
            ys.dim()
        )));
    }
    bregman_divergence(gen, &xs, &ys)
}

/// Largest relative discrepancy between `gradient` and central finite
/// differences of `value` at `x` with step `h`.
///
/// The discrepancy of each coordinate is measured relative to
/// `max(1, |∂f|)`. Used by tests; production code never differentiates
/// numerically.
pub fn finite_difference_error<P: Point>(value: impl Fn(&P) -> f64, gradient: &P, x: &P, h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..x.coord_len() {
        let plus = x.perturbed(i, h);
        let minus = x.perturbed(i, -h);
        let fd = (value(&plus) - value(&minus)) / (2.0 * h);
        let dir = plus.minus(x);
        let analytic = gradient.inner(&dir) / h;
        let err = (fd - analytic).abs() / analytic.abs().max(1.0);
        worst = worst.max(err);
    }
    worst
}
