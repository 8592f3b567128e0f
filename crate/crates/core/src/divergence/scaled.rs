//! The scaled generator `φ†(x) = g(x)·φ(x/g(x))` and the checks around the
//! scaled identity.

use super::{raw_divergence, Generator, Point, Scaler};
use crate::error::{Error, Result};

/// Tolerance on `|φ(z) − ⟨z, ∇φ(z)⟩|` (relative to `max(1, |φ(z)|)`) below
/// which restricted homogeneity is considered to hold at `z`.
pub const HOMOGENEITY_TOL: f64 = 1e-8;

/// `φ†(x) = g(x)·φ(x/g(x))` with the analytic gradient
///
/// ```text
/// ∇φ†(y) = ∇φ(v) + (φ(v) − ⟨v, ∇φ(v)⟩)·∇g(y),   v = y/g(y)
/// ```
#[derive(Debug, Clone)]
pub struct ScaledGenerator<G, S> {
    pub base: G,
    pub scaler: S,
}

pub fn scaled_generator<P: Point, G: Generator<P>, S: Scaler<P>>(gen: G, g: S) -> ScaledGenerator<G, S> {
    ScaledGenerator { base: gen, scaler: g }
}

impl<G, S> ScaledGenerator<G, S> {
    /// `x / g(x)` for a known scaler value.
    fn project<P: Point>(x: &P, gx: f64) -> P {
        x.scaled(1.0 / gx)
    }
}

impl<P: Point, G: Generator<P>, S: Scaler<P>> Generator<P> for ScaledGenerator<G, S> {
    fn value(&self, x: &P) -> f64 {
        let gx = self.scaler.value(x);
        gx * self.base.value(&Self::project(x, gx))
    }

    fn gradient(&self, y: &P) -> P {
        let gy = self.scaler.value(y);
        let v = Self::project(y, gy);
        let grad_phi = self.base.gradient(&v);
        let gap = self.base.value(&v) - v.inner(&grad_phi);
        let mut out = grad_phi;
        if gap != 0.0 {
            out.add_scaled(gap, &self.scaler.gradient(y));
        }
        out
    }

    fn in_domain(&self, x: &P) -> bool {
        if !self.scaler.in_domain(x) {
            return false;
        }
        let gx = self.scaler.value(x);
        gx != 0.0 && gx.is_finite() && self.base.in_domain(&Self::project(x, gx))
    }
}

/// `φ(z) − ⟨z, ∇φ(z)⟩`.
pub fn homogeneity_residual<P: Point, G: Generator<P> + ?Sized>(gen: &G, z: &P) -> f64 {
    gen.value(z) - z.inner(&gen.gradient(z))
}

/// Maximum over the samples of `|φ(z) − ⟨z, ∇φ(z)⟩|` at `z = x/g(x)`.
pub fn check_restricted_homogeneity<P: Point, G: Generator<P> + ?Sized, S: Scaler<P> + ?Sized>(
    gen: &G,
    g: &S,
    samples: &[P],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Argument("empty sample list".into()));
    }
    let mut worst: f64 = 0.0;
    for (i, x) in samples.iter().enumerate() {
        let gx = scaler_value_checked(g, x, &format!("samples[{i}]"))?;
        let z = x.scaled(1.0 / gx);
        if !gen.in_domain(&z) {
            return Err(Error::domain(
                format!("samples[{i}]"),
                "x/g(x) outside generator domain",
            ));
        }
        worst = worst.max(homogeneity_residual(gen, &z).abs());
    }
    Ok(worst)
}

/// Both sides of the scaled identity at `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    /// `g(x)·D_φ(x/g(x) ‖ y/g(y))`
    pub lhs: f64,
    /// `D_φ†(x ‖ y)`
    pub rhs: f64,
    pub absdiff: f64,
}

impl IdentityCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        IdentityCheck {
            lhs,
            rhs,
            absdiff: (lhs - rhs).abs(),
        }
    }

    /// `|lhs − rhs| / max(1, |lhs|)`.
    pub fn relative(&self) -> f64 {
        self.absdiff / self.lhs.abs().max(1.0)
    }
}

fn scaler_value_checked<P: Point, S: Scaler<P> + ?Sized>(g: &S, x: &P, arg: &str) -> Result<f64> {
    if !g.in_domain(x) {
        return Err(Error::domain(arg, "outside scaler domain"));
    }
    let gx = g.value(x);
    if gx == 0.0 || !gx.is_finite() {
        return Err(Error::domain(
            arg,
            format!("scaler value {gx} is not a nonzero finite number"),
        ));
    }
    Ok(gx)
}

/// Evaluates both sides of the scaled identity without checking the
/// affine / homogeneity precondition.
///
/// This is the entry point for converse probes, where the caller passes a
/// pair violating the precondition on purpose and inspects `absdiff`.
pub fn scaled_identity_sides<P: Point, G: Generator<P>, S: Scaler<P>>(
    gen: &G,
    g: &S,
    x: &P,
    y: &P,
) -> Result<IdentityCheck> {
    let gx = scaler_value_checked(g, x, "x")?;
    let gy = scaler_value_checked(g, y, "y")?;
    let zx = x.scaled(1.0 / gx);
    let zy = y.scaled(1.0 / gy);
    if !gen.in_domain(&zx) {
        return Err(Error::domain("x", "x/g(x) outside generator domain"));
    }
    if !gen.in_domain(&zy) {
        return Err(Error::domain("y", "y/g(y) outside generator domain"));
    }
    let lhs = gx * raw_divergence(gen, &zx, &zy);
    let dagger = ScaledGenerator { base: gen, scaler: g };
    let rhs = raw_divergence(&dagger, x, y);
    Ok(IdentityCheck::new(lhs, rhs))
}

/// Evaluates `g(x)·D_φ(x/g(x) ‖ y/g(y))` and `D_φ†(x ‖ y)`.
///
/// Requires `g` affine, or restricted homogeneity at `x/g(x)` and `y/g(y)`
/// (checked at these two points only).
pub fn verify_scaled_identity<P: Point, G: Generator<P>, S: Scaler<P>>(
    gen: &G,
    g: &S,
    x: &P,
    y: &P,
) -> Result<IdentityCheck> {
    if !g.is_affine() {
        for (arg, p) in [("x", x), ("y", y)] {
            let gp = scaler_value_checked(g, p, arg)?;
            let z = p.scaled(1.0 / gp);
            if !gen.in_domain(&z) {
                return Err(Error::domain(arg, "point/g(point) outside generator domain"));
            }
            let res = homogeneity_residual(gen, &z);
            if res.abs() > HOMOGENEITY_TOL * gen.value(&z).abs().max(1.0) {
                return Err(Error::IdentityPrecondition(format!(
                    "scaler is not affine and φ(z) − ⟨z,∇φ(z)⟩ = {res:e} at z = {arg}/g({arg})"
                )));
            }
        }
    }
    scaled_identity_sides(gen, g, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::generators::{AffineScaler, KlGenerator, LpNormScaler, SquaredNorm};
    use crate::divergence::{finite_difference_error, Vector};
    use nalgebra::dvector;
    use rand::Rng;

    fn row_one() -> ScaledGenerator<SquaredNorm, LpNormScaler> {
        scaled_generator(SquaredNorm::with_offset(1.0), LpNormScaler::new(2.0, 1.0))
    }

    #[test]
    fn row_one_dagger_is_the_norm() {
        let dag = row_one();
        let x = dvector![3.0, -4.0, 12.0];
        assert!((dag.value(&x) - 13.0).abs() < 1e-12);
    }

    #[test]
    fn kl_with_sum_scaler_example() {
        let dag = scaled_generator(KlGenerator, AffineScaler::sum(2));
        let x = dvector![2.0, 2.0];
        let expected = -4.0 * std::f64::consts::LN_2 - 4.0;
        assert!((dag.value(&x) - expected).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = crate::rng::root(11);
        let dag = row_one();
        let kl = scaled_generator(KlGenerator, AffineScaler::sum(4));
        for _ in 0..100 {
            let x = Vector::from_fn(4, |_, _| rng.random_range(-2.0..2.0));
            let e = finite_difference_error(|p| dag.value(p), &dag.gradient(&x), &x, 1e-5);
            assert!(e <= 1e-5, "row I fd error {e}");
            let xp = Vector::from_fn(4, |_, _| rng.random_range(0.2..3.0));
            let e = finite_difference_error(|p| kl.value(p), &kl.gradient(&xp), &xp, 1e-5);
            assert!(e <= 1e-5, "row V fd error {e}");
        }
    }

    #[test]
    fn row_one_orthogonal_units() {
        let c = verify_scaled_identity(
            &SquaredNorm::with_offset(1.0),
            &LpNormScaler::new(2.0, 1.0),
            &dvector![1.0, 0.0],
            &dvector![0.0, 1.0],
        )
        .unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-15 && (c.rhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn proportional_vectors_under_sum_scaler() {
        let c = verify_scaled_identity(
            &KlGenerator,
            &AffineScaler::sum(3),
            &dvector![1.0, 1.0, 2.0],
            &dvector![2.0, 2.0, 4.0],
        )
        .unwrap();
        assert!(c.lhs.abs() < 1e-15 && c.rhs.abs() < 1e-14);
    }

    #[test]
    fn identity_case_is_zero() {
        let x = dvector![0.4, -1.2];
        let c = verify_scaled_identity(&SquaredNorm::with_offset(1.0), &LpNormScaler::new(2.0, 1.0), &x, &x).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.rhs.abs() < 1e-15);
    }

    #[test]
    fn non_affine_non_homogeneous_pair_is_rejected() {
        let gen = SquaredNorm::with_offset(0.0);
        let g = crate::catalog::generators::OnePlusNormScaler;
        let err = verify_scaled_identity(&gen, &g, &dvector![1.0, 2.0], &dvector![0.5, 0.1]).unwrap_err();
        assert!(matches!(err, Error::IdentityPrecondition(_)));
        // the unchecked route still evaluates both sides
        let sides = scaled_identity_sides(&gen, &g, &dvector![1.0, 2.0], &dvector![0.5, 0.1]).unwrap();
        assert!(sides.absdiff > 1e-3);
    }

    #[test]
    fn homogeneity_on_empty_samples_errors() {
        let gen = SquaredNorm::with_offset(1.0);
        let g = LpNormScaler::new(2.0, 1.0);
        assert!(matches!(
            check_restricted_homogeneity(&gen, &g, &[]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn affine_scaler_bypasses_homogeneity() {
        // φ = ½‖x‖² is not homogeneous on the image of 1 + 1ᵀx, but the scaler is affine
        let gen = SquaredNorm::with_offset(0.0);
        let g = AffineScaler::new(dvector![1.0, 1.0], 1.0);
        let samples = vec![dvector![0.3, 0.9], dvector![2.0, 0.1]];
        let res = check_restricted_homogeneity(&gen, &g, &samples).unwrap();
        assert!(res > 1e-3);
        let c = verify_scaled_identity(&gen, &g, &samples[0], &samples[1]).unwrap();
        assert!(c.relative() < 1e-12);
    }
}
