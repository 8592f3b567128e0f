//! Iterated ("deep") scaling.
//!
//! Given scalers `g_1, …, g_k`, the composed generators follow
//!
//! ```text
//! φ†(0) = φ,    φ†(ℓ)(x) = g_ℓ(x)·φ†(ℓ−1)(x/g_ℓ(x))
//! ```
//!
//! and the composed scalers `g̃_{ℓ,ℓ′}` follow
//!
//! ```text
//! g̃_{1,ℓ′} = g_ℓ′,    g̃_{ℓ,ℓ′}(x) = g̃_{ℓ−1,ℓ′}(x)·g_{ℓ′−ℓ+1}(x/g̃_{ℓ−1,ℓ′}(x))
//! ```
//!
//! Only these recursions are used; no closed form for affine chains.

use std::sync::Arc;

use super::{raw_divergence, DynGenerator, DynScaler, IdentityCheck, Point, ScaledGenerator, Scaler};
use crate::error::{Error, Result};

/// The composed scaler `g̃_{ℓ,ℓ′}`.
#[derive(Clone)]
pub struct ChainScaler<P: Point> {
    /// Scalers in application order: `g_ℓ′, g_{ℓ′−1}, …, g_{ℓ′−ℓ+1}`.
    chain: Vec<DynScaler<P>>,
}

impl<P: Point> std::fmt::Debug for ChainScaler<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainScaler").field("depth", &self.chain.len()).finish()
    }
}

impl<P: Point> ChainScaler<P> {
    pub fn depth(&self) -> usize {
        self.chain.len()
    }

    /// Value and gradient, reporting the recursion depth at which a scaler
    /// vanished or left its domain.
    pub fn try_value_and_gradient(&self, x: &P) -> Result<(f64, P)> {
        let first = &self.chain[0];
        if !first.in_domain(x) {
            return Err(Error::domain("x", "outside scaler domain at recursion depth 1"));
        }
        let mut val = first.value(x);
        let mut grad = first.gradient(x);
        for (depth, h) in self.chain.iter().enumerate().skip(1) {
            if val == 0.0 || !val.is_finite() {
                return Err(Error::domain(
                    "x",
                    format!("composed scaler is {val} at recursion depth {depth}"),
                ));
            }
            let v = x.scaled(1.0 / val);
            if !h.in_domain(&v) {
                return Err(Error::domain(
                    "x",
                    format!("x/g̃ outside scaler domain at recursion depth {}", depth + 1),
                ));
            }
            let hv = h.value(&v);
            let grad_h = h.gradient(&v);
            // g̃ = G·h(x/G) has the same perspective gradient as a scaled generator
            let gap = hv - v.inner(&grad_h);
            let mut next = grad_h;
            next.add_scaled(gap, &grad);
            val *= hv;
            grad = next;
        }
        if val == 0.0 || !val.is_finite() {
            return Err(Error::domain(
                "x",
                format!("composed scaler is {val} at recursion depth {}", self.chain.len()),
            ));
        }
        Ok((val, grad))
    }
}

impl<P: Point> Scaler<P> for ChainScaler<P> {
    fn value(&self, x: &P) -> f64 {
        let mut val = self.chain[0].value(x);
        for h in &self.chain[1..] {
            val *= h.value(&x.scaled(1.0 / val));
        }
        val
    }

    fn gradient(&self, x: &P) -> P {
        self.try_value_and_gradient(x)
            .map(|(_, g)| g)
            .unwrap_or_else(|e| panic!("gradient outside domain: {e}"))
    }

    fn in_domain(&self, x: &P) -> bool {
        self.try_value_and_gradient(x).is_ok()
    }

    fn is_affine(&self) -> bool {
        self.chain.len() == 1 && self.chain[0].is_affine()
    }
}

/// Output of [`deep_compose`].
pub struct DeepComposition<P: Point> {
    pub level: usize,
    pub outer_level: usize,
    /// `g̃_{ℓ,ℓ′}`
    pub gtilde: ChainScaler<P>,
    /// `φ†(ℓ′)`
    pub phidagger: DynGenerator<P>,
    /// `φ†(ℓ′−ℓ)`
    pub inner: DynGenerator<P>,
}

fn compose_generator<P: Point + 'static>(
    gen: DynGenerator<P>,
    scalers: &[DynScaler<P>],
    level: usize,
) -> DynGenerator<P> {
    let mut acc = gen;
    for g in &scalers[..level] {
        acc = Arc::new(ScaledGenerator {
            base: acc,
            scaler: g.clone(),
        });
    }
    acc
}

/// Builds `g̃_{ℓ,ℓ′}`, `φ†(ℓ′)` and `φ†(ℓ′−ℓ)` from `φ` and `g_1..g_k`
/// (`scalers[0]` is `g_1`). Levels are 1-based, `1 ≤ ℓ ≤ ℓ′ ≤ k`.
pub fn deep_compose<P: Point + 'static>(
    gen: DynGenerator<P>,
    scalers: &[DynScaler<P>],
    level: usize,
    outer_level: usize,
) -> Result<DeepComposition<P>> {
    let k = scalers.len();
    if !(1 <= level && level <= outer_level && outer_level <= k) {
        return Err(Error::Argument(format!(
            "need 1 ≤ ℓ ≤ ℓ′ ≤ k, got ℓ={level}, ℓ′={outer_level}, k={k}"
        )));
    }
    // g̃_{1,ℓ′} = g_ℓ′, then g_{ℓ′−1}, … down to g_{ℓ′−ℓ+1}
    let chain = (0..level).map(|j| scalers[outer_level - 1 - j].clone()).collect();
    Ok(DeepComposition {
        level,
        outer_level,
        gtilde: ChainScaler { chain },
        phidagger: compose_generator(gen.clone(), scalers, outer_level),
        inner: compose_generator(gen, scalers, outer_level - level),
    })
}

/// Both sides of `g̃(x)·D_{φ†(ℓ′−ℓ)}(x/g̃(x) ‖ y/g̃(y)) = D_{φ†(ℓ′)}(x ‖ y)`.
///
/// No precondition is enforced; affine chains and homogeneous inner
/// generators satisfy it.
pub fn verify_deep_identity<P: Point>(comp: &DeepComposition<P>, x: &P, y: &P) -> Result<IdentityCheck> {
    let (gx, _) = comp.gtilde.try_value_and_gradient(x)?;
    let (gy, _) = comp.gtilde.try_value_and_gradient(y)?;
    let zx = x.scaled(1.0 / gx);
    let zy = y.scaled(1.0 / gy);
    for (arg, z) in [("x", &zx), ("y", &zy)] {
        if !comp.inner.in_domain(z) {
            return Err(Error::domain(arg, "scaled point outside inner generator domain"));
        }
    }
    for (arg, p) in [("x", x), ("y", y)] {
        if !comp.phidagger.in_domain(p) {
            return Err(Error::domain(arg, "outside composed generator domain"));
        }
    }
    let lhs = gx * raw_divergence(&comp.inner, &zx, &zy);
    let rhs = raw_divergence(&comp.phidagger, x, y);
    Ok(IdentityCheck::new(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::generators::{AffineScaler, SquaredNorm};
    use crate::divergence::{finite_difference_error, scaled_generator, Generator, Vector};
    use nalgebra::dvector;
    use rand::Rng;

    fn affine_chain() -> Vec<DynScaler<Vector>> {
        vec![
            Arc::new(AffineScaler::new(dvector![0.3, 0.5, 0.2], 1.0)),
            Arc::new(AffineScaler::new(dvector![0.1, 0.4, 0.7], 0.5)),
        ]
    }

    #[test]
    fn single_level_equals_scaled_generator() {
        let phi: DynGenerator<Vector> = Arc::new(SquaredNorm::with_offset(1.0));
        let g = affine_chain();
        let comp = deep_compose(phi.clone(), &g[..1], 1, 1).unwrap();
        let direct = scaled_generator(phi, g[0].clone());
        let mut rng = crate::rng::root(3);
        for _ in 0..20 {
            let x = Vector::from_fn(3, |_, _| rng.random_range(0.1..2.0));
            assert_eq!(comp.phidagger.value(&x), direct.value(&x));
            assert_eq!(comp.phidagger.gradient(&x), direct.gradient(&x));
            assert_eq!(comp.gtilde.value(&x), g[0].value(&x));
        }
    }

    #[test]
    fn composed_scaler_gradient_matches_finite_differences() {
        let phi: DynGenerator<Vector> = Arc::new(SquaredNorm::with_offset(1.0));
        let comp = deep_compose(phi, &affine_chain(), 2, 2).unwrap();
        let mut rng = crate::rng::root(4);
        for _ in 0..50 {
            let x = Vector::from_fn(3, |_, _| rng.random_range(0.1..2.0));
            let (_, grad) = comp.gtilde.try_value_and_gradient(&x).unwrap();
            let e = finite_difference_error(|p| comp.gtilde.value(p), &grad, &x, 1e-5);
            assert!(e < 1e-5);
            let e = finite_difference_error(|p| comp.phidagger.value(p), &comp.phidagger.gradient(&x), &x, 1e-5);
            assert!(e < 1e-5);
        }
    }

    #[test]
    fn invalid_levels_are_rejected() {
        let phi: DynGenerator<Vector> = Arc::new(SquaredNorm::with_offset(1.0));
        assert!(deep_compose(phi.clone(), &affine_chain(), 0, 1).is_err());
        assert!(deep_compose(phi.clone(), &affine_chain(), 2, 1).is_err());
        assert!(deep_compose(phi, &affine_chain(), 1, 3).is_err());
    }

    #[test]
    fn vanishing_scaler_reports_depth() {
        let phi: DynGenerator<Vector> = Arc::new(SquaredNorm::with_offset(1.0));
        let chain: Vec<DynScaler<Vector>> = vec![
            Arc::new(AffineScaler::new(dvector![1.0, 0.0], -1.0)),
            Arc::new(AffineScaler::new(dvector![0.0, 1.0], 1.0)),
        ];
        let comp = deep_compose(phi, &chain, 2, 2).unwrap();
        // g_2(x) = 1 + x_2 = 1, then g_1(x/1) = x_1 − 1 = 0
        let err = comp.gtilde.try_value_and_gradient(&dvector![1.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("depth 2"), "{err}");
    }
}
