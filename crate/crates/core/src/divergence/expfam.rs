//! KL divergence between members of an exponential family whose natural
//! parameters are normalised by a norm `Ω`.
//!
//! With `φ` the cumulant function, `KL(θ‖θ′) = D_φ(θ′‖θ)`. Scaling by
//! `Ω` gives `D_φ†(θ′‖θ) = Ω(θ′)·D_φ(θ′_Ω‖θ_Ω)` with `θ_Ω = θ/Ω(θ)`.

use super::{verify_scaled_identity, Generator, Point, Scaler};
use crate::error::Result;

/// Quantities computed by [`expfam_kl_via_scaled`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFamKl {
    /// `(1/Ω(θ))·D_φ†(θ′‖θ)`
    pub via_scaled: f64,
    /// `(Ω(θ′)/Ω(θ))·D_φ(θ′_Ω‖θ_Ω)`, the same quantity through the
    /// normalised parameters.
    pub via_projection: f64,
    /// `KL(θ_Ω‖θ′_Ω) = D_φ(θ′_Ω‖θ_Ω) = (1/Ω(θ′))·D_φ†(θ′‖θ)`.
    pub kl: f64,
}

impl ExpFamKl {
    /// `|via_scaled − via_projection| / max(1, |via_projection|)`.
    pub fn route_gap(&self) -> f64 {
        (self.via_scaled - self.via_projection).abs() / self.via_projection.abs().max(1.0)
    }
}

/// Evaluates the normalised-parameter KL through `φ† = Ω·φ(·/Ω)`.
///
/// Fails with [`crate::Error::IdentityPrecondition`] unless `φ` is
/// restricted 1-homogeneous at `θ_Ω` and `θ′_Ω` (or `Ω` is affine).
pub fn expfam_kl_via_scaled<P: Point, G: Generator<P>, S: Scaler<P>>(
    gen: &G,
    omega: &S,
    theta: &P,
    theta_prime: &P,
) -> Result<ExpFamKl> {
    let check = verify_scaled_identity(gen, omega, theta_prime, theta)?;
    let om = omega.value(theta);
    let om_prime = omega.value(theta_prime);
    Ok(ExpFamKl {
        via_scaled: check.rhs / om,
        via_projection: check.lhs / om,
        kl: check.lhs / om_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::generators::{LpNormScaler, OnePlusNormScaler, SquaredNorm};
    use crate::divergence::bregman_divergence;
    use crate::error::Error;
    use nalgebra::dvector;

    fn row_one() -> (SquaredNorm, LpNormScaler) {
        (SquaredNorm::with_offset(1.0), LpNormScaler::new(2.0, 1.0))
    }

    #[test]
    fn identical_parameters_give_zero() {
        let (gen, om) = row_one();
        let t = dvector![0.3, -2.0];
        let r = expfam_kl_via_scaled(&gen, &om, &t, &t).unwrap();
        assert!(r.via_scaled.abs() < 1e-15 && r.kl.abs() < 1e-15);
    }

    #[test]
    fn orthogonal_example_both_routes() {
        let (gen, om) = row_one();
        let r = expfam_kl_via_scaled(&gen, &om, &dvector![1.0, 0.0], &dvector![0.0, 2.0]).unwrap();
        // direct oracle on the unit sphere: ½‖[0,1] − [1,0]‖² = 1
        let oracle = bregman_divergence(&gen, &dvector![0.0, 1.0], &dvector![1.0, 0.0]).unwrap();
        assert!((r.kl - oracle).abs() < 1e-14);
        assert!((r.kl - 1.0).abs() < 1e-14);
        // ‖θ′‖(1 − cos) / ‖θ‖ = 2
        assert!((r.via_scaled - 2.0).abs() < 1e-14);
        assert!(r.route_gap() < 1e-14);
    }

    #[test]
    fn non_homogeneous_generator_is_rejected() {
        let err = expfam_kl_via_scaled(
            &SquaredNorm::with_offset(0.0),
            &OnePlusNormScaler,
            &dvector![1.0, 0.0],
            &dvector![0.0, 2.0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::IdentityPrecondition(_)));
    }
}
