//! Balls of the second type and bisectors of the first type, and how they
//! transform under a positive scaler.
//!
//! For a pair `(φ, g)` satisfying the scaled identity with `g > 0`,
//!
//! ```text
//! D_φ†(z‖x) − D_φ†(z‖y) = g(z)·[D_φ(z/g(z) ‖ x/g(x)) − D_φ(z/g(z) ‖ y/g(y))]
//! ```
//!
//! so the `φ†` bisector of `x, y` is the preimage of the `φ` bisector of the
//! scaled points. Likewise `D_φ†(c‖x) = g(c)·D_φ(c/g(c) ‖ x/g(x))` maps the
//! `φ†` ball of radius `r` onto the `φ` ball of radius `r/g(c)`.

use crate::divergence::{
    bregman_divergence, homogeneity_residual, scaled_generator, Generator, IdentityCheck, Point, Scaler,
    HOMOGENEITY_TOL,
};
use crate::error::{Error, Result};

/// Slack added to the radius in membership tests.
pub const BALL_SLACK: f64 = 1e-12;

/// Half-width of the band around zero in which a bisector residual counts
/// as zero.
pub const BISECTOR_BAND: f64 = 1e-10;

/// `{x : D_φ(c‖x) ≤ r}`.
#[derive(Debug, Clone)]
pub struct Ball2<P, G> {
    pub center: P,
    pub radius: f64,
    pub gen: G,
}

impl<P: Point, G: Generator<P>> Ball2<P, G> {
    pub fn new(center: P, radius: f64, gen: G) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::Argument(format!("radius {radius} must be nonnegative")));
        }
        if !gen.in_domain(&center) {
            return Err(Error::domain("center", "outside generator domain"));
        }
        Ok(Ball2 { center, radius, gen })
    }
}

/// Whether `D_φ(c‖x) ≤ r + BALL_SLACK`.
pub fn ball2_contains<P: Point, G: Generator<P>>(ball: &Ball2<P, G>, x: &P) -> Result<bool> {
    Ok(bregman_divergence(&ball.gen, &ball.center, x)? <= ball.radius + BALL_SLACK)
}

/// `D_φ(z‖x) − D_φ(z‖y)`.
pub fn bisector1_residual<P: Point, G: Generator<P> + ?Sized>(gen: &G, x: &P, y: &P, z: &P) -> Result<f64> {
    Ok(bregman_divergence(gen, z, x)? - bregman_divergence(gen, z, y)?)
}

/// `p/g(p)` after checking that `g(p) > 0` and, for non-affine `g`, that
/// `φ` is homogeneous there.
fn scaled_point<P: Point, G: Generator<P>, S: Scaler<P>>(gen: &G, g: &S, p: &P, arg: &str) -> Result<(f64, P)> {
    if !g.in_domain(p) {
        return Err(Error::domain(arg, "outside scaler domain"));
    }
    let gp = g.value(p);
    if !(gp > 0.0 && gp.is_finite()) {
        return Err(Error::domain(arg, format!("scaler value {gp} is not positive")));
    }
    let z = p.scaled(1.0 / gp);
    if !gen.in_domain(&z) {
        return Err(Error::domain(arg, "point/g(point) outside generator domain"));
    }
    if !g.is_affine() {
        let res = homogeneity_residual(gen, &z);
        if res.abs() > HOMOGENEITY_TOL * gen.value(&z).abs().max(1.0) {
            return Err(Error::IdentityPrecondition(format!(
                "scaler is not affine and φ(z) − ⟨z,∇φ(z)⟩ = {res:e} at z = {arg}/g({arg})"
            )));
        }
    }
    Ok((gp, z))
}

/// Fraction of `samples` on which membership in the `φ†` ball around `c`
/// of radius `r` agrees with membership of `x/g(x)` in the `φ` ball around
/// `c/g(c)` of radius `r/g(c)`.
pub fn scaled_ball_equivalence<P: Point, G: Generator<P>, S: Scaler<P>>(
    gen: &G,
    g: &S,
    c: &P,
    r: f64,
    samples: &[P],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Argument("empty sample list".into()));
    }
    let (gc, zc) = scaled_point(gen, g, c, "c")?;
    let dagger = scaled_generator(gen, g);
    let big = Ball2::new(c.clone(), r, &dagger)?;
    let small = Ball2::new(zc, r / gc, gen)?;
    let mut agree = 0usize;
    for (i, x) in samples.iter().enumerate() {
        let (_, zx) = scaled_point(gen, g, x, &format!("samples[{i}]"))?;
        if ball2_contains(&big, x)? == ball2_contains(&small, &zx)? {
            agree += 1;
        }
    }
    Ok(agree as f64 / samples.len() as f64)
}

/// Sign of `v` with the band `|v| ≤ BISECTOR_BAND` mapped to zero.
fn banded_sign(v: f64) -> i8 {
    if v.abs() <= BISECTOR_BAND {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Fraction of `samples` on which the side of the `φ†` bisector of `x, y`
/// agrees with the side of `z/g(z)` relative to the `φ` bisector of
/// `x/g(x), y/g(y)`. A residual inside the zero band on either side counts
/// as agreement.
pub fn bisector_equivalence<P: Point, G: Generator<P>, S: Scaler<P>>(
    gen: &G,
    g: &S,
    x: &P,
    y: &P,
    samples: &[P],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Argument("empty sample list".into()));
    }
    let (_, zx) = scaled_point(gen, g, x, "x")?;
    let (_, zy) = scaled_point(gen, g, y, "y")?;
    let dagger = scaled_generator(gen, g);
    let mut agree = 0usize;
    for (i, z) in samples.iter().enumerate() {
        let (_, zz) = scaled_point(gen, g, z, &format!("samples[{i}]"))?;
        let a = banded_sign(bisector1_residual(&dagger, x, y, z)?);
        let b = banded_sign(bisector1_residual(gen, &zx, &zy, &zz)?);
        if a == b || a == 0 || b == 0 {
            agree += 1;
        }
    }
    Ok(agree as f64 / samples.len() as f64)
}

/// Both sides of the residual-scaling identity: `lhs` is the `φ†` bisector
/// residual at `z`, `rhs` is `g(z)` times the `φ` residual at the scaled
/// points.
pub fn bisector_residual_identity<P: Point, G: Generator<P>, S: Scaler<P>>(
    gen: &G,
    g: &S,
    x: &P,
    y: &P,
    z: &P,
) -> Result<IdentityCheck> {
    let (_, zx) = scaled_point(gen, g, x, "x")?;
    let (_, zy) = scaled_point(gen, g, y, "y")?;
    let (gz, zz) = scaled_point(gen, g, z, "z")?;
    let lhs = bisector1_residual(&scaled_generator(gen, g), x, y, z)?;
    let rhs = gz * bisector1_residual(gen, &zx, &zy, &zz)?;
    Ok(IdentityCheck::new(lhs, rhs))
}

/// A point of the segment `[a, b]` on the bisector of `x, y`, found by
/// bisection on the residual. The residual must change sign between `a`
/// and `b`.
pub fn bisector_point_on_segment<P: Point, G: Generator<P> + ?Sized>(gen: &G, x: &P, y: &P, a: &P, b: &P) -> Result<P> {
    let at = |t: f64| {
        let mut p = a.scaled(1.0 - t);
        p.add_scaled(t, b);
        p
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let f_lo = bisector1_residual(gen, x, y, a)?;
    let f_hi = bisector1_residual(gen, x, y, b)?;
    if f_lo == 0.0 {
        return Ok(a.clone());
    }
    if f_hi == 0.0 {
        return Ok(b.clone());
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Argument(
            "bisector residual does not change sign on the segment".into(),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = bisector1_residual(gen, x, y, &at(mid))?;
        if f == 0.0 {
            return Ok(at(mid));
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::generators::{AffineScaler, KlGenerator, LpNormScaler, OnePlusNormScaler, SquaredNorm};
    use crate::divergence::Vector;
    use nalgebra::dvector;
    use rand::Rng;

    fn rand_vec(rng: &mut impl Rng, d: usize, lo: f64, hi: f64) -> Vector {
        Vector::from_fn(d, |_, _| rng.random_range(lo..hi))
    }

    #[test]
    fn zero_radius_ball_is_its_center() {
        let ball = Ball2::new(dvector![0.3, -0.2], 0.0, SquaredNorm::with_offset(0.0)).unwrap();
        assert!(ball2_contains(&ball, &dvector![0.3, -0.2]).unwrap());
        assert!(!ball2_contains(&ball, &dvector![0.3, -0.2 + 1e-5]).unwrap());
    }

    #[test]
    fn squared_euclidean_ball_is_the_unit_disc() {
        let mut rng = crate::rng::root(1);
        let ball = Ball2::new(dvector![0.0, 0.0], 0.5, SquaredNorm::with_offset(0.0)).unwrap();
        for _ in 0..1000 {
            let x = rand_vec(&mut rng, 2, -1.5, 1.5);
            assert_eq!(ball2_contains(&ball, &x).unwrap(), x.norm_squared() <= 1.0);
        }
    }

    #[test]
    fn ball_membership_is_monotone_in_the_radius() {
        let mut rng = crate::rng::root(2);
        let c = dvector![1.0, 0.5, 2.0];
        for _ in 0..500 {
            let x = rand_vec(&mut rng, 3, 0.1, 3.0);
            let (r1, r2) = (rng.random_range(0.0..1.0), rng.random_range(1.0..2.0));
            let small = Ball2::new(c.clone(), r1, KlGenerator).unwrap();
            let big = Ball2::new(c.clone(), r2, KlGenerator).unwrap();
            assert!(!ball2_contains(&small, &x).unwrap() || ball2_contains(&big, &x).unwrap());
        }
    }

    #[test]
    fn ball_rejects_points_outside_the_domain() {
        let ball = Ball2::new(dvector![1.0, 1.0], 1.0, KlGenerator).unwrap();
        assert!(matches!(
            ball2_contains(&ball, &dvector![-1.0, 1.0]),
            Err(Error::Domain { .. })
        ));
        assert!(Ball2::new(dvector![1.0, 1.0], -1.0, KlGenerator).is_err());
    }

    #[test]
    fn bisector_examples() {
        let gen = SquaredNorm::with_offset(0.0);
        let (x, y) = (dvector![1.0, 2.0], dvector![-3.0, 0.5]);
        assert!(bisector1_residual(&gen, &x, &y, &((&x + &y) / 2.0)).unwrap().abs() < 1e-15);
        assert!(bisector1_residual(&gen, &x, &y, &x).unwrap() < 0.0);
        assert_eq!(bisector1_residual(&gen, &x, &x, &y).unwrap(), 0.0);
    }

    #[test]
    fn row_one_ball_and_bisector_equivalences() {
        let mut rng = crate::rng::root(3);
        let gen = SquaredNorm::with_offset(1.0);
        let g = LpNormScaler::new(2.0, 1.0);
        let c = dvector![1.0, -0.5, 0.3];
        let samples: Vec<Vector> = (0..1000).map(|_| rand_vec(&mut rng, 3, -2.0, 2.0)).collect();
        assert_eq!(scaled_ball_equivalence(&gen, &g, &c, 0.4, &samples).unwrap(), 1.0);
        assert_eq!(scaled_ball_equivalence(&gen, &g, &c, 1e6, &samples).unwrap(), 1.0);
        assert_eq!(
            scaled_ball_equivalence(&gen, &g, &c, 0.0, std::slice::from_ref(&c)).unwrap(),
            1.0
        );
        let (x, y) = (dvector![1.0, 0.0, 0.0], dvector![0.2, 1.0, -0.4]);
        assert_eq!(bisector_equivalence(&gen, &g, &x, &y, &samples).unwrap(), 1.0);
        assert_eq!(bisector_equivalence(&gen, &g, &x, &x, &samples).unwrap(), 1.0);
    }

    #[test]
    fn residual_scaling_identity_on_kl_with_the_sum_scaler() {
        let mut rng = crate::rng::root(4);
        let gen = KlGenerator;
        let g = AffineScaler::sum(4);
        for _ in 0..1000 {
            let x = rand_vec(&mut rng, 4, 0.1, 5.0);
            let y = rand_vec(&mut rng, 4, 0.1, 5.0);
            let z = rand_vec(&mut rng, 4, 0.1, 5.0);
            let c = bisector_residual_identity(&gen, &g, &x, &y, &z).unwrap();
            assert!(c.relative() <= 1e-9, "{c:?}");
        }
    }

    #[test]
    fn points_on_the_scaled_bisector_map_into_the_band() {
        let mut rng = crate::rng::root(5);
        let gen = KlGenerator;
        let g = AffineScaler::sum(3);
        let dagger = scaled_generator(&gen, &g);
        let mut found = 0;
        for _ in 0..200 {
            let x = rand_vec(&mut rng, 3, 0.1, 5.0);
            let y = rand_vec(&mut rng, 3, 0.1, 5.0);
            // the segment from x to y crosses the bisector
            let z = match bisector_point_on_segment(&dagger, &x, &y, &x, &y) {
                Ok(z) => z,
                Err(_) => continue,
            };
            found += 1;
            let gz = g.value(&z);
            let r = bisector1_residual(&gen, &(&x / g.value(&x)), &(&y / g.value(&y)), &(&z / gz)).unwrap();
            assert!(r.abs() <= BISECTOR_BAND, "residual {r}");
        }
        assert!(found > 150);
    }

    #[test]
    fn non_homogeneous_pairs_are_rejected() {
        let gen = SquaredNorm::with_offset(0.0);
        let g = OnePlusNormScaler;
        let samples = vec![dvector![1.0, 2.0]];
        assert!(matches!(
            scaled_ball_equivalence(&gen, &g, &dvector![0.5, 0.5], 1.0, &samples),
            Err(Error::IdentityPrecondition(_))
        ));
        assert!(matches!(
            bisector_equivalence(&gen, &g, &dvector![0.5, 0.5], &dvector![1.0, 0.0], &samples),
            Err(Error::IdentityPrecondition(_))
        ));
    }

    #[test]
    fn negative_scaler_values_are_rejected() {
        let gen = KlGenerator;
        let g = AffineScaler::new(dvector![-1.0, -1.0], 0.0);
        assert!(matches!(
            bisector_residual_identity(&gen, &g, &dvector![1.0, 1.0], &dvector![2.0, 1.0], &dvector![1.0, 3.0]),
            Err(Error::Domain { .. })
        ));
    }
}
