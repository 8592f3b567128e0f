//! The sphere `S^d` and the hyperboloid `H^d` seen from the tangent plane at
//! the pole.
//!
//! A tangent vector `x ∈ R^d` is lifted to `x^S = [x, r·cot r]` (sphere) or
//! `x^H = [x, r·coth r]` (hyperboloid, real time-like last coordinate), with
//! `r = ‖x‖₂`. Dividing by the scaler `g_S = r/sin r` (resp. `|g_H| = r/sinh r`)
//! gives the exponential map at the pole. The reconstruction distortion
//!
//! ```text
//! d_rec = 1 − cos D_G   (sphere)        d_rec = cosh D_G − 1   (hyperboloid)
//! ```
//!
//! equals half the squared chord (Euclidean, resp. Minkowski) between the
//! embedded points, so k-means++ on the embedding seeds geodesic clusters.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::catalog::generators::{hyper_lift, minkowski_inner, r_over_sin, r_over_sinh, sinc, sinhc, sphere_lift};
use crate::divergence::Vector;
use crate::error::{Error, Result};

mod cluster;
mod experiment;

pub use cluster::{
    brute_force_opt, embedded_potential, forgy_init, kmeanspp_seed, kmeanspp_seed_embedded, seeding_potential,
    seeding_probabilities, skm_lloyd, LloydResult, OptResult, SeedingResult, MAX_BRUTE_FORCE_K, MAX_BRUTE_FORCE_N,
};
pub use experiment::{
    cluster_means, cluster_table, run_cluster_experiment, run_cluster_trial, ClusterConfig, ClusterRow,
};

/// Radius of the open tangent ball mapped onto the sphere minus its cut point.
pub const SPHERE_RADIUS: f64 = PI - 1e-9;

/// Tolerance on `|‖p‖₂ − 1|` for points on the sphere.
pub const SPHERE_TOL: f64 = 1e-10;

/// Tolerance on `|⟨p,p⟩_M + 1|`, relative to `max(1, p_{d+1}²)`.
pub const LORENTZ_TOL: f64 = 1e-9;

/// A vector in the tangent plane at the pole.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPoint(Vector);

impl TangentPoint {
    pub fn new(x: Vector) -> Result<Self> {
        if x.is_empty() || !x.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("x", "tangent vector must be nonempty and finite"));
        }
        Ok(TangentPoint(x))
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        Self::new(Vector::from_column_slice(x))
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// A unit vector in `R^{d+1}` other than the antipode of the pole.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vector);

impl SpherePoint {
    pub fn new(p: Vector) -> Result<Self> {
        if p.len() < 2 || !p.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("p", "sphere point needs at least two finite coordinates"));
        }
        if (p.norm() - 1.0).abs() > SPHERE_TOL {
            return Err(Error::domain("p", format!("‖p‖₂ = {} is not 1", p.norm())));
        }
        if p[p.len() - 1] <= -1.0 {
            return Err(Error::domain("p", "antipode of the pole (cut locus)"));
        }
        Ok(SpherePoint(p))
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }
}

/// A point on the upper sheet of `⟨p, p⟩_M = −1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzPoint(Vector);

impl LorentzPoint {
    pub fn new(p: Vector) -> Result<Self> {
        if p.len() < 2 || !p.iter().all(|v| v.is_finite()) {
            return Err(Error::domain(
                "p",
                "Lorentz point needs at least two finite coordinates",
            ));
        }
        let t = p[p.len() - 1];
        if t < 1.0 {
            return Err(Error::domain("p", format!("time coordinate {t} is below 1")));
        }
        let m = minkowski_inner(&p, &p);
        if (m + 1.0).abs() > LORENTZ_TOL * t * t {
            return Err(Error::domain("p", format!("⟨p,p⟩_M = {m} is not −1")));
        }
        Ok(LorentzPoint(p))
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }
}

/// The two constant-curvature models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Manifold {
    Sphere,
    Hyperboloid,
}

impl Manifold {
    pub const ALL: [Manifold; 2] = [Manifold::Sphere, Manifold::Hyperboloid];

    pub fn name(self) -> &'static str {
        match self {
            Manifold::Sphere => "sphere",
            Manifold::Hyperboloid => "hyperboloid",
        }
    }

    /// `exp(x)` as a plain vector in `R^{d+1}`.
    pub fn embed(self, x: &TangentPoint) -> Result<Vector> {
        match self {
            Manifold::Sphere => exp_sphere(x).map(|p| p.0),
            Manifold::Hyperboloid => Ok(exp_hyper(x).0),
        }
    }

    /// Inverse of [`Manifold::embed`].
    pub fn log(self, p: &Vector) -> Result<TangentPoint> {
        match self {
            Manifold::Sphere => log_sphere(&SpherePoint::new(p.clone())?),
            Manifold::Hyperboloid => log_hyper(&LorentzPoint::new(p.clone())?),
        }
    }

    /// `d_rec` between two embedded points.
    pub fn embedded_d_rec(self, p: &Vector, c: &Vector) -> f64 {
        let diff = p - c;
        match self {
            Manifold::Sphere => 0.5 * diff.norm_squared(),
            Manifold::Hyperboloid => (0.5 * minkowski_inner(&diff, &diff)).max(0.0),
        }
    }

    /// Tangent-plane distortion `d_rec(x, c)`.
    pub fn d_rec(self, x: &TangentPoint, c: &TangentPoint) -> Result<f64> {
        match self {
            Manifold::Sphere => d_rec_sphere(x, c),
            Manifold::Hyperboloid => d_rec_hyper(x, c),
        }
    }

    /// Geodesic distance between `exp(x)` and `exp(y)`.
    pub fn geodesic(self, x: &TangentPoint, y: &TangentPoint) -> Result<f64> {
        match self {
            Manifold::Sphere => geodesic_sphere(x, y),
            Manifold::Hyperboloid => geodesic_hyper(x, y),
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Manifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sphere" | "s" => Ok(Manifold::Sphere),
            "hyperboloid" | "hyper" | "h" => Ok(Manifold::Hyperboloid),
            other => Err(Error::Argument(format!("unknown manifold `{other}`"))),
        }
    }
}

fn check_sphere_radius(x: &TangentPoint, arg: &str) -> Result<f64> {
    let r = x.norm();
    if r >= SPHERE_RADIUS {
        return Err(Error::domain(arg, format!("‖x‖₂ = {r} is not below π")));
    }
    Ok(r)
}

/// `x^S = [x, r·cot r]`.
pub fn lift_sphere(x: &TangentPoint) -> Result<Vector> {
    check_sphere_radius(x, "x")?;
    Ok(sphere_lift(&x.0))
}

/// `g_S = r / sin r`.
pub fn g_sphere(x: &TangentPoint) -> Result<f64> {
    Ok(r_over_sin(check_sphere_radius(x, "x")?))
}

/// `exp(x) = [sin r · x/r, cos r]`.
pub fn exp_sphere(x: &TangentPoint) -> Result<SpherePoint> {
    let r = check_sphere_radius(x, "x")?;
    let mut p = (&x.0 * sinc(r)).insert_row(x.dim(), 0.0);
    p[x.dim()] = r.cos();
    Ok(SpherePoint(p))
}

/// Inverse of [`exp_sphere`]; the north pole maps to `0`.
pub fn log_sphere(p: &SpherePoint) -> Result<TangentPoint> {
    let d = p.0.len() - 1;
    let spatial = p.0.rows(0, d).into_owned();
    let r = spatial.norm().atan2(p.0[d]);
    if r >= SPHERE_RADIUS {
        return Err(Error::domain("p", "point at the cut locus of the pole"));
    }
    let s = spatial.norm();
    let k = if s == 0.0 { 1.0 } else { r / s };
    TangentPoint::new(spatial * k)
}

/// `x^H = [x, r·coth r]`.
pub fn lift_hyper(x: &TangentPoint) -> Vector {
    hyper_lift(&x.0)
}

/// `g_H = −r / sinh r`.
pub fn g_hyper(x: &TangentPoint) -> f64 {
    -r_over_sinh(x.norm())
}

/// `exp(x) = [sinh r · x/r, cosh r]`.
pub fn exp_hyper(x: &TangentPoint) -> LorentzPoint {
    let r = x.norm();
    let mut p = (&x.0 * sinhc(r)).insert_row(x.dim(), 0.0);
    p[x.dim()] = r.cosh();
    LorentzPoint(p)
}

/// Inverse of [`exp_hyper`].
pub fn log_hyper(p: &LorentzPoint) -> Result<TangentPoint> {
    let d = p.0.len() - 1;
    let spatial = p.0.rows(0, d).into_owned();
    let r = spatial.norm().asinh();
    TangentPoint::new(spatial * r_over_sinh(r))
}

/// Half the squared Euclidean chord between `exp(x)` and `exp(y)`.
fn sphere_half_chord2(x: &TangentPoint, y: &TangentPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::Shape(format!("dimensions {} and {}", x.dim(), y.dim())));
    }
    let px = exp_sphere(x)?;
    let py = exp_sphere(y)?;
    Ok(Manifold::Sphere.embedded_d_rec(&px.0, &py.0))
}

fn hyper_half_chord2(x: &TangentPoint, y: &TangentPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::Shape(format!("dimensions {} and {}", x.dim(), y.dim())));
    }
    Ok(Manifold::Hyperboloid.embedded_d_rec(&exp_hyper(x).0, &exp_hyper(y).0))
}

/// Great-circle distance between `exp(x)` and `exp(y)`, in `[0, π]`.
pub fn geodesic_sphere(x: &TangentPoint, y: &TangentPoint) -> Result<f64> {
    // chord c = 2 sin(D/2)
    let half_chord = (0.5 * sphere_half_chord2(x, y)?).sqrt();
    Ok(2.0 * half_chord.min(1.0).asin())
}

/// Hyperbolic distance between `exp(x)` and `exp(y)`.
pub fn geodesic_hyper(x: &TangentPoint, y: &TangentPoint) -> Result<f64> {
    // Minkowski chord c = 2 sinh(D/2)
    let half_chord = (0.5 * hyper_half_chord2(x, y)?).sqrt();
    Ok(2.0 * half_chord.asinh())
}

/// `1 − cos D_G(x, c)`.
pub fn d_rec_sphere(x: &TangentPoint, c: &TangentPoint) -> Result<f64> {
    let h = (geodesic_sphere(x, c)? / 2.0).sin();
    Ok(2.0 * h * h)
}

/// `cosh D_G(x, c) − 1`.
pub fn d_rec_hyper(x: &TangentPoint, c: &TangentPoint) -> Result<f64> {
    let h = (geodesic_hyper(x, c)? / 2.0).sinh();
    Ok(2.0 * h * h)
}
