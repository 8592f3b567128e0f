//! The eight (generator, scaler) families for which the scaled identity
//! holds, each with a closed form of `D_φ†`.
//!
//! | row  | generator `φ`                  | scaler `g`             | domain                 |
//! |------|--------------------------------|------------------------|------------------------|
//! | I    | `(1 + ‖x‖₂²)/2`                | `‖x‖₂`                 | `R^d \ {0}`            |
//! | II   | `(W² + ‖x‖_q²)/2`              | `‖x‖_q / W`            | `R^d \ {0}`            |
//! | III  | `(1 + ‖z‖₂²)/2` on `z = x^S`   | `r / sin r`            | `‖x‖₂ < π`             |
//! | IV   | `(⟨z,z⟩_M − 1)/2` on `z = x^H` | `−r / sinh r`          | `R^d`                  |
//! | V    | `Σ x log x − x`                | `1ᵀx`                  | positive orthant       |
//! | VI   | `−d − Σ log x`                 | `(Π x)^{1/d}`          | positive orthant       |
//! | VII  | `tr(X log X − X)`              | `tr X`                 | positive definite      |
//! | VIII | `−d − log det X`               | `det(X)^{1/d}`         | positive definite      |
//!
//! Rows III and IV take tangent-plane inputs `x ∈ R^d`; the entry lifts
//! them to `x^S = [x, r cot r]` or `x^H = [x, r coth r]` (`r = ‖x‖₂`)
//! before applying `φ` and `g`.

pub mod generators;
pub mod linalg;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::divergence::{
    verify_scaled_identity, DynGenerator, DynScaler, IdentityCheck, Point, Scaler, SymmetricMatrix, Vector,
};
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use generators::*;
pub use linalg::{matrix_exp, matrix_fn, matrix_log, matrix_pow, sym_eigen, EigenDecomposition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CatalogId {
    CosineRowI,
    DualNormRowII,
    SphereRowIII,
    HyperRowIV,
    SimplexKLRowV,
    GeomISRowVI,
    VonNeumannRowVII,
    LogDetRowVIII,
}

impl CatalogId {
    pub const ALL: [CatalogId; 8] = [
        CatalogId::CosineRowI,
        CatalogId::DualNormRowII,
        CatalogId::SphereRowIII,
        CatalogId::HyperRowIV,
        CatalogId::SimplexKLRowV,
        CatalogId::GeomISRowVI,
        CatalogId::VonNeumannRowVII,
        CatalogId::LogDetRowVIII,
    ];

    pub fn roman(self) -> &'static str {
        ["I", "II", "III", "IV", "V", "VI", "VII", "VIII"][self as usize]
    }

    pub fn name(self) -> &'static str {
        [
            "CosineRowI",
            "DualNormRowII",
            "SphereRowIII",
            "HyperRowIV",
            "SimplexKLRowV",
            "GeomISRowVI",
            "VonNeumannRowVII",
            "LogDetRowVIII",
        ][self as usize]
    }

    pub fn is_matrix(self) -> bool {
        matches!(self, CatalogId::VonNeumannRowVII | CatalogId::LogDetRowVIII)
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.roman())
    }
}

impl FromStr for CatalogId {
    type Err = Error;

    /// Accepts the Roman numeral, the 1-based row number or the variant
    /// name, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        CatalogId::ALL
            .into_iter()
            .find(|id| {
                id.roman().eq_ignore_ascii_case(t)
                    || id.name().eq_ignore_ascii_case(t)
                    || t == (*id as usize + 1).to_string()
            })
            .ok_or_else(|| Error::Argument(format!("unknown catalog row `{s}`")))
    }
}

/// Row constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogParams {
    /// Dimension (`d` for vectors, matrix order for rows VII-VIII).
    pub d: usize,
    /// Ball radius `W` (row II; rows III-IV fix it to 1).
    pub w: f64,
    /// Norm exponent of row II.
    pub q: f64,
}

impl CatalogParams {
    pub fn for_row(id: CatalogId) -> Self {
        let d = if id.is_matrix() { 3 } else { 4 };
        let w = if id == CatalogId::DualNormRowII { 2.0 } else { 1.0 };
        CatalogParams { d, w, q: 1.5 }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Argument("dimension must be ≥ 1".into()));
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(Error::Argument(format!("W must be positive, got {}", self.w)));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return Err(Error::Argument(format!("q must exceed 1, got {}", self.q)));
        }
        Ok(())
    }
}

type ClosedForm<P> = Arc<dyn Fn(&P, &P) -> Result<f64> + Send + Sync>;
type Lift<P> = Arc<dyn Fn(&P) -> Result<P> + Send + Sync>;
type Sampler<P> = Arc<dyn Fn(&mut StreamRng) -> P + Send + Sync>;

/// A fully wired catalog row.
#[derive(Clone)]
pub struct CatalogEntry<P: Point> {
    pub id: CatalogId,
    pub gen: DynGenerator<P>,
    pub scaler: DynScaler<P>,
    pub domain_desc: &'static str,
    pub params: CatalogParams,
    closed_form: ClosedForm<P>,
    lift: Option<Lift<P>>,
    sampler: Sampler<P>,
}

impl<P: Point> fmt::Debug for CatalogEntry<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("id", &self.id)
            .field("domain", &self.domain_desc)
            .field("params", &self.params)
            .finish()
    }
}

/// Closed form and both sides of the identity at one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairComparison {
    pub closed_form: f64,
    pub identity: IdentityCheck,
}

impl PairComparison {
    /// Largest pairwise gap among the three values, relative to
    /// `max(1, |lhs|)`.
    pub fn relative(&self) -> f64 {
        let (c, l, r) = (self.closed_form, self.identity.lhs, self.identity.rhs);
        let gap = (c - l).abs().max((c - r).abs()).max((l - r).abs());
        gap / l.abs().max(1.0)
    }
}

impl<P: Point> CatalogEntry<P> {
    /// Closed form of `D_φ†(x ‖ y)` on the row's native inputs.
    pub fn closed_form(&self, x: &P, y: &P) -> Result<f64> {
        (self.closed_form)(x, y)
    }

    /// Point on which `φ` and `g` act (lifted for rows III-IV).
    pub fn lift(&self, x: &P) -> Result<P> {
        match &self.lift {
            Some(f) => f(x),
            None => Ok(x.clone()),
        }
    }

    /// Draws an input from the row's domain.
    pub fn sample(&self, rng: &mut StreamRng) -> P {
        (self.sampler)(rng)
    }

    /// Both sides of the scaled identity at native inputs.
    pub fn identity(&self, x: &P, y: &P) -> Result<IdentityCheck> {
        let lx = self.lift(x).map_err(|e| rename(e, "x"))?;
        let ly = self.lift(y).map_err(|e| rename(e, "y"))?;
        verify_scaled_identity(&self.gen, &self.scaler, &lx, &ly)
    }

    pub fn compare(&self, x: &P, y: &P) -> Result<PairComparison> {
        Ok(PairComparison {
            closed_form: self.closed_form(x, y)?,
            identity: self.identity(x, y)?,
        })
    }
}

fn rename(e: Error, arg: &str) -> Error {
    match e {
        Error::Domain { reason, .. } => Error::domain(arg, reason),
        other => other,
    }
}

/// Entry of either point type.
#[derive(Debug, Clone)]
pub enum AnyEntry {
    Vector(CatalogEntry<Vector>),
    Matrix(CatalogEntry<SymmetricMatrix>),
}

/// Entry with the default constants of [`CatalogParams::for_row`].
pub fn catalog_entry(id: CatalogId) -> AnyEntry {
    catalog_entry_with(id, CatalogParams::for_row(id)).expect("default parameters are valid")
}

pub fn catalog_entry_with(id: CatalogId, params: CatalogParams) -> Result<AnyEntry> {
    if id.is_matrix() {
        matrix_entry(id, params).map(AnyEntry::Matrix)
    } else {
        vector_entry(id, params).map(AnyEntry::Vector)
    }
}

fn check_dim(x: &Vector, d: usize, arg: &str) -> Result<()> {
    if x.len() != d {
        return Err(Error::Shape(format!("`{arg}` has length {}, expected {d}", x.len())));
    }
    Ok(())
}

fn gaussian_vector(rng: &mut StreamRng, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| StandardNormal.sample(rng))
}

/// Uniform direction scaled to a radius drawn from `U(lo, hi)`.
fn radial_sample(rng: &mut StreamRng, d: usize, lo: f64, hi: f64) -> Vector {
    loop {
        let v = gaussian_vector(rng, d);
        let n = v.norm();
        if n > 1e-12 {
            return v * (rng.random_range(lo..hi) / n);
        }
    }
}

/// Cosine of the angle between `x` and `y`; 0 if either vanishes.
fn cos_angle(x: &Vector, y: &Vector) -> f64 {
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        (x.dot(y) / (nx * ny)).clamp(-1.0, 1.0)
    }
}

/// Vector-valued rows I-VI.
pub fn vector_entry(id: CatalogId, params: CatalogParams) -> Result<CatalogEntry<Vector>> {
    params.validate()?;
    let d = params.d;
    let pi = std::f64::consts::PI;
    let entry = match id {
        CatalogId::CosineRowI => CatalogEntry {
            id,
            gen: Arc::new(SquaredNorm::with_offset(1.0)),
            scaler: Arc::new(LpNormScaler::new(2.0, 1.0)),
            domain_desc: "nonzero vectors of R^d",
            params,
            closed_form: Arc::new(move |x: &Vector, y: &Vector| {
                check_dim(x, d, "x")?;
                check_dim(y, d, "y")?;
                if y.norm() == 0.0 {
                    return Err(Error::domain("y", "zero vector"));
                }
                Ok(x.norm() - x.dot(y) / y.norm())
            }),
            lift: None,
            sampler: Arc::new(move |rng: &mut StreamRng| radial_sample(rng, d, 0.1, 3.0)),
        },
        CatalogId::DualNormRowII => {
            let (q, w) = (params.q, params.w);
            CatalogEntry {
                id,
                gen: Arc::new(LqSquaredNorm::new(q, w)),
                scaler: Arc::new(LpNormScaler::new(q, w)),
                domain_desc: "nonzero vectors of R^d",
                params,
                closed_form: Arc::new(move |x: &Vector, y: &Vector| {
                    check_dim(x, d, "x")?;
                    check_dim(y, d, "y")?;
                    let ny = lq_norm(y, q);
                    if ny == 0.0 {
                        return Err(Error::domain("y", "zero vector"));
                    }
                    let dual = signed_power(y, q - 1.0) / ny.powf(q - 1.0);
                    Ok(w * lq_norm(x, q) - w * x.dot(&dual))
                }),
                lift: None,
                sampler: Arc::new(move |rng: &mut StreamRng| radial_sample(rng, d, 0.1, 3.0)),
            }
        }
        CatalogId::SphereRowIII => CatalogEntry {
            id,
            gen: Arc::new(SquaredNorm::with_offset(1.0)),
            scaler: Arc::new(SphereScaler),
            domain_desc: "tangent vectors with ‖x‖₂ < π",
            params: CatalogParams { w: 1.0, ..params },
            closed_form: Arc::new(move |x: &Vector, y: &Vector| {
                check_dim(x, d, "x")?;
                check_dim(y, d, "y")?;
                let (rx, ry) = (x.norm(), y.norm());
                for (arg, r) in [("x", rx), ("y", ry)] {
                    if r >= pi {
                        return Err(Error::domain(arg, format!("‖{arg}‖₂ = {r} ≥ π")));
                    }
                }
                let cos_d = rx.sin() * ry.sin() * cos_angle(x, y) + rx.cos() * ry.cos();
                Ok(r_over_sin(rx) * (1.0 - cos_d))
            }),
            lift: Some(Arc::new(move |x: &Vector| {
                check_dim(x, d, "x")?;
                let r = x.norm();
                if r >= pi {
                    return Err(Error::domain("x", format!("‖x‖₂ = {r} ≥ π")));
                }
                Ok(sphere_lift(x))
            })),
            sampler: Arc::new(move |rng: &mut StreamRng| radial_sample(rng, d, 0.05, pi - 0.05)),
        },
        CatalogId::HyperRowIV => CatalogEntry {
            id,
            gen: Arc::new(MinkowskiGenerator),
            scaler: Arc::new(HyperScaler),
            domain_desc: "tangent vectors of R^d",
            params: CatalogParams { w: 1.0, ..params },
            closed_form: Arc::new(move |x: &Vector, y: &Vector| {
                check_dim(x, d, "x")?;
                check_dim(y, d, "y")?;
                let (rx, ry) = (x.norm(), y.norm());
                let cosh_d = rx.cosh() * ry.cosh() - rx.sinh() * ry.sinh() * cos_angle(x, y);
                Ok(-r_over_sinh(rx) * (cosh_d - 1.0))
            }),
            lift: Some(Arc::new(move |x: &Vector| {
                check_dim(x, d, "x")?;
                if !x.is_finite() {
                    return Err(Error::domain("x", "non-finite entry"));
                }
                Ok(hyper_lift(x))
            })),
            sampler: Arc::new(move |rng: &mut StreamRng| radial_sample(rng, d, 0.0, 3.0)),
        },
        CatalogId::SimplexKLRowV => CatalogEntry {
            id,
            gen: Arc::new(KlGenerator),
            scaler: Arc::new(AffineScaler::sum(d)),
            domain_desc: "strictly positive vectors",
            params,
            closed_form: Arc::new(move |x: &Vector, y: &Vector| {
                check_dim(x, d, "x")?;
                check_dim(y, d, "y")?;
                positive(x, "x")?;
                positive(y, "y")?;
                let (sx, sy) = (x.sum(), y.sum());
                let kl: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * (a / b).ln()).sum();
                Ok(kl - sx * (sx / sy).ln())
            }),
            lift: None,
            sampler: Arc::new(move |rng: &mut StreamRng| Vector::from_fn(d, |_, _| rng.random_range(0.1..5.0))),
        },
        CatalogId::GeomISRowVI => CatalogEntry {
            id,
            gen: Arc::new(BurgGenerator),
            scaler: Arc::new(GeoMeanScaler),
            domain_desc: "strictly positive vectors",
            params,
            closed_form: Arc::new(move |x: &Vector, y: &Vector| {
                check_dim(x, d, "x")?;
                check_dim(y, d, "y")?;
                positive(x, "x")?;
                positive(y, "y")?;
                let gx = GeoMeanScaler.value(x);
                let gy = GeoMeanScaler.value(y);
                let s: f64 = x.iter().zip(y.iter()).map(|(a, b)| a * gy / b).sum();
                Ok(s - d as f64 * gx)
            }),
            lift: None,
            sampler: Arc::new(move |rng: &mut StreamRng| Vector::from_fn(d, |_, _| rng.random_range(0.1..5.0))),
        },
        other => {
            return Err(Error::Argument(format!("row {other} acts on symmetric matrices")));
        }
    };
    Ok(entry)
}

fn positive(x: &Vector, arg: &str) -> Result<()> {
    if x.iter().all(|&v| v.is_finite() && v >= POSITIVE_FLOOR) {
        Ok(())
    } else {
        Err(Error::domain(arg, "entries must be strictly positive"))
    }
}

fn pd(x: &SymmetricMatrix, arg: &str, d: usize) -> Result<()> {
    if x.dim() != d {
        return Err(Error::Shape(format!("`{arg}` is {0}x{0}, expected {d}x{d}", x.dim())));
    }
    if x.as_matrix().clone().cholesky().is_none() {
        return Err(Error::domain(arg, "matrix is not positive definite"));
    }
    Ok(())
}

/// Matrix-valued rows VII-VIII.
pub fn matrix_entry(id: CatalogId, params: CatalogParams) -> Result<CatalogEntry<SymmetricMatrix>> {
    params.validate()?;
    let d = params.d;
    let sampler: Sampler<SymmetricMatrix> = Arc::new(move |rng: &mut StreamRng| random_spd(rng, d, 0.2, 3.0));
    let entry = match id {
        CatalogId::VonNeumannRowVII => CatalogEntry {
            id,
            gen: Arc::new(VonNeumannGenerator),
            scaler: Arc::new(TraceScaler),
            domain_desc: "positive definite symmetric matrices",
            params,
            closed_form: Arc::new(move |x: &SymmetricMatrix, y: &SymmetricMatrix| {
                pd(x, "x", d)?;
                pd(y, "y", d)?;
                let (tx, ty) = (x.trace(), y.trace());
                Ok(trace_x_log_y(x, x)? - trace_x_log_y(x, y)? - tx * (tx / ty).ln())
            }),
            lift: None,
            sampler,
        },
        CatalogId::LogDetRowVIII => CatalogEntry {
            id,
            gen: Arc::new(LogDetGenerator),
            scaler: Arc::new(DetRootScaler),
            domain_desc: "positive definite symmetric matrices",
            params,
            closed_form: Arc::new(move |x: &SymmetricMatrix, y: &SymmetricMatrix| {
                pd(x, "x", d)?;
                pd(y, "y", d)?;
                let gx = DetRootScaler.value(x);
                let gy = DetRootScaler.value(y);
                let yinv = y
                    .as_matrix()
                    .clone()
                    .cholesky()
                    .map(|c| c.inverse())
                    .ok_or_else(|| Error::domain("y", "matrix is not positive definite"))?;
                Ok(gy * (x.as_matrix() * yinv).trace() - d as f64 * gx)
            }),
            lift: None,
            sampler,
        },
        other => {
            return Err(Error::Argument(format!("row {other} acts on vectors")));
        }
    };
    Ok(entry)
}

/// Outcome of [`closed_form_vs_generic`].
#[derive(Debug, Clone, PartialEq)]
pub struct RowReport {
    pub id: CatalogId,
    pub trials: usize,
    /// Max over pairs of [`PairComparison::relative`].
    pub max_rel_diff: f64,
    /// Max over pairs of `|lhs − rhs| / max(1, |lhs|)`.
    pub max_identity_rel: f64,
    /// Inputs at which `max_rel_diff` was attained, formatted.
    pub worst_pair: (String, String),
}

fn compare_row<P: Point>(entry: &CatalogEntry<P>, trials: usize, rng: &mut StreamRng) -> Result<RowReport> {
    let mut report = RowReport {
        id: entry.id,
        trials,
        max_rel_diff: 0.0,
        max_identity_rel: 0.0,
        worst_pair: (String::new(), String::new()),
    };
    for _ in 0..trials {
        let x = entry.sample(rng);
        let y = entry.sample(rng);
        let c = entry.compare(&x, &y)?;
        let rel = c.relative();
        report.max_identity_rel = report.max_identity_rel.max(c.identity.relative());
        // NaN must surface as the worst case
        if rel > report.max_rel_diff || rel.is_nan() {
            report.max_rel_diff = if rel.is_nan() { f64::NAN } else { rel };
            report.worst_pair = (format_point(&x), format_point(&y));
            if rel.is_nan() {
                break;
            }
        }
    }
    Ok(report)
}

/// Coordinates of a point, comma-separated.
pub fn format_point<P: Point>(p: &P) -> String {
    let coords: Vec<String> = (0..p.coord_len()).map(|i| format!("{:e}", p.coord(i))).collect();
    format!("[{}]", coords.join(","))
}

/// Samples `trials` valid pairs for the row and compares the closed form
/// with both sides of the scaled identity.
pub fn closed_form_vs_generic(id: CatalogId, trials: usize, rng: &mut StreamRng) -> Result<RowReport> {
    if trials == 0 {
        return Err(Error::Argument("trials must be ≥ 1".into()));
    }
    match catalog_entry(id) {
        AnyEntry::Vector(e) => compare_row(&e, trials, rng),
        AnyEntry::Matrix(e) => compare_row(&e, trials, rng),
    }
}
