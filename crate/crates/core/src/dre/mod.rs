//! Multiclass density-ratio estimation from class-probability estimates.
//!
//! Classes are indexed `0..C` and the last class `C − 1` is the reference.
//! With priors `π` and posterior `p(x)`, define for every class
//!
//! ```text
//! η_c(x) = p_c(x)·(1 − π_ref)/π_c
//! ```
//!
//! (the reference coordinate uses the same formula). The density ratios
//! against the reference are then `r_c = η_c/η_ref = (π_ref/π_c)·p_c/p_ref`,
//! and the affine scaler `g(r) = π_ref/(1 − π_ref) + π̃ᵀr` with
//! `π̃_c = π_c/(1 − π_ref)` maps them back: `r/g(r) = η_{0..C−1}`.
//! The scaled identity then gives
//!
//! ```text
//! E_M[D_φ(η ‖ η̂)] = (1 − π_ref)·E_{P_ref}[D_φ†(r ‖ r̂)]
//! ```
//!
//! for any convex `φ` on the first `C − 1` coordinates.

use rand::Rng;
use rayon::prelude::*;

use crate::catalog::generators::{AffineScaler, KlGenerator};
use crate::csv::{Cell, Table};
use crate::divergence::{bregman_divergence, scaled_generator, Generator, Matrix, Scaler, Vector};
use crate::error::{Error, Result};
use crate::rng::{std_normal, stream, stream_id, StreamRng};

/// Tolerance on `Σπ = 1`.
pub const PRIOR_SUM_TOL: f64 = 1e-12;

/// Gaussian class-conditionals `N(μ_c, σ_c² I)` with class priors `π`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    priors: Vector,
    means: Vec<Vector>,
    stds: Vec<f64>,
}

impl MixtureSpec {
    pub fn new(priors: Vector, means: Vec<Vector>, stds: Vec<f64>) -> Result<Self> {
        let c = priors.len();
        if c < 2 {
            return Err(Error::Argument(format!("need at least 2 classes, got {c}")));
        }
        if means.len() != c || stds.len() != c {
            return Err(Error::Shape(format!(
                "{c} priors but {} means and {} stds",
                means.len(),
                stds.len()
            )));
        }
        if (priors.sum() - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::Argument(format!("priors sum to {}", priors.sum())));
        }
        if let Some(p) = priors.iter().find(|&&p| !(p > 0.0)) {
            return Err(Error::domain("priors", format!("non-positive prior {p}")));
        }
        if let Some(s) = stds.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::domain("stds", format!("non-positive std {s}")));
        }
        let d = means[0].len();
        if d == 0 || means.iter().any(|m| m.len() != d || !m.iter().all(|v| v.is_finite())) {
            return Err(Error::Shape(
                "means must be finite and share a positive dimension".into(),
            ));
        }
        Ok(MixtureSpec { priors, means, stds })
    }

    /// Random specification: priors drawn as `(1/C)1 + (1 − 1/C)·U[0,1]^C`
    /// then normalised, `μ_c ~ 0.1·N(0, I)`, `σ_c ~ U[0.5, 1]`.
    pub fn random(classes: usize, dim: usize, rng: &mut StreamRng) -> Result<Self> {
        if classes < 2 || dim == 0 {
            return Err(Error::Argument(format!(
                "need C ≥ 2 and d ≥ 1, got C={classes}, d={dim}"
            )));
        }
        let c = classes as f64;
        let raw = Vector::from_fn(classes, |_, _| 1.0 / c + (1.0 - 1.0 / c) * rng.random::<f64>());
        let priors = &raw / raw.sum();
        let means = (0..classes)
            .map(|_| Vector::from_fn(dim, |_, _| 0.1 * std_normal(rng)))
            .collect();
        let stds = (0..classes).map(|_| rng.random_range(0.5..=1.0)).collect();
        MixtureSpec::new(priors, means, stds)
    }

    pub fn classes(&self) -> usize {
        self.priors.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn priors(&self) -> &Vector {
        &self.priors
    }

    pub fn means(&self) -> &[Vector] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    /// Index of the reference class.
    pub fn reference(&self) -> usize {
        self.classes() - 1
    }

    /// `log N(x; μ_c, σ_c² I)`.
    pub fn log_density(&self, c: usize, x: &Vector) -> f64 {
        let s2 = self.stds[c] * self.stds[c];
        let d = self.dim() as f64;
        -0.5 * (x - &self.means[c]).norm_squared() / s2 - 0.5 * d * (2.0 * std::f64::consts::PI * s2).ln()
    }

    /// Analytic ratios `P_c(x)/P_ref(x)` for `c < ref`.
    pub fn density_ratio(&self, x: &Vector) -> Vector {
        let r = self.reference();
        let lr = self.log_density(r, x);
        Vector::from_fn(r, |c, _| (self.log_density(c, x) - lr).exp())
    }

    /// Draws from the class-conditional of `c`.
    pub fn sample_class(&self, c: usize, rng: &mut StreamRng) -> Vector {
        let s = self.stds[c];
        Vector::from_fn(self.dim(), |i, _| self.means[c][i] + s * std_normal(rng))
    }

    /// Draws a label from `π`, then a feature vector.
    pub fn sample_joint(&self, rng: &mut StreamRng) -> (Vector, usize) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut label = self.reference();
        for (c, &p) in self.priors.iter().enumerate() {
            acc += p;
            if u < acc {
                label = c;
                break;
            }
        }
        (self.sample_class(label, rng), label)
    }
}

/// Feature vectors with labels in `0..classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub xs: Vec<Vector>,
    pub ys: Vec<usize>,
    pub classes: usize,
}

impl LabeledDataset {
    pub fn new(xs: Vec<Vector>, ys: Vec<usize>, classes: usize) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Shape(format!("{} rows but {} labels", xs.len(), ys.len())));
        }
        if let Some(&y) = ys.iter().find(|&&y| y >= classes) {
            return Err(Error::Argument(format!("label {y} outside 0..{classes}")));
        }
        Ok(LabeledDataset { xs, ys, classes })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Splits off the first `round(frac·n)` rows as the first part.
    pub fn split(&self, frac: f64) -> (LabeledDataset, LabeledDataset) {
        let k = ((self.len() as f64) * frac).round() as usize;
        let k = k.min(self.len());
        (
            LabeledDataset {
                xs: self.xs[..k].to_vec(),
                ys: self.ys[..k].to_vec(),
                classes: self.classes,
            },
            LabeledDataset {
                xs: self.xs[k..].to_vec(),
                ys: self.ys[k..].to_vec(),
                classes: self.classes,
            },
        )
    }
}

/// `n` i.i.d. draws from the joint distribution of `spec`.
pub fn sample_dataset(spec: &MixtureSpec, n: usize, rng: &mut StreamRng) -> Result<LabeledDataset> {
    if n < spec.classes() {
        return Err(Error::Argument(format!(
            "need at least C = {} samples, got {n}",
            spec.classes()
        )));
    }
    let (xs, ys) = (0..n).map(|_| spec.sample_joint(rng)).unzip();
    LabeledDataset::new(xs, ys, spec.classes())
}

fn softmax_from_logits(logits: &Vector) -> Vector {
    let m = logits.max();
    let e = logits.map(|l| (l - m).exp());
    let s = e.sum();
    e / s
}

/// Exact posterior `p_c ∝ π_c·N(x; μ_c, σ_c² I)` (log-sum-exp stabilised).
pub fn true_posterior(spec: &MixtureSpec, x: &Vector) -> Vector {
    let logits = Vector::from_fn(spec.classes(), |c, _| spec.priors[c].ln() + spec.log_density(c, x));
    softmax_from_logits(&logits)
}

/// `η_c = p_c·(1 − π_ref)/π_c` for every class, including the reference.
pub fn eta_from_posterior(p: &Vector, priors: &Vector) -> Result<Vector> {
    if p.len() != priors.len() {
        return Err(Error::Shape(format!(
            "posterior length {} vs {} priors",
            p.len(),
            priors.len()
        )));
    }
    if let Some(c) = priors.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::domain("priors", format!("prior of class {c} is {}", priors[c])));
    }
    let pr = priors[priors.len() - 1];
    if pr >= 1.0 {
        return Err(Error::domain("priors", "reference prior must be below 1"));
    }
    Ok(Vector::from_fn(p.len(), |c, _| p[c] * (1.0 - pr) / priors[c]))
}

/// `r̂_c = η̂_c/η̂_ref` for `c < ref`.
pub fn density_ratio_estimate(eta_hat: &Vector) -> Result<Vector> {
    let n = eta_hat.len();
    if n < 2 {
        return Err(Error::Shape("need at least 2 classes".into()));
    }
    let er = eta_hat[n - 1];
    if !(er > 0.0) {
        return Err(Error::domain(
            "eta_hat",
            format!("reference coordinate {er} is not positive"),
        ));
    }
    Ok(Vector::from_fn(n - 1, |c, _| eta_hat[c] / er))
}

/// `π̃_c = π_c/(1 − π_ref)` for `c < ref`, with `π_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct TildePrior {
    pub tilde: Vector,
    pub reference: f64,
}

impl TildePrior {
    pub fn new(priors: &Vector) -> Result<Self> {
        let n = priors.len();
        if n < 2 {
            return Err(Error::Shape("need at least 2 classes".into()));
        }
        let pr = priors[n - 1];
        if !(pr > 0.0 && pr < 1.0) || priors.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::domain("priors", "priors must lie in (0, 1)"));
        }
        Ok(TildePrior {
            tilde: priors.rows(0, n - 1) / (1.0 - pr),
            reference: pr,
        })
    }
}

/// `g(r) = π_ref/(1 − π_ref) + π̃ᵀr`.
pub fn dre_scaler(priors: &Vector) -> Result<AffineScaler> {
    let t = TildePrior::new(priors)?;
    Ok(AffineScaler::new(t.tilde, t.reference / (1.0 - t.reference)))
}

/// A class-probability estimator.
pub trait PosteriorModel: Sync {
    fn classes(&self) -> usize;
    /// Posterior over all classes; entries positive and summing to 1.
    fn posterior(&self, x: &Vector) -> Vector;
}

impl PosteriorModel for MixtureSpec {
    fn classes(&self) -> usize {
        MixtureSpec::classes(self)
    }
    fn posterior(&self, x: &Vector) -> Vector {
        true_posterior(self, x)
    }
}

/// A posterior distorted by `p̂_c ∝ p_c·exp(b_c + v_cᵀx)`.
#[derive(Debug, Clone)]
pub struct TiltedPosterior<'a> {
    pub spec: &'a MixtureSpec,
    pub bias: Vector,
    pub slope: Matrix,
}

impl<'a> TiltedPosterior<'a> {
    /// Random tilt with `b_c, v_c` entries `~ N(0, scale²)`.
    pub fn random(spec: &'a MixtureSpec, scale: f64, rng: &mut StreamRng) -> Self {
        let c = spec.classes();
        TiltedPosterior {
            spec,
            bias: Vector::from_fn(c, |_, _| scale * std_normal(rng)),
            slope: Matrix::from_fn(c, spec.dim(), |_, _| scale * std_normal(rng)),
        }
    }
}

impl PosteriorModel for TiltedPosterior<'_> {
    fn classes(&self) -> usize {
        self.spec.classes()
    }
    fn posterior(&self, x: &Vector) -> Vector {
        let logits = Vector::from_fn(self.classes(), |c, _| {
            self.spec.priors[c].ln()
                + self.spec.log_density(c, x)
                + self.bias[c]
                + self.slope.row(c).dot(&x.transpose())
        });
        softmax_from_logits(&logits)
    }
}

/// Multiclass logistic regression, weights `C × (d + 1)` (last column bias).
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    pub weights: Matrix,
}

impl SoftmaxModel {
    fn logits(&self, x: &Vector) -> Vector {
        let d = x.len();
        let w = &self.weights;
        Vector::from_fn(w.nrows(), |c, _| {
            (0..d).map(|j| w[(c, j)] * x[j]).sum::<f64>() + w[(c, d)]
        })
    }

    /// Fraction of rows whose most probable class equals the label.
    pub fn accuracy(&self, data: &LabeledDataset) -> f64 {
        let hits = data
            .xs
            .iter()
            .zip(&data.ys)
            .filter(|(x, &y)| self.logits(x).imax() == y)
            .count();
        hits as f64 / data.len().max(1) as f64
    }

    /// Mean cross-entropy on `data`.
    pub fn loss(&self, data: &LabeledDataset) -> f64 {
        loss_and_grad(&self.weights, data, false).0
    }
}

impl PosteriorModel for SoftmaxModel {
    fn classes(&self) -> usize {
        self.weights.nrows()
    }
    fn posterior(&self, x: &Vector) -> Vector {
        softmax_from_logits(&self.logits(x))
    }
}

fn loss_and_grad(w: &Matrix, data: &LabeledDataset, want_grad: bool) -> (f64, Matrix) {
    let (c, dp1) = w.shape();
    let d = dp1 - 1;
    let mut grad = Matrix::zeros(c, dp1);
    let mut loss = 0.0;
    let model = SoftmaxModel { weights: w.clone() };
    for (x, &y) in data.xs.iter().zip(&data.ys) {
        let logits = model.logits(x);
        let m = logits.max();
        let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
        loss += lse - logits[y];
        if want_grad {
            for k in 0..c {
                let coef = (logits[k] - lse).exp() - if k == y { 1.0 } else { 0.0 };
                for j in 0..d {
                    grad[(k, j)] += coef * x[j];
                }
                grad[(k, d)] += coef;
            }
        }
    }
    let n = data.len() as f64;
    (loss / n, grad / n)
}

/// Largest number of step halvings tried within one epoch.
const MAX_HALVINGS: usize = 60;

/// Full-batch gradient descent on the mean cross-entropy, starting from
/// zero weights. Each epoch halves the step until the loss does not
/// increase; the accepted step carries over to the next epoch.
pub fn fit_softmax(data: &LabeledDataset, epochs: usize, step: f64) -> Result<SoftmaxModel> {
    fit_softmax_trace(data, epochs, step).map(|(m, _)| m)
}

/// [`fit_softmax`] also returning the training loss before the first
/// epoch and after each accepted epoch.
pub fn fit_softmax_trace(data: &LabeledDataset, epochs: usize, step: f64) -> Result<(SoftmaxModel, Vec<f64>)> {
    if epochs == 0 {
        return Err(Error::Argument("epochs must be ≥ 1".into()));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    if data.is_empty() {
        return Err(Error::Fit("empty dataset".into()));
    }
    let first = data.ys[0];
    if data.ys.iter().all(|&y| y == first) {
        return Err(Error::Fit(format!("all labels equal {first}")));
    }
    let d = data.xs[0].len();
    let mut w = Matrix::zeros(data.classes, d + 1);
    let (mut loss, mut grad) = loss_and_grad(&w, data, true);
    let mut trace = vec![loss];
    let mut eta = step;
    for _ in 0..epochs {
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = &w - &grad * eta;
            let (cl, cg) = loss_and_grad(&cand, data, true);
            if cl <= loss {
                w = cand;
                loss = cl;
                grad = cg;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            // no descent step found: the current point is stationary to machine precision
            break;
        }
        trace.push(loss);
    }
    Ok((SoftmaxModel { weights: w }, trace))
}

/// Both sides of the multiclass reduction identity, estimated on shared
/// samples from the marginal `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionCheck {
    /// Mean of `D_φ(η ‖ η̂)` over `X ~ M`.
    pub lhs: f64,
    /// Mean of `(1 − π_ref)·w(X)·D_φ†(r ‖ r̂)` over the same samples, with
    /// change-of-measure weight `w = P_ref/M = 1/((1 − π_ref)·g(r))`.
    pub rhs: f64,
    /// `lhs − rhs`.
    pub gap: f64,
    /// Standard error of the per-sample differences.
    pub std_err: f64,
    /// `(1 − π_ref)·` mean of `D_φ†(r ‖ r̂)` over fresh draws from `P_ref`.
    pub rhs_reference: f64,
    /// Standard error of `lhs − rhs_reference` (independent samples).
    pub std_err_reference: f64,
    pub n_mc: usize,
}

impl ReductionCheck {
    /// Paired acceptance: `|gap| ≤ 3·SE`, plus a relative floor
    /// `1e−12·max(1, |lhs|)` for the exact-per-sample case where SE
    /// vanishes and only roundoff remains.
    pub fn paired_ok(&self) -> bool {
        self.gap.abs() <= 3.0 * self.std_err + 1e-12 * self.lhs.abs().max(1.0)
    }

    /// `|lhs − rhs_reference| / SE_reference`.
    pub fn reference_z(&self) -> f64 {
        let g = (self.lhs - self.rhs_reference).abs();
        if self.std_err_reference == 0.0 {
            if g == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            g / self.std_err_reference
        }
    }
}

fn mean_and_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var)
}

/// `(r, r̂, η_{<ref}, η̂_{<ref})` at `x`.
fn ratio_pair(spec: &MixtureSpec, model: &dyn PosteriorModel, x: &Vector) -> Result<(Vector, Vector, Vector, Vector)> {
    let k = spec.reference();
    let eta = eta_from_posterior(&true_posterior(spec, x), spec.priors())?;
    let eta_hat = eta_from_posterior(&model.posterior(x), spec.priors())?;
    let r = density_ratio_estimate(&eta)?;
    let r_hat = density_ratio_estimate(&eta_hat)?;
    Ok((r, r_hat, eta.rows(0, k).into_owned(), eta_hat.rows(0, k).into_owned()))
}

/// Monte-Carlo check of `E_M[D_φ(η‖η̂)] = (1 − π_ref)·E_{P_ref}[D_φ†(r‖r̂)]`.
///
/// `gen` acts on the first `C − 1` coordinates of `η`. The paired
/// estimate reuses the `M`-samples through the change of measure
/// `M(x) = (1 − π_ref)·g(r(x))·P_ref(x)`; an independent estimate from
/// `P_ref` samples is reported alongside.
pub fn reduction_check(
    spec: &MixtureSpec,
    model: &dyn PosteriorModel,
    gen: &dyn Generator<Vector>,
    n_mc: usize,
    rng: &mut StreamRng,
) -> Result<ReductionCheck> {
    if n_mc < 2 {
        return Err(Error::Argument(format!("n_mc must be ≥ 2, got {n_mc}")));
    }
    if model.classes() != spec.classes() {
        return Err(Error::Shape(format!(
            "model has {} classes, spec has {}",
            model.classes(),
            spec.classes()
        )));
    }
    let g = dre_scaler(spec.priors())?;
    let dagger = scaled_generator(gen, &g);
    let one_minus = 1.0 - spec.priors()[spec.reference()];
    let mut lhs = Vec::with_capacity(n_mc);
    let mut rhs = Vec::with_capacity(n_mc);
    let mut diff = Vec::with_capacity(n_mc);
    for _ in 0..n_mc {
        let (x, _) = spec.sample_joint(rng);
        let (r, r_hat, eta, eta_hat) = ratio_pair(spec, model, &x)?;
        let l = bregman_divergence(gen, &eta, &eta_hat)?;
        let weight = 1.0 / (one_minus * g.value(&r));
        let rr = one_minus * weight * bregman_divergence(&dagger, &r, &r_hat)?;
        lhs.push(l);
        rhs.push(rr);
        diff.push(l - rr);
    }
    let mut reference = Vec::with_capacity(n_mc);
    for _ in 0..n_mc {
        let x = spec.sample_class(spec.reference(), rng);
        let (r, r_hat, _, _) = ratio_pair(spec, model, &x)?;
        reference.push(one_minus * bregman_divergence(&dagger, &r, &r_hat)?);
    }
    let n = n_mc as f64;
    let (ml, vl) = mean_and_var(&lhs);
    let (mr, _) = mean_and_var(&rhs);
    let (_, vd) = mean_and_var(&diff);
    let (mref, vref) = mean_and_var(&reference);
    Ok(ReductionCheck {
        lhs: ml,
        rhs: mr,
        gap: ml - mr,
        std_err: (vd / n).sqrt(),
        rhs_reference: mref,
        std_err_reference: (vl / n + vref / n).sqrt(),
        n_mc,
    })
}

/// Settings of the sample-size sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DreConfig {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub classes: usize,
    pub dim: usize,
    pub epochs: usize,
    pub step: f64,
    /// Fraction of each sample used for training.
    pub train_frac: f64,
}

impl Default for DreConfig {
    fn default() -> Self {
        DreConfig {
            sizes: (4..=8).map(|k| 4usize.pow(k)).collect(),
            trials: 10,
            seed: 0,
            classes: 3,
            dim: 2,
            epochs: 200,
            step: 1.0,
            train_frac: 0.8,
        }
    }
}

/// One `(N, trial)` result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DreRow {
    pub n: usize,
    pub trial: usize,
    pub divergence: f64,
}

const DRE_STREAM_TAG: u64 = 1;

/// Test divergence `E_{P_ref}[D_φ†(r ‖ r̂)]` (KL generator) of a fitted
/// model, averaged over the reference-class rows of `test`.
///
/// If `test` holds no reference-class row, the expectation is taken over
/// all rows with weight `1/((1 − π_ref)·g(r))`.
pub fn test_divergence(spec: &MixtureSpec, model: &dyn PosteriorModel, test: &LabeledDataset) -> Result<f64> {
    let g = dre_scaler(spec.priors())?;
    let dagger = scaled_generator(KlGenerator, &g);
    let k = spec.reference();
    let one_minus = 1.0 - spec.priors()[k];
    let mut sum = 0.0;
    let mut count = 0usize;
    for (x, &y) in test.xs.iter().zip(&test.ys) {
        if y == k {
            let (r, r_hat, _, _) = ratio_pair(spec, model, x)?;
            sum += bregman_divergence(&dagger, &r, &r_hat)?;
            count += 1;
        }
    }
    if count > 0 {
        return Ok(sum / count as f64);
    }
    if test.is_empty() {
        return Err(Error::Argument("empty test set".into()));
    }
    log::warn!("no reference-class test rows; using importance weights over all rows");
    let mut sum = 0.0;
    for x in &test.xs {
        let (r, r_hat, _, _) = ratio_pair(spec, model, x)?;
        sum += bregman_divergence(&dagger, &r, &r_hat)? / (one_minus * g.value(&r));
    }
    Ok(sum / test.len() as f64)
}

/// One trial: random spec, sample, split, fit, evaluate.
pub fn run_dre_trial(cfg: &DreConfig, n: usize, trial: usize) -> Result<DreRow> {
    let mut rng = stream(cfg.seed, stream_id(&[DRE_STREAM_TAG, n as u64, trial as u64]));
    let spec = MixtureSpec::random(cfg.classes, cfg.dim, &mut rng)?;
    let data = sample_dataset(&spec, n, &mut rng)?;
    let (train, test) = data.split(cfg.train_frac);
    let model = fit_softmax(&train, cfg.epochs, cfg.step)?;
    let divergence = test_divergence(&spec, &model, &test)?;
    Ok(DreRow { n, trial, divergence })
}

/// All `(N, trial)` cells, ordered by `N` then trial.
pub fn run_dre_experiment(cfg: &DreConfig) -> Result<Vec<DreRow>> {
    if cfg.sizes.is_empty() || cfg.trials == 0 {
        return Err(Error::Argument("need at least one size and one trial".into()));
    }
    let cells: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    cells.par_iter().map(|&(n, t)| run_dre_trial(cfg, n, t)).collect()
}

/// CSV with header `N,trial,divergence`.
pub fn dre_table(rows: &[DreRow]) -> Table {
    let mut t = Table::new(&["N", "trial", "divergence"]);
    for r in rows {
        t.push(&[Cell::from(r.n), Cell::from(r.trial), Cell::from(r.divergence)]);
    }
    t
}

/// Mean divergence per sample size, in the order of `cfg.sizes`.
pub fn mean_by_size(rows: &[DreRow], sizes: &[usize]) -> Vec<(usize, f64)> {
    sizes
        .iter()
        .map(|&n| {
            let v: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.divergence).collect();
            (n, v.iter().sum::<f64>() / v.len().max(1) as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests;
