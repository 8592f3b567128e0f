//! p-LMS and dual-norm p-LMS (DN-pLMS) online regression.
//!
//! With `φ_q(w) = ½‖w‖_q²` and its scaled version `φ†_q(w) = W·‖w‖_q`
//! (scaler `‖w‖_q/W`), the two learners update
//!
//! ```text
//! p-LMS:    w_t = ∇φ_p(∇φ_q(w_{t−1}) − η_t ∇ℓ_t)
//! DN-pLMS:  w_t = ∇φ†_p(∇φ†_q(w_{t−1}) − η_t ∇ℓ_t)
//! ```
//!
//! where `∇ℓ_t = (w_{t−1}ᵀx_t − y_t)·x_t`. The DN-pLMS iterate always has
//! `‖w_t‖_q = W` for `t ≥ 1` without any projection.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::catalog::generators::{lq_norm, signed_power};
use crate::csv::{Cell, Table};
use crate::divergence::Vector;
use crate::error::{Error, Result};
use crate::rng::{std_normal, StreamRng};

/// Tolerance on `|1/p + 1/q − 1|`.
pub const DUALITY_TOL: f64 = 1e-12;

/// Dual exponents `(p, q)` and ball radius `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqConfig {
    pub p: f64,
    pub q: f64,
    pub w: f64,
}

impl LqConfig {
    /// `q = p/(p − 1)`.
    pub fn from_p(p: f64, w: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Argument(format!("p must exceed 1, got {p}")));
        }
        LqConfig::new(p, p / (p - 1.0), w)
    }

    pub fn new(p: f64, q: f64, w: f64) -> Result<Self> {
        if !(p > 1.0 && q > 1.0 && p.is_finite() && q.is_finite()) {
            return Err(Error::Argument(format!("need p, q > 1, got p={p}, q={q}")));
        }
        if (1.0 / p + 1.0 / q - 1.0).abs() > DUALITY_TOL {
            return Err(Error::Argument(format!("p={p} and q={q} are not dual")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Argument(format!("W must be positive, got {w}")));
        }
        Ok(LqConfig { p, q, w })
    }
}

/// `∇φ_q(w) = ‖w‖_q^{2−q}·sign(w)⊗|w|^{q−1}`, with `∇φ_q(0) = 0`.
pub fn grad_phi_q(w: &Vector, q: f64) -> Vector {
    let n = lq_norm(w, q);
    if n == 0.0 {
        return Vector::zeros(w.len());
    }
    // normalise first so |w_i/n|^{q−1} stays in [0, 1]
    signed_power(&(w / n), q - 1.0) * n
}

/// `∇φ†_q(w) = W·‖w‖_q^{1−q}·sign(w)⊗|w|^{q−1}`, with `∇φ†_q(0) = 0`.
pub fn grad_phi_dagger_q(w: &Vector, q: f64, big_w: f64) -> Vector {
    let n = lq_norm(w, q);
    if n == 0.0 {
        return Vector::zeros(w.len());
    }
    signed_power(&(w / n), q - 1.0) * big_w
}

/// Weights of an online learner after `t` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineState {
    pub w: Vector,
    pub t: usize,
}

impl OnlineState {
    /// `w_0 = 0`.
    pub fn zeros(d: usize) -> Self {
        OnlineState {
            w: Vector::zeros(d),
            t: 0,
        }
    }
}

fn loss_gradient(state: &OnlineState, x: &Vector, y: f64, eta: f64) -> Result<Vector> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Argument(format!("learning rate must be positive, got {eta}")));
    }
    if x.len() != state.w.len() {
        return Err(Error::Shape(format!(
            "x has length {}, w has {}",
            x.len(),
            state.w.len()
        )));
    }
    Ok(x * (state.w.dot(x) - y))
}

/// One p-LMS step `w_t = ∇φ_p(∇φ_q(w_{t−1}) − η_t ∇ℓ_t)`.
pub fn plms_step(state: &OnlineState, x: &Vector, y: f64, eta: f64, cfg: &LqConfig) -> Result<OnlineState> {
    let grad = loss_gradient(state, x, y, eta)?;
    let theta = grad_phi_q(&state.w, cfg.q) - grad * eta;
    Ok(OnlineState {
        w: grad_phi_q(&theta, cfg.p),
        t: state.t + 1,
    })
}

/// One DN-pLMS step `w_t = ∇φ†_p(∇φ†_q(w_{t−1}) − η_t ∇ℓ_t)`.
///
/// If the mirror point cancels exactly, the weights are kept and a
/// warning is logged.
pub fn dnplms_step(state: &OnlineState, x: &Vector, y: f64, eta: f64, cfg: &LqConfig) -> Result<OnlineState> {
    let grad = loss_gradient(state, x, y, eta)?;
    let theta = grad_phi_dagger_q(&state.w, cfg.q, cfg.w) - grad * eta;
    if theta.iter().all(|&v| v == 0.0) {
        log::warn!("DN-pLMS mirror point vanished at step {}; keeping weights", state.t + 1);
        return Ok(OnlineState {
            w: state.w.clone(),
            t: state.t + 1,
        });
    }
    Ok(OnlineState {
        w: grad_phi_dagger_q(&theta, cfg.p, cfg.w),
        t: state.t + 1,
    })
}

/// `η_t = γ·W / (4(p−1)·max(W, X_p)·X_p·W + |residual|·X_p)`.
pub fn adaptive_eta(residual: f64, cfg: &LqConfig, x_p: f64, gamma: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&gamma) {
        return Err(Error::Argument(format!("γ must lie in [1/2, 1], got {gamma}")));
    }
    if !(x_p > 0.0 && x_p.is_finite()) {
        return Err(Error::Argument(format!("X_p must be positive, got {x_p}")));
    }
    let w = cfg.w;
    let m = w.max(x_p);
    Ok(gamma * w / (4.0 * (cfg.p - 1.0) * m * x_p * w + residual.abs() * x_p))
}

/// Constant p-LMS rate `1/((p − 1)·X_p²)`.
pub fn plms_eta(cfg: &LqConfig, x_p: f64) -> Result<f64> {
    if !(x_p > 0.0 && x_p.is_finite()) {
        return Err(Error::Argument(format!("X_p must be positive, got {x_p}")));
    }
    Ok(1.0 / ((cfg.p - 1.0) * x_p * x_p))
}

/// Inputs, targets and predictions `w_{t−1}ᵀx_t` of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepLog {
    pub xs: Vec<Vector>,
    pub ys: Vec<f64>,
    pub preds: Vec<f64>,
}

impl StepLog {
    pub fn push(&mut self, x: Vector, y: f64, pred: f64) {
        self.xs.push(x);
        self.ys.push(y);
        self.preds.push(pred);
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }
}

/// Per-step terms of the q-normalised regret against `û = u/g_q(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    /// `(ûᵀx_t − w_{t−1}ᵀx_t)²`
    pub learner_terms: Vec<f64>,
    /// `(ûᵀx_t − y_t)²`
    pub comparator_terms: Vec<f64>,
    /// `Σ (uᵀx_t − w_{t−1}ᵀx_t)²` with the raw comparator.
    pub learner_raw: f64,
    /// `Σ (uᵀx_t − y_t)²` with the raw comparator.
    pub comparator_raw: f64,
}

impl RegretLedger {
    pub fn build(log: &StepLog, u: &Vector, cfg: &LqConfig) -> Result<Self> {
        let nu = lq_norm(u, cfg.q);
        if nu == 0.0 {
            return Err(Error::domain("u", "comparator must be nonzero"));
        }
        let g = nu / cfg.w;
        let mut ledger = RegretLedger {
            learner_terms: Vec::with_capacity(log.len()),
            comparator_terms: Vec::with_capacity(log.len()),
            learner_raw: 0.0,
            comparator_raw: 0.0,
        };
        for ((x, &y), &pred) in log.xs.iter().zip(&log.ys).zip(&log.preds) {
            if x.len() != u.len() {
                return Err(Error::Shape(format!("x has length {}, u has {}", x.len(), u.len())));
            }
            let ux = u.dot(x);
            let s = ux / g - pred;
            let r = ux / g - y;
            ledger.learner_terms.push(s * s);
            ledger.comparator_terms.push(r * r);
            ledger.learner_raw += (ux - pred) * (ux - pred);
            ledger.comparator_raw += (ux - y) * (ux - y);
        }
        Ok(ledger)
    }

    /// `R_q = Σ learner_terms − Σ comparator_terms`.
    pub fn regret(&self) -> f64 {
        self.learner_terms.iter().sum::<f64>() - self.comparator_terms.iter().sum::<f64>()
    }

    /// Unnormalised regret `R(w | u)`.
    pub fn raw_regret(&self) -> f64 {
        self.learner_raw - self.comparator_raw
    }
}

/// `R_q(w_{1:T} | u)` with `g_q(u) = ‖u‖_q/W`.
pub fn regret_q(log: &StepLog, u: &Vector, cfg: &LqConfig) -> Result<f64> {
    RegretLedger::build(log, u, cfg).map(|l| l.regret())
}

/// `4(p−1)X_p²W² + (16p−8)·max(W, X_p)·X_p²·W + 8·Y·X_p²`, valid for `p > 2`.
pub fn regret_bound(cfg: &LqConfig, x_p: f64, y: f64) -> Result<f64> {
    if cfg.p <= 2.0 {
        return Err(Error::OutOfRegime(format!("regret bound needs p > 2, got p={}", cfg.p)));
    }
    let (p, w) = (cfg.p, cfg.w);
    let m = w.max(x_p);
    Ok(4.0 * (p - 1.0) * x_p * x_p * w * w + (16.0 * p - 8.0) * m * x_p * x_p * w + 8.0 * y * x_p * x_p)
}

/// Kind of regression target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Dense,
    /// `⌈0.1·d⌉` nonzero coordinates.
    Sparse,
}

impl TargetKind {
    pub fn label(self) -> &'static str {
        match self {
            TargetKind::Dense => "dense",
            TargetKind::Sparse => "sparse",
        }
    }
}

impl std::fmt::Display for TargetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for TargetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" => Ok(TargetKind::Dense),
            "sparse" => Ok(TargetKind::Sparse),
            other => Err(Error::Argument(format!("unknown target kind `{other}`"))),
        }
    }
}

/// Synthetic stream `y_t = uᵀx_t + ε_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSpec {
    pub d: usize,
    pub target: TargetKind,
    pub noise_std: f64,
    pub horizon: usize,
    /// Steps between target redraws.
    pub switch_period: usize,
    /// Exact `‖x_t‖_p` of every input.
    pub x_p: f64,
    /// Learners use `ρ·X_p` in their rates.
    pub rho: f64,
    pub gamma: f64,
    /// Clip targets to `[−Y, Y]` when set.
    pub y_clip: Option<f64>,
}

impl Default for StreamSpec {
    fn default() -> Self {
        StreamSpec {
            d: 20,
            target: TargetKind::Dense,
            noise_std: 0.1,
            horizon: 5000,
            switch_period: 1000,
            x_p: 1.0,
            rho: 1.0,
            gamma: 1.0,
            y_clip: None,
        }
    }
}

impl StreamSpec {
    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.horizon == 0 || self.switch_period == 0 {
            return Err(Error::Argument("d, horizon and switch period must be ≥ 1".into()));
        }
        if !(self.x_p > 0.0) || !(self.rho > 0.0) || !(self.noise_std >= 0.0) {
            return Err(Error::Argument("X_p and ρ must be positive, noise non-negative".into()));
        }
        if let Some(y) = self.y_clip {
            if !(y > 0.0) {
                return Err(Error::Argument(format!("Y must be positive, got {y}")));
            }
        }
        Ok(())
    }
}

/// Random direction with `‖x‖_p = radius` exactly. Coordinates are drawn
/// from the generalized Gaussian `∝ exp(−|z|^p)` before normalisation.
pub fn lp_sphere_sample(rng: &mut StreamRng, d: usize, p: f64, radius: f64) -> Vector {
    let gamma = Gamma::new(1.0 / p, 1.0).expect("valid shape");
    loop {
        let v = Vector::from_fn(d, |_, _| {
            let mag: f64 = gamma.sample(rng);
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            s * mag.powf(1.0 / p)
        });
        let n = lq_norm(&v, p);
        if n > 0.0 && n.is_finite() {
            return v * (radius / n);
        }
    }
}

/// Target with `‖u‖_q = W`.
pub fn random_target(rng: &mut StreamRng, d: usize, kind: TargetKind, cfg: &LqConfig) -> Vector {
    loop {
        let mut u = Vector::from_fn(d, |_, _| std_normal(rng));
        if kind == TargetKind::Sparse {
            let k = ((0.1 * d as f64).ceil() as usize).clamp(1, d);
            let keep = rand::seq::index::sample(rng, d, k);
            let mut mask = Vector::zeros(d);
            for i in keep.iter() {
                mask[i] = 1.0;
            }
            u.component_mul_assign(&mask);
        }
        let n = lq_norm(&u, cfg.q);
        if n > 0.0 {
            return u * (cfg.w / n);
        }
    }
}

/// Per-step outcome of both learners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub err_plms: f64,
    pub err_dnplms: f64,
    pub norm_plms_q: f64,
    pub norm_dn_q: f64,
}

/// Output of [`simulate`].
#[derive(Debug, Clone)]
pub struct Simulation {
    pub steps: Vec<StepRecord>,
    /// DN-pLMS inputs, targets and predictions.
    pub dn_log: StepLog,
    /// Targets in force, one per switch period.
    pub targets: Vec<Vector>,
    /// `max_t |‖∇φ†_q(w_t)‖_p − W|` over the DN-pLMS run.
    pub max_dual_norm_dev: f64,
    /// `max_t ‖η_t ∇ℓ_t‖_p` for DN-pLMS.
    pub max_offset_norm: f64,
}

/// Runs p-LMS and DN-pLMS side by side on one stream.
///
/// Both learners see `X̂_p = ρ·X_p`: p-LMS with the constant rate
/// `1/((p−1)X̂_p²)`, DN-pLMS with [`adaptive_eta`].
pub fn simulate(spec: &StreamSpec, cfg: &LqConfig, rng: &mut StreamRng) -> Result<Simulation> {
    spec.validate()?;
    let x_hat = spec.rho * spec.x_p;
    let eta_p = plms_eta(cfg, x_hat)?;
    let mut plms = OnlineState::zeros(spec.d);
    let mut dn = OnlineState::zeros(spec.d);
    let mut out = Simulation {
        steps: Vec::with_capacity(spec.horizon),
        dn_log: StepLog::default(),
        targets: Vec::new(),
        max_dual_norm_dev: 0.0,
        max_offset_norm: 0.0,
    };
    let mut u = Vector::zeros(spec.d);
    for t in 0..spec.horizon {
        if t % spec.switch_period == 0 {
            u = random_target(rng, spec.d, spec.target, cfg);
            out.targets.push(u.clone());
        }
        let x = lp_sphere_sample(rng, spec.d, cfg.p, spec.x_p);
        let mut y = u.dot(&x) + spec.noise_std * std_normal(rng);
        if let Some(c) = spec.y_clip {
            y = y.clamp(-c, c);
        }
        let pred_p = plms.w.dot(&x);
        let pred_dn = dn.w.dot(&x);
        let res_dn = y - pred_dn;
        let eta_dn = adaptive_eta(res_dn, cfg, x_hat, spec.gamma)?;
        out.max_offset_norm = out.max_offset_norm.max(eta_dn * res_dn.abs() * lq_norm(&x, cfg.p));
        plms = plms_step(&plms, &x, y, eta_p, cfg)?;
        dn = dnplms_step(&dn, &x, y, eta_dn, cfg)?;
        let dual = lq_norm(&grad_phi_dagger_q(&dn.w, cfg.q, cfg.w), cfg.p);
        out.max_dual_norm_dev = out.max_dual_norm_dev.max((dual - cfg.w).abs());
        out.steps.push(StepRecord {
            err_plms: (y - pred_p) * (y - pred_p),
            err_dnplms: res_dn * res_dn,
            norm_plms_q: lq_norm(&plms.w, cfg.q),
            norm_dn_q: lq_norm(&dn.w, cfg.q),
        });
        out.dn_log.push(x, y, pred_dn);
    }
    Ok(out)
}

/// Trailing-window means of `v` (window `w`, shorter at the start).
pub fn trailing_mean(v: &[f64], w: usize) -> Vec<f64> {
    let w = w.max(1);
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    for i in 0..v.len() {
        acc += v[i];
        if i >= w {
            acc -= v[i - w];
        }
        out.push(acc / (i + 1).min(w) as f64);
    }
    out
}

/// Smoothing window of the error columns.
pub const SMOOTHING_WINDOW: usize = 100;

/// CSV with header `t,err_plms,err_dnplms,diff,norm_plms_q,norm_dn_q`;
/// `t` starts at 1 and the error columns are smoothed.
pub fn lms_table(sim: &Simulation) -> Table {
    let ep: Vec<f64> = sim.steps.iter().map(|s| s.err_plms).collect();
    let ed: Vec<f64> = sim.steps.iter().map(|s| s.err_dnplms).collect();
    let sp = trailing_mean(&ep, SMOOTHING_WINDOW);
    let sd = trailing_mean(&ed, SMOOTHING_WINDOW);
    let mut t = Table::new(&["t", "err_plms", "err_dnplms", "diff", "norm_plms_q", "norm_dn_q"]);
    for (i, s) in sim.steps.iter().enumerate() {
        t.push(&[
            Cell::from(i + 1),
            Cell::from(sp[i]),
            Cell::from(sd[i]),
            Cell::from(sp[i] - sd[i]),
            Cell::from(s.norm_plms_q),
            Cell::from(s.norm_dn_q),
        ]);
    }
    t
}

/// `dnplms_p{p}_q{q}_rho{ρ}_{dense|sparse}.csv` with two decimals.
pub fn lms_file_name(cfg: &LqConfig, rho: f64, kind: TargetKind) -> String {
    format!("dnplms_p{:.2}_q{:.2}_rho{:.2}_{}.csv", cfg.p, cfg.q, rho, kind.label())
}

#[cfg(test)]
mod tests;
