//! Seeding versus Forgy initialization for spherical k-means on `S²`.
//!
//! Data come from a mixture of `2k` components on the tangent plane at the
//! pole: even components are isotropic Gaussians, odd components are
//! uniform on small discs. Component centers are uniform on the disc of
//! radius [`ClusterConfig::center_radius`].

use rand::Rng;
use rayon::prelude::*;

use super::{cluster, Manifold, TangentPoint, SPHERE_RADIUS};
use crate::csv::{Cell, Table};
use crate::divergence::Vector;
use crate::error::{Error, Result};
use crate::rng::{self, std_normal, StreamRng};

#[derive(Debug, Clone)]
pub struct ClusterConfig {
    pub ks: Vec<usize>,
    /// Points per run.
    pub n: usize,
    pub runs: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Lloyd stops once the relative improvement drops below this.
    pub rel_tol: f64,
    pub center_radius: f64,
    /// Standard deviation of the Gaussian components.
    pub gaussian_std: f64,
    /// Radius of the uniform components.
    pub uniform_radius: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            ks: vec![5, 10],
            n: 500,
            runs: 20,
            seed: 0,
            max_iters: 100,
            rel_tol: 1e-3,
            center_radius: 2.5,
            gaussian_std: 0.15,
            uniform_radius: 0.3,
        }
    }
}

impl ClusterConfig {
    fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.ks.iter().any(|&k| k == 0 || k > 50) {
            return Err(Error::Argument(format!("k values {:?} must lie in 1..=50", self.ks)));
        }
        if let Some(&k) = self.ks.iter().find(|&&k| k > self.n) {
            return Err(Error::Argument(format!("k = {k} exceeds n = {}", self.n)));
        }
        if self.runs == 0 {
            return Err(Error::Argument("runs must be at least 1".into()));
        }
        if !(self.center_radius > 0.0 && self.gaussian_std > 0.0 && self.uniform_radius > 0.0) {
            return Err(Error::Argument("mixture radii and spread must be positive".into()));
        }
        Ok(())
    }
}

/// One `(k, run)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRow {
    pub k: usize,
    pub run: usize,
    pub pot_gkm: f64,
    pub pot_skm_forgy: f64,
    pub pot_skm_gkm: f64,
    pub iters_forgy: usize,
    pub iters_gkm: usize,
}

fn uniform_disc(rng: &mut StreamRng, radius: f64) -> Vector {
    let r = radius * rng.random::<f64>().sqrt();
    let a = rng.random_range(0.0..std::f64::consts::TAU);
    Vector::from_column_slice(&[r * a.cos(), r * a.sin()])
}

/// Pulls points beyond the sphere's domain back radially onto it.
fn clip(x: Vector) -> Vector {
    let r = x.norm();
    let max = SPHERE_RADIUS - 1e-9;
    if r > max {
        x * (max / r)
    } else {
        x
    }
}

fn sample_mixture(cfg: &ClusterConfig, k: usize, rng: &mut StreamRng) -> Vec<Vector> {
    let comps: Vec<Vector> = (0..2 * k).map(|_| uniform_disc(rng, cfg.center_radius)).collect();
    (0..cfg.n)
        .map(|_| {
            let j = rng.random_range(0..comps.len());
            let offset = if j % 2 == 0 {
                Vector::from_fn(2, |_, _| cfg.gaussian_std * std_normal(rng))
            } else {
                uniform_disc(rng, cfg.uniform_radius)
            };
            clip(&comps[j] + offset)
        })
        .collect()
}

/// Runs Forgy+Lloyd, k-means++ alone and k-means++ followed by Lloyd on one
/// mixture sample.
pub fn run_cluster_trial(cfg: &ClusterConfig, k: usize, run: usize) -> Result<ClusterRow> {
    let mut rng = rng::stream(cfg.seed, rng::stream_id(&[3, k as u64, run as u64]));
    let tangent = sample_mixture(cfg, k, &mut rng);
    let embedded = tangent
        .into_iter()
        .map(|x| Manifold::Sphere.embed(&TangentPoint::new(x)?))
        .collect::<Result<Vec<_>>>()?;

    let forgy = cluster::forgy_init(&embedded, k, &mut rng)?;
    let skm_forgy = cluster::skm_lloyd(&embedded, &forgy, cfg.max_iters, cfg.rel_tol)?;

    let (idx, pot_gkm) = cluster::kmeanspp_seed_embedded(Manifold::Sphere, &embedded, k, &mut rng)?;
    let seeds: Vec<Vector> = idx.iter().map(|&i| embedded[i].clone()).collect();
    let skm_gkm = cluster::skm_lloyd(&embedded, &seeds, cfg.max_iters, cfg.rel_tol)?;

    Ok(ClusterRow {
        k,
        run,
        pot_gkm,
        pot_skm_forgy: skm_forgy.potential(),
        pot_skm_gkm: skm_gkm.potential(),
        iters_forgy: skm_forgy.iters,
        iters_gkm: skm_gkm.iters,
    })
}

/// Every `(k, run)` cell, ordered by `k` then run.
pub fn run_cluster_experiment(cfg: &ClusterConfig) -> Result<Vec<ClusterRow>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = cfg
        .ks
        .iter()
        .flat_map(|&k| (0..cfg.runs).map(move |r| (k, r)))
        .collect();
    cells.par_iter().map(|&(k, r)| run_cluster_trial(cfg, k, r)).collect()
}

pub fn cluster_table(rows: &[ClusterRow]) -> Table {
    let mut t = Table::new(&[
        "k",
        "run",
        "pot_gkm",
        "pot_skm_forgy",
        "pot_skm_gkm",
        "iters_forgy",
        "iters_gkm",
    ]);
    for r in rows {
        t.push(&[
            Cell::from(r.k),
            Cell::from(r.run),
            Cell::from(r.pot_gkm),
            Cell::from(r.pot_skm_forgy),
            Cell::from(r.pot_skm_gkm),
            Cell::from(r.iters_forgy),
            Cell::from(r.iters_gkm),
        ]);
    }
    t
}

/// Per-`k` means of `(pot_gkm, pot_skm_forgy, pot_skm_gkm)`, in first-seen
/// order of `k`.
pub fn cluster_means(rows: &[ClusterRow]) -> Vec<(usize, [f64; 3])> {
    let mut ks: Vec<usize> = Vec::new();
    for r in rows {
        if !ks.contains(&r.k) {
            ks.push(r.k);
        }
    }
    ks.into_iter()
        .map(|k| {
            let sel: Vec<&ClusterRow> = rows.iter().filter(|r| r.k == k).collect();
            let m = sel.len() as f64;
            let mut acc = [0.0; 3];
            for r in &sel {
                acc[0] += r.pot_gkm / m;
                acc[1] += r.pot_skm_forgy / m;
                acc[2] += r.pot_skm_gkm / m;
            }
            (k, acc)
        })
        .collect()
}
