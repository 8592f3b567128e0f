//! The `sbreg` command line.
//!
//! Every subcommand derives its randomness from `--seed` through
//! [`crate::rng`], so reruns with the same flags write byte-identical CSVs.
//! Exit codes: 0 success, 1 failed check or I/O error, 2 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::catalog::generators::{OnePlusNormScaler, SquaredNorm};
use crate::catalog::{closed_form_vs_generic, format_point, vector_entry, CatalogEntry, CatalogId, CatalogParams};
use crate::csv::{Cell, Table};
use crate::divergence::{bregman_divergence, scaled_generator, scaled_identity_sides, verify_scaled_identity, Vector};
use crate::dre::{dre_table, mean_by_size, run_dre_experiment, DreConfig};
use crate::error::{Error, Result};
use crate::geometry::{bisector_equivalence, bisector_residual_identity, scaled_ball_equivalence};
use crate::lms::{lms_file_name, lms_table, simulate, LqConfig, StreamSpec, TargetKind};
use crate::manifold::{cluster_means, cluster_table, run_cluster_experiment, ClusterConfig};
use crate::rng::{self, std_normal};

/// Relative tolerance of the identity suite.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "sbreg",
    version,
    about = "Gauge-scaled Bregman divergences: checks and experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the scaled identity and the closed forms of catalog rows.
    IdentityCheck(IdentityArgs),
    /// Density-ratio estimation: test divergence versus sample size.
    Dre(DreArgs),
    /// p-LMS versus dual-norm p-LMS on a switching linear stream.
    Dnplms(DnplmsArgs),
    /// Spherical k-means from Forgy and from geodesic k-means++ seeds.
    Cluster(ClusterArgs),
    /// Ball and bisector equivalences under scaling.
    Geom(GeomArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    /// Catalog rows by numeral, number or name; all rows when omitted.
    #[arg(long, value_delimiter = ',')]
    pub rows: Vec<CatalogId>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also run a pair that violates the identity's precondition.
    #[arg(long)]
    pub negative_control: bool,
}

#[derive(Debug, Args)]
pub struct DreArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [256usize, 1024, 4096, 16384, 65536])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DnplmsArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [6.9])]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0])]
    pub rho: Vec<f64>,
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: u64,
    #[arg(long, default_value_t = 20)]
    pub dim: usize,
    /// `dense`, `sparse`, or both comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = [TargetKind::Dense])]
    pub target: Vec<TargetKind>,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 1000)]
    pub switch_period: usize,
    /// Radius of the L_q ball.
    #[arg(long, default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10])]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GeomArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[command(flatten)]
    pub common: Common,
}

/// Runs the parsed command, writing reports to `out`. `Ok(false)` means a
/// check failed.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::IdentityCheck(a) => cmd_identity_check(a, out),
        Command::Dre(a) => cmd_dre(a, out).map(|_| true),
        Command::Dnplms(a) => cmd_dnplms(a, out).map(|_| true),
        Command::Cluster(a) => cmd_cluster(a, out).map(|_| true),
        Command::Geom(a) => cmd_geom(a, out).map(|_| true),
    }
}

/// Process exit code for the outcome of [`run`].
pub fn exit_code(outcome: &Result<bool>) -> i32 {
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Error::Argument(_)) => 2,
        Err(_) => 1,
    }
}

fn say(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(line)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| Error::io("<stdout>", e))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_table(out: &mut dyn Write, table: &Table, path: &Path) -> Result<()> {
    table.write_to(path)?;
    say(out, format_args!("wrote {} ({} rows)", path.display(), table.len()))
}

pub fn cmd_identity_check(a: &IdentityArgs, out: &mut dyn Write) -> Result<bool> {
    let rows: Vec<CatalogId> = if a.rows.is_empty() {
        CatalogId::ALL.to_vec()
    } else {
        a.rows.clone()
    };
    let trials = a.trials as usize;
    let reports = rows
        .par_iter()
        .map(|&id| {
            let mut r = rng::stream(a.seed, rng::stream_id(&[0, id as u64]));
            closed_form_vs_generic(id, trials, &mut r)
        })
        .collect::<Result<Vec<_>>>()?;
    say(
        out,
        format_args!(
            "{:<5} {:<16} {:>7} {:>13} {:>13}  status",
            "row", "name", "trials", "max_rel_diff", "max_ident_rel"
        ),
    )?;
    let mut all_ok = true;
    for rep in &reports {
        let ok = rep.max_rel_diff <= IDENTITY_TOL && rep.max_identity_rel <= IDENTITY_TOL;
        all_ok &= ok;
        say(
            out,
            format_args!(
                "{:<5} {:<16} {:>7} {:>13.3e} {:>13.3e}  {}",
                rep.id.roman(),
                rep.id.name(),
                rep.trials,
                rep.max_rel_diff,
                rep.max_identity_rel,
                if ok { "ok" } else { "FAIL" }
            ),
        )?;
        if !ok {
            say(
                out,
                format_args!("  worst pair x = {} y = {}", rep.worst_pair.0, rep.worst_pair.1),
            )?;
        }
    }
    if a.negative_control {
        let (worst, x, y) = negative_control(a.seed, trials)?;
        let ok = worst <= IDENTITY_TOL;
        all_ok &= ok;
        say(
            out,
            format_args!(
                "{:<5} {:<16} {:>7} {:>13} {:>13.3e}  {}",
                "neg",
                "sqnorm/1+norm",
                trials,
                "-",
                worst,
                if ok { "ok" } else { "FAIL" }
            ),
        )?;
        if !ok {
            say(out, format_args!("  worst pair x = {x} y = {y}"))?;
        }
    }
    Ok(all_ok)
}

/// Largest relative identity gap of `φ = ½‖x‖²` with `g = 1 + ‖x‖₂`, a pair
/// that is neither affine nor homogeneous.
fn negative_control(seed: u64, trials: usize) -> Result<(f64, String, String)> {
    let mut r = rng::stream(seed, rng::stream_id(&[0, 99]));
    let gen = SquaredNorm::with_offset(0.0);
    let mut worst = (0.0, String::new(), String::new());
    for _ in 0..trials {
        let x = Vector::from_fn(4, |_, _| 2.0 * std_normal(&mut r));
        let y = Vector::from_fn(4, |_, _| 2.0 * std_normal(&mut r));
        let rel = scaled_identity_sides(&gen, &OnePlusNormScaler, &x, &y)?.relative();
        if rel > worst.0 {
            worst = (rel, format_point(&x), format_point(&y));
        }
    }
    Ok(worst)
}

pub fn cmd_dre(a: &DreArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = DreConfig {
        sizes: a.sizes.clone(),
        trials: a.trials as usize,
        seed: a.common.seed,
        classes: a.classes,
        dim: a.dim,
        epochs: a.epochs,
        step: a.step,
        ..DreConfig::default()
    };
    let rows = run_dre_experiment(&cfg)?;
    prepare_dir(&a.common.out)?;
    write_table(out, &dre_table(&rows), &a.common.out.join("dre.csv"))?;
    for (n, m) in mean_by_size(&rows, &cfg.sizes) {
        say(out, format_args!("N = {n}: mean test divergence {m:.6e}"))?;
    }
    Ok(())
}

pub fn cmd_dnplms(a: &DnplmsArgs, out: &mut dyn Write) -> Result<()> {
    let mut cells = Vec::new();
    for &p in &a.p {
        for &rho in &a.rho {
            for &kind in &a.target {
                cells.push((LqConfig::from_p(p, a.w)?, rho, kind));
            }
        }
    }
    let sims = cells
        .par_iter()
        .map(|(cfg, rho, kind)| {
            let spec = StreamSpec {
                d: a.dim,
                target: *kind,
                noise_std: a.noise,
                horizon: a.horizon as usize,
                switch_period: a.switch_period,
                rho: *rho,
                gamma: a.gamma,
                ..StreamSpec::default()
            };
            let id = rng::stream_id(&[2, cfg.p.to_bits(), rho.to_bits(), *kind as u64]);
            simulate(&spec, cfg, &mut rng::stream(a.common.seed, id))
        })
        .collect::<Result<Vec<_>>>()?;
    prepare_dir(&a.common.out)?;
    for ((cfg, rho, kind), sim) in cells.iter().zip(&sims) {
        let path = a.common.out.join(lms_file_name(cfg, *rho, *kind));
        write_table(out, &lms_table(sim), &path)?;
        say(
            out,
            format_args!(
                "  max |‖w‖_q − W| = {:.3e}, max offset norm = {:.3e}",
                sim.max_dual_norm_dev, sim.max_offset_norm
            ),
        )?;
    }
    Ok(())
}

pub fn cmd_cluster(a: &ClusterArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = ClusterConfig {
        ks: a.k.clone(),
        n: a.n,
        runs: a.runs,
        seed: a.common.seed,
        max_iters: a.max_iters,
        rel_tol: a.rel_tol,
        ..ClusterConfig::default()
    };
    let rows = run_cluster_experiment(&cfg)?;
    prepare_dir(&a.common.out)?;
    write_table(out, &cluster_table(&rows), &a.common.out.join("cluster.csv"))?;
    for (k, [gkm, forgy, skm_gkm]) in cluster_means(&rows) {
        say(
            out,
            format_args!("k = {k}: mean potential gkm {gkm:.6e}, skm+forgy {forgy:.6e}, skm∘gkm {skm_gkm:.6e}"),
        )?;
    }
    Ok(())
}

/// One row per (catalog row, check).
#[derive(Debug, Clone, PartialEq)]
pub struct GeomRow {
    pub row: &'static str,
    pub check: &'static str,
    pub samples: usize,
    pub agreement: f64,
    pub max_residual_rel: f64,
}

/// Ball, bisector and residual-scaling checks for one vector catalog row.
pub fn geom_checks(id: CatalogId, samples: usize, seed: u64) -> Result<Vec<GeomRow>> {
    let entry: CatalogEntry<Vector> = vector_entry(id, CatalogParams::for_row(id))?;
    let mut r = rng::stream(seed, rng::stream_id(&[4, id as u64]));
    let (gen, g) = (&entry.gen, &entry.scaler);
    let pts: Vec<Vector> = (0..samples).map(|_| entry.sample(&mut r)).collect();
    let c = entry.sample(&mut r);
    let (x, y) = (entry.sample(&mut r), entry.sample(&mut r));

    // a radius splitting the samples roughly in half
    let dagger = scaled_generator(gen, g);
    let mut dist = pts
        .iter()
        .map(|p| bregman_divergence(&dagger, &c, p))
        .collect::<Result<Vec<_>>>()?;
    dist.sort_by(f64::total_cmp);
    let radius = dist[dist.len() / 2];

    let ball_rel = pts
        .iter()
        .map(|p| verify_scaled_identity(gen, g, &c, p).map(|k| k.relative()))
        .collect::<Result<Vec<_>>>()?;
    let bis_rel = pts
        .iter()
        .map(|z| bisector_residual_identity(gen, g, &x, &y, z).map(|k| k.relative()))
        .collect::<Result<Vec<_>>>()?;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let within = bis_rel.iter().filter(|&&v| v <= IDENTITY_TOL).count() as f64 / samples as f64;
    Ok(vec![
        GeomRow {
            row: id.roman(),
            check: "ball",
            samples,
            agreement: scaled_ball_equivalence(gen, g, &c, radius, &pts)?,
            max_residual_rel: max(&ball_rel),
        },
        GeomRow {
            row: id.roman(),
            check: "bisector",
            samples,
            agreement: bisector_equivalence(gen, g, &x, &y, &pts)?,
            max_residual_rel: max(&bis_rel),
        },
        GeomRow {
            row: id.roman(),
            check: "residual",
            samples,
            agreement: within,
            max_residual_rel: max(&bis_rel),
        },
    ])
}

pub fn geom_table(rows: &[GeomRow]) -> Table {
    let mut t = Table::new(&["row", "check", "samples", "agreement", "max_residual_rel"]);
    for r in rows {
        t.push(&[
            Cell::from(r.row),
            Cell::from(r.check),
            Cell::from(r.samples),
            Cell::from(r.agreement),
            Cell::from(r.max_residual_rel),
        ]);
    }
    t
}

pub fn cmd_geom(a: &GeomArgs, out: &mut dyn Write) -> Result<()> {
    let mut rows = Vec::new();
    for id in [CatalogId::CosineRowI, CatalogId::SimplexKLRowV] {
        rows.extend(geom_checks(id, a.samples as usize, a.common.seed)?);
    }
    prepare_dir(&a.common.out)?;
    write_table(out, &geom_table(&rows), &a.common.out.join("geom_equivalence.csv"))?;
    for r in &rows {
        say(
            out,
            format_args!(
                "row {} {}: agreement {:.4}, max residual rel {:.3e}",
                r.row, r.check, r.agreement, r.max_residual_rel
            ),
        )?;
    }
    Ok(())
}
