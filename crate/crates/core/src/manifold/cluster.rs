//! k-means++ seeding, the brute-force optimum and spherical Lloyd.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::{Manifold, TangentPoint};
use crate::catalog::generators::minkowski_inner;
use crate::divergence::Vector;
use crate::error::{Error, Result};

/// Largest instance [`brute_force_opt`] enumerates.
pub const MAX_BRUTE_FORCE_N: usize = 12;
pub const MAX_BRUTE_FORCE_K: usize = 3;

/// Centers chosen by k-means++ and their potential.
#[derive(Debug, Clone)]
pub struct SeedingResult {
    /// Tangent-plane centers, via the log map of the chosen embedded points.
    pub centers: Vec<TangentPoint>,
    pub indices: Vec<usize>,
    /// `Σᵢ minⱼ d_rec(exp xᵢ, cⱼ)`.
    pub potential: f64,
}

/// Normalized sampling weights, or `None` when every weight is zero.
pub fn seeding_probabilities(min_d: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = min_d.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return None;
    }
    Some(min_d.iter().map(|d| d / total).collect())
}

/// `Σᵢ minⱼ d_rec(pᵢ, cⱼ)` on embedded points.
pub fn embedded_potential(manifold: Manifold, points: &[Vector], centers: &[Vector]) -> f64 {
    points
        .iter()
        .map(|p| {
            centers
                .iter()
                .map(|c| manifold.embedded_d_rec(p, c))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// `Σᵢ minⱼ d_rec(xᵢ, cⱼ)` on tangent-plane points.
pub fn seeding_potential(manifold: Manifold, points: &[TangentPoint], centers: &[TangentPoint]) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::Argument("no centers".into()));
    }
    let mut total = 0.0;
    for x in points {
        let mut best = f64::INFINITY;
        for c in centers {
            best = best.min(manifold.d_rec(x, c)?);
        }
        total += best;
    }
    Ok(total)
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Argument(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

/// D² sampling on already embedded points. Returns the chosen indices and
/// the potential.
pub fn kmeanspp_seed_embedded<R: Rng + ?Sized>(
    manifold: Manifold,
    points: &[Vector],
    k: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, f64)> {
    check_k(points.len(), k)?;
    let n = points.len();
    let first = rng.random_range(0..n);
    let mut chosen = vec![first];
    let mut min_d: Vec<f64> = points
        .iter()
        .map(|p| manifold.embedded_d_rec(p, &points[first]))
        .collect();
    min_d[first] = 0.0;
    while chosen.len() < k {
        let next = match seeding_probabilities(&min_d) {
            Some(probs) => WeightedIndex::new(&probs)
                .map_err(|e| Error::Numerical(format!("seeding weights: {e}")))?
                .sample(rng),
            None => {
                // every remaining point coincides with a center
                let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            min_d[i] = min_d[i].min(manifold.embedded_d_rec(p, &points[next]));
        }
        min_d[next] = 0.0;
    }
    Ok((chosen, min_d.iter().sum()))
}

/// k-means++ seeding of tangent-plane points on `manifold`.
pub fn kmeanspp_seed<R: Rng + ?Sized>(
    points: &[TangentPoint],
    k: usize,
    manifold: Manifold,
    rng: &mut R,
) -> Result<SeedingResult> {
    let embedded = points.iter().map(|x| manifold.embed(x)).collect::<Result<Vec<_>>>()?;
    let (indices, potential) = kmeanspp_seed_embedded(manifold, &embedded, k, rng)?;
    let centers = indices
        .iter()
        .map(|&i| manifold.log(&embedded[i]))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeedingResult {
        centers,
        indices,
        potential,
    })
}

/// `k` distinct data points chosen uniformly.
pub fn forgy_init<R: Rng + ?Sized>(points: &[Vector], k: usize, rng: &mut R) -> Result<Vec<Vector>> {
    check_k(points.len(), k)?;
    Ok(rand::seq::index::sample(rng, points.len(), k)
        .into_iter()
        .map(|i| points[i].clone())
        .collect())
}

/// The optimal center of a cluster of embedded points, or `None` when the
/// spherical mean vanishes.
fn centroid(manifold: Manifold, members: &[&Vector]) -> Option<Vector> {
    let mut m = Vector::zeros(members[0].len());
    for p in members {
        m += *p;
    }
    let scale = match manifold {
        Manifold::Sphere => m.norm(),
        Manifold::Hyperboloid => (-minkowski_inner(&m, &m)).sqrt(),
    };
    if scale <= 1e-12 * members.len() as f64 || !scale.is_finite() {
        return None;
    }
    Some(m / scale)
}

/// Minimum potential over all partitions and its labelling.
#[derive(Debug, Clone)]
pub struct OptResult {
    pub potential: f64,
    /// Cluster label of each point, in restricted-growth form.
    pub partition: Vec<usize>,
}

/// Exhaustive optimum of the `d_rec` potential with at most `k` clusters.
///
/// Each cluster is served by its embedded mean renormalized onto the
/// manifold, which minimizes the cluster's `d_rec` sum on both models.
pub fn brute_force_opt(points: &[TangentPoint], k: usize, manifold: Manifold) -> Result<OptResult> {
    let n = points.len();
    if n == 0 || n > MAX_BRUTE_FORCE_N {
        return Err(Error::Argument(format!(
            "brute force needs 1..={MAX_BRUTE_FORCE_N} points, got {n}"
        )));
    }
    if k == 0 || k > MAX_BRUTE_FORCE_K {
        return Err(Error::Argument(format!(
            "brute force needs k in 1..={MAX_BRUTE_FORCE_K}, got {k}"
        )));
    }
    let embedded = points.iter().map(|x| manifold.embed(x)).collect::<Result<Vec<_>>>()?;
    let mut best: Option<OptResult> = None;
    let mut labels = vec![0usize; n];
    let mut skipped = 0usize;
    loop {
        match partition_cost(manifold, &embedded, &labels, k) {
            Some(cost) => {
                if best.as_ref().is_none_or(|b| cost < b.potential) {
                    best = Some(OptResult {
                        potential: cost,
                        partition: labels.clone(),
                    });
                }
            }
            None => skipped += 1,
        }
        if !next_restricted_growth(&mut labels, k) {
            break;
        }
    }
    if skipped > 0 {
        log::warn!("brute force skipped {skipped} partitions with a vanishing cluster mean");
    }
    best.ok_or_else(|| Error::Numerical("every partition has a degenerate cluster".into()))
}

fn partition_cost(manifold: Manifold, points: &[Vector], labels: &[usize], k: usize) -> Option<f64> {
    let mut total = 0.0;
    for j in 0..k {
        let members: Vec<&Vector> = points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == j)
            .map(|(p, _)| p)
            .collect();
        if members.is_empty() {
            continue;
        }
        let c = centroid(manifold, &members)?;
        total += members.iter().map(|p| manifold.embedded_d_rec(p, &c)).sum::<f64>();
    }
    Some(total)
}

/// Advances a restricted-growth string with labels below `k`.
fn next_restricted_growth(labels: &mut [usize], k: usize) -> bool {
    let n = labels.len();
    for i in (1..n).rev() {
        let prefix_max = labels[..i].iter().copied().max().unwrap_or(0);
        if labels[i] <= prefix_max && labels[i] + 1 < k {
            labels[i] += 1;
            for l in labels[i + 1..].iter_mut() {
                *l = 0;
            }
            return true;
        }
    }
    false
}

/// Outcome of spherical Lloyd iterations.
#[derive(Debug, Clone)]
pub struct LloydResult {
    pub centers: Vec<Vector>,
    /// Potential of the initial centers followed by one entry per iteration.
    pub trace: Vec<f64>,
    pub iters: usize,
}

impl LloydResult {
    pub fn potential(&self) -> f64 {
        *self.trace.last().expect("trace holds the initial potential")
    }
}

fn assign(points: &[Vector], centers: &[Vector]) -> (Vec<usize>, Vec<f64>) {
    points
        .iter()
        .map(|p| {
            centers
                .iter()
                .enumerate()
                .map(|(j, c)| (j, Manifold::Sphere.embedded_d_rec(p, c)))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
        })
        .unzip()
}

/// Spherical k-means on unit vectors.
///
/// Each iteration moves every center to its normalized cluster mean and
/// reassigns. A center left without points moves to the point farthest from
/// its own center. Iteration stops when the assignment no longer changes,
/// when the relative improvement falls below `rel_tol`, or after
/// `max_iters` iterations.
pub fn skm_lloyd(points: &[Vector], init: &[Vector], max_iters: usize, rel_tol: f64) -> Result<LloydResult> {
    if points.is_empty() || init.is_empty() {
        return Err(Error::Argument("points and initial centers must be nonempty".into()));
    }
    if let Some(c) = init.iter().find(|c| (c.norm() - 1.0).abs() > super::SPHERE_TOL) {
        return Err(Error::domain("init", format!("center norm {} is not 1", c.norm())));
    }
    let mut centers = init.to_vec();
    let (mut labels, mut dist) = assign(points, &centers);
    let mut trace = vec![dist.iter().sum::<f64>()];
    let mut iters = 0;
    while iters < max_iters {
        iters += 1;
        for (j, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vector> = points
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == j)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                let far = dist
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |a, (i, &d)| if d > a.1 { (i, d) } else { a })
                    .0;
                *center = points[far].clone();
                // the relocated point is now served exactly
                dist[far] = 0.0;
            } else if let Some(c) = centroid(Manifold::Sphere, &members) {
                *center = c;
            }
        }
        let (new_labels, new_dist) = assign(points, &centers);
        let pot: f64 = new_dist.iter().sum();
        let prev = *trace.last().unwrap();
        trace.push(pot);
        let unchanged = new_labels == labels;
        labels = new_labels;
        dist = new_dist;
        if unchanged || pot == 0.0 || (prev - pot) / prev < rel_tol {
            break;
        }
    }
    Ok(LloydResult { centers, trace, iters })
}
