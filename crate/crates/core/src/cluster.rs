//! k-means post-processing and a common front-end over every spectral
//! clustering method.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embed::{fit_embedding_with, EmbedOptions};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeLabels};
use crate::rng;
use crate::spectral::{
    bottom_eigenpairs_skip, build_adjacency, build_bethe_hessian, build_centered,
    build_modularity, build_norm_laplacian, top_eigenpairs, EigenSystem,
};

pub const DEFAULT_RESTARTS: usize = 50;
const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub restarts_used: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, r: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[r.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = r.gen::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            r.gen_range(0..n)
        };
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn inertia_of(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &c)| sq_dist(p, &centroids[c]))
        .sum()
}

/// One k-means++ start followed by Lloyd iterations. Returns the result and
/// the inertia after each assignment step.
fn lloyd(points: &[Vec<f64>], k: usize, r: &mut impl Rng) -> (Vec<usize>, Vec<Vec<f64>>, Vec<f64>) {
    let dim = points[0].len();
    let mut centroids = plus_plus_init(points, k, r);
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
    let mut trace = vec![inertia_of(points, &centroids, &assignments)];

    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                centroids[c] = sums[c].iter().map(|s| s * inv).collect();
            }
        }
        // Re-seed empty clusters at the point farthest from its centroid.
        for c in 0..k {
            if counts[c] == 0 {
                let (far, dist) = points
                    .iter()
                    .zip(&assignments)
                    .enumerate()
                    .filter(|(_, (_, &a))| counts[a] > 1)
                    .map(|(i, (p, &a))| (i, sq_dist(p, &centroids[a])))
                    .fold((usize::MAX, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
                if far == usize::MAX || dist <= 0.0 {
                    continue;
                }
                counts[assignments[far]] -= 1;
                assignments[far] = c;
                counts[c] = 1;
                centroids[c] = points[far].clone();
            }
        }

        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        let changed = next != assignments;
        assignments = next;
        trace.push(inertia_of(points, &centroids, &assignments));
        if !changed {
            break;
        }
    }
    // Final centroids are the means of the final assignment.
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(&assignments) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
        }
    }
    (assignments, centroids, trace)
}

/// Best-inertia k-means over `restarts` k-means++ starts. Restart `r` draws
/// from its own random stream, so results do not depend on scheduling.
///
/// Points are rescaled by their largest absolute coordinate before
/// clustering, which makes the partition invariant to a global positive
/// rescaling of the input.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    let n = points.len();
    if n == 0 {
        return Err(Error::validation("k-means needs at least one point"));
    }
    if k == 0 || k > n {
        return Err(Error::Range {
            what: "cluster count",
            detail: format!("k = {k} must be in 1..={n}"),
        });
    }
    if restarts == 0 {
        return Err(Error::validation("k-means needs at least one restart"));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::validation("points have inconsistent dimension"));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::validation("points must be finite"));
    }
    let scale = points.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let scaled: Vec<Vec<f64>> = if scale > 0.0 {
        points.iter().map(|p| p.iter().map(|x| x / scale).collect()).collect()
    } else {
        points.to_vec()
    };

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..restarts {
        let mut r = rng::stream(seed, restart as u64);
        let (assignments, centroids, _) = lloyd(&scaled, k, &mut r);
        let inertia = inertia_of(&scaled, &centroids, &assignments);
        if best.as_ref().map_or(true, |(b, _)| inertia < *b) {
            best = Some((inertia, assignments));
        }
    }
    let (_, assignments) = best.expect("restarts >= 1");
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(&assignments) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }
    let centroids: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s.iter().map(|x| x / c as f64).collect() } else { s })
        .collect();
    let inertia = inertia_of(points, &centroids, &assignments);
    Ok(KMeansResult {
        assignments,
        centroids,
        inertia,
        restarts_used: restarts,
    })
}

/// Spectral clustering methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Scaled eigenvectors of the centered adjacency matrix.
    LogisticRdpg,
    /// Top eigenvectors of the adjacency matrix.
    Adjacency,
    /// Top eigenvectors of the centered adjacency matrix, no scaling.
    CenteredUnscaled,
    /// Top eigenvectors of the modularity matrix.
    Modularity,
    /// Second- through (d+1)-st smallest eigenvectors of the normalized Laplacian.
    NormLaplacian,
    /// Second- through (d+1)-st smallest eigenvectors of the Bethe Hessian.
    BetheHessian,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::LogisticRdpg,
        Method::Adjacency,
        Method::CenteredUnscaled,
        Method::Modularity,
        Method::NormLaplacian,
        Method::BetheHessian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::LogisticRdpg => "logistic-rdpg",
            Method::Adjacency => "adjacency",
            Method::CenteredUnscaled => "centered-unscaled",
            Method::Modularity => "modularity",
            Method::NormLaplacian => "norm-laplacian",
            Method::BetheHessian => "bethe-hessian",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::validation(format!("unknown method {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClusterOptions {
    pub restarts: usize,
    /// Overrides `r` in the Bethe Hessian.
    pub bethe_r: Option<f64>,
    pub embed: EmbedOptions,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            bethe_r: None,
            embed: EmbedOptions::default(),
        }
    }
}

fn rows_of(es: &EigenSystem, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| es.vectors.iter().map(|v| v[i]).collect()).collect()
}

/// Per-node spectral coordinates (`n` rows) that a method clusters on.
pub fn spectral_coordinates(
    g: &Graph,
    method: Method,
    d: usize,
    options: &ClusterOptions,
) -> Result<Vec<Vec<f64>>> {
    let n = g.node_count();
    let es = match method {
        Method::LogisticRdpg => return Ok(fit_embedding_with(g, d, &options.embed)?.v),
        Method::Adjacency => top_eigenpairs(&build_adjacency(g), d)?,
        Method::CenteredUnscaled => top_eigenpairs(&build_centered(g)?, d)?,
        Method::Modularity => top_eigenpairs(&build_modularity(g)?, d)?,
        Method::NormLaplacian => bottom_eigenpairs_skip(&build_norm_laplacian(g)?, d, 1)?,
        Method::BetheHessian => {
            bottom_eigenpairs_skip(&build_bethe_hessian(g, options.bethe_r)?.matrix, d, 1)?
        }
    };
    Ok(rows_of(&es, n))
}

pub fn cluster_graph(
    g: &Graph,
    method: Method,
    d: usize,
    k: usize,
    seed: u64,
) -> Result<NodeLabels> {
    cluster_graph_with(g, method, d, k, seed, &ClusterOptions::default())
}

pub fn cluster_graph_with(
    g: &Graph,
    method: Method,
    d: usize,
    k: usize,
    seed: u64,
    options: &ClusterOptions,
) -> Result<NodeLabels> {
    let coords = spectral_coordinates(g, method, d, options)?;
    cluster_coordinates(&coords, k, seed, options.restarts)
}

/// k-means on precomputed coordinates.
pub fn cluster_coordinates(
    coords: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<NodeLabels> {
    let km = kmeans(coords, k, seed, restarts)?;
    let names = (0..k).map(|c| c.to_string()).collect();
    NodeLabels::with_names(km.assignments, names)
}
