//! Seeded random graph models: stochastic block models, logistic random dot
//! product graphs, and the composite benchmark panels built on them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeLabels};
use crate::{logistic, rng};

/// Stochastic block model: community sizes and a symmetric matrix of
/// between-community edge probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub sizes: Vec<usize>,
    pub q: Vec<Vec<f64>>,
}

impl SbmSpec {
    pub fn new(sizes: Vec<usize>, q: Vec<Vec<f64>>) -> Result<Self> {
        let spec = Self { sizes, q };
        spec.validate()?;
        Ok(spec)
    }

    /// Equal-sized communities with `p_in` on the diagonal and `p_out`
    /// elsewhere.
    pub fn planted(sizes: Vec<usize>, p_in: f64, p_out: f64) -> Result<Self> {
        let k = sizes.len();
        let q = (0..k)
            .map(|a| (0..k).map(|b| if a == b { p_in } else { p_out }).collect())
            .collect();
        Self::new(sizes, q)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.sizes.len();
        if k == 0 {
            return Err(Error::validation("SBM needs at least one community"));
        }
        if self.sizes.iter().any(|&s| s == 0) {
            return Err(Error::validation("SBM community sizes must be >= 1"));
        }
        if self.q.len() != k || self.q.iter().any(|row| row.len() != k) {
            return Err(Error::validation(format!("Q must be {k}x{k}")));
        }
        for a in 0..k {
            for b in 0..k {
                let p = self.q[a][b];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::validation(format!("Q[{a}][{b}] = {p} not in [0, 1]")));
                }
                if (p - self.q[b][a]).abs() > 1e-12 {
                    return Err(Error::validation(format!("Q not symmetric at ({a}, {b})")));
                }
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Block-contiguous labels: the first `sizes[0]` nodes get 0, and so on.
    pub fn labels(&self) -> NodeLabels {
        let labels = self
            .sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &s)| std::iter::repeat(c).take(s))
            .collect();
        NodeLabels::from_assignments(labels)
    }
}

/// Latent positions (one row per node) and the logistic offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentConfig {
    pub v: Vec<Vec<f64>>,
    pub mu: f64,
}

impl LatentConfig {
    pub fn new(v: Vec<Vec<f64>>, mu: f64) -> Result<Self> {
        let cfg = Self { v, mu };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.v.len();
        if n == 0 {
            return Err(Error::validation("latent configuration has no nodes"));
        }
        let d = self.v[0].len();
        if d == 0 || d > n {
            return Err(Error::validation(format!("latent dimension {d} must be in 1..={n}")));
        }
        if self.v.iter().any(|row| row.len() != d) {
            return Err(Error::validation("latent rows have inconsistent length"));
        }
        if !self.mu.is_finite() || self.v.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::validation("latent configuration has non-finite entries"));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.v.len()
    }

    pub fn dim(&self) -> usize {
        self.v[0].len()
    }

    /// `l(v_i . v_j - mu)`.
    pub fn edge_probability(&self, i: usize, j: usize) -> f64 {
        let dot: f64 = self.v[i].iter().zip(&self.v[j]).map(|(a, b)| a * b).sum();
        logistic(dot - self.mu)
    }
}

/// Draws every pair `i < j` independently with `prob(i, j)`. Row `i` uses
/// its own random stream, so the result does not depend on visiting order.
fn sample_pairs(n: usize, seed: u64, prob: impl Fn(usize, usize) -> f64) -> Result<Graph> {
    let mut edges = Vec::new();
    for i in 0..n {
        let mut r = rng::stream(seed, i as u64);
        for j in i + 1..n {
            let u: f64 = r.gen();
            if u < prob(i, j) {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges)
}

pub fn sample_sbm(spec: &SbmSpec, seed: u64) -> Result<(Graph, NodeLabels)> {
    spec.validate()?;
    let labels = spec.labels();
    let c = labels.as_slice();
    let g = sample_pairs(spec.node_count(), seed, |i, j| spec.q[c[i]][c[j]])?;
    Ok((g, labels))
}

pub fn sample_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    let spec = SbmSpec::new(vec![n], vec![vec![p]])?;
    Ok(sample_sbm(&spec, seed)?.0)
}

pub fn sample_logistic_rdpg(cfg: &LatentConfig, seed: u64) -> Result<Graph> {
    cfg.validate()?;
    sample_pairs(cfg.node_count(), seed, |i, j| cfg.edge_probability(i, j))
}

/// Latent positions `scale * Z` for a 0/1 membership matrix `Z`, plus the
/// community labels given by distinct rows of `Z` (first-appearance order).
pub fn latent_from_memberships(
    z: &[Vec<u8>],
    scale: f64,
    mu: f64,
) -> Result<(LatentConfig, NodeLabels)> {
    if scale < 0.0 || !scale.is_finite() {
        return Err(Error::validation(format!("scale must be >= 0, got {scale}")));
    }
    if z.iter().flatten().any(|&b| b > 1) {
        return Err(Error::validation("membership matrix must be 0/1"));
    }
    let v = z
        .iter()
        .map(|row| row.iter().map(|&b| scale * f64::from(b)).collect())
        .collect();
    let cfg = LatentConfig::new(v, mu)?;
    let mut seen: Vec<&Vec<u8>> = Vec::new();
    let labels = z
        .iter()
        .map(|row| match seen.iter().position(|r| *r == row) {
            Some(p) => p,
            None => {
                seen.push(row);
                seen.len() - 1
            }
        })
        .collect();
    Ok((cfg, NodeLabels::from_assignments(labels)))
}

/// Offset giving edge probability `p` at zero latent positions.
pub fn offset_for_density(p: f64) -> f64 {
    -crate::logit(p)
}

pub mod presets {
    //! Benchmark panels. Every panel has 1000 nodes and background edge
    //! density 0.05; a single `signal` scalar controls how far the community
    //! structure departs from the background.
    //!
    //! | panel | structure                               | k  | d  | signal            |
    //! |-------|-----------------------------------------|----|----|-------------------|
    //! | a     | one dense cluster, rest background      | 2  | 1  | added density     |
    //! | b     | two equal dense clusters                | 2  | 1  | added density     |
    //! | c     | 25 small equal clusters                 | 25 | 24 | added density     |
    //! | d     | 17 clusters of different sizes          | 17 | 16 | added density     |
    //! | e     | two overlapping clusters (4 communities)| 4  | 2  | latent scale      |
    //! | f     | two groups, heterogeneous latent norms  | 2  | 1  | latent scale      |

    use std::fmt;
    use std::str::FromStr;

    use rand::Rng;
    use serde::{Deserialize, Serialize};

    use super::{
        latent_from_memberships, offset_for_density, sample_logistic_rdpg, sample_sbm,
        LatentConfig, SbmSpec,
    };
    use crate::error::{Error, Result};
    use crate::graph::{Graph, NodeLabels};
    use crate::rng;

    pub const NODES: usize = 1000;
    pub const BACKGROUND: f64 = 0.05;

    /// Nodes in the dense community of panel a.
    pub const PANEL_A_DENSE: usize = 500;

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
    #[serde(rename_all = "lowercase")]
    pub enum Panel {
        A,
        B,
        C,
        D,
        E,
        F,
    }

    impl Panel {
        pub const ALL: [Panel; 6] = [Panel::A, Panel::B, Panel::C, Panel::D, Panel::E, Panel::F];

        /// `(k, d)` used for the panel.
        pub fn shape(self) -> (usize, usize) {
            match self {
                Panel::A | Panel::B | Panel::F => (2, 1),
                Panel::C => (25, 24),
                Panel::D => (17, 16),
                Panel::E => (4, 2),
            }
        }

        pub fn k(self) -> usize {
            self.shape().0
        }

        pub fn dim(self) -> usize {
            self.shape().1
        }

        /// Model for a signal value. SBM panels take `signal` as the extra
        /// within-cluster density; latent panels take it as the latent scale.
        pub fn model(self, signal: f64, seed: u64) -> Result<Model> {
            if !signal.is_finite() || signal < 0.0 {
                return Err(Error::validation(format!("signal must be >= 0, got {signal}")));
            }
            let dense = BACKGROUND + signal;
            match self {
                Panel::A => {
                    let sizes = vec![PANEL_A_DENSE, NODES - PANEL_A_DENSE];
                    let q = vec![vec![dense, BACKGROUND], vec![BACKGROUND, BACKGROUND]];
                    Ok(Model::Sbm(SbmSpec::new(sizes, q)?))
                }
                Panel::B => Ok(Model::Sbm(SbmSpec::planted(vec![500, 500], dense, BACKGROUND)?)),
                Panel::C => Ok(Model::Sbm(SbmSpec::planted(vec![40; 25], dense, BACKGROUND)?)),
                Panel::D => Ok(Model::Sbm(SbmSpec::planted(panel_d_sizes(), dense, BACKGROUND)?)),
                Panel::E => {
                    let quarter = NODES / 4;
                    let z: Vec<Vec<u8>> = [[0u8, 0], [1, 0], [0, 1], [1, 1]]
                        .iter()
                        .flat_map(|row| std::iter::repeat(row.to_vec()).take(quarter))
                        .collect();
                    let (cfg, labels) =
                        latent_from_memberships(&z, signal, offset_for_density(BACKGROUND))?;
                    Ok(Model::Latent(cfg, labels))
                }
                Panel::F => {
                    // Two groups on opposite sides of the origin; norms vary
                    // per node, so degrees vary within a group.
                    let mut r = rng::stream(seed, u64::MAX);
                    let half = NODES / 2;
                    let v = (0..NODES)
                        .map(|i| {
                            let w: f64 = r.gen_range(0.5..1.5);
                            let sign = if i < half { 1.0 } else { -1.0 };
                            vec![sign * signal * w]
                        })
                        .collect();
                    let labels = (0..NODES).map(|i| usize::from(i >= half)).collect();
                    Ok(Model::Latent(
                        LatentConfig::new(v, offset_for_density(BACKGROUND))?,
                        NodeLabels::from_assignments(labels),
                    ))
                }
            }
        }

        /// Samples a graph and its ground-truth communities.
        pub fn sample(self, signal: f64, seed: u64) -> Result<(Graph, NodeLabels)> {
            self.model(signal, seed)?.sample(seed)
        }

        /// Default signal grid used by the benchmark sweep. Each grid runs
        /// from no structure to a signal where the best methods are close
        /// to perfect.
        pub fn default_grid(self) -> Vec<f64> {
            match self {
                Panel::A => vec![0.0, 0.01, 0.02, 0.03, 0.05, 0.08],
                Panel::B => vec![0.0, 0.01, 0.015, 0.02, 0.03, 0.04],
                Panel::C | Panel::D => vec![0.0, 0.1, 0.15, 0.2, 0.3, 0.4],
                Panel::E => vec![0.0, 0.6, 0.8, 0.9, 1.0, 1.2],
                Panel::F => vec![0.0, 0.3, 0.4, 0.5, 0.7, 1.0],
            }
        }

        /// A signal at which structure is clearly detectable but the
        /// methods have not all saturated at a perfect score.
        pub fn strong_signal(self) -> f64 {
            match self {
                Panel::A => 0.08,
                Panel::B => 0.04,
                Panel::C | Panel::D => 0.3,
                Panel::E => 1.0,
                Panel::F => 0.7,
            }
        }
    }

    /// Two equal dense clusters on a background of unclustered nodes, as a
    /// one-dimensional logistic RDPG: members of the clusters sit at `+x`
    /// and `-x`, everybody else at 0, with `x^2 = strength` and the offset
    /// set by the background density. Inside a cluster the edge probability
    /// rises above the background, between the two clusters it drops below.
    ///
    /// Returns the block model and the true latent coordinates.
    pub fn two_dense_clusters(cluster_size: usize, strength: f64) -> Result<(SbmSpec, Vec<Vec<f64>>)> {
        if 2 * cluster_size > NODES || cluster_size == 0 {
            return Err(Error::validation(format!(
                "cluster size must be in 1..={}, got {cluster_size}",
                NODES / 2
            )));
        }
        if !strength.is_finite() || strength < 0.0 {
            return Err(Error::validation(format!("strength must be >= 0, got {strength}")));
        }
        let mu = offset_for_density(BACKGROUND);
        let within = crate::logistic(strength - mu);
        let across = crate::logistic(-strength - mu);
        let b = BACKGROUND;
        let q = vec![vec![within, across, b], vec![across, within, b], vec![b, b, b]];
        let spec = SbmSpec::new(vec![cluster_size, cluster_size, NODES - 2 * cluster_size], q)?;
        let x = strength.sqrt();
        let latent = (0..NODES)
            .map(|i| {
                vec![if i < cluster_size {
                    x
                } else if i < 2 * cluster_size {
                    -x
                } else {
                    0.0
                }]
            })
            .collect();
        Ok((spec, latent))
    }

    /// Seventeen sizes from 19 to 96 summing to 1000.
    pub fn panel_d_sizes() -> Vec<usize> {
        let mut sizes: Vec<usize> = (0..17).map(|i| 19 + 5 * i).collect();
        let excess = sizes.iter().sum::<usize>() - NODES;
        *sizes.last_mut().unwrap() -= excess;
        sizes
    }

    impl fmt::Display for Panel {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let c = match self {
                Panel::A => 'a',
                Panel::B => 'b',
                Panel::C => 'c',
                Panel::D => 'd',
                Panel::E => 'e',
                Panel::F => 'f',
            };
            write!(f, "{c}")
        }
    }

    impl FromStr for Panel {
        type Err = Error;

        fn from_str(s: &str) -> Result<Self> {
            match s.trim().to_ascii_lowercase().as_str() {
                "a" => Ok(Panel::A),
                "b" => Ok(Panel::B),
                "c" => Ok(Panel::C),
                "d" => Ok(Panel::D),
                "e" => Ok(Panel::E),
                "f" => Ok(Panel::F),
                other => Err(Error::validation(format!("unknown panel {other:?}, expected a-f"))),
            }
        }
    }

    #[derive(Debug, Clone)]
    pub enum Model {
        Sbm(SbmSpec),
        Latent(LatentConfig, NodeLabels),
    }

    impl Model {
        pub fn sample(&self, seed: u64) -> Result<(Graph, NodeLabels)> {
            match self {
                Model::Sbm(spec) => sample_sbm(spec, seed),
                Model::Latent(cfg, labels) => Ok((sample_logistic_rdpg(cfg, seed)?, labels.clone())),
            }
        }

        /// True latent positions, when the model has them.
        pub fn latent(&self) -> Option<&LatentConfig> {
            match self {
                Model::Sbm(_) => None,
                Model::Latent(cfg, _) => Some(cfg),
            }
        }
    }
}
