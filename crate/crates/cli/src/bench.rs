//! Benchmark sweeps: for every signal value on a grid, sample `trials`
//! graphs, run each clustering method and score it against the planted
//! communities.

use std::io::Write;

use anyhow::{bail, ensure, Context, Result};
use lrdpg::cluster::{cluster_coordinates, spectral_coordinates, ClusterOptions, Method};
use lrdpg::embed::fit_embedding;
use lrdpg::eval::{latent_nmse, normalized_jaccard, oracle_mle, OracleOptions, ScoreReport, MAX_ORACLE_NODES};
use lrdpg::generators::presets::{Model, Panel};
use lrdpg::generators::{LatentConfig, SbmSpec};
use lrdpg::rng::derive_seed;
use lrdpg::NodeLabels;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Graph family swept by a benchmark.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSource {
    /// One of the 1000-node presets; `signal` is interpreted by the panel.
    Panel(Panel),
    /// A block model; `signal` is added to every within-block probability.
    Sbm(SbmSpec),
    /// A latent configuration with known communities; `signal` multiplies
    /// every latent position.
    Latent { config: LatentConfig, labels: Vec<usize> },
}

impl ModelSource {
    fn label(&self) -> String {
        match self {
            ModelSource::Panel(p) => p.to_string(),
            ModelSource::Sbm(_) => "sbm".into(),
            ModelSource::Latent { .. } => "latent".into(),
        }
    }

    fn default_shape(&self) -> Option<(usize, usize)> {
        match self {
            ModelSource::Panel(p) => Some(p.shape()),
            _ => None,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            ModelSource::Panel(_) => lrdpg::generators::presets::NODES,
            ModelSource::Sbm(spec) => spec.node_count(),
            ModelSource::Latent { config, .. } => config.node_count(),
        }
    }

    fn model(&self, signal: f64, seed: u64) -> Result<Model> {
        Ok(match self {
            ModelSource::Panel(p) => p.model(signal, seed)?,
            ModelSource::Sbm(spec) => {
                let mut q = spec.q.clone();
                for (a, row) in q.iter_mut().enumerate() {
                    row[a] += signal;
                }
                Model::Sbm(SbmSpec::new(spec.sizes.clone(), q)?)
            }
            ModelSource::Latent { config, labels } => {
                let v = config
                    .v
                    .iter()
                    .map(|row| row.iter().map(|x| x * signal).collect())
                    .collect();
                Model::Latent(
                    LatentConfig::new(v, config.mu)?,
                    NodeLabels::from_assignments(labels.clone()),
                )
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub model: ModelSource,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    /// Signal values; defaults to the panel's grid.
    #[serde(default)]
    pub grid: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Embedding dimension; defaults to the panel's.
    #[serde(default)]
    pub dim: Option<usize>,
    /// Number of communities; defaults to the panel's.
    #[serde(default)]
    pub k: Option<usize>,
    /// Also maximize the likelihood directly (small graphs only).
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub output: Option<std::path::PathBuf>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_restarts() -> usize {
    lrdpg::cluster::DEFAULT_RESTARTS
}

impl BenchConfig {
    pub fn for_panel(panel: Panel, trials: usize, seed: u64) -> Self {
        Self {
            model: ModelSource::Panel(panel),
            methods: all_methods(),
            grid: panel.default_grid(),
            trials,
            seed,
            dim: None,
            k: None,
            oracle: false,
            output: None,
            restarts: default_restarts(),
        }
    }

    /// Fills panel defaults and checks the invariants.
    pub fn resolved(mut self) -> Result<Self> {
        if self.grid.is_empty() {
            if let ModelSource::Panel(p) = self.model {
                self.grid = p.default_grid();
            }
        }
        let shape = self.model.default_shape();
        if self.k.is_none() {
            self.k = shape.map(|s| s.0);
        }
        if self.dim.is_none() {
            self.dim = shape.map(|s| s.1);
        }
        ensure!(self.trials >= 1, "trials must be at least 1");
        ensure!(!self.grid.is_empty(), "signal grid is empty");
        ensure!(!self.methods.is_empty(), "no methods selected");
        ensure!(self.k.is_some(), "k is required for non-panel models");
        ensure!(self.dim.is_some(), "dim is required for non-panel models");
        ensure!(self.restarts >= 1, "restarts must be at least 1");
        if let ModelSource::Latent { config, labels } = &self.model {
            ensure!(
                labels.len() == config.node_count(),
                "latent model has {} nodes but {} labels",
                config.node_count(),
                labels.len()
            );
        }
        Ok(self)
    }

    fn oracle_enabled(&self) -> bool {
        self.oracle && self.model.node_count() <= MAX_ORACLE_NODES
    }

    pub fn header(&self) -> String {
        let mut h = "trial,panel,method,signal,k,d,seed,jaccard,nmse,ll_alg".to_string();
        if self.oracle_enabled() {
            h.push_str(",ll_oracle");
        }
        h
    }
}

/// One CSV data row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub trial: usize,
    pub panel: String,
    pub method: Method,
    pub signal: f64,
    pub k: usize,
    pub d: usize,
    pub seed: u64,
    pub report: ScoreReport,
    /// The algorithm's likelihood is only reported on its own rows.
    pub has_loglik: bool,
}

impl BenchRow {
    pub fn to_csv(&self, with_oracle: bool) -> String {
        let ll = if self.has_loglik {
            self.report.loglik_algorithm.to_string()
        } else {
            String::new()
        };
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut s = format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.panel,
            self.method,
            self.signal,
            self.k,
            self.d,
            self.seed,
            self.report.jaccard,
            opt(self.report.nmse),
            ll
        );
        if with_oracle {
            s.push(',');
            s.push_str(&opt(self.report.loglik_oracle));
        }
        s
    }
}

/// Seed of the graph sampled for `(trial, grid point)`.
pub fn graph_seed(base: u64, trial: usize, grid_index: usize) -> u64 {
    derive_seed(base, &[trial as u64, grid_index as u64])
}

/// Seed of the k-means run for `(trial, grid point, method)`.
pub fn kmeans_seed(base: u64, trial: usize, grid_index: usize, method: Method) -> u64 {
    let m = Method::ALL.iter().position(|&x| x == method).expect("known method") as u64;
    derive_seed(base, &[trial as u64, grid_index as u64, m + 1])
}

fn run_trial(cfg: &BenchConfig, grid_index: usize, trial: usize) -> Result<Vec<BenchRow>> {
    let signal = cfg.grid[grid_index];
    let (k, d) = (cfg.k.unwrap(), cfg.dim.unwrap());
    let seed = graph_seed(cfg.seed, trial, grid_index);
    let model = cfg.model.model(signal, seed)?;
    let (g, truth) = model.sample(seed)?;
    let opts = ClusterOptions {
        restarts: cfg.restarts,
        ..ClusterOptions::default()
    };
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let ctx = || format!("trial {trial}, signal {signal}, method {method}");
        let (coords, loglik, oracle) = if method == Method::LogisticRdpg {
            let emb = fit_embedding(&g, d).with_context(ctx)?;
            let ll = emb.log_likelihood(&g);
            let oracle = if cfg.oracle_enabled() {
                let init = Some((emb.full_latent(), emb.mu_hat));
                let res = oracle_mle(&g, d, seed, init, &OracleOptions::default()).with_context(ctx)?;
                Some(res.loglik)
            } else {
                None
            };
            (emb.full_latent(), ll, oracle)
        } else {
            let coords = spectral_coordinates(&g, method, d, &opts).with_context(ctx)?;
            (coords, f64::NAN, None)
        };
        let pred = cluster_coordinates(&coords, k, kmeans_seed(cfg.seed, trial, grid_index, method), cfg.restarts)
            .with_context(ctx)?;
        let jaccard = normalized_jaccard(&truth, &pred, k).with_context(ctx)?;
        let nmse = match model.latent() {
            Some(lat) if lat.dim() == d => latent_nmse(&lat.v, &coords).ok(),
            _ => None,
        };
        rows.push(BenchRow {
            trial,
            panel: cfg.model.label(),
            method,
            signal,
            k,
            d,
            seed,
            report: ScoreReport {
                jaccard,
                nmse,
                loglik_algorithm: loglik,
                loglik_oracle: oracle,
            },
            has_loglik: method == Method::LogisticRdpg,
        });
    }
    Ok(rows)
}

/// Runs the sweep, writing the header and then rows grid point by grid
/// point (flushed after each point, so a failure keeps what finished).
/// Trials within a point may run in parallel; the output order is always
/// grid point, trial, method.
pub fn run_bench<W: Write>(cfg: &BenchConfig, mut out: W) -> Result<Vec<BenchRow>> {
    let cfg = cfg.clone().resolved()?;
    let with_oracle = cfg.oracle_enabled();
    writeln!(out, "{}", cfg.header())?;
    let mut all = Vec::new();
    for grid_index in 0..cfg.grid.len() {
        let results: Vec<Result<Vec<BenchRow>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| run_trial(&cfg, grid_index, trial))
            .collect();
        let mut failure = None;
        for r in results {
            match r {
                Ok(rows) => {
                    for row in rows {
                        writeln!(out, "{}", row.to_csv(with_oracle))?;
                        all.push(row);
                    }
                }
                Err(e) if failure.is_none() => failure = Some(e),
                Err(_) => {}
            }
        }
        out.flush()?;
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(all)
}

/// Mean score per `(method, signal)` in grid order.
pub fn mean_scores(rows: &[BenchRow], method: Method) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.method == method) {
        match out.iter_mut().find(|(s, _, _)| *s == r.signal) {
            Some(e) => {
                e.1 += r.report.jaccard;
                e.2 += 1;
            }
            None => out.push((r.signal, r.report.jaccard, 1)),
        }
    }
    out.into_iter().map(|(s, sum, c)| (s, sum / c as f64)).collect()
}

pub fn read_config(path: &std::path::Path) -> Result<BenchConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: BenchConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if cfg.trials == 0 {
        bail!("{}: trials must be at least 1", path.display());
    }
    Ok(cfg)
}
