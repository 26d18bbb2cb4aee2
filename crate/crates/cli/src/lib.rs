//! Command-line front end for the `lrdpg` library: sampling graphs,
//! embedding and clustering them, scoring, benchmark sweeps, plots and the
//! dataset download helper.

pub mod bench;
pub mod fetch;
pub mod io;
pub mod plot;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lrdpg::cluster::{cluster_coordinates, spectral_coordinates, ClusterOptions, Method, DEFAULT_RESTARTS};
use lrdpg::embed::{fit_embedding_with, EmbedOptions, OffsetMode};
use lrdpg::eval::{latent_nmse, normalized_jaccard};
use lrdpg::generators::presets::{two_dense_clusters, Panel};
use lrdpg::generators::{sample_erdos_renyi, sample_logistic_rdpg, sample_sbm, LatentConfig, SbmSpec};
use lrdpg::{Graph, NodeLabels};

use crate::bench::{mean_scores, read_config, run_bench, BenchConfig, ModelSource};
use crate::io::{DatasetName, EmbeddingMeta};

#[derive(Debug, Parser)]
#[command(name = "lrdpg", version, about = "Logistic RDPG embedding and spectral clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph (and its communities) from a generative model.
    Generate(GenerateArgs),
    /// Fit latent positions and write them as CSV.
    Embed(EmbedArgs),
    /// Cluster nodes with one of the spectral methods.
    Cluster(ClusterArgs),
    /// Score predicted communities or latent positions against the truth.
    Eval(EvalArgs),
    /// Run a benchmark sweep and write one CSV row per trial and method.
    Bench(BenchArgs),
    /// Draw a 1-D or 2-D embedding as SVG.
    Plot(PlotArgs),
    /// Download the political blogs network into the data directory.
    FetchData(FetchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Sbm,
    Er,
    Rdpg,
    Panel,
    TwoClusters,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// JSON model description (block model or latent configuration).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Block sizes, e.g. `500,500`.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Block probabilities, rows separated by `;`, e.g. `0.07,0.03;0.03,0.07`.
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub panel: Option<Panel>,
    #[arg(long)]
    pub signal: Option<f64>,
    /// Squared latent coordinate of the two dense clusters.
    #[arg(long, default_value_t = 1.0)]
    pub strength: f64,
    #[arg(long, default_value_t = 250)]
    pub cluster_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge list output; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Community labels output.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// True latent positions output (latent models only).
    #[arg(long)]
    pub latent: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphSource {
    /// Edge list file.
    #[arg(long, conflicts_with = "dataset")]
    pub graph: Option<PathBuf>,
    /// Built-in network.
    #[arg(long, value_enum)]
    pub dataset: Option<DatasetName>,
}

impl GraphSource {
    fn load(&self) -> Result<(Graph, Option<NodeLabels>)> {
        match (&self.graph, self.dataset) {
            (Some(p), _) => Ok((io::read_graph(p)?, None)),
            (None, Some(name)) => {
                let ds = io::load_dataset(name)?;
                Ok((ds.graph, Some(ds.labels)))
            }
            (None, None) => bail!("give --graph FILE or --dataset NAME"),
        }
    }
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Hold the offset at the value implied by the edge density.
    #[arg(long)]
    pub fixed_mu: bool,
    /// Remove nodes without edges before fitting.
    #[arg(long)]
    pub drop_isolated: bool,
    /// CSV output (a `.json` fit summary is written next to it); stdout if
    /// omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, default_value = "logistic-rdpg")]
    pub method: Method,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    /// Bethe Hessian parameter; defaults to the square root of the mean degree.
    #[arg(long)]
    pub bethe_r: Option<f64>,
    #[arg(long)]
    pub fixed_mu: bool,
    /// Labels output; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// True communities file.
    #[arg(long, conflicts_with = "dataset")]
    pub truth: Option<PathBuf>,
    /// Take the true communities from a built-in network.
    #[arg(long, value_enum)]
    pub dataset: Option<DatasetName>,
    /// Predicted communities file.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Number of communities; defaults to the number of true communities.
    #[arg(long)]
    pub k: Option<usize>,
    /// True latent positions (CSV) to compare with `--embedding`.
    #[arg(long, requires = "embedding")]
    pub latent_truth: Option<PathBuf>,
    #[arg(long)]
    pub embedding: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// JSON benchmark configuration; the flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub panel: Option<Panel>,
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Also maximize the likelihood directly (graphs up to 200 nodes).
    #[arg(long)]
    pub oracle: bool,
    /// CSV output; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    /// Communities used for colours.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Graph used for the degree annotation.
    #[arg(long, conflicts_with = "dataset")]
    pub graph: Option<PathBuf>,
    /// Built-in network supplying both graph and communities.
    #[arg(long, value_enum)]
    pub dataset: Option<DatasetName>,
    #[arg(long, default_value = "")]
    pub title: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Import a local copy (zip archive or GML) instead of downloading.
    #[arg(long)]
    pub from: Option<PathBuf>,
    /// Expected SHA-256 of the archive.
    #[arg(long)]
    pub sha256: Option<String>,
    /// Fetch again even if the data is already present.
    #[arg(long)]
    pub force: bool,
}

/// Writes to a file, or stdout when no path is given.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad probability {x:?}")))
                .collect()
        })
        .collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Reads a labels file whose node count is not known in advance.
fn read_labels_any(path: &Path) -> Result<NodeLabels> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let n = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_whitespace().next()?.parse::<usize>().ok())
        .max()
        .map_or(0, |m| m + 1);
    NodeLabels::parse(&text, n).with_context(|| format!("reading {}", path.display()))
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let mut latent: Option<Vec<Vec<f64>>> = None;
    let (g, labels) = match a.model {
        ModelKind::Sbm => {
            let spec = match &a.spec {
                Some(p) => read_json::<SbmSpec>(p)?,
                None => {
                    let q = a.q.as_deref().context("--q is required without --spec")?;
                    SbmSpec::new(a.sizes.clone(), parse_matrix(q)?)?
                }
            };
            let (g, l) = sample_sbm(&spec, a.seed)?;
            (g, Some(l))
        }
        ModelKind::Er => {
            let n = a.n.context("--n is required")?;
            let p = a.p.context("--p is required")?;
            (sample_erdos_renyi(n, p, a.seed)?, None)
        }
        ModelKind::Rdpg => {
            let cfg: LatentConfig = read_json(a.spec.as_deref().context("--spec is required")?)?;
            cfg.validate()?;
            let g = sample_logistic_rdpg(&cfg, a.seed)?;
            latent = Some(cfg.v);
            (g, None)
        }
        ModelKind::Panel => {
            let panel = a.panel.context("--panel is required")?;
            let signal = a.signal.unwrap_or_else(|| panel.strong_signal());
            let model = panel.model(signal, a.seed)?;
            latent = model.latent().map(|c| c.v.clone());
            let (g, l) = model.sample(a.seed)?;
            (g, Some(l))
        }
        ModelKind::TwoClusters => {
            let (spec, v) = two_dense_clusters(a.cluster_size, a.strength)?;
            let (g, l) = sample_sbm(&spec, a.seed)?;
            latent = Some(v);
            (g, Some(l))
        }
    };
    let mut w = output(a.out.as_deref())?;
    g.write_edge_list(&mut w)?;
    w.flush()?;
    if let Some(path) = &a.labels {
        let labels = labels.context("this model has no communities")?;
        io::write_labels(&labels, path)?;
    }
    if let Some(path) = &a.latent {
        let v = latent.context("this model has no latent positions")?;
        let nodes: Vec<usize> = (0..v.len()).collect();
        let d = v.first().map_or(0, Vec::len);
        io::write_embedding(output(Some(path))?, &nodes, &v, d)?;
    }
    Ok(())
}

fn offset_mode(fixed: bool) -> OffsetMode {
    if fixed {
        OffsetMode::FromDensity
    } else {
        OffsetMode::Free
    }
}

fn cmd_embed(a: &EmbedArgs) -> Result<()> {
    let (g, _) = a.source.load()?;
    let (g, nodes) = if a.drop_isolated {
        g.drop_isolated()?
    } else {
        let n = g.node_count();
        (g, (0..n).collect())
    };
    let emb = fit_embedding_with(&g, a.dim, &EmbedOptions { offset: offset_mode(a.fixed_mu) })?;
    io::write_embedding(output(a.out.as_deref())?, &nodes, &emb.full_latent(), a.dim)?;
    let meta = EmbeddingMeta::new(&emb, &g);
    if let Some(path) = &a.out {
        let side = io::sidecar_path(path);
        std::fs::write(&side, serde_json::to_string_pretty(&meta)? + "\n")
            .with_context(|| format!("writing {}", side.display()))?;
    }
    if !meta.converged {
        eprintln!("warning: scaling regression did not converge in {} iterations", meta.iterations);
    }
    Ok(())
}

fn cmd_cluster(a: &ClusterArgs) -> Result<()> {
    let (g, _) = a.source.load()?;
    let opts = ClusterOptions {
        restarts: a.restarts,
        bethe_r: a.bethe_r,
        embed: EmbedOptions { offset: offset_mode(a.fixed_mu) },
    };
    let coords = spectral_coordinates(&g, a.method, a.dim, &opts)?;
    let labels = cluster_coordinates(&coords, a.k, a.seed, a.restarts)?;
    let mut w = output(a.out.as_deref())?;
    labels.write(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let mut printed = false;
    let truth = match (&a.truth, a.dataset) {
        (Some(p), _) => Some(read_labels_any(p)?),
        (None, Some(name)) => Some(io::load_dataset(name)?.labels),
        (None, None) => None,
    };
    if let Some(truth) = truth {
        let path = a.pred.as_deref().context("--pred is required to score communities")?;
        let pred = io::read_labels(path, truth.len())?;
        let k = a.k.unwrap_or(truth.k());
        let score = normalized_jaccard(&truth, &pred, k)?;
        println!("jaccard\t{score:?}");
        printed = true;
    }
    if let (Some(t), Some(e)) = (&a.latent_truth, &a.embedding) {
        let truth = io::read_embedding(t)?;
        let est = io::read_embedding(e)?;
        ensure!(truth.nodes == est.nodes, "latent files list different nodes");
        println!("nmse\t{:?}", latent_nmse(&truth.coords, &est.coords)?);
        printed = true;
    }
    ensure!(printed, "nothing to evaluate: give --truth/--dataset with --pred, or --latent-truth with --embedding");
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let mut cfg = match (&a.config, a.panel) {
        (Some(p), _) => read_config(p)?,
        (None, Some(panel)) => BenchConfig::for_panel(panel, 1, 0),
        (None, None) => bail!("give --config FILE or --panel"),
    };
    if let Some(panel) = a.panel {
        if a.config.is_some() {
            cfg.model = ModelSource::Panel(panel);
        }
    }
    if !a.methods.is_empty() {
        cfg.methods = a.methods.clone();
    }
    if !a.grid.is_empty() {
        cfg.grid = a.grid.clone();
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.dim.is_some() {
        cfg.dim = a.dim;
    }
    if a.k.is_some() {
        cfg.k = a.k;
    }
    if let Some(r) = a.restarts {
        cfg.restarts = r;
    }
    cfg.oracle |= a.oracle;
    if a.out.is_some() {
        cfg.output = a.out.clone();
    }
    let rows = run_bench(&cfg, output(cfg.output.as_deref())?)?;
    for &m in &cfg.methods {
        let means: Vec<String> = mean_scores(&rows, m)
            .iter()
            .map(|(s, j)| format!("{s}:{j:.3}"))
            .collect();
        eprintln!("{:>18}  {}", m.name(), means.join("  "));
    }
    Ok(())
}

fn cmd_plot(a: &PlotArgs) -> Result<()> {
    let table = io::read_embedding(&a.embedding)?;
    let (graph, mut labels) = match (&a.graph, a.dataset) {
        (Some(p), _) => (Some(io::read_graph(p)?), None),
        (None, Some(name)) => {
            let ds = io::load_dataset(name)?;
            (Some(ds.graph), Some(ds.labels))
        }
        (None, None) => (None, None),
    };
    if let Some(p) = &a.labels {
        labels = Some(read_labels_any(p)?);
    }
    let pick = |len: usize, what: &str| -> Result<()> {
        if let Some(&bad) = table.nodes.iter().find(|&&v| v >= len) {
            bail!("embedding node {bad} is not in the {what} ({len} nodes)");
        }
        Ok(())
    };
    let row_labels: Option<Vec<usize>> = match &labels {
        Some(l) => {
            pick(l.len(), "labels")?;
            Some(table.nodes.iter().map(|&v| l.as_slice()[v]).collect())
        }
        None => None,
    };
    let degrees: Option<Vec<usize>> = match &graph {
        Some(g) => {
            pick(g.node_count(), "graph")?;
            let deg = g.degrees();
            Some(table.nodes.iter().map(|&v| deg[v]).collect())
        }
        None => None,
    };
    let plot = plot::render(&plot::PlotInput {
        coords: &table.coords,
        labels: row_labels.as_deref().zip(labels.as_ref().map(|l| l.names())),
        degrees: degrees.as_deref(),
        title: &a.title,
    })?;
    std::fs::write(&a.out, &plot.svg).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(r) = plot.degree_correlation {
        println!("degree_correlation\t{r:?}");
    }
    Ok(())
}

fn cmd_fetch(a: &FetchArgs) -> Result<()> {
    let res = fetch::fetch_polblogs(&fetch::FetchOptions {
        from: a.from.clone(),
        sha256: a.sha256.clone(),
        force: a.force,
        dir: None,
    })?;
    if res.first_use {
        eprintln!("recorded sha256 {} for future downloads", res.sha256);
    }
    println!("{}\t{} nodes with links", res.path.display(), res.nodes);
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Plot(a) => cmd_plot(a),
        Command::FetchData(a) => cmd_fetch(a),
    }
}
