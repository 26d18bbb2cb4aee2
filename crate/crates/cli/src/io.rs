//! File formats owned by the CLI: embedding CSV with its JSON sidecar, and
//! graph/label inputs that may come from a file or a named dataset.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lrdpg::datasets::{self, Dataset};
use lrdpg::embed::Embedding;
use lrdpg::{Graph, NodeLabels};
use serde::{Deserialize, Serialize};

/// Built-in networks selectable with `--dataset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DatasetName {
    Karate,
    Polblogs,
}

pub fn load_dataset(name: DatasetName) -> Result<Dataset> {
    match name {
        DatasetName::Karate => Ok(datasets::karate()),
        DatasetName::Polblogs => datasets::load_polblogs()?.with_context(|| {
            format!(
                "{} not found; run `lrdpg fetch-data` or set LRDPG_DATA_DIR",
                datasets::polblogs_path().display()
            )
        }),
    }
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Graph::read_edge_list(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

pub fn write_graph(g: &Graph, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    g.write_edge_list(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path, n: usize) -> Result<NodeLabels> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    NodeLabels::read(BufReader::new(f), n).with_context(|| format!("reading {}", path.display()))
}

pub fn write_labels(labels: &NodeLabels, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    labels.write(&mut w)?;
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

/// Fit summary stored next to an embedding CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub dim: usize,
    pub lambdas: Vec<f64>,
    pub mu_hat: f64,
    pub kept_dims: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
}

impl EmbeddingMeta {
    pub fn new(emb: &Embedding, g: &Graph) -> Self {
        Self {
            dim: emb.lambdas.len(),
            lambdas: emb.lambdas.clone(),
            mu_hat: emb.mu_hat,
            kept_dims: emb.kept_dims.clone(),
            converged: emb.fit.converged,
            iterations: emb.fit.iterations,
            log_likelihood: emb.log_likelihood(g),
        }
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Node coordinates as read back from an embedding CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub nodes: Vec<usize>,
    pub coords: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }
}

/// `node,x1,...,xd`, one row per node. `nodes` maps rows to node ids of
/// the input graph.
pub fn write_embedding<W: Write>(w: W, nodes: &[usize], coords: &[Vec<f64>], dim: usize) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["node".to_string()];
    header.extend((1..=dim).map(|k| format!("x{k}")));
    out.write_record(&header)?;
    for (&node, row) in nodes.iter().zip(coords) {
        let mut rec = vec![node.to_string()];
        rec.extend((0..dim).map(|k| row.get(k).copied().unwrap_or(0.0).to_string()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_embedding(path: &Path) -> Result<EmbeddingTable> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("node") {
        bail!("{}: first column must be `node`", path.display());
    }
    let dim = header.len() - 1;
    let mut nodes = Vec::new();
    let mut coords = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let node = rec[0]
            .parse::<usize>()
            .with_context(|| format!("{}:{line}: bad node id {:?}", path.display(), &rec[0]))?;
        let row = (1..=dim)
            .map(|k| {
                rec[k]
                    .parse::<f64>()
                    .with_context(|| format!("{}:{line}: bad coordinate {:?}", path.display(), &rec[k]))
            })
            .collect::<Result<Vec<_>>>()?;
        nodes.push(node);
        coords.push(row);
    }
    Ok(EmbeddingTable { nodes, coords })
}
