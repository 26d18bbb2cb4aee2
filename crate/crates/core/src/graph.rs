//! Undirected simple graphs, node labels and their text formats.
//!
//! Edge lists are whitespace-separated `i j` pairs with 0-based ids. Lines
//! starting with `#` are comments, except for an optional `# n=<int>` header
//! that fixes the node count (so trailing isolated nodes survive a round
//! trip). Label files hold `node<TAB>label` lines where labels are arbitrary
//! strings, densified in first-appearance order.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted, deduplicated, each pair stored with `i < j`.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from unordered pairs. Duplicates and reversed pairs
    /// collapse; self-loops and out-of-range ids are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::validation("graph must have at least one node"));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::validation(format!("self-loop on node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::validation(format!(
                    "edge ({a}, {b}) references a node >= n = {n}"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges,
            neighbors,
        })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_edges(n, std::iter::empty())
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    /// Fraction of unordered pairs joined by an edge, `2|E| / (n(n-1))`.
    pub fn density(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::domain("density needs at least two nodes"));
        }
        let n = self.n as f64;
        Ok(2.0 * self.edges.len() as f64 / (n * (n - 1.0)))
    }

    /// Dense row-major 0/1 adjacency matrix.
    pub fn adjacency_bits(&self) -> Vec<bool> {
        let n = self.n;
        let mut bits = vec![false; n * n];
        for &(i, j) in &self.edges {
            bits[i * n + j] = true;
            bits[j * n + i] = true;
        }
        bits
    }

    /// Removes zero-degree nodes. Returns the induced graph and, for each new
    /// index, the node id it had in `self`.
    pub fn drop_isolated(&self) -> Result<(Graph, Vec<usize>)> {
        let kept: Vec<usize> = (0..self.n)
            .filter(|&i| !self.neighbors[i].is_empty())
            .collect();
        if kept.is_empty() {
            return Err(Error::domain("graph has no edges; every node is isolated"));
        }
        let mut remap = vec![usize::MAX; self.n];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let g = Graph::from_edges(
            kept.len(),
            self.edges.iter().map(|&(i, j)| (remap[i], remap[j])),
        )?;
        Ok((g, kept))
    }

    /// Reads an edge list. See the module docs for the format.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut header_n = None;
        let mut edges = Vec::new();
        let mut max_id = None::<usize>;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(value) = comment.trim().strip_prefix("n=") {
                    let n = value.trim().parse::<usize>().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("bad node-count header {trimmed:?}"),
                    })?;
                    header_n = Some(n);
                }
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let next_id = |fields: &mut std::str::SplitWhitespace<'_>| {
                fields
                    .next()
                    .and_then(|f| f.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse {
                        line: lineno,
                        message: format!("expected two nonnegative integers, got {trimmed:?}"),
                    })
            };
            let a = next_id(&mut fields)?;
            let b = next_id(&mut fields)?;
            if fields.next().is_some() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected two fields, got {trimmed:?}"),
                });
            }
            if a == b {
                return Err(Error::validation(format!(
                    "line {lineno}: self-loop on node {a}"
                )));
            }
            max_id = Some(max_id.map_or(a.max(b), |m| m.max(a).max(b)));
            edges.push((a, b));
        }
        let n = match (header_n, max_id) {
            (Some(n), _) => n,
            (None, Some(m)) => m + 1,
            (None, None) => {
                return Err(Error::validation(
                    "edge list is empty and has no `# n=` header",
                ))
            }
        };
        Self::from_edges(n, edges)
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        Self::read_edge_list(text.as_bytes())
    }

    /// Writes the `# n=` header followed by one tab-separated edge per line.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# n={}", self.n)?;
        for &(i, j) in &self.edges {
            writeln!(w, "{i}\t{j}")?;
        }
        Ok(())
    }
}

/// Community assignment for every node, with labels densified to `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLabels {
    labels: Vec<usize>,
    names: Vec<String>,
}

impl NodeLabels {
    /// Labels given directly as integers; `k` is `max + 1` and names are the
    /// decimal ids.
    pub fn from_assignments(labels: Vec<usize>) -> Self {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        Self {
            labels,
            names: (0..k).map(|c| c.to_string()).collect(),
        }
    }

    pub fn with_names(labels: Vec<usize>, names: Vec<String>) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&c| c >= names.len()) {
            return Err(Error::validation(format!(
                "label {bad} has no name (k = {})",
                names.len()
            )));
        }
        Ok(Self { labels, names })
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Restricts to the given node ids, e.g. the index map returned by
    /// [`Graph::drop_isolated`]. Labels that no longer occur are removed and
    /// the rest re-densified.
    pub fn select(&self, nodes: &[usize]) -> Self {
        let mut remap = HashMap::new();
        let mut names = Vec::new();
        let labels = nodes
            .iter()
            .map(|&v| {
                let old = self.labels[v];
                *remap.entry(old).or_insert_with(|| {
                    names.push(self.names[old].clone());
                    names.len() - 1
                })
            })
            .collect();
        Self { labels, names }
    }

    pub fn read<R: BufRead>(reader: R, n: usize) -> Result<Self> {
        let mut labels = vec![None::<usize>; n];
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.splitn(2, char::is_whitespace);
            let node = fields
                .next()
                .and_then(|f| f.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: format!("expected `node label`, got {trimmed:?}"),
                })?;
            let name = fields.next().map(str::trim).unwrap_or("");
            if name.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("missing label for node {node}"),
                });
            }
            if node >= n {
                return Err(Error::Range {
                    what: "node id",
                    detail: format!("line {lineno}: node {node} >= n = {n}"),
                });
            }
            let next = names.len();
            let id = *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                next
            });
            labels[node] = Some(id);
        }
        let missing: Vec<String> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_none())
            .map(|(i, _)| i.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::validation(format!(
                "no label for node(s) {}",
                missing.join(", ")
            )));
        }
        Ok(Self {
            labels: labels.into_iter().map(Option::unwrap).collect(),
            names,
        })
    }

    pub fn parse(text: &str, n: usize) -> Result<Self> {
        Self::read(text.as_bytes(), n)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (node, &c) in self.labels.iter().enumerate() {
            writeln!(w, "{node}\t{}", self.names[c])?;
        }
        Ok(())
    }
}
