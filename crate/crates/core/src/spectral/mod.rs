//! Matrix normalizations of a graph and the eigensolvers that act on them.

mod eigen;
mod matrix;

pub use eigen::{bottom_eigenpairs_skip, eigenvalues, eigh, top_eigenpairs, EigenSystem};
pub use matrix::SymmetricMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Dense 0/1 adjacency matrix.
pub fn build_adjacency(g: &Graph) -> SymmetricMatrix {
    let mut m = SymmetricMatrix::zeros(g.node_count());
    for &(i, j) in g.edges() {
        m.set(i, j, 1.0);
    }
    m
}

/// Mean-centered adjacency `A - p 1 1^T`, where `p` is the mean
/// off-diagonal entry of `A` (the edge density). The diagonal is shifted
/// too, to `-p`.
pub fn build_centered(g: &Graph) -> Result<SymmetricMatrix> {
    let p = g.density()?;
    let n = g.node_count();
    let mut data = vec![-p; n * n];
    for &(i, j) in g.edges() {
        data[i * n + j] = 1.0 - p;
        data[j * n + i] = 1.0 - p;
    }
    SymmetricMatrix::from_row_major(n, data)
}

/// Modularity matrix `A - d d^T / 2|E|` with `d` the degree vector.
pub fn build_modularity(g: &Graph) -> Result<SymmetricMatrix> {
    let m2 = 2.0 * g.edge_count() as f64;
    if m2 == 0.0 {
        return Err(Error::domain("modularity matrix is undefined for an edgeless graph"));
    }
    let n = g.node_count();
    let deg: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            data.push(-deg[i] * deg[j] / m2);
        }
    }
    for &(i, j) in g.edges() {
        data[i * n + j] += 1.0;
        data[j * n + i] += 1.0;
    }
    SymmetricMatrix::from_row_major(n, data)
}

/// Symmetric normalized Laplacian `I - D^{-1/2} A D^{-1/2}`. Every node
/// must have at least one neighbor.
pub fn build_norm_laplacian(g: &Graph) -> Result<SymmetricMatrix> {
    let deg = g.degrees();
    if let Some(v) = deg.iter().position(|&d| d == 0) {
        return Err(Error::domain(format!(
            "normalized Laplacian needs positive degrees; node {v} is isolated"
        )));
    }
    let inv_sqrt: Vec<f64> = deg.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let mut m = SymmetricMatrix::identity(g.node_count());
    for &(i, j) in g.edges() {
        m.set(i, j, -inv_sqrt[i] * inv_sqrt[j]);
    }
    Ok(m)
}

/// Bethe Hessian together with the `r` it was built with.
#[derive(Debug, Clone)]
pub struct BetheHessian {
    pub matrix: SymmetricMatrix,
    pub r: f64,
    /// Set when the mean degree was <= 1 and `r` fell back to `1 + 1e-6`.
    pub fallback: bool,
}

/// `H(r) = (r^2 - 1) I - r A + D` with `r = sqrt(mean degree)` unless an
/// explicit `r` is given.
pub fn build_bethe_hessian(g: &Graph, r: Option<f64>) -> Result<BetheHessian> {
    let n = g.node_count();
    let deg = g.degrees();
    let (r, fallback) = match r {
        Some(r) if r.is_finite() && r > 0.0 => (r, false),
        Some(r) => return Err(Error::validation(format!("Bethe Hessian r must be > 0, got {r}"))),
        None => {
            let mean = 2.0 * g.edge_count() as f64 / n as f64;
            if mean > 1.0 {
                (mean.sqrt(), false)
            } else {
                (1.0 + 1e-6, true)
            }
        }
    };
    let mut m = SymmetricMatrix::zeros(n);
    for (i, &d) in deg.iter().enumerate() {
        m.set(i, i, r * r - 1.0 + d as f64);
    }
    for &(i, j) in g.edges() {
        m.set(i, j, -r);
    }
    Ok(BetheHessian {
        matrix: m,
        r,
        fallback,
    })
}
