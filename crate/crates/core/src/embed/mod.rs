//! Maximum-likelihood latent positions for the logistic random dot product
//! graph.
//!
//! [`fit_embedding`] runs the full pipeline:
//!
//! 1. center the adjacency matrix by its off-diagonal mean;
//! 2. take the `d` eigenvectors with the largest eigenvalues;
//! 3. regress the upper-triangular adjacency entries on the matching
//!    entries of each `e_k e_k^T`, with nonnegative coefficients `lambda_k`
//!    and an intercept `-mu`;
//! 4. return `V = [sqrt(lambda_1) e_1, ..., sqrt(lambda_d) e_d]`, dropping
//!    columns whose coefficient is zero.

pub mod regression;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::{build_centered, top_eigenpairs};
use crate::softplus;

pub use regression::{
    fit_nonneg_logistic, DenseDesign, Intercept, RegressionData, RegressionFit, RegressionOptions,
};

/// Offset for which `l(-mu)` equals the edge density.
pub fn estimate_mu(g: &Graph) -> Result<f64> {
    let p = g.density()?;
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::domain(format!(
            "offset is undefined for density {p}; the graph must be neither empty nor complete"
        )));
    }
    Ok(-crate::logit(p))
}

/// Unordered-pair log-likelihood
/// `sum_{i<j} A_ij log l(z_ij) + (1 - A_ij) log(1 - l(z_ij))` with
/// `z_ij = v_i . v_j - mu`.
pub fn log_likelihood(g: &Graph, v: &[Vec<f64>], mu: f64) -> f64 {
    let n = g.node_count();
    assert_eq!(v.len(), n, "one latent row per node");
    let bits = g.adjacency_bits();
    let mut ll = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let z = dot(&v[i], &v[j]) - mu;
            ll += if bits[i * n + j] { z } else { 0.0 } - softplus(z);
        }
    }
    ll
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Regression design over node pairs `i < j`: feature `k` is
/// `e_k[i] * e_k[j]`, target is `A_ij`.
pub struct PairDesign<'a> {
    /// Per-node coordinates `(e_1[i], ..., e_d[i])`.
    coords: Vec<Vec<f64>>,
    bits: Vec<bool>,
    graph: &'a Graph,
}

impl<'a> PairDesign<'a> {
    pub fn new(graph: &'a Graph, eigvecs: &[Vec<f64>]) -> Self {
        let n = graph.node_count();
        let coords = (0..n)
            .map(|i| eigvecs.iter().map(|e| e[i]).collect())
            .collect();
        Self {
            coords,
            bits: graph.adjacency_bits(),
            graph,
        }
    }
}

impl RegressionData for PairDesign<'_> {
    fn n_features(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }

    fn for_each_row(&self, f: &mut dyn FnMut(&[f64], bool)) {
        let n = self.graph.node_count();
        let d = self.n_features();
        let mut x = vec![0.0; d];
        for i in 0..n {
            let ci = &self.coords[i];
            for j in i + 1..n {
                for ((xk, a), b) in x.iter_mut().zip(ci).zip(&self.coords[j]) {
                    *xk = a * b;
                }
                f(&x, self.bits[i * n + j]);
            }
        }
    }
}

/// How the logistic offset is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetMode {
    /// Fitted jointly with the eigenvalue scalings.
    #[default]
    Free,
    /// Held at [`estimate_mu`].
    FromDensity,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EmbedOptions {
    pub offset: OffsetMode,
}

#[derive(Debug, Clone)]
pub struct Embedding {
    /// Latent positions, one row per node, one column per kept dimension.
    pub v: Vec<Vec<f64>>,
    /// Eigenvalue scalings, one per requested dimension (zeros included).
    pub lambdas: Vec<f64>,
    pub mu_hat: f64,
    /// Unscaled eigenvectors of the centered adjacency matrix.
    pub eigvecs: Vec<Vec<f64>>,
    /// Matching eigenvalues of the centered adjacency matrix.
    pub eigvals: Vec<f64>,
    /// Indices into `lambdas` of the dimensions kept in `v`.
    pub kept_dims: Vec<usize>,
    pub fit: RegressionFit,
}

impl Embedding {
    pub fn node_count(&self) -> usize {
        self.v.len()
    }

    pub fn dim(&self) -> usize {
        self.kept_dims.len()
    }

    /// All requested dimensions, including zero columns for dropped ones.
    pub fn full_latent(&self) -> Vec<Vec<f64>> {
        let n = self.eigvecs.first().map_or(0, Vec::len);
        (0..n)
            .map(|i| {
                self.lambdas
                    .iter()
                    .zip(&self.eigvecs)
                    .map(|(l, e)| l.sqrt() * e[i])
                    .collect()
            })
            .collect()
    }

    pub fn log_likelihood(&self, g: &Graph) -> f64 {
        log_likelihood(g, &self.full_latent(), self.mu_hat)
    }
}

pub fn fit_embedding(g: &Graph, d: usize) -> Result<Embedding> {
    fit_embedding_with(g, d, &EmbedOptions::default())
}

pub fn fit_embedding_with(g: &Graph, d: usize, options: &EmbedOptions) -> Result<Embedding> {
    let n = g.node_count();
    if d == 0 || d >= n {
        return Err(Error::Range {
            what: "embedding dimension",
            detail: format!("d = {d} must be in 1..{n}"),
        });
    }
    let mu_density = estimate_mu(g)?;
    let b = build_centered(g)?;
    let eig = top_eigenpairs(&b, d)?;

    let design = PairDesign::new(g, &eig.vectors);
    let intercept = match options.offset {
        OffsetMode::Free => Intercept::Free,
        OffsetMode::FromDensity => Intercept::Fixed(-mu_density),
    };
    let fit = fit_nonneg_logistic(
        &design,
        &RegressionOptions {
            intercept,
            ..RegressionOptions::default()
        },
    )?;

    let kept_dims: Vec<usize> = (0..d).filter(|&k| fit.coeffs[k] > 0.0).collect();
    let scales: Vec<f64> = kept_dims.iter().map(|&k| fit.coeffs[k].sqrt()).collect();
    let v = (0..n)
        .map(|i| {
            kept_dims
                .iter()
                .zip(&scales)
                .map(|(&k, s)| s * eig.vectors[k][i])
                .collect()
        })
        .collect();
    Ok(Embedding {
        v,
        lambdas: fit.coeffs.clone(),
        mu_hat: -fit.intercept,
        eigvecs: eig.vectors,
        eigvals: eig.values,
        kept_dims,
        fit,
    })
}
