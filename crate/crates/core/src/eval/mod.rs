//! Scores for recovered communities and latent positions, plus the
//! likelihood oracle.

mod hungarian;
pub mod oracle;

pub use hungarian::{brute_force_assignment, max_assignment};
pub use oracle::{loglik_gradient, oracle_mle, OracleOptions, OracleResult, MAX_ORACLE_NODES};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::NodeLabels;
use crate::spectral::{eigenvalues, SymmetricMatrix};

/// Per-community recall under the best matching of predicted to true
/// communities, rescaled so that a perfect partition scores 1 and a
/// single-cluster prediction scores 0.
pub fn normalized_jaccard(truth: &NodeLabels, pred: &NodeLabels, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::Range {
            what: "k",
            detail: format!("normalized score needs k >= 2, got {k}"),
        });
    }
    if truth.len() != pred.len() {
        return Err(Error::validation(format!(
            "truth has {} nodes, prediction has {}",
            truth.len(),
            pred.len()
        )));
    }
    let mut sizes = vec![0usize; k];
    let mut overlap = vec![vec![0usize; k]; k];
    for (&t, &p) in truth.as_slice().iter().zip(pred.as_slice()) {
        if t >= k {
            return Err(Error::validation(format!("true label {t} outside 0..{k}")));
        }
        if p >= k {
            return Err(Error::validation(format!("predicted label {p} outside 0..{k}")));
        }
        sizes[t] += 1;
        overlap[t][p] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::validation(format!("true community {empty} is empty")));
    }
    let s: Vec<Vec<f64>> = overlap
        .iter()
        .zip(&sizes)
        .map(|(row, &size)| row.iter().map(|&c| c as f64 / size as f64).collect())
        .collect();
    let (_, total) = max_assignment(&s)?;
    Ok((total - 1.0) / (k as f64 - 1.0))
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::validation("correlation needs two equal-length series of length >= 2"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::domain("correlation of a constant series"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            out[o] = avg;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson(&ranks(x), &ranks(y))
}

/// One minus the squared correlation between true and estimated positions.
/// For `d > 1` the estimate is first rotated onto the truth (orthogonal
/// Procrustes after centering), which reduces to `1 - rho^2` when `d = 1`.
pub fn latent_nmse(v_true: &[Vec<f64>], v_est: &[Vec<f64>]) -> Result<f64> {
    let n = v_true.len();
    if n != v_est.len() || n < 2 {
        return Err(Error::validation("latent positions must have the same n >= 2 rows"));
    }
    let d = v_true[0].len();
    if d == 0 || v_true.iter().chain(v_est).any(|r| r.len() != d) {
        return Err(Error::validation("latent positions must share one dimension >= 1"));
    }
    let centered = |v: &[Vec<f64>]| {
        let mean: Vec<f64> = (0..d)
            .map(|k| v.iter().map(|r| r[k]).sum::<f64>() / n as f64)
            .collect();
        v.iter()
            .map(|r| r.iter().zip(&mean).map(|(a, m)| a - m).collect::<Vec<f64>>())
            .collect::<Vec<_>>()
    };
    let t = centered(v_true);
    let e = centered(v_est);
    let norm2 = |v: &[Vec<f64>]| v.iter().flatten().map(|x| x * x).sum::<f64>();
    let (nt, ne) = (norm2(&t), norm2(&e));
    if nt == 0.0 || ne == 0.0 {
        return Err(Error::domain("latent positions have zero variance"));
    }
    // Sum of singular values of E^T T, via the eigenvalues of (E^T T)^T (E^T T).
    let mut cross = vec![vec![0.0; d]; d];
    for (er, tr) in e.iter().zip(&t) {
        for a in 0..d {
            for b in 0..d {
                cross[a][b] += er[a] * tr[b];
            }
        }
    }
    let nuclear = if d == 1 {
        cross[0][0].abs()
    } else {
        let mut gram = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                gram[a * d + b] = (0..d).map(|c| cross[c][a] * cross[c][b]).sum();
            }
        }
        let m = SymmetricMatrix::from_row_major(d, gram)?;
        eigenvalues(&m)?.iter().map(|&l| l.max(0.0).sqrt()).sum()
    };
    let r2 = (nuclear * nuclear / (nt * ne)).min(1.0);
    Ok(1.0 - r2)
}

/// Scores of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub jaccard: f64,
    pub nmse: Option<f64>,
    pub loglik_algorithm: f64,
    pub loglik_oracle: Option<f64>,
}

impl ScoreReport {
    /// `jaccard,nmse,ll_alg` and, if requested, `ll_oracle`. Missing values
    /// are written as empty fields.
    pub fn csv_fields(&self, with_oracle: bool) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut s = format!("{},{},{}", self.jaccard, opt(self.nmse), self.loglik_algorithm);
        if with_oracle {
            s.push(',');
            s.push_str(&opt(self.loglik_oracle));
        }
        s
    }
}
