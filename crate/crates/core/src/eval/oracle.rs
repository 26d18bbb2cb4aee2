//! Direct maximization of the exact logistic likelihood over `(V, mu)` by
//! gradient ascent. Slow (every step touches all pairs) and only meant for
//! small graphs, as a reference the spectral embedding is compared against.

use rand::Rng;

use crate::embed::{fit_embedding, log_likelihood};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::{logistic, rng, softplus};

pub const MAX_ORACLE_NODES: usize = 200;

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Random starts in addition to the supplied (or default) one.
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop when the gradient infinity norm drops below this.
    pub tolerance: f64,
    /// Steps that would push any `|v_i . v_j - mu|` above this are rejected.
    pub saturation: f64,
    /// Half-width of the uniform distribution for random starting positions.
    pub init_spread: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iterations: 5000,
            tolerance: 1e-6,
            saturation: 30.0,
            init_spread: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub v: Vec<Vec<f64>>,
    pub mu: f64,
    pub loglik: f64,
    pub converged: bool,
    /// `None` for the supplied or default start, else the random restart index.
    pub restart: Option<usize>,
}

/// Log-likelihood and its gradient with respect to every `v_i` and `mu`.
pub struct Gradient {
    pub loglik: f64,
    pub v: Vec<Vec<f64>>,
    pub mu: f64,
}

pub fn loglik_gradient(g: &Graph, v: &[Vec<f64>], mu: f64) -> Gradient {
    let n = g.node_count();
    let bits = g.adjacency_bits();
    gradient_with_bits(&bits, n, v, mu)
}

fn gradient_with_bits(bits: &[bool], n: usize, v: &[Vec<f64>], mu: f64) -> Gradient {
    let d = v.first().map_or(0, Vec::len);
    let mut gv = vec![vec![0.0; d]; n];
    let mut gmu = 0.0;
    let mut ll = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let z = crate::embed::dot(&v[i], &v[j]) - mu;
            let a = if bits[i * n + j] { 1.0 } else { 0.0 };
            ll += a * z - softplus(z);
            let r = a - logistic(z);
            for k in 0..d {
                gv[i][k] += r * v[j][k];
                gv[j][k] += r * v[i][k];
            }
            gmu -= r;
        }
    }
    Gradient {
        loglik: ll,
        v: gv,
        mu: gmu,
    }
}

fn within_guard(n: usize, v: &[Vec<f64>], mu: f64, limit: f64) -> bool {
    (0..n).all(|i| (i + 1..n).all(|j| (crate::embed::dot(&v[i], &v[j]) - mu).abs() <= limit))
}

fn ascend(
    bits: &[bool],
    n: usize,
    mut v: Vec<Vec<f64>>,
    mut mu: f64,
    opts: &OracleOptions,
) -> (Vec<Vec<f64>>, f64, f64, bool) {
    let mut grad = gradient_with_bits(bits, n, &v, mu);
    let mut step = 1e-2;
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        let gnorm_inf = grad
            .v
            .iter()
            .flatten()
            .fold(grad.mu.abs(), |m, x| m.max(x.abs()));
        if gnorm_inf <= opts.tolerance {
            converged = true;
            break;
        }
        let gnorm2: f64 = grad.v.iter().flatten().map(|x| x * x).sum::<f64>() + grad.mu * grad.mu;
        let mut t = step * 2.0;
        let mut accepted = None;
        while t > 1e-14 {
            let cand_v: Vec<Vec<f64>> = v
                .iter()
                .zip(&grad.v)
                .map(|(vi, gi)| vi.iter().zip(gi).map(|(a, b)| a + t * b).collect())
                .collect();
            let cand_mu = mu + t * grad.mu;
            if within_guard(n, &cand_v, cand_mu, opts.saturation) {
                let cand = gradient_with_bits(bits, n, &cand_v, cand_mu);
                if cand.loglik >= grad.loglik + 1e-4 * t * gnorm2 {
                    accepted = Some((cand_v, cand_mu, cand));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((nv, nmu, ng)) => {
                v = nv;
                mu = nmu;
                grad = ng;
                step = t;
            }
            None => break,
        }
    }
    (v, mu, grad.loglik, converged)
}

/// Best local maximizer over the starting point (the supplied `init`, or
/// the spectral embedding) and `options.restarts` random starts.
pub fn oracle_mle(
    g: &Graph,
    d: usize,
    seed: u64,
    init: Option<(Vec<Vec<f64>>, f64)>,
    options: &OracleOptions,
) -> Result<OracleResult> {
    let n = g.node_count();
    if n > MAX_ORACLE_NODES {
        return Err(Error::Range {
            what: "oracle graph size",
            detail: format!("n = {n} exceeds {MAX_ORACLE_NODES}"),
        });
    }
    if n < 2 || d == 0 {
        return Err(Error::validation("oracle needs n >= 2 and d >= 1"));
    }
    let bits = g.adjacency_bits();
    let density = g.density()?;
    let mu0 = if density > 0.0 && density < 1.0 {
        -crate::logit(density)
    } else {
        0.0
    };

    let mut starts: Vec<(Option<usize>, Vec<Vec<f64>>, f64)> = Vec::new();
    let supplied = match init {
        Some((v, mu)) => {
            if v.len() != n || v.iter().any(|r| r.len() != d) {
                return Err(Error::validation(format!("oracle init must be {n}x{d}")));
            }
            Some((v, mu))
        }
        None if d < n && density > 0.0 && density < 1.0 => {
            let emb = fit_embedding(g, d)?;
            Some((emb.full_latent(), emb.mu_hat))
        }
        None => None,
    };
    if let Some((v, mu)) = supplied {
        if within_guard(n, &v, mu, options.saturation) {
            starts.push((None, v, mu));
        }
    }
    for restart in 0..options.restarts {
        let mut r = rng::stream(seed, restart as u64);
        let v = (0..n)
            .map(|_| (0..d).map(|_| r.gen_range(-options.init_spread..=options.init_spread)).collect())
            .collect();
        starts.push((Some(restart), v, mu0));
    }

    let mut best: Option<OracleResult> = None;
    for (restart, v, mu) in starts {
        let (v, mu, loglik, converged) = ascend(&bits, n, v, mu, options);
        if best.as_ref().map_or(true, |b| loglik > b.loglik) {
            best = Some(OracleResult {
                v,
                mu,
                loglik,
                converged,
                restart,
            });
        }
    }
    let best = best.ok_or_else(|| Error::validation("oracle has no admissible starting point"))?;
    debug_assert!((best.loglik - log_likelihood(g, &best.v, best.mu)).abs() < 1e-6 * best.loglik.abs().max(1.0));
    Ok(best)
}
