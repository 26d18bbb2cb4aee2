//! Maximum-likelihood latent position inference for logistic random dot
//! product graphs.
//!
//! The pipeline mean-centers the adjacency matrix, takes its top
//! eigenvectors and rescales them with a nonnegativity-constrained logistic
//! regression on the upper-triangular adjacency entries. The crate also
//! carries the spectral baselines, k-means post-processing, scoring
//! utilities and a brute-force likelihood maximizer used to check the
//! spectral solution.

pub mod cluster;
pub mod datasets;
pub mod embed;
mod error;
pub mod eval;
pub mod generators;
pub mod graph;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Graph, NodeLabels};

/// Logistic sigmoid `1 / (1 + e^-x)`.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Inverse of [`logistic`]. Returns `±inf` at the endpoints.
#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_is_symmetric_and_stable() {
        assert_eq!(logistic(0.0), 0.5);
        assert!((logistic(3.0) - 0.952_574_126_822_433_4).abs() < 1e-15);
        assert!((logistic(-3.0) + logistic(3.0) - 1.0).abs() < 1e-15);
        assert!(logistic(-800.0) >= 0.0 && logistic(800.0) <= 1.0);
    }

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for &x in &[-20.0, -1.0, 0.0, 0.5, 3.0, 20.0] {
            let naive = (1.0f64 + f64::exp(x)).ln();
            assert!((softplus(x) - naive).abs() < 1e-12);
        }
        assert!((softplus(700.0) - 700.0).abs() < 1e-12);
        assert!(softplus(-700.0) >= 0.0);
    }

    #[test]
    fn logit_inverts_logistic() {
        for &p in &[0.05, 0.3, 0.5, 0.9] {
            assert!((logistic(logit(p)) - p).abs() < 1e-14);
        }
        assert!((logit(0.05) + 19f64.ln()).abs() < 1e-12);
    }
}
