//! Logistic regression with nonnegative coefficients, solved by projected
//! Newton iterations with an Armijo backtracking search along the
//! projection arc.

use crate::error::{Error, Result};
use crate::{logistic, softplus};

/// A design matrix with binary targets, visited row by row.
pub trait RegressionData {
    fn n_features(&self) -> usize;

    /// Calls `f(features, target)` once per row, always in the same order.
    fn for_each_row(&self, f: &mut dyn FnMut(&[f64], bool));
}

/// Row-major feature matrix with one target per row.
#[derive(Debug, Clone)]
pub struct DenseDesign {
    features: Vec<f64>,
    cols: usize,
    targets: Vec<bool>,
}

impl DenseDesign {
    pub fn new(features: Vec<f64>, cols: usize, targets: Vec<bool>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::validation("design needs at least one feature"));
        }
        if targets.is_empty() {
            return Err(Error::validation("design needs at least one row"));
        }
        if features.len() != cols * targets.len() {
            return Err(Error::validation(format!(
                "{} feature values do not fill {} rows of {cols}",
                features.len(),
                targets.len()
            )));
        }
        Ok(Self {
            features,
            cols,
            targets,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<bool>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::validation("design rows have inconsistent length"));
        }
        Self::new(rows.concat(), cols, targets)
    }
}

impl RegressionData for DenseDesign {
    fn n_features(&self) -> usize {
        self.cols
    }

    fn for_each_row(&self, f: &mut dyn FnMut(&[f64], bool)) {
        for (row, &y) in self.features.chunks_exact(self.cols).zip(&self.targets) {
            f(row, y);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intercept {
    /// Estimated jointly with the coefficients.
    Free,
    /// Held at the given value.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct RegressionOptions {
    pub intercept: Intercept,
    /// Convergence threshold on the infinity norm of the projected gradient.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RegressionOptions {
    fn default() -> Self {
        Self {
            intercept: Intercept::Free,
            tolerance: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub coeffs: Vec<f64>,
    pub intercept: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Infinity norm of the projected gradient at the returned point.
    pub final_grad_norm: f64,
    pub log_likelihood: f64,
    /// Gradient of the log-likelihood in the coefficients at the returned
    /// point, for checking optimality conditions.
    pub gradient: Vec<f64>,
}

impl RegressionFit {
    /// Largest violation of the optimality conditions for maximizing the
    /// log-likelihood subject to `coeffs >= 0`: `|g_i|` where `c_i > 0`,
    /// `max(g_i, 0)` where `c_i = 0`.
    pub fn kkt_violation(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.gradient)
            .map(|(&c, &g)| if c > 0.0 { g.abs() } else { g.max(0.0) })
            .fold(0.0, f64::max)
    }
}

struct Evaluation {
    ll: f64,
    grad: Vec<f64>,
    /// Negative Hessian, (d+1)x(d+1) row-major, last index is the intercept.
    info: Vec<f64>,
}

/// Log-likelihood, gradient and Fisher information at `(coeffs, b)`.
fn evaluate(data: &dyn RegressionData, coeffs: &[f64], b: f64, with_info: bool) -> Evaluation {
    let d = coeffs.len();
    let p1 = d + 1;
    let mut ll = 0.0;
    let mut grad = vec![0.0; p1];
    let mut info = if with_info { vec![0.0; p1 * p1] } else { Vec::new() };
    data.for_each_row(&mut |x, y| {
        let z = b + x.iter().zip(coeffs).map(|(a, c)| a * c).sum::<f64>();
        let yf = if y { 1.0 } else { 0.0 };
        ll += yf * z - softplus(z);
        let p = logistic(z);
        let r = yf - p;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += r * xi;
        }
        grad[d] += r;
        if with_info {
            let w = p * (1.0 - p);
            for i in 0..p1 {
                let xi = if i < d { x[i] } else { 1.0 };
                let wxi = w * xi;
                let row = &mut info[i * p1..i * p1 + i + 1];
                for (j, h) in row.iter_mut().enumerate() {
                    let xj = if j < d { x[j] } else { 1.0 };
                    *h += wxi * xj;
                }
            }
        }
    });
    if with_info {
        for i in 0..p1 {
            for j in 0..i {
                info[j * p1 + i] = info[i * p1 + j];
            }
        }
    }
    Evaluation { ll, grad, info }
}

/// Solves `h x = g` for symmetric positive definite `h` (Cholesky), adding
/// a growing ridge if the factorization breaks down.
fn solve_spd(h: &[f64], g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let scale = (0..n).map(|i| h[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
    let mut ridge = 0.0;
    loop {
        if let Some(l) = cholesky(h, n, ridge) {
            let mut y = g.to_vec();
            for i in 0..n {
                let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
                y[i] = (y[i] - s) / l[i * n + i];
            }
            for i in (0..n).rev() {
                let s: f64 = (i + 1..n).map(|k| l[k * n + i] * y[k]).sum();
                y[i] = (y[i] - s) / l[i * n + i];
            }
            return y;
        }
        ridge = if ridge == 0.0 { 1e-12 * scale } else { ridge * 10.0 };
    }
}

fn cholesky(h: &[f64], n: usize, ridge: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[i * n + j] + if i == j { ridge } else { 0.0 };
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn projected_gradient_norm(coeffs: &[f64], grad: &[f64], free_intercept: bool) -> f64 {
    let d = coeffs.len();
    let mut norm = coeffs
        .iter()
        .zip(grad)
        .map(|(&c, &g)| if c > 0.0 { g.abs() } else { g.max(0.0) })
        .fold(0.0, f64::max);
    if free_intercept {
        norm = norm.max(grad[d].abs());
    }
    norm
}

/// Maximizes `sum y log l(z) + (1 - y) log(1 - l(z))`, `z = x . coeffs + b`,
/// over `coeffs >= 0` (and `b` when the intercept is free).
///
/// Never panics on hard inputs: if the iteration limit is reached, or no
/// ascent step can be found, the best point so far comes back with
/// `converged == false`.
pub fn fit_nonneg_logistic(
    data: &dyn RegressionData,
    options: &RegressionOptions,
) -> Result<RegressionFit> {
    let d = data.n_features();
    if d == 0 {
        return Err(Error::validation("regression needs at least one feature"));
    }
    let mut rows = 0usize;
    let mut finite = true;
    let mut positives = 0usize;
    data.for_each_row(&mut |x, y| {
        rows += 1;
        positives += usize::from(y);
        finite &= x.iter().all(|v| v.is_finite());
    });
    if rows == 0 {
        return Err(Error::validation("regression needs at least one row"));
    }
    if !finite {
        return Err(Error::validation("regression features must be finite"));
    }
    let (free_intercept, mut b) = match options.intercept {
        Intercept::Free => {
            // Start at the logit of the mean target, clamped away from +-inf.
            let mean = (positives as f64 / rows as f64).clamp(1e-12, 1.0 - 1e-12);
            (true, crate::logit(mean))
        }
        Intercept::Fixed(b) if b.is_finite() => (false, b),
        Intercept::Fixed(b) => {
            return Err(Error::validation(format!("fixed intercept must be finite, got {b}")))
        }
    };

    let mut coeffs = vec![0.0; d];
    let mut eval = evaluate(data, &coeffs, b, true);
    let mut iterations = 0;
    let mut converged = false;
    let active_eps = 1e-12;

    while iterations < options.max_iterations {
        let pg = projected_gradient_norm(&coeffs, &eval.grad, free_intercept);
        if pg <= options.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        // Free variables: coefficients off the bound, or on it with an
        // ascent direction pointing inward; plus the intercept if free.
        let mut free: Vec<usize> = (0..d)
            .filter(|&i| coeffs[i] > active_eps || eval.grad[i] > 0.0)
            .collect();
        if free_intercept {
            free.push(d);
        }
        if free.is_empty() {
            break;
        }
        let p1 = d + 1;
        let m = free.len();
        let mut h = vec![0.0; m * m];
        for (a, &i) in free.iter().enumerate() {
            for (c, &j) in free.iter().enumerate() {
                h[a * m + c] = eval.info[i * p1 + j];
            }
        }
        let g: Vec<f64> = free.iter().map(|&i| eval.grad[i]).collect();
        let step = solve_spd(&h, &g);
        let mut direction = vec![0.0; p1];
        for (&i, s) in free.iter().zip(step) {
            direction[i] = s;
        }

        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-20 {
            let trial: Vec<f64> = (0..d)
                .map(|i| (coeffs[i] + t * direction[i]).max(0.0))
                .collect();
            let trial_b = if free_intercept { b + t * direction[d] } else { b };
            let mut gain = eval.grad[d] * (trial_b - b);
            for i in 0..d {
                gain += eval.grad[i] * (trial[i] - coeffs[i]);
            }
            let ll = evaluate_ll(data, &trial, trial_b);
            if ll.is_finite() && ll >= eval.ll + 1e-4 * gain && gain >= 0.0 {
                accepted = Some((trial, trial_b));
                break;
            }
            // Near the optimum the expected gain drops below the rounding
            // error of the summed likelihood; judge the step by the
            // gradient instead.
            if gain >= 0.0 && gain <= 1e-12 * eval.ll.abs() {
                let e = evaluate(data, &trial, trial_b, false);
                if projected_gradient_norm(&trial, &e.grad, free_intercept) < pg {
                    accepted = Some((trial, trial_b));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((c, nb)) => {
                coeffs = c;
                b = nb;
                eval = evaluate(data, &coeffs, b, true);
            }
            None => break,
        }
    }

    let final_grad_norm = projected_gradient_norm(&coeffs, &eval.grad, free_intercept);
    if !converged && final_grad_norm <= options.tolerance {
        converged = true;
    }
    Ok(RegressionFit {
        coeffs,
        intercept: b,
        converged,
        iterations,
        final_grad_norm,
        log_likelihood: eval.ll,
        gradient: eval.grad[..d].to_vec(),
    })
}

fn evaluate_ll(data: &dyn RegressionData, coeffs: &[f64], b: f64) -> f64 {
    let mut ll = 0.0;
    data.for_each_row(&mut |x, y| {
        let z = b + x.iter().zip(coeffs).map(|(a, c)| a * c).sum::<f64>();
        ll += if y { z } else { 0.0 } - softplus(z);
    });
    ll
}
