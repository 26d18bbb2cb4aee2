//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form, then implicit-shift QL for the
//! eigenvalues. Eigenvectors come either from QL with accumulated rotations
//! (all pairs) or from inverse iteration on the tridiagonal (a few pairs),
//! followed by back-transformation through the stored reflectors. The
//! partial path keeps the cost of a 1000x1000 problem dominated by the
//! reduction.

use std::cmp::Ordering;

use super::SymmetricMatrix;
use crate::error::{Error, Result};

/// Eigenpairs in the order requested by the caller; `vectors[i]` belongs to
/// `values[i]`. Vectors have unit norm and are mutually orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

const EPS: f64 = f64::EPSILON;
const MAX_QL_SWEEPS: usize = 64;

struct Reflector {
    start: usize,
    v: Vec<f64>,
    beta: f64,
}

struct Tridiagonal {
    diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`; `off[n - 1] == 0`.
    off: Vec<f64>,
    reflectors: Vec<Reflector>,
}

impl Tridiagonal {
    /// Maps an eigenvector of the tridiagonal back to the original basis.
    fn back_transform(&self, y: &mut [f64]) {
        for r in self.reflectors.iter().rev() {
            let tail = &mut y[r.start..];
            let dot: f64 = r.v.iter().zip(tail.iter()).map(|(a, b)| a * b).sum();
            let s = r.beta * dot;
            for (t, v) in tail.iter_mut().zip(&r.v) {
                *t -= s * v;
            }
        }
    }

    fn norm(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                self.diag[i].abs() + self.off[i].abs() + left
            })
            .fold(0.0, f64::max)
    }
}

fn tridiagonalize(m: &SymmetricMatrix) -> Tridiagonal {
    let n = m.dim();
    let mut a = m.clone().into_vec();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut reflectors = Vec::new();
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<f64> = a[k * n + k + 1..k * n + n].to_vec();
        let sigma: f64 = v[1..].iter().map(|x| x * x).sum();
        diag[k] = a[k * n + k];
        if sigma == 0.0 {
            off[k] = v[0];
            continue;
        }
        let x0 = v[0];
        let norm = (x0 * x0 + sigma).sqrt();
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        v[0] = x0 - alpha;
        let beta = 2.0 / (v[0] * v[0] + sigma);

        let base = k + 1;
        let p = &mut p[..len];
        for i in 0..len {
            let row = &a[(base + i) * n + base..(base + i) * n + n];
            p[i] = beta * row.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
        }
        let kappa = 0.5 * beta * p.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
        for (pi, vi) in p.iter_mut().zip(&v) {
            *pi -= kappa * vi;
        }
        let w = &*p;
        for i in 0..len {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[(base + i) * n + base..(base + i) * n + n];
            for ((x, vj), wj) in row.iter_mut().zip(&v).zip(w) {
                *x -= vi * wj + wi * vj;
            }
        }
        off[k] = alpha;
        reflectors.push(Reflector { start: base, v, beta });
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + n - 2];
        diag[n - 1] = a[(n - 1) * n + n - 1];
        off[n - 2] = a[(n - 2) * n + n - 1];
    } else if n == 1 {
        diag[0] = a[0];
    }
    Tridiagonal {
        diag,
        off,
        reflectors,
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. On return `d` holds
/// the (unsorted) eigenvalues. When `z` is given (n x n, row-major, starting
/// as the identity) row `i` ends up as the eigenvector for `d[i]`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > EPS * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence(MAX_QL_SWEEPS));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (head, tail) = z.split_at_mut((i + 1) * n);
                        let zi = &mut head[i * n..];
                        let zi1 = &mut tail[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= EPS * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Deterministic start vector for inverse iteration.
fn start_vector(n: usize, salt: u64) -> Vec<f64> {
    let mut state = crate::rng::mix64(salt ^ 0x5bd1_e995);
    (0..n)
        .map(|_| {
            state = crate::rng::mix64(state);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

/// LU factorization with partial pivoting of `T - shift I`.
struct ShiftedLu {
    diag: Vec<f64>,
    sup: Vec<f64>,
    sup2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(t: &Tridiagonal, shift: f64, tiny: f64) -> Self {
        let n = t.diag.len();
        let mut diag: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut sup = t.off.clone();
        let sub = &t.off;
        let mut sup2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if diag[i].abs() >= sub[i].abs() {
                if diag[i] == 0.0 {
                    diag[i] = tiny;
                }
                let l = sub[i] / diag[i];
                mult[i] = l;
                diag[i + 1] -= l * sup[i];
            } else {
                swapped[i] = true;
                let l = diag[i] / sub[i];
                mult[i] = l;
                diag[i] = sub[i];
                let old = diag[i + 1];
                diag[i + 1] = sup[i] - l * old;
                if i + 2 < n {
                    sup2[i] = sup[i + 1];
                    sup[i + 1] = -l * sup2[i];
                }
                sup[i] = old;
            }
        }
        if let Some(last) = diag.last_mut() {
            if *last == 0.0 {
                *last = tiny;
            }
        }
        Self {
            diag,
            sup,
            sup2,
            mult,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.mult[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut x = b[i];
            if i + 1 < n {
                x -= self.sup[i] * b[i + 1];
            }
            if i + 2 < n {
                x -= self.sup2[i] * b[i + 2];
            }
            b[i] = x / self.diag[i];
        }
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

fn orthogonalize_against(x: &mut [f64], basis: &[&Vec<f64>]) {
    for b in basis {
        let dot: f64 = x.iter().zip(b.iter()).map(|(a, c)| a * c).sum();
        for (xi, bi) in x.iter_mut().zip(b.iter()) {
            *xi -= dot * bi;
        }
    }
}

/// Eigenvectors of the tridiagonal for the given (ascending) eigenvalues by
/// inverse iteration, with Gram-Schmidt inside clusters of close values.
fn inverse_iteration(t: &Tridiagonal, values: &[f64]) -> Vec<Vec<f64>> {
    let n = t.diag.len();
    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let tiny = EPS * tnorm;
    let cluster_gap = 1e-3 * tnorm;
    let min_sep = 10.0 * EPS * tnorm;

    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    let mut cluster_start = 0;
    let mut prev_shift = f64::NEG_INFINITY;
    for (idx, &lambda) in values.iter().enumerate() {
        if idx > 0 && lambda - values[idx - 1] > cluster_gap {
            cluster_start = idx;
        }
        let mut shift = lambda;
        if idx > cluster_start && shift - prev_shift < min_sep {
            shift = prev_shift + min_sep;
        }
        prev_shift = shift;

        let lu = ShiftedLu::new(t, shift, tiny);
        let cluster: Vec<&Vec<f64>> = vectors[cluster_start..idx].iter().collect();
        let mut x = start_vector(n, idx as u64);
        for _ in 0..5 {
            orthogonalize_against(&mut x, &cluster);
            normalize(&mut x);
            lu.solve(&mut x);
            normalize(&mut x);
        }
        orthogonalize_against(&mut x, &cluster);
        normalize(&mut x);
        vectors.push(x);
    }
    vectors
}

/// Flips `x` so its largest-magnitude entry is positive (lowest index wins
/// among entries within a relative 1e-9 of the maximum).
fn fix_sign(x: &mut [f64]) {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = x
        .iter()
        .position(|v| v.abs() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    if x[pivot] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Which end of the spectrum to take.
#[derive(Debug, Clone, Copy)]
enum End {
    Largest,
    Smallest { skip: usize },
}

fn solve_selected(m: &SymmetricMatrix, count: usize, end: End) -> Result<EigenSystem> {
    let n = m.dim();
    let t = tridiagonalize(m);

    // Positions (in ascending order of eigenvalue) to return.
    let positions: Vec<usize> = match end {
        End::Largest => (n - count..n).collect(),
        End::Smallest { skip } => (skip..skip + count).collect(),
    };

    let mut pairs: Vec<(f64, Vec<f64>)> = if n <= 48 || 3 * count > n {
        let mut d = t.diag.clone();
        let mut e = t.off.clone();
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        ql_implicit(&mut d, &mut e, Some(&mut z))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        positions
            .iter()
            .map(|&p| {
                let i = order[p];
                let mut y = z[i * n..(i + 1) * n].to_vec();
                t.back_transform(&mut y);
                (d[i], y)
            })
            .collect()
    } else {
        let mut d = t.diag.clone();
        let mut e = t.off.clone();
        ql_implicit(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        let wanted: Vec<f64> = positions.iter().map(|&p| d[p]).collect();
        inverse_iteration(&t, &wanted)
            .into_iter()
            .zip(wanted)
            .map(|(mut y, lambda)| {
                t.back_transform(&mut y);
                normalize(&mut y);
                (lambda, y)
            })
            .collect()
    };

    for (_, v) in &mut pairs {
        fix_sign(v);
    }
    match end {
        End::Largest => pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| lexicographic(&b.1, &a.1))),
        End::Smallest { .. } => {
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lexicographic(&a.1, &b.1)))
        }
    }
    let (values, vectors) = pairs.into_iter().unzip();
    Ok(EigenSystem { values, vectors })
}

/// The `d` eigenpairs with the largest (signed) eigenvalues, in descending
/// order.
pub fn top_eigenpairs(m: &SymmetricMatrix, d: usize) -> Result<EigenSystem> {
    let n = m.dim();
    if d == 0 || d > n {
        return Err(Error::Range {
            what: "eigenpair count",
            detail: format!("d = {d} must be in 1..={n}"),
        });
    }
    solve_selected(m, d, End::Largest)
}

/// Eigenpairs ranked ascending by eigenvalue: skips the first `skip` and
/// returns the next `d`, in ascending order.
pub fn bottom_eigenpairs_skip(m: &SymmetricMatrix, d: usize, skip: usize) -> Result<EigenSystem> {
    let n = m.dim();
    if d == 0 || skip + d > n {
        return Err(Error::Range {
            what: "eigenpair count",
            detail: format!("skip + d = {} must be <= {n} with d >= 1", skip + d),
        });
    }
    solve_selected(m, d, End::Smallest { skip })
}

/// Full decomposition, eigenvalues descending.
pub fn eigh(m: &SymmetricMatrix) -> Result<EigenSystem> {
    top_eigenpairs(m, m.dim())
}

/// Eigenvalues only, descending.
pub fn eigenvalues(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    let t = tridiagonalize(m);
    let mut d = t.diag;
    let mut e = t.off;
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
        let mut r = crate::rng::stream(seed, 0);
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, r.gen_range(-1.0..1.0));
            }
        }
        m
    }

    fn max_residual(m: &SymmetricMatrix, es: &EigenSystem) -> f64 {
        es.values
            .iter()
            .zip(&es.vectors)
            .map(|(&l, v)| {
                let mv = m.mul_vec(v);
                mv.iter().zip(v).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    fn max_overlap(es: &EigenSystem) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in es.vectors.iter().enumerate() {
            let norm: f64 = a.iter().map(|x| x * x).sum();
            worst = worst.max((norm - 1.0).abs());
            for b in &es.vectors[i + 1..] {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                worst = worst.max(dot.abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two_swap() {
        let m = SymmetricMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let es = top_eigenpairs(&m, 1).unwrap();
        assert!((es.values[0] - 1.0).abs() < 1e-14);
        let h = 0.5f64.sqrt();
        assert!((es.vectors[0][0] - h).abs() < 1e-14);
        assert!((es.vectors[0][1] - h).abs() < 1e-14);
    }

    #[test]
    fn diagonal_matrix() {
        let m = SymmetricMatrix::from_diagonal(&[3.0, 2.0, 1.0]);
        let es = top_eigenpairs(&m, 2).unwrap();
        assert_eq!(es.values, vec![3.0, 2.0]);
        assert_eq!(es.vectors[0], vec![1.0, 0.0, 0.0]);
        assert_eq!(es.vectors[1], vec![0.0, 1.0, 0.0]);
        let bottom = bottom_eigenpairs_skip(&m, 1, 1).unwrap();
        assert_eq!(bottom.values, vec![2.0]);
    }

    #[test]
    fn range_errors() {
        let m = SymmetricMatrix::identity(3);
        assert!(top_eigenpairs(&m, 0).is_err());
        assert!(top_eigenpairs(&m, 4).is_err());
        assert!(bottom_eigenpairs_skip(&m, 2, 2).is_err());
    }

    #[test]
    fn random_full_decomposition() {
        for seed in 0..5 {
            let m = random_symmetric(10, seed);
            let es = eigh(&m).unwrap();
            let scale = m.frobenius_norm();
            assert!(max_residual(&m, &es) <= 1e-8 * scale);
            assert!(max_overlap(&es) <= 1e-8);
            assert!(es.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn partial_path_matches_full() {
        // n > 48 exercises inverse iteration.
        let m = random_symmetric(120, 42);
        let full = eigh(&m).unwrap();
        let top = top_eigenpairs(&m, 5).unwrap();
        let bottom = bottom_eigenpairs_skip(&m, 4, 2).unwrap();
        let scale = m.frobenius_norm();
        for es in [&top, &bottom] {
            assert!(max_residual(&m, es) <= 1e-8 * scale);
            assert!(max_overlap(es) <= 1e-8);
        }
        for i in 0..5 {
            assert!((top.values[i] - full.values[i]).abs() < 1e-10);
            let dot: f64 = top.vectors[i].iter().zip(&full.vectors[i]).map(|(a, b)| a * b).sum();
            assert!((dot - 1.0).abs() < 1e-8, "vector {i} dot {dot}");
        }
        for i in 0..4 {
            assert!((bottom.values[i] - full.values[120 - 3 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_spectrum_partial_path() {
        // -I: every eigenvalue ties; any orthonormal basis is acceptable.
        let mut m = SymmetricMatrix::identity(100);
        for i in 0..100 {
            m.set(i, i, -1.0);
        }
        let es = top_eigenpairs(&m, 6).unwrap();
        assert!(es.values.iter().all(|&v| (v + 1.0).abs() < 1e-12));
        assert!(max_overlap(&es) <= 1e-8);
        assert!(max_residual(&m, &es) <= 1e-8 * m.frobenius_norm());

        // Block structure with a doubly-degenerate top eigenvalue.
        let n = 90;
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i / 45 == j / 45 && i != j {
                    m.set(i, j, 1.0);
                }
            }
        }
        let es = top_eigenpairs(&m, 3).unwrap();
        assert!((es.values[0] - 44.0).abs() < 1e-10);
        assert!((es.values[1] - 44.0).abs() < 1e-10);
        assert!(max_overlap(&es) <= 1e-8);
        assert!(max_residual(&m, &es) <= 1e-8 * m.frobenius_norm());
    }

    #[test]
    fn sign_convention_and_determinism() {
        let m = random_symmetric(60, 7);
        let a = top_eigenpairs(&m, 3).unwrap();
        let b = top_eigenpairs(&m, 3).unwrap();
        assert_eq!(a, b);
        for v in &a.vectors {
            let (imax, _) = v
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
            assert!(v[imax] > 0.0);
        }
    }

    #[test]
    fn eigenvalues_only_agree() {
        let m = random_symmetric(30, 3);
        let vals = eigenvalues(&m).unwrap();
        let es = eigh(&m).unwrap();
        for (a, b) in vals.iter().zip(&es.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_by_one() {
        let m = SymmetricMatrix::from_diagonal(&[4.5]);
        let es = eigh(&m).unwrap();
        assert_eq!(es.values, vec![4.5]);
        assert_eq!(es.vectors, vec![vec![1.0]]);
    }
}
