//! Maximum-weight perfect matching on a square matrix (Hungarian method with
//! potentials, O(k^3)).

use crate::error::{Error, Result};

/// Returns `sigma` maximizing `sum_l s[l][sigma[l]]` and that total.
pub fn max_assignment(s: &[Vec<f64>]) -> Result<(Vec<usize>, f64)> {
    let k = s.len();
    if s.iter().any(|row| row.len() != k) {
        return Err(Error::validation("assignment matrix must be square"));
    }
    if s.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::validation("assignment matrix must be finite"));
    }
    if k == 0 {
        return Ok((Vec::new(), 0.0));
    }
    // Minimize cost = -s. Rows/columns are 1-based inside the loop; index 0
    // is the virtual start column.
    let cost = |i: usize, j: usize| -s[i - 1][j - 1];
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut row_of = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut sigma = vec![0usize; k];
    for j in 1..=k {
        sigma[row_of[j] - 1] = j - 1;
    }
    let total = sigma.iter().enumerate().map(|(l, &m)| s[l][m]).sum();
    Ok((sigma, total))
}

/// Exhaustive search over all `k!` permutations. Only for small `k`.
pub fn brute_force_assignment(s: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let k = s.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = (perm.clone(), f64::NEG_INFINITY);
    permute(&mut perm, 0, s, &mut best);
    if k == 0 {
        best.1 = 0.0;
    }
    best
}

fn permute(perm: &mut Vec<usize>, start: usize, s: &[Vec<f64>], best: &mut (Vec<usize>, f64)) {
    if start == perm.len() {
        let total: f64 = perm.iter().enumerate().map(|(l, &m)| s[l][m]).sum();
        if total > best.1 {
            *best = (perm.clone(), total);
        }
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permute(perm, start + 1, s, best);
        perm.swap(start, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn identity_and_swap() {
        let (p, t) = max_assignment(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!((p, t), (vec![0, 1], 2.0));
        let (p, t) = max_assignment(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!((p, t), (vec![1, 0], 2.0));
    }

    #[test]
    fn matches_brute_force_on_6x6() {
        let mut r = crate::rng::stream(6, 0);
        for _ in 0..50 {
            let s: Vec<Vec<f64>> = (0..6).map(|_| (0..6).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
            let (_, fast) = max_assignment(&s).unwrap();
            let (_, slow) = brute_force_assignment(&s);
            assert!((fast - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(max_assignment(&[vec![1.0, 2.0]]).is_err());
        assert_eq!(max_assignment(&[]).unwrap(), (vec![], 0.0));
    }
}
