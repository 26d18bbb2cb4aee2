use crate::error::{Error, Result};

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &x) in diag.iter().enumerate() {
            m.data[i * n + i] = x;
        }
        m
    }

    /// Wraps row-major data after checking shape, finiteness and symmetry
    /// (`|m_ij - m_ji| <= 1e-12 * max(1, |m_ij|)`). The stored matrix is
    /// exactly symmetrized.
    pub fn from_row_major(n: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::validation(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("matrix has non-finite entries"));
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::validation(format!(
                        "matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let avg = 0.5 * (a + b);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::validation("matrix rows must all have length n"));
        }
        Self::from_row_major(n, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest `|m_ij - m_ji|` relative to `max(1, |m_ij|)`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let a = self.get(i, j);
                let rel = (a - self.get(j, i)).abs() / a.abs().max(1.0);
                worst = worst.max(rel);
            }
        }
        worst
    }
}
