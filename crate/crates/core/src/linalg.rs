//! Dense symmetric solves for the small (L × L) Newton systems.

use crate::scalar::Scalar;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> SquareMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![S::zero(); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.data.chunks(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.rows().map(<[S]>::to_vec).collect()
    }

    /// `self += w · v vᵀ` (upper triangle only; call [`Self::mirror_upper`] afterwards).
    pub(crate) fn add_outer_upper(&mut self, w: S, v: &[S]) {
        for i in 0..self.n {
            let wi = w * v[i];
            for j in i..self.n {
                self.data[i * self.n + j] = self.data[i * self.n + j] + wi * v[j];
            }
        }
    }

    pub(crate) fn mirror_upper(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                self.data[i * self.n + j] = self.data[j * self.n + i];
            }
        }
    }

    pub(crate) fn scale(&mut self, s: S) {
        for v in &mut self.data {
            *v = *v * s;
        }
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        self.rows()
            .map(|r| r.iter().zip(x).fold(S::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<S> {
    factor: SquareMatrix<S>,
}

impl<S: Scalar> Cholesky<S> {
    /// Factors `a + shift·I`. Fails when a pivot is not positive or falls below
    /// `rel_pivot_tol` times the corresponding (shifted) diagonal entry.
    pub fn factor_shifted(a: &SquareMatrix<S>, shift: S, rel_pivot_tol: S) -> Option<Self> {
        let n = a.dim();
        let mut l = SquareMatrix::zeros(n);
        for j in 0..n {
            let diag = a.get(j, j) + shift;
            let mut d = diag;
            for k in 0..j {
                d = d - l.get(j, k) * l.get(j, k);
            }
            if !(d > S::zero()) || d <= rel_pivot_tol * diag.abs() || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l.set(j, j, djj);
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s = s - l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / djj);
            }
        }
        Some(Self { factor: l })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.factor.dim();
        let l = &self.factor;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - l.get(i, k) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s = s - l.get(k, i) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        y
    }
}
