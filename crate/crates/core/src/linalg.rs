//! Direct solvers for the tridiagonal and banded systems of the dual walks.

use crate::error::{Error, Result};

/// Thomas algorithm for `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
///
/// `sub[0]` and `sup[n-1]` are ignored. No pivoting: intended for the
/// diagonally dominant generators of absorbed walks.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::SolverFailure("tridiagonal band lengths differ".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::SolverFailure("zero pivot in row 0".into()));
    }
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SolverFailure(format!("zero pivot in row {i}")));
        }
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Square banded matrix with `lower` sub-diagonals and `upper` super-diagonals,
/// stored row-wise.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        BandMatrix {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.lower < i || j > i + self.upper {
            None
        } else {
            Some(i * (self.lower + self.upper + 1) + (j + self.lower - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `value` at `(i, j)`; panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band"));
        self.data[s] += value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU factorization without pivoting followed by the two
    /// triangular solves. Consumes the matrix.
    pub fn solve(mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::SolverFailure("right-hand side length mismatch".into()));
        }
        let w = self.lower + self.upper + 1;
        let (kl, ku) = (self.lower, self.upper);
        for k in 0..n {
            let pivot = self.data[k * w + kl];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SolverFailure(format!("zero pivot at {k}")));
            }
            let i_hi = (k + kl).min(n - 1);
            let j_hi = (k + ku).min(n - 1);
            for i in k + 1..=i_hi {
                let sik = i * w + (k + kl - i);
                let l = self.data[sik] / pivot;
                if l == 0.0 {
                    continue;
                }
                self.data[sik] = l;
                let (head, tail) = self.data.split_at_mut(i * w);
                let row_k = &head[k * w..k * w + w];
                let row_i = &mut tail[..w];
                for j in k + 1..=j_hi {
                    row_i[j + kl - i] -= l * row_k[j + kl - k];
                }
            }
        }
        let mut y = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let mut s = y[i];
            for j in lo..i {
                s -= self.data[i * w + (j + kl - i)] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + ku).min(n - 1);
            let mut s = y[i];
            for j in i + 1..=hi {
                s -= self.data[i * w + (j + kl - i)] * y[j];
            }
            y[i] = s / self.data[i * w + kl];
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_hand_solution() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1 0 1] -> x = [1 1 1]
        let x = solve_tridiagonal(&[0.0, -1.0, -1.0], &[2.0; 3], &[-1.0, -1.0, 0.0], &[1.0, 0.0, 1.0])
            .unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_reported() {
        assert!(solve_tridiagonal(&[0.0], &[0.0], &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn banded_solve_round_trip() {
        let n = 40;
        let mut a = BandMatrix::zeros(n, 3, 2);
        for i in 0..n {
            a.add(i, i, 10.0 + i as f64 * 0.1);
            for d in 1..=3 {
                if i >= d {
                    a.add(i, i - d, -1.0 / d as f64);
                }
            }
            for d in 1..=2 {
                if i + d < n {
                    a.add(i, i + d, -0.5 * d as f64);
                }
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let y = a.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
