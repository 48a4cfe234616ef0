//! Complex banded linear solver: Gaussian elimination with partial pivoting
//! on row-stored band storage with room for pivoting fill-in. Kept as an
//! independent check on the block solver.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square matrix with `lower` sub- and `upper` super-diagonals.
///
/// Row `i` keeps columns `i - lower ..= i + upper + lower`; the extra `lower`
/// columns hold fill-in created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = 2 * lower + upper + 1;
        Self {
            n,
            lower,
            upper,
            width,
            data: vec![Complex64::new(0.0, 0.0); n * width],
        }
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> usize {
        debug_assert!(col + self.lower >= row && col <= row + self.upper + self.lower);
        row * self.width + (col + self.lower - row)
    }

    /// Adds `value` at (row, col); the entry must lie inside the band.
    pub fn add(&mut self, row: usize, col: usize, value: Complex64) {
        assert!(
            col + self.lower >= row && col <= row + self.upper,
            "entry ({row}, {col}) outside band"
        );
        let s = self.slot(row, col);
        self.data[s] += value;
    }

    #[inline]
    fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[self.slot(row, col)]
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// y = A x, using only the original band (call before `solve_in_place`).
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|c| self.get(i, c) * x[c]).sum()
            })
            .collect()
    }

    /// Solves A x = b, overwriting the matrix with its factors and `b` with x.
    ///
    /// Fails with `Error::Singular` when a pivot falls below `1e-14` times the
    /// largest matrix entry.
    pub fn solve_in_place(&mut self, b: &mut [Complex64]) -> Result<()> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let reach = self.upper + self.lower;
        let tiny = 1e-14 * self.max_abs();
        for k in 0..n {
            let last_row = (k + self.lower).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let (mut p, mut best) = (k, self.get(k, k).norm());
            for i in k + 1..=last_row {
                let v = self.get(i, k).norm();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if !(best > tiny) {
                return Err(Error::Singular {
                    row: k,
                    pivot: best,
                });
            }
            if p != k {
                for c in k..=last_col {
                    let (a, z) = (self.slot(k, c), self.slot(p, c));
                    self.data.swap(a, z);
                }
                b.swap(k, p);
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last_row {
                let l = self.get(i, k) / pivot;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let s = self.slot(i, k);
                self.data[s] = Complex64::new(0.0, 0.0);
                for c in k + 1..=last_col {
                    let u = self.get(k, c);
                    let s = self.slot(i, c);
                    self.data[s] -= l * u;
                }
                let bk = b[k];
                b[i] -= l * bk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut acc = b[k];
            for c in k + 1..=last_col {
                acc -= self.get(k, c) * b[c];
            }
            b[k] = acc / self.get(k, k);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Dense Gaussian elimination oracle.
    fn dense_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let l = a[i][k] / a[k][k];
                for j in k..n {
                    let u = a[k][j];
                    a[i][j] -= l * u;
                }
                let bk = b[k];
                b[i] -= l * bk;
            }
        }
        let mut x = vec![c(0.0, 0.0); n];
        for k in (0..n).rev() {
            let s: Complex64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    #[test]
    fn matches_dense_solver_with_pivoting() {
        let n = 40;
        let (lower, upper) = (3, 2);
        let mut band = BandMatrix::zeros(n, lower, upper);
        let mut dense = vec![vec![c(0.0, 0.0); n]; n];
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in i.saturating_sub(lower)..=(i + upper).min(n - 1) {
                // weak diagonal forces row interchanges
                let v = c(next(), next()) * if i == j { 0.01 } else { 1.0 };
                band.add(i, j, v);
                dense[i][j] = v;
            }
        }
        let b: Vec<Complex64> = (0..n).map(|_| c(next(), next())).collect();
        let expect = dense_solve(dense, b.clone());
        let product_check = band.clone();
        let mut x = b.clone();
        band.solve_in_place(&mut x).unwrap();
        for (u, v) in x.iter().zip(&expect) {
            assert!((u - v).norm() < 1e-10 * v.norm().max(1.0));
        }
        let ax = product_check.mul_vec(&x);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut band = BandMatrix::zeros(3, 1, 1);
        band.add(0, 0, c(1.0, 0.0));
        band.add(0, 1, c(1.0, 0.0));
        band.add(1, 0, c(1.0, 0.0));
        band.add(1, 1, c(1.0, 0.0));
        band.add(2, 2, c(1.0, 0.0));
        let mut b = vec![c(1.0, 0.0); 3];
        assert!(matches!(
            band.solve_in_place(&mut b),
            Err(Error::Singular { .. })
        ));
    }
}
