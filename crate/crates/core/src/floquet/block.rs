//! Block-tridiagonal solver: block LU sweep with partially pivoted dense
//! factorisation of each Schur complement.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Row-major dense LU with partial pivoting.
struct DenseLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Factors `a` (n×n, row-major). On a vanishing pivot returns its local
    /// row and magnitude.
    fn factor(mut a: Vec<Complex64>, n: usize) -> std::result::Result<Self, (usize, f64)> {
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tiny = 1e-14 * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, a[k * n + k].norm());
            for i in k + 1..n {
                let v = a[i * n + k].norm();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if !(best > tiny) {
                return Err((k, best));
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] / pivot;
                a[i * n + k] = l;
                if l == ZERO {
                    continue;
                }
                for c in k + 1..n {
                    let u = a[k * n + c];
                    a[i * n + c] -= l * u;
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    /// Solves in place for an n×cols row-major right-hand side.
    fn solve(&self, b: &mut [Complex64], cols: usize) {
        let n = self.n;
        let mut x: Vec<Complex64> = Vec::with_capacity(n * cols);
        for &p in &self.perm {
            x.extend_from_slice(&b[p * cols..(p + 1) * cols]);
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l == ZERO {
                    continue;
                }
                for c in 0..cols {
                    let v = x[k * cols + c];
                    x[i * cols + c] -= l * v;
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[i * n + k];
                for c in 0..cols {
                    let v = x[k * cols + c];
                    x[i * cols + c] -= u * v;
                }
            }
            let d = self.lu[i * n + i];
            for c in 0..cols {
                x[i * cols + c] /= d;
            }
        }
        b.copy_from_slice(&x);
    }
}

/// The three blocks of block-row `j`: (lower, diagonal, upper), each m×m
/// row-major. `lower` is ignored for j = 0, `upper` for the last row.
pub type BlockRow = (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>);

fn mat_mul(a: &[Complex64], b: &[Complex64], n: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; n * cols];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            for c in 0..cols {
                out[i * cols + c] += aik * b[k * cols + c];
            }
        }
    }
    out
}

/// Solves the block-tridiagonal system with `nodes` block rows of size `m`.
///
/// `row(j)` yields the blocks of row j; `rhs` holds nodes·m entries ordered
/// node-major. Singular pivots are reported with their global row index.
pub fn solve_block_tridiagonal(
    nodes: usize,
    m: usize,
    row: impl Fn(usize) -> BlockRow,
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    assert_eq!(rhs.len(), nodes * m);
    // G_j = S_j⁻¹ U_j and z_j = S_j⁻¹ y_j, stored side by side as m×(m+1)
    let mut gz: Vec<Vec<Complex64>> = Vec::with_capacity(nodes);
    let mut prev: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    for j in 0..nodes {
        let (lower, mut schur, upper) = row(j);
        let mut y = rhs[j * m..(j + 1) * m].to_vec();
        if let Some((g, z)) = prev.take() {
            // S_j = D_j - L_j G_{j-1}, y_j = b_j - L_j z_{j-1}
            let lg = mat_mul(&lower, &g, m, m);
            let lz = mat_mul(&lower, &z, m, 1);
            schur.iter_mut().zip(&lg).for_each(|(s, v)| *s -= v);
            y.iter_mut().zip(&lz).for_each(|(s, v)| *s -= v);
        }
        let lu = DenseLu::factor(schur, m).map_err(|(k, pivot)| Error::Singular {
            row: j * m + k,
            pivot,
        })?;
        let last = j + 1 == nodes;
        let cols = if last { 1 } else { m + 1 };
        let mut block = vec![ZERO; m * cols];
        for i in 0..m {
            if !last {
                block[i * cols..i * cols + m].copy_from_slice(&upper[i * m..(i + 1) * m]);
            }
            block[i * cols + cols - 1] = y[i];
        }
        lu.solve(&mut block, cols);
        if !last {
            let g: Vec<Complex64> = (0..m)
                .flat_map(|i| block[i * cols..i * cols + m].to_vec())
                .collect();
            let z: Vec<Complex64> = (0..m).map(|i| block[i * cols + m]).collect();
            prev = Some((g, z));
        }
        gz.push(block);
    }

    let mut x = vec![ZERO; nodes * m];
    for j in (0..nodes).rev() {
        let block = &gz[j];
        if j + 1 == nodes {
            x[j * m..(j + 1) * m].copy_from_slice(block);
            continue;
        }
        let cols = m + 1;
        for i in 0..m {
            let mut acc = block[i * cols + m];
            for k in 0..m {
                acc -= block[i * cols + k] * x[(j + 1) * m + k];
            }
            x[j * m + i] = acc;
        }
    }
    Ok(x)
}

/// A x for the same block structure.
pub fn block_tridiagonal_apply(
    nodes: usize,
    m: usize,
    row: impl Fn(usize) -> BlockRow,
    x: &[Complex64],
) -> Vec<Complex64> {
    let mut out = vec![ZERO; nodes * m];
    for j in 0..nodes {
        let (lower, diag, upper) = row(j);
        let mut acc = mat_mul(&diag, &x[j * m..(j + 1) * m], m, 1);
        if j > 0 {
            let l = mat_mul(&lower, &x[(j - 1) * m..j * m], m, 1);
            acc.iter_mut().zip(&l).for_each(|(a, b)| *a += b);
        }
        if j + 1 < nodes {
            let u = mat_mul(&upper, &x[(j + 1) * m..(j + 2) * m], m, 1);
            acc.iter_mut().zip(&u).for_each(|(a, b)| *a += b);
        }
        out[j * m..(j + 1) * m].copy_from_slice(&acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::banded::BandMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn agrees_with_banded_elimination() {
        let (nodes, m) = (30, 4);
        let mut seed = 99u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let blocks: Vec<BlockRow> = (0..nodes)
            .map(|_| {
                let mut gen = |w: f64| {
                    (0..m * m)
                        .map(|_| c(next(), next()) * w)
                        .collect::<Vec<_>>()
                };
                (gen(1.0), gen(0.3), gen(1.0))
            })
            .collect();
        let row = |j: usize| blocks[j].clone();
        let rhs: Vec<Complex64> = (0..nodes * m).map(|_| c(next(), next())).collect();

        let mut band = BandMatrix::zeros(nodes * m, 2 * m - 1, 2 * m - 1);
        for j in 0..nodes {
            let (l, d, u) = row(j);
            for p in 0..m {
                for q in 0..m {
                    if j > 0 {
                        band.add(j * m + p, (j - 1) * m + q, l[p * m + q]);
                    }
                    band.add(j * m + p, j * m + q, d[p * m + q]);
                    if j + 1 < nodes {
                        band.add(j * m + p, (j + 1) * m + q, u[p * m + q]);
                    }
                }
            }
        }
        let mut expect = rhs.clone();
        band.solve_in_place(&mut expect).unwrap();
        let x = solve_block_tridiagonal(nodes, m, row, &rhs).unwrap();
        let scale = expect.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in x.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-9 * scale);
        }
        let ax = block_tridiagonal_apply(nodes, m, row, &x);
        for (a, b) in ax.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn singular_block_is_reported() {
        let row = |_j: usize| {
            (
                vec![ZERO; 4],
                vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)],
                vec![ZERO; 4],
            )
        };
        let err = solve_block_tridiagonal(3, 2, row, &[c(1.0, 0.0); 6]).unwrap_err();
        assert!(matches!(err, Error::Singular { row: 1, .. }));
    }
}
