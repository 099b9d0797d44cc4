//! Takagi factorization M = W·diag(s)·Wᵀ of a complex symmetric matrix.
//!
//! With M = A + iB the real symmetric matrix H = [[A, B], [B, -A]] has
//! eigenvalues ±s_k; an eigenvector [x; y] for +s_k yields the Takagi vector
//! w_k = x + i·y. Degenerate singular values need no special treatment since
//! the positive eigenspace of H is handled as a whole.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Takagi {
    /// Nonnegative Takagi values, descending.
    pub values: Vec<f64>,
    /// Unitary columns matching `values`.
    pub vectors: DMatrix<Complex64>,
}

/// Largest relative deviation of M from Mᵀ.
pub fn asymmetry(m: &DMatrix<Complex64>) -> f64 {
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for j in 0..m.nrows() {
        for k in j + 1..m.ncols() {
            worst = worst.max((m[(j, k)] - m[(k, j)]).norm());
        }
    }
    worst / scale
}

pub fn takagi(m: &DMatrix<Complex64>) -> Result<Takagi> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Factorization("matrix is not square".into()));
    }
    if n == 0 {
        return Ok(Takagi { values: Vec::new(), vectors: DMatrix::zeros(0, 0) });
    }
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            // Symmetrize so that H is exactly symmetric.
            let v = 0.5 * (m[(j, k)] + m[(k, j)]);
            h[(j, k)] = v.re;
            h[(j, n + k)] = v.im;
            h[(n + j, k)] = v.im;
            h[(n + j, n + k)] = -v.re;
        }
    }
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::Factorization("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (col, &idx) in order.iter().take(n).enumerate() {
        values.push(eig.eigenvalues[idx].max(0.0));
        let v = eig.eigenvectors.column(idx);
        // Fix the sign freedom w -> -w deterministically.
        let mut best = 0;
        let mut best_mag = -1.0;
        for j in 0..n {
            let mag = v[j] * v[j] + v[n + j] * v[n + j];
            if mag > best_mag * (1.0 + 1e-9) {
                best = j;
                best_mag = mag;
            }
        }
        let sign = if v[best] < 0.0 || (v[best] == 0.0 && v[n + best] < 0.0) { -1.0 } else { 1.0 };
        for j in 0..n {
            vectors[(j, col)] = Complex64::new(sign * v[j], sign * v[n + j]);
        }
    }
    Ok(Takagi { values, vectors })
}

impl Takagi {
    /// W·diag(s)·Wᵀ restricted to the first `rank` columns.
    pub fn reconstruct(&self, rank: usize) -> DMatrix<Complex64> {
        let n = self.vectors.nrows();
        let rank = rank.min(self.values.len());
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for c in 0..rank {
            let w = self.vectors.column(c);
            let s = self.values[c];
            for k in 0..n {
                let wk = w[k] * s;
                for j in 0..n {
                    out[(j, k)] += w[j] * wk;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
        &a + a.transpose()
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let m = symmetric(12, 7);
        let t = takagi(&m).unwrap();
        assert!((t.reconstruct(12) - &m).norm() < 1e-12 * m.norm());
        let wh = t.vectors.adjoint() * &t.vectors;
        assert!((wh - DMatrix::identity(12, 12)).norm() < 1e-12);
        assert!(t.values.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn values_are_singular_values() {
        let m = symmetric(9, 3);
        let t = takagi(&m).unwrap();
        let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in t.values.iter().zip(&sv) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn handles_degenerate_block() {
        // Two-mode squeezer block [[0, s], [s, 0]] has a doubly degenerate value.
        let s = Complex64::new(0.3, 0.4);
        let m = DMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), s, s, Complex64::new(0.0, 0.0)]);
        let t = takagi(&m).unwrap();
        assert!((t.values[0] - 0.5).abs() < 1e-15 && (t.values[1] - 0.5).abs() < 1e-15);
        assert!((t.reconstruct(2) - m).norm() < 1e-14);
    }

    #[test]
    fn asymmetry_detects_transpose_mismatch() {
        let mut m = symmetric(5, 1);
        assert!(asymmetry(&m) < 1e-16);
        m[(0, 1)] += Complex64::new(1e-3, 0.0);
        assert!(asymmetry(&m) > 1e-4);
    }
}
