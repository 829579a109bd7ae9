use nalgebra::linalg::Schur;

use super::operator::{clean_real, is_real_matrix, CMatrix, C64};
use super::rank::{default_rank_tolerance, svd};
use crate::error::{Error, Result};

/// Solves `A X + X A* = -Q` for a stable `A` by the complex Bartels–Stewart
/// method: `A = U T U*`, then `T Y + Y T* = -U* Q U` column by column.
pub(crate) fn solve_stable_lyapunov(a: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n || q.shape() != (n, n) {
        return Err(Error::dim(
            "solve_stable_lyapunov",
            format!("A is {}x{}, Q is {}x{}", n, a.ncols(), q.nrows(), q.ncols()),
        ));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let (u, t) = Schur::new(a.clone()).unpack();
    let f = -(u.adjoint() * q * &u);

    let mut y = CMatrix::zeros(n, n);
    for j in (0..n).rev() {
        // (T + conj(t_jj) I) y_j = f_j - Σ_{k>j} conj(t_jk) y_k
        let mut rhs: Vec<C64> = f.column(j).iter().copied().collect();
        for k in (j + 1)..n {
            let c = t[(j, k)].conj();
            if c != C64::new(0.0, 0.0) {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= c * y[(i, k)];
                }
            }
        }
        let shift = t[(j, j)].conj();
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for k in (i + 1)..n {
                s -= t[(i, k)] * y[(k, j)];
            }
            let d = t[(i, i)] + shift;
            if d.norm() == 0.0 {
                return Err(Error::Numerical(
                    "Lyapunov operator is singular: A has eigenvalues summing to zero".into(),
                ));
            }
            y[(i, j)] = s / d;
        }
    }
    let x = &u * y * u.adjoint();
    let x = (&x + x.adjoint()).scale(0.5);
    if is_real_matrix(a) && is_real_matrix(q) {
        clean_real(x, 1e-8)
    } else {
        Ok(x)
    }
}

/// Minimum-norm least-squares solution of `A X + X A* = -Q` through the
/// vectorized `n² × n²` system `(I ⊗ A + conj(A) ⊗ I) vec X = -vec Q`.
/// Works for singular Lyapunov operators; cost grows like `n⁶`.
pub(crate) fn min_norm_lyapunov(a: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n || q.shape() != (n, n) {
        return Err(Error::dim(
            "min_norm_lyapunov",
            format!("A is {}x{}, Q is {}x{}", n, a.ncols(), q.nrows(), q.ncols()),
        ));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let nn = n * n;
    let mut l = CMatrix::zeros(nn, nn);
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            for k in 0..n {
                l[(row, k + n * j)] += a[(i, k)];
            }
            for col_l in 0..n {
                l[(row, i + n * col_l)] += a[(j, col_l)].conj();
            }
        }
    }
    let rhs = CMatrix::from_iterator(nn, 1, q.iter().map(|z| -z));
    let full = svd(&l);
    let sigma_max = full.singular_values.first().copied().unwrap_or(0.0);
    let tol = default_rank_tolerance(nn, nn, sigma_max);
    let projected = full.u.adjoint() * rhs;
    let mut scaled = CMatrix::zeros(full.v.ncols(), 1);
    for (k, &s) in full.singular_values.iter().enumerate() {
        if s > tol {
            scaled[(k, 0)] = projected[(k, 0)] / s;
        }
    }
    let x = &full.v * scaled;
    Ok(CMatrix::from_column_slice(n, n, x.as_slice()))
}
