use super::operator::{is_real_matrix, CMatrix, DenseOperator, C64};
use crate::error::Result;

/// Outcome of a numerical rank decision.
#[derive(Clone, Debug, PartialEq)]
pub struct RankDecision {
    pub numerical_rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub tolerance_used: f64,
}

/// `max(rows, cols) · ε · σ₁`.
pub fn default_rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

pub(crate) struct FullSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns; square (cols × cols) for square input.
    pub v: CMatrix,
}

/// Thin SVD with singular values in descending order.
///
/// Backed by faer: nalgebra 0.35's bidiagonal SVD returns inaccurate
/// factors for some rank-deficient inputs, which corrupts kernel and range
/// bases.
pub(crate) fn svd(a: &CMatrix) -> FullSvd {
    let (m, n) = a.shape();
    if is_real_matrix(a) {
        let f = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)].re);
        let svd = f.thin_svd().expect("SVD converges");
        let s = svd.S().column_vector();
        FullSvd {
            u: CMatrix::from_fn(m, svd.U().ncols(), |i, j| C64::new(svd.U()[(i, j)], 0.0)),
            singular_values: s.iter().copied().collect(),
            v: CMatrix::from_fn(n, svd.V().ncols(), |i, j| C64::new(svd.V()[(i, j)], 0.0)),
        }
    } else {
        let f = faer::Mat::<C64>::from_fn(m, n, |i, j| a[(i, j)]);
        let svd = f.thin_svd().expect("SVD converges");
        let s = svd.S().column_vector();
        FullSvd {
            u: CMatrix::from_fn(m, svd.U().ncols(), |i, j| svd.U()[(i, j)]),
            singular_values: s.iter().map(|z| z.re).collect(),
            v: CMatrix::from_fn(n, svd.V().ncols(), |i, j| svd.V()[(i, j)]),
        }
    }
}

/// Singular values in descending order.
pub(crate) fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let (m, n) = a.shape();
    let mut s: Vec<f64> = if is_real_matrix(a) {
        let f = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)].re);
        f.singular_values().expect("SVD converges")
    } else {
        let f = faer::Mat::<C64>::from_fn(m, n, |i, j| a[(i, j)]);
        f.singular_values().expect("SVD converges")
    };
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn decide(rows: usize, cols: usize, singular_values: Vec<f64>, tol: Option<f64>) -> RankDecision {
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let tolerance_used = tol.unwrap_or_else(|| default_rank_tolerance(rows, cols, sigma_max));
    let numerical_rank = singular_values.iter().filter(|&&s| s > tolerance_used).count();
    RankDecision {
        numerical_rank,
        singular_values,
        tolerance_used,
    }
}

pub(crate) fn rank_decision(a: &CMatrix, tol: Option<f64>) -> RankDecision {
    decide(a.nrows(), a.ncols(), singular_values(a), tol)
}

/// Orthonormal basis of the numerical null space of a square matrix.
pub(crate) fn kernel_basis(a: &CMatrix, tol: Option<f64>) -> (CMatrix, RankDecision) {
    let n = a.ncols();
    if a.is_empty() {
        return (CMatrix::identity(n, n), decide(a.nrows(), n, Vec::new(), tol));
    }
    let full = svd(a);
    let decision = decide(a.nrows(), n, full.singular_values, tol);
    let basis = full
        .v
        .columns(decision.numerical_rank, n - decision.numerical_rank)
        .into_owned();
    (basis, decision)
}

/// Orthonormal basis of the numerical range.
pub(crate) fn range_basis(a: &CMatrix, tol: Option<f64>) -> (CMatrix, RankDecision) {
    if a.is_empty() {
        return (
            CMatrix::zeros(a.nrows(), 0),
            decide(a.nrows(), a.ncols(), Vec::new(), tol),
        );
    }
    let full = svd(a);
    let decision = decide(a.nrows(), a.ncols(), full.singular_values, tol);
    let basis = full.u.columns(0, decision.numerical_rank).into_owned();
    (basis, decision)
}

/// Right singular vectors belonging to the `count` smallest singular values.
pub(crate) fn smallest_right_singular_vectors(a: &CMatrix, count: usize) -> CMatrix {
    let n = a.ncols();
    let full = svd(a);
    full.v.columns(n - count, count).into_owned()
}

/// Orthonormal basis of the numerical null space of `a`, with the rank decision
/// that produced it. `rank_tol` defaults to `max(m, n) · ε · σ₁`.
pub fn numerical_kernel(
    a: &DenseOperator,
    rank_tol: Option<f64>,
) -> Result<(DenseOperator, RankDecision)> {
    a.require_square("numerical_kernel")?;
    let (basis, decision) = kernel_basis(a.matrix(), rank_tol);
    Ok((DenseOperator::wrap(basis), decision))
}

/// Numerical rank of an arbitrary matrix.
pub fn numerical_rank(a: &DenseOperator, rank_tol: Option<f64>) -> RankDecision {
    rank_decision(a.matrix(), rank_tol)
}
