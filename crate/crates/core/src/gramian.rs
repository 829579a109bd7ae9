//! The semistability Gramian `P∞ = ∫₀^∞ (S(t)−S∞)BB*(S(t)−S∞)* dt`.
//!
//! Two independent routes are provided: direct quadrature of the integral, and
//! the semistability Lyapunov equation `AP + PA* = −(I−S∞)BB*(I−S∞)*`, which
//! is singular whenever `ker A ≠ 0`. `P∞` is its unique solution with
//! `S∞P∞ = 0`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    clean_real, hermitian_part, integrate_operator_valued, lyapunov, range_basis,
    singular_values, spectral_norm, CMatrix, DecayBound, DenseOperator, Semigroup,
};
use crate::semistability::{Analysis, LimitProjector, SemistabilityReport, SpectralData};

/// Default absolute tolerance of the quadrature path.
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-9;
/// Largest dimension handled by the `n² × n²` least-squares fallback.
pub const LSTSQ_MAX_DIM: usize = 40;
/// `‖AP + PA* + Q‖ ≤ RESIDUAL_FACTOR · (‖A‖‖P‖ + ‖Q‖)` or the solve is rejected.
pub const RESIDUAL_FACTOR: f64 = 1e-6;
const SPLIT_CONDITION_LIMIT: f64 = 1e10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GramianMethod {
    Quadrature,
    LyapunovSplit,
    LyapunovLstsq,
}

impl GramianMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            GramianMethod::Quadrature => "quadrature",
            GramianMethod::LyapunovSplit => "lyapunov_split",
            GramianMethod::LyapunovLstsq => "lyapunov_lstsq",
        }
    }
}

impl fmt::Display for GramianMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct SemistabilityGramian {
    pub p_inf: DenseOperator,
    pub method: GramianMethod,
    /// `‖AP∞ + P∞A* + Q‖`.
    pub lyapunov_residual: f64,
    /// `‖S∞P∞‖`.
    pub constraint_defect: f64,
    pub quadrature_tol: Option<f64>,
}

impl SemistabilityGramian {
    pub fn dim(&self) -> usize {
        self.p_inf.rows()
    }

    /// Smallest eigenvalue of the Hermitian part of `P∞`.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = hermitian_part(self.p_inf.matrix());
        if h.is_empty() {
            return 0.0;
        }
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `Q = (I−S∞)BB*(I−S∞)*`.
pub fn lyapunov_rhs(b: &DenseOperator, s_inf: &LimitProjector) -> Result<DenseOperator> {
    if b.rows() != s_inf.dim() {
        return Err(Error::dim(
            "lyapunov_rhs",
            format!("B has {} rows, S∞ is {1}x{1}", b.rows(), s_inf.dim()),
        ));
    }
    let g = s_inf.complement() * b.matrix();
    finish(&g * g.adjoint(), b.is_real() && s_inf.s_inf.is_real())
}

fn finish(p: CMatrix, real: bool) -> Result<DenseOperator> {
    let p = hermitian_part(&p);
    DenseOperator::new(if real { clean_real(p, 1e-8)? } else { p })
}

fn check_dims(a: &DenseOperator, rows: usize, s_inf: &LimitProjector, what: &str) -> Result<usize> {
    let n = a.require_square("semistability gramian")?;
    if rows != n || s_inf.dim() != n {
        return Err(Error::dim(
            "semistability gramian",
            format!("A is {n}x{n}, {what} has {rows} rows, S∞ is {0}x{0}", s_inf.dim()),
        ));
    }
    Ok(n)
}

fn residual(a: &CMatrix, p: &CMatrix, q: &CMatrix) -> f64 {
    spectral_norm(&(a * p + p * a.adjoint() + q))
}

fn residual_bound(a: &CMatrix, p: &CMatrix, q: &CMatrix) -> f64 {
    RESIDUAL_FACTOR * (spectral_norm(a) * spectral_norm(p) + spectral_norm(q))
}

fn assemble(
    a: &DenseOperator,
    q: &CMatrix,
    s_inf: &LimitProjector,
    p_inf: DenseOperator,
    method: GramianMethod,
    quadrature_tol: Option<f64>,
) -> SemistabilityGramian {
    SemistabilityGramian {
        lyapunov_residual: residual(a.matrix(), p_inf.matrix(), q),
        constraint_defect: spectral_norm(&(s_inf.s_inf.matrix() * p_inf.matrix())),
        p_inf,
        method,
        quadrature_tol,
    }
}

/// Quadrature of the defining integral, certified by the envelope
/// `M²‖B‖² e^{−2μt}` from the semistability report.
pub fn gramian_by_quadrature(
    a: &DenseOperator,
    b: &DenseOperator,
    s_inf: &LimitProjector,
    report: &SemistabilityReport,
    abs_tol: f64,
) -> Result<SemistabilityGramian> {
    check_dims(a, b.rows(), s_inf, "B")?;
    let semigroup = Semigroup::new(a)?;
    quadrature_with(a, b, s_inf, report, &semigroup, abs_tol)
}

pub(crate) fn quadrature_with(
    a: &DenseOperator,
    b: &DenseOperator,
    s_inf: &LimitProjector,
    report: &SemistabilityReport,
    semigroup: &Semigroup,
    abs_tol: f64,
) -> Result<SemistabilityGramian> {
    let n = check_dims(a, b.rows(), s_inf, "B")?;
    if !report.verdict.is_semistable() {
        return Err(Error::Precondition("generator is not semistable".into()));
    }
    let q = lyapunov_rhs(b, s_inf)?;
    let real = a.is_real() && b.is_real();
    let limit = s_inf.s_inf.matrix() * b.matrix();
    let value = if report.mu.is_infinite() {
        // No decaying modes: S(t) = S∞ for all t.
        CMatrix::zeros(n, n)
    } else {
        let bound = DecayBound::new(
            report.overshoot_m.powi(2) * b.norm().powi(2),
            2.0 * report.mu,
        )?;
        let outcome = integrate_operator_valued(
            |t| {
                let g = semigroup.apply(t, b.matrix()) - &limit;
                &g * g.adjoint()
            },
            bound,
            abs_tol,
        )?;
        outcome.value.into_matrix()
    };
    let p = finish(value, real)?;
    Ok(assemble(a, q.matrix(), s_inf, p, GramianMethod::Quadrature, Some(abs_tol)))
}

/// Solves the semistability Lyapunov equation for its constrained solution.
///
/// The primary strategy splits `C^n = ker A ⊕ ran A`, where `A` acts as
/// `diag(0, A₂)` with `A₂` stable, and solves the regular Lyapunov equation
/// on the stable block. If the splitting is ill-conditioned the
/// least-squares fallback ([`solve_lyapunov_lstsq`]) is used for `n ≤ 40`.
pub fn solve_semistability_lyapunov(
    a: &DenseOperator,
    q: &DenseOperator,
    s_inf: &LimitProjector,
    spectral: &SpectralData,
) -> Result<SemistabilityGramian> {
    let n = check_dims(a, q.rows(), s_inf, "Q")?;
    match lyapunov_split(a, q, s_inf, spectral) {
        Err(Error::Conditioning { .. } | Error::Numerical(_)) if n <= LSTSQ_MAX_DIM => {
            solve_lyapunov_lstsq(a, q, s_inf, spectral)
        }
        other => other,
    }
}

/// Spectral-splitting solver.
pub fn lyapunov_split(
    a: &DenseOperator,
    q: &DenseOperator,
    s_inf: &LimitProjector,
    spectral: &SpectralData,
) -> Result<SemistabilityGramian> {
    let n = check_dims(a, q.rows(), s_inf, "Q")?;
    if spectral.semistability().is_err() {
        return Err(Error::Precondition("generator is not semistable".into()));
    }
    let am = a.matrix();
    let qm = q.matrix();
    let kernel = spectral.kernel_basis.matrix();
    let k = kernel.ncols();
    let (range, _) = range_basis(am, Some(spectral.rank_a.tolerance_used));
    if range.ncols() + k != n {
        return Err(Error::Conditioning {
            what: "kernel/range splitting",
            condition: f64::INFINITY,
        });
    }
    let mut t = CMatrix::zeros(n, n);
    t.columns_mut(0, k).copy_from(kernel);
    t.columns_mut(k, n - k).copy_from(&range);
    let sv = singular_values(&t);
    let condition = sv[0] / sv[n - 1];
    let t_inv = match t.clone().try_inverse() {
        Some(inv) if condition <= SPLIT_CONDITION_LIMIT => inv,
        _ => {
            return Err(Error::Conditioning {
                what: "kernel/range splitting",
                condition,
            })
        }
    };
    let a_split = &t_inv * am * &t;
    let q_split = &t_inv * qm * t_inv.adjoint();
    let a2 = a_split.view((k, k), (n - k, n - k)).into_owned();
    let q22 = q_split.view((k, k), (n - k, n - k)).into_owned();
    let x = lyapunov::solve_stable_lyapunov(&a2, &hermitian_part(&q22))?;
    let mut p_split = CMatrix::zeros(n, n);
    p_split.view_mut((k, k), (n - k, n - k)).copy_from(&x);
    let p = &t * p_split * t.adjoint();
    let real = a.is_real() && q.is_real();
    let p = finish(p, real)?;
    checked(a, qm, s_inf, p, GramianMethod::LyapunovSplit)
}

fn checked(
    a: &DenseOperator,
    q: &CMatrix,
    s_inf: &LimitProjector,
    p: DenseOperator,
    method: GramianMethod,
) -> Result<SemistabilityGramian> {
    let bound = residual_bound(a.matrix(), p.matrix(), q);
    let g = assemble(a, q, s_inf, p, method, None);
    if g.lyapunov_residual > bound {
        return Err(Error::Inconsistent {
            residual: g.lyapunov_residual,
            bound,
        });
    }
    Ok(g)
}

/// Minimum-norm least-squares solution of the vectorized equation followed by
/// the correction `P∞ = (I−S∞)P`. That correction is only justified for
/// self-adjoint `A`; otherwise `P∞ = (I−S∞)P(I−S∞)*` is used and its residual
/// is checked.
pub fn solve_lyapunov_lstsq(
    a: &DenseOperator,
    q: &DenseOperator,
    s_inf: &LimitProjector,
    spectral: &SpectralData,
) -> Result<SemistabilityGramian> {
    check_dims(a, q.rows(), s_inf, "Q")?;
    let p = lyapunov::min_norm_lyapunov(a.matrix(), q.matrix())?;
    let p = DenseOperator::new(hermitian_part(&p))?;
    let corrected = apply_correction(&p, s_inf, spectral.self_adjoint)?;
    checked(a, q.matrix(), s_inf, corrected, GramianMethod::LyapunovLstsq)
}

/// `P − S∞P` for self-adjoint generators, `(I−S∞)P(I−S∞)*` otherwise.
pub fn apply_correction(
    p: &DenseOperator,
    s_inf: &LimitProjector,
    self_adjoint: bool,
) -> Result<DenseOperator> {
    if p.rows() != s_inf.dim() || !p.is_square() {
        return Err(Error::dim(
            "apply_correction",
            format!("P is {}x{}, S∞ is {2}x{2}", p.rows(), p.cols(), s_inf.dim()),
        ));
    }
    let complement = s_inf.complement();
    let corrected = if self_adjoint {
        &complement * p.matrix()
    } else {
        &complement * p.matrix() * complement.adjoint()
    };
    finish(corrected, p.is_real() && s_inf.s_inf.is_real())
}

/// How [`semistability_gramian`] picks its solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GramianStrategy {
    /// Lyapunov splitting, falling back to quadrature on conditioning errors.
    #[default]
    Auto,
    Quadrature,
    Lyapunov,
}

/// Gramian of `(A, B)` from a completed analysis of `A`.
pub fn semistability_gramian(
    a: &DenseOperator,
    b: &DenseOperator,
    analysis: &Analysis,
    strategy: GramianStrategy,
    abs_tol: f64,
) -> Result<SemistabilityGramian> {
    let s_inf = analysis.require_semistable()?;
    let quadrature = || {
        let semigroup = match analysis.spectral.modal_basis() {
            Some(basis) => Semigroup::with_basis(a, basis),
            None => Semigroup::pade(a),
        };
        quadrature_with(a, b, s_inf, &analysis.report, &semigroup, abs_tol)
    };
    match strategy {
        GramianStrategy::Quadrature => quadrature(),
        GramianStrategy::Lyapunov => {
            let q = lyapunov_rhs(b, s_inf)?;
            solve_semistability_lyapunov(a, &q, s_inf, &analysis.spectral)
        }
        GramianStrategy::Auto => {
            let q = lyapunov_rhs(b, s_inf)?;
            match solve_semistability_lyapunov(a, &q, s_inf, &analysis.spectral) {
                Err(Error::Conditioning { .. }) => quadrature(),
                other => other,
            }
        }
    }
}

/// Structure of the difference of two solutions of one Lyapunov equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolutionStructure {
    /// `‖Δ‖` with `Δ = P2 − P1`.
    pub delta_norm: f64,
    /// `‖AΔ + ΔA*‖`.
    pub homogeneous_residual: f64,
    /// `‖S∞*ΔS∞ − Δ‖`.
    pub projection_defect: f64,
    /// `‖A*Δ‖ / ‖A‖`: zero exactly when the range of `Δ` lies in `ker A*`.
    pub range_defect: f64,
}

impl SolutionStructure {
    /// Both defects within `rel_tol · ‖Δ‖`.
    pub fn certifies(&self, rel_tol: f64) -> bool {
        let bound = rel_tol * self.delta_norm;
        self.projection_defect <= bound && self.range_defect <= bound
    }
}

/// Checks that two self-adjoint solutions differ by a term confined to the
/// kernel structure. With `q` given, each solution's residual is checked
/// against it; otherwise only `AΔ + ΔA* = 0` is required.
pub fn verify_solution_structure(
    a: &DenseOperator,
    p1: &DenseOperator,
    p2: &DenseOperator,
    s_inf: &LimitProjector,
    q: Option<&DenseOperator>,
) -> Result<SolutionStructure> {
    let n = check_dims(a, p1.rows(), s_inf, "P1")?;
    if p1.cols() != n || p2.shape() != (n, n) {
        return Err(Error::dim("verify_solution_structure", "P1 and P2 must be n x n"));
    }
    let am = a.matrix();
    let scale = p1.norm().max(p2.norm());
    for (name, p) in [("P1", p1), ("P2", p2)] {
        if p.hermitian_defect() > 1e-8 * scale {
            return Err(Error::Precondition(format!("{name} is not self-adjoint")));
        }
    }
    if let Some(q) = q {
        if q.shape() != (n, n) {
            return Err(Error::dim("verify_solution_structure", "Q must be n x n"));
        }
        for (name, p) in [("P1", p1), ("P2", p2)] {
            let r = residual(am, p.matrix(), q.matrix());
            let bound = 1e-8 * (a.norm() * p.norm() + q.norm());
            if r > bound {
                return Err(Error::Precondition(format!(
                    "{name} does not solve the Lyapunov equation (residual {r:.3e})"
                )));
            }
        }
    }
    let delta = p2.matrix() - p1.matrix();
    let homogeneous_residual = spectral_norm(&(am * &delta + &delta * am.adjoint()));
    if homogeneous_residual > 1e-8 * a.norm() * scale {
        return Err(Error::Precondition(format!(
            "P1 and P2 do not solve the same Lyapunov equation (residual {homogeneous_residual:.3e})"
        )));
    }
    let s = s_inf.s_inf.matrix();
    let a_norm = a.norm();
    Ok(SolutionStructure {
        delta_norm: spectral_norm(&delta),
        homogeneous_residual,
        projection_defect: spectral_norm(&(s.adjoint() * &delta * s - &delta)),
        range_defect: if a_norm == 0.0 {
            0.0
        } else {
            spectral_norm(&(am.adjoint() * &delta)) / a_norm
        },
    })
}
