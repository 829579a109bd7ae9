//! Exponential semistability of `ẋ = Ax` and the limit projector `S∞`.
//!
//! A generator is semistable when every eigenvalue has negative real part
//! except a zero eigenvalue, and that zero eigenvalue is semisimple. The zero
//! eigenvalue is tested for semisimplicity by comparing `rank A` with
//! `rank A²`, which avoids computing a Jordan form. Eigenvalues within
//! `zero_tol` of the imaginary axis but away from the origin make the
//! generator not semistable.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    self, kernel_basis, matrix_exponential, rank_decision, spectral_norm, CMatrix, DenseOperator,
    ModalBasis, RankDecision, Semigroup, C64,
};

/// Relative Hermitian defect under which `S∞` is built as an orthogonal projector.
const SELF_ADJOINT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Stable,
    Semistable,
    NotSemistable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Semistable => "semistable",
            Verdict::NotSemistable => "not_semistable",
        }
    }

    /// Stable counts as semistable with a trivial kernel.
    pub fn is_semistable(&self) -> bool {
        !matches!(self, Verdict::NotSemistable)
    }

    /// `self` carries at least the guarantees of `other`.
    pub fn at_least(&self, other: Verdict) -> bool {
        match other {
            Verdict::Stable => *self == Verdict::Stable,
            Verdict::Semistable => self.is_semistable(),
            Verdict::NotSemistable => true,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NotSemistableReason {
    UnstableEigenvalue(C64),
    ImaginaryAxisEigenvalue(C64),
    DefectiveZero { rank_a: usize, rank_a2: usize },
}

impl fmt::Display for NotSemistableReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotSemistableReason::UnstableEigenvalue(z) => {
                write!(f, "eigenvalue {} has positive real part", fmt_complex(*z))
            }
            NotSemistableReason::ImaginaryAxisEigenvalue(z) => write!(
                f,
                "eigenvalue {} lies on the imaginary axis away from zero",
                fmt_complex(*z)
            ),
            NotSemistableReason::DefectiveZero { rank_a, rank_a2 } => write!(
                f,
                "zero eigenvalue defective (rank A = {rank_a}, rank A^2 = {rank_a2})"
            ),
        }
    }
}

pub(crate) fn fmt_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Tolerances for classification. `None` picks the defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues with `|Re λ| ≤ zero_tol` count as lying on the imaginary axis.
    pub zero_tol: Option<f64>,
    /// Rank tolerance for `A`; `A²` is tested at `rank_tol · σ₁(A)`.
    pub rank_tol: Option<f64>,
}

/// `100 · n · ε · ‖A‖`.
pub fn default_zero_tolerance(n: usize, norm: f64) -> f64 {
    100.0 * n as f64 * f64::EPSILON * norm
}

/// Eigen-structure of a generator.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Sorted by real part descending.
    pub eigenvalues: Vec<C64>,
    /// Columns of the block-diagonalizing (generalized) eigenvector basis, in
    /// eigenvalue order; zero columns when no usable basis exists.
    pub right_eigenvectors: DenseOperator,
    /// Orthonormal basis of `ker A`.
    pub kernel_basis: DenseOperator,
    pub zero_eig_algebraic_multiplicity: usize,
    pub zero_eig_geometric_multiplicity: usize,
    pub zero_tol: f64,
    pub rank_a: RankDecision,
    pub rank_a2: RankDecision,
    pub self_adjoint: bool,
    pub norm: f64,
    modal: Option<ModalBasis>,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.kernel_basis.rows()
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.cols()
    }

    pub fn modal_basis(&self) -> Option<&ModalBasis> {
        self.modal.as_ref()
    }

    pub(crate) fn require_modal(&self) -> Result<&ModalBasis> {
        self.modal.as_ref().ok_or(Error::Conditioning {
            what: "eigenvector basis",
            condition: f64::INFINITY,
        })
    }

    /// Checks the semistability criterion on the stored spectrum.
    pub fn semistability(&self) -> std::result::Result<Verdict, NotSemistableReason> {
        let tol = self.zero_tol;
        if let Some(z) = self.eigenvalues.iter().find(|z| z.re > tol) {
            return Err(NotSemistableReason::UnstableEigenvalue(*z));
        }
        if let Some(z) = self
            .eigenvalues
            .iter()
            .find(|z| z.re.abs() <= tol && z.im.abs() > tol)
        {
            return Err(NotSemistableReason::ImaginaryAxisEigenvalue(*z));
        }
        if self.rank_a.numerical_rank != self.rank_a2.numerical_rank {
            return Err(NotSemistableReason::DefectiveZero {
                rank_a: self.rank_a.numerical_rank,
                rank_a2: self.rank_a2.numerical_rank,
            });
        }
        let all_decaying = self.eigenvalues.iter().all(|z| z.re < -tol);
        if all_decaying && self.kernel_dim() == 0 {
            Ok(Verdict::Stable)
        } else {
            Ok(Verdict::Semistable)
        }
    }

    /// Spectral gap: smallest `|Re λ|` over eigenvalues with `Re λ < −zero_tol`;
    /// infinite when there are none.
    pub fn spectral_gap(&self) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|z| z.re < -self.zero_tol)
            .map(|z| -z.re)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Computes eigenvalues, kernel, rank decisions and (when well conditioned) a
/// modal basis of `a`.
pub fn spectral_data(a: &DenseOperator, tol: Tolerances) -> Result<SpectralData> {
    let n = a.require_square("spectral_data")?;
    let m = a.matrix();
    let rank_a = rank_decision(m, tol.rank_tol);
    let norm = rank_a.singular_values.first().copied().unwrap_or(0.0);
    let a2 = m * m;
    let a2_tol = tol
        .rank_tol
        .map(|t| t * norm)
        .unwrap_or_else(|| linalg::default_rank_tolerance(n, n, norm * norm));
    let rank_a2 = rank_decision(&a2, Some(a2_tol));
    let (kernel, _) = kernel_basis(m, Some(rank_a.tolerance_used));

    let zero_tol = tol
        .zero_tol
        .unwrap_or_else(|| default_zero_tolerance(n, norm).max(rank_a.tolerance_used));
    if !(zero_tol >= 0.0 && zero_tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "zero tolerance must be finite and nonnegative, got {zero_tol}"
        )));
    }

    let self_adjoint = spectral_norm(&(m - m.adjoint())) <= SELF_ADJOINT_TOL * norm;
    let modal = ModalBasis::new(m, zero_tol).ok();
    let eigenvalues = match &modal {
        Some(b) => b.eigenvalues.clone(),
        None => linalg::sorted_eigenvalues(m, self_adjoint),
    };
    let right = modal
        .as_ref()
        .map(|b| b.right.clone())
        .unwrap_or_else(|| CMatrix::zeros(n, 0));
    let algebraic = eigenvalues.iter().filter(|z| z.norm() <= zero_tol).count();

    Ok(SpectralData {
        eigenvalues,
        right_eigenvectors: DenseOperator::new(right)?,
        zero_eig_algebraic_multiplicity: algebraic,
        zero_eig_geometric_multiplicity: kernel.ncols(),
        kernel_basis: DenseOperator::new(kernel)?,
        zero_tol,
        rank_a,
        rank_a2,
        self_adjoint,
        norm,
        modal,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemistabilityReport {
    pub verdict: Verdict,
    /// Spectral gap; infinite when no eigenvalue decays.
    pub mu: f64,
    /// Sampled `sup_t ‖e^{At} − S∞‖ e^{μt}`. An estimate, not a certificate;
    /// infinite for generators that are not semistable.
    pub overshoot_m: f64,
    pub kernel_dim: usize,
    pub zero_tol: f64,
    pub reason: Option<NotSemistableReason>,
}

/// The limit `S∞ = lim_{t→∞} e^{At}` with its projector certificates.
#[derive(Clone, Debug)]
pub struct LimitProjector {
    pub s_inf: DenseOperator,
    /// `‖S∞² − S∞‖`.
    pub idempotency_defect: f64,
    /// `max(‖S∞A‖, ‖AS∞‖)`.
    pub annihilation_defect: f64,
    /// Built as the orthogonal projector `K K*` onto `ker A`.
    pub orthogonal: bool,
}

impl LimitProjector {
    pub fn dim(&self) -> usize {
        self.s_inf.rows()
    }

    /// `I − S∞`.
    pub fn complement(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::identity(n, n) - self.s_inf.matrix()
    }

    fn certify(a: &CMatrix, s_inf: CMatrix, orthogonal: bool) -> Result<Self> {
        let idempotency_defect = spectral_norm(&(&s_inf * &s_inf - &s_inf));
        let annihilation_defect = spectral_norm(&(&s_inf * a)).max(spectral_norm(&(a * &s_inf)));
        Ok(Self {
            s_inf: DenseOperator::new(s_inf)?,
            idempotency_defect,
            annihilation_defect,
            orthogonal,
        })
    }
}

/// Builds `S∞`: the orthogonal projector `K K*` onto `ker A` for self-adjoint
/// `A`, otherwise the oblique projector `K (L* K)⁻¹ L*` onto `ker A` along
/// `ran A`, where `L` spans `ker A*`.
pub fn limit_projector(a: &DenseOperator, spectral: &SpectralData) -> Result<LimitProjector> {
    let n = a.require_square("limit_projector")?;
    if spectral.dim() != n {
        return Err(Error::dim(
            "limit_projector",
            format!("spectral data for n = {}, operator n = {n}", spectral.dim()),
        ));
    }
    if let Err(reason) = spectral.semistability() {
        return Err(Error::Precondition(format!("generator is not semistable: {reason}")));
    }
    let m = a.matrix();
    let k = spectral.kernel_basis.matrix();
    if k.ncols() == 0 {
        return LimitProjector::certify(m, CMatrix::zeros(n, n), true);
    }
    if spectral.self_adjoint {
        return LimitProjector::certify(m, k * k.adjoint(), true);
    }
    let (left, _) = kernel_basis(&m.adjoint(), Some(spectral.rank_a.tolerance_used));
    if left.ncols() != k.ncols() {
        return Err(Error::Conditioning {
            what: "left kernel of A",
            condition: f64::INFINITY,
        });
    }
    let gram = left.adjoint() * k;
    let sv = linalg::numerical_rank(&DenseOperator::new(gram.clone())?, None).singular_values;
    let condition = sv.first().copied().unwrap_or(0.0) / sv.last().copied().unwrap_or(0.0);
    let inverse = gram.try_inverse().filter(|_| condition <= 1e12).ok_or(Error::Conditioning {
        what: "kernel/left-kernel pairing",
        condition,
    })?;
    let s_inf = k * inverse * left.adjoint();
    let s_inf = if a.is_real() {
        linalg::clean_real(s_inf, 1e-8)?
    } else {
        s_inf
    };
    LimitProjector::certify(m, s_inf, false)
}

/// Everything `classify` computes along the way.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub report: SemistabilityReport,
    pub spectral: SpectralData,
    /// Present exactly when the generator is semistable.
    pub projector: Option<LimitProjector>,
}

impl Analysis {
    pub fn require_semistable(&self) -> Result<&LimitProjector> {
        match (&self.projector, &self.report.reason) {
            (Some(p), _) => Ok(p),
            (None, Some(reason)) => Err(Error::NotSemistable(reason.clone())),
            (None, None) => Err(Error::Precondition("generator is not semistable".into())),
        }
    }
}

const OVERSHOOT_SAMPLES: usize = 40;

/// Classifies `a` and, when semistable, builds `S∞` and the overshoot estimate.
pub fn analyze(a: &DenseOperator, tol: Tolerances) -> Result<Analysis> {
    let spectral = spectral_data(a, tol)?;
    let mu = spectral.spectral_gap();
    let kernel_dim = spectral.kernel_dim();
    let zero_tol = spectral.zero_tol;
    match spectral.semistability() {
        Err(reason) => Ok(Analysis {
            report: SemistabilityReport {
                verdict: Verdict::NotSemistable,
                mu,
                overshoot_m: f64::INFINITY,
                kernel_dim,
                zero_tol,
                reason: Some(reason),
            },
            spectral,
            projector: None,
        }),
        Ok(verdict) => {
            let projector = limit_projector(a, &spectral)?;
            let semigroup = match spectral.modal_basis() {
                Some(b) => Semigroup::with_basis(a, b),
                None => Semigroup::pade(a),
            };
            let overshoot_m = overshoot_estimate(&semigroup, &projector, mu);
            Ok(Analysis {
                report: SemistabilityReport {
                    verdict,
                    mu,
                    overshoot_m,
                    kernel_dim,
                    zero_tol,
                    reason: None,
                },
                spectral,
                projector: Some(projector),
            })
        }
    }
}

/// Verdict, spectral gap, overshoot estimate and kernel dimension of `a`.
pub fn classify(a: &DenseOperator, zero_tol: Option<f64>) -> Result<SemistabilityReport> {
    analyze(
        a,
        Tolerances {
            zero_tol,
            rank_tol: None,
        },
    )
    .map(|an| an.report)
}

fn overshoot_estimate(semigroup: &Semigroup, projector: &LimitProjector, mu: f64) -> f64 {
    let s_inf = projector.s_inf.matrix();
    let distance = |t: f64| spectral_norm(&(semigroup.at(t) - s_inf));
    let mut estimate = distance(0.0);
    if mu.is_finite() {
        let (lo, hi) = ((1e-3 / mu).ln(), (20.0 / mu).ln());
        for k in 0..OVERSHOOT_SAMPLES {
            let t = (lo + (hi - lo) * k as f64 / (OVERSHOOT_SAMPLES - 1) as f64).exp();
            estimate = estimate.max(distance(t) * (mu * t).exp());
        }
    }
    estimate.max(1.0)
}

/// `‖e^{At} − S∞‖` for each sample time.
pub fn decay_defect(a: &DenseOperator, s_inf: &LimitProjector, times: &[f64]) -> Result<Vec<f64>> {
    let n = a.require_square("decay_defect")?;
    if s_inf.dim() != n {
        return Err(Error::dim(
            "decay_defect",
            format!("S∞ is {0}x{0}, A is {n}x{n}", s_inf.dim()),
        ));
    }
    if times.is_empty() {
        return Err(Error::InvalidParameter("no sample times given".into()));
    }
    times
        .iter()
        .map(|&t| {
            let e = matrix_exponential(a, t)?;
            Ok(spectral_norm(&(e.matrix() - s_inf.s_inf.matrix())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn op(n: usize, v: &[f64]) -> DenseOperator {
        DenseOperator::from_row_slice(n, n, v).unwrap()
    }

    #[test]
    fn diagonal_semistable() {
        let r = classify(&DenseOperator::from_diagonal(&[0.0, -1.0]).unwrap(), None).unwrap();
        assert_eq!(r.verdict, Verdict::Semistable);
        assert!((r.mu - 1.0).abs() < 1e-14);
        assert_eq!(r.kernel_dim, 1);
        assert!((r.overshoot_m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jordan_block_is_not_semistable() {
        let r = classify(&op(2, &[0.0, 1.0, 0.0, 0.0]), None).unwrap();
        assert_eq!(r.verdict, Verdict::NotSemistable);
        assert_eq!(
            r.reason,
            Some(NotSemistableReason::DefectiveZero { rank_a: 1, rank_a2: 0 })
        );
        assert!(r.reason.unwrap().to_string().contains("zero eigenvalue defective"));
    }

    #[test]
    fn heat_spectrum_is_semistable() {
        let diag: Vec<f64> = (0..8).map(|n| -((n * n) as f64) * PI * PI).collect();
        let r = classify(&DenseOperator::from_diagonal(&diag).unwrap(), None).unwrap();
        assert_eq!(r.verdict, Verdict::Semistable);
        assert!((r.mu - PI * PI).abs() < 1e-12);
        assert_eq!(r.kernel_dim, 1);
    }

    #[test]
    fn stable_and_unstable() {
        let r = classify(&DenseOperator::from_diagonal(&[-1.0, -2.0]).unwrap(), None).unwrap();
        assert_eq!(r.verdict, Verdict::Stable);
        assert_eq!(r.kernel_dim, 0);
        let r = classify(&DenseOperator::from_diagonal(&[0.5, -2.0]).unwrap(), None).unwrap();
        assert_eq!(r.verdict, Verdict::NotSemistable);
        assert!(matches!(r.reason, Some(NotSemistableReason::UnstableEigenvalue(_))));
    }

    #[test]
    fn rotation_on_imaginary_axis() {
        let r = classify(&op(2, &[0.0, -1.0, 1.0, 0.0]), None).unwrap();
        assert_eq!(r.verdict, Verdict::NotSemistable);
        assert!(matches!(r.reason, Some(NotSemistableReason::ImaginaryAxisEigenvalue(_))));
    }

    #[test]
    fn defective_nonzero_eigenvalue_is_allowed() {
        let a = op(3, &[-1.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let an = analyze(&a, Tolerances::default()).unwrap();
        assert_eq!(an.report.verdict, Verdict::Semistable);
        let p = an.projector.unwrap();
        let want = DenseOperator::from_diagonal(&[0.0, 0.0, 1.0]).unwrap();
        assert!((p.s_inf.matrix() - want.matrix()).norm() < 1e-12);
    }

    #[test]
    fn diagonal_projector() {
        let a = DenseOperator::from_diagonal(&[0.0, -1.0, -3.0]).unwrap();
        let sd = spectral_data(&a, Tolerances::default()).unwrap();
        let p = limit_projector(&a, &sd).unwrap();
        assert!(p.orthogonal);
        let want = DenseOperator::from_diagonal(&[1.0, 0.0, 0.0]).unwrap();
        assert!((p.s_inf.matrix() - want.matrix()).norm() < 1e-14);
    }

    #[test]
    fn complete_graph_projector_matches_long_time_limit() {
        let a = op(3, &[-2.0, 1.0, 1.0, 1.0, -2.0, 1.0, 1.0, 1.0, -2.0]);
        let sd = spectral_data(&a, Tolerances::default()).unwrap();
        let p = limit_projector(&a, &sd).unwrap();
        let third = CMatrix::from_element(3, 3, C64::new(1.0 / 3.0, 0.0));
        assert!((p.s_inf.matrix() - &third).norm() < 1e-14);
        let late = matrix_exponential(&a, 50.0).unwrap();
        assert!((late.matrix() - &third).norm() < 1e-12);
    }

    #[test]
    fn oblique_projector_for_non_normal_generator() {
        let a = op(2, &[0.0, 1.0, 0.0, -1.0]);
        let sd = spectral_data(&a, Tolerances::default()).unwrap();
        assert!(!sd.self_adjoint);
        let p = limit_projector(&a, &sd).unwrap();
        assert!(!p.orthogonal);
        let want = op(2, &[1.0, 1.0, 0.0, 0.0]);
        assert!((p.s_inf.matrix() - want.matrix()).norm() < 1e-13);
        let late = matrix_exponential(&a, 50.0).unwrap();
        assert!((late.matrix() - want.matrix()).norm() < 1e-12);
        assert!(p.idempotency_defect <= 1e-8 * p.s_inf.norm());
        assert!(p.annihilation_defect <= 1e-8 * a.norm() * p.s_inf.norm());
    }

    #[test]
    fn projector_rejects_non_semistable() {
        let a = op(2, &[0.0, 1.0, 0.0, 0.0]);
        let sd = spectral_data(&a, Tolerances::default()).unwrap();
        assert!(matches!(limit_projector(&a, &sd), Err(Error::Precondition(_))));
    }

    #[test]
    fn stable_projector_is_zero() {
        let a = DenseOperator::from_diagonal(&[-1.0, -2.0]).unwrap();
        let sd = spectral_data(&a, Tolerances::default()).unwrap();
        let p = limit_projector(&a, &sd).unwrap();
        assert_eq!(p.s_inf, DenseOperator::zeros(2, 2));
    }

    #[test]
    fn decay_defect_scalar_values() {
        let a = DenseOperator::from_diagonal(&[0.0, -1.0]).unwrap();
        let an = analyze(&a, Tolerances::default()).unwrap();
        let p = an.projector.unwrap();
        let d = decay_defect(&a, &p, &[0.0, 2f64.ln()]).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-14);
        assert!((d[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn decay_defect_path_laplacian() {
        // Path on 3 nodes: Laplacian eigenvalues {0, 1, 3}.
        let a = op(3, &[-1.0, 1.0, 0.0, 1.0, -2.0, 1.0, 0.0, 1.0, -1.0]);
        let an = analyze(&a, Tolerances::default()).unwrap();
        assert!((an.report.mu - 1.0).abs() < 1e-12);
        let p = an.projector.unwrap();
        let times = [0.0, 1.0, 2.0, 4.0];
        let d = decay_defect(&a, &p, &times).unwrap();
        for (t, v) in times.iter().zip(&d) {
            assert!((v - (-t).exp()).abs() < 1e-12, "t={t}: {v}");
        }
    }

    #[test]
    fn decay_defect_errors() {
        let a = DenseOperator::from_diagonal(&[0.0, -1.0]).unwrap();
        let p = analyze(&a, Tolerances::default()).unwrap().projector.unwrap();
        assert!(decay_defect(&a, &p, &[]).is_err());
        let b = DenseOperator::from_diagonal(&[0.0, -1.0, -2.0]).unwrap();
        assert!(decay_defect(&b, &p, &[1.0]).is_err());
    }

    #[test]
    fn zero_generator_is_semistable_with_full_kernel() {
        let r = classify(&DenseOperator::zeros(3, 3), None).unwrap();
        assert_eq!(r.verdict, Verdict::Semistable);
        assert_eq!(r.kernel_dim, 3);
        assert!(r.mu.is_infinite());
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(matches!(
            classify(&DenseOperator::zeros(2, 3), None),
            Err(Error::Dimension { .. })
        ));
    }
}
