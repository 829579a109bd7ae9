//! Invariant model reduction by eigenmode truncation.
//!
//! A reduction is a triple `(π, σ, Â)` with `πA = Âπ`, `B̂ = πB`, `Ĉ = Cσ`.
//! Mode truncation takes `σ` as selected columns of the (generalized)
//! eigenvector matrix `V` and `π` as the matching rows of `V⁻¹`, so `πσ = I`
//! and `σπ` is the spectral projector onto the kept modes. Modes on `ker A`
//! are never dropped.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{
    clean_real, default_rank_tolerance, matrix_exponential, range_basis, spectral_norm, CMatrix,
    DenseOperator, GroupKind, C64,
};
use crate::semistability::{analyze, SpectralData, Tolerances, Verdict};
use crate::system::StateSpaceSystem;

/// Which modes to keep. Mode indices refer to the eigenvalue order of
/// [`SpectralData::eigenvalues`] (real part descending).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModeSelection {
    /// The `k` slowest modes, widened to whole mode groups.
    Slowest(usize),
    All,
    /// An explicit index set; must consist of whole mode groups.
    Explicit(Vec<usize>),
}

impl FromStr for ModeSelection {
    type Err = Error;

    /// `slowest:K`, `all`, or a comma-separated index list such as `0,1,2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(ModeSelection::All);
        }
        if let Some(k) = s.strip_prefix("slowest:") {
            return k
                .trim()
                .parse()
                .map(ModeSelection::Slowest)
                .map_err(|_| Error::parse(None, format!("invalid mode count {k:?}")));
        }
        if s.is_empty() {
            return Ok(ModeSelection::Explicit(Vec::new()));
        }
        s.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(None, format!("invalid mode index {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(ModeSelection::Explicit)
    }
}

impl fmt::Display for ModeSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeSelection::Slowest(k) => write!(f, "slowest:{k}"),
            ModeSelection::All => f.write_str("all"),
            ModeSelection::Explicit(idx) => {
                let parts: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    /// `r × n`.
    pub pi: DenseOperator,
    /// `n × r`.
    pub sigma: DenseOperator,
    pub a_hat: DenseOperator,
    pub b_hat: DenseOperator,
    pub c_hat: DenseOperator,
    /// `‖πA − Âπ‖`.
    pub commutativity_defect: f64,
    /// `‖(σπ − I)K‖` for an orthonormal kernel basis `K`.
    pub kernel_identity_defect: f64,
    /// Kept mode indices, ascending.
    pub kept_modes: Vec<usize>,
    pub kept_eigenvalues: Vec<C64>,
    /// Conjugate pairs were rotated into a real basis.
    pub real_valued: bool,
}

impl Reduction {
    pub fn order(&self) -> usize {
        self.pi.rows()
    }

    /// `σπ`.
    pub fn projector(&self) -> CMatrix {
        self.sigma.matrix() * self.pi.matrix()
    }

    /// `I − σπ`.
    pub fn complement(&self) -> CMatrix {
        let n = self.sigma.rows();
        CMatrix::identity(n, n) - self.projector()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationOptions {
    /// Keep conjugate pairs together and rotate them into a real basis.
    pub real_valued: bool,
}

/// Mode truncation; real-valued whenever the system is real.
pub fn mode_truncation(
    sys: &StateSpaceSystem,
    spectral: &SpectralData,
    keep: &ModeSelection,
) -> Result<Reduction> {
    let options = TruncationOptions {
        real_valued: sys.is_real(),
    };
    mode_truncation_with(sys, spectral, keep, options)
}

pub fn mode_truncation_with(
    sys: &StateSpaceSystem,
    spectral: &SpectralData,
    keep: &ModeSelection,
    options: TruncationOptions,
) -> Result<Reduction> {
    let n = sys.states();
    if spectral.dim() != n {
        return Err(Error::dim(
            "mode_truncation",
            format!("spectral data for n = {}, system has n = {n}", spectral.dim()),
        ));
    }
    if let Err(reason) = spectral.semistability() {
        return Err(Error::Precondition(format!("generator is not semistable: {reason}")));
    }
    let basis = spectral.require_modal()?;
    let real_valued = options.real_valued && basis.real_input;

    // Units of selection: whole groups, with conjugate partners fused when a
    // real reduction is requested.
    let mut unit_of_mode = vec![0usize; n];
    let mut units: Vec<Vec<usize>> = Vec::new();
    for g in &basis.groups {
        if let (GroupKind::PairLower { partner }, true) = (g.kind, real_valued) {
            let u = unit_of_mode[basis.groups[partner].columns.start];
            units[u].extend(g.columns.clone());
            g.columns.clone().for_each(|c| unit_of_mode[c] = u);
            continue;
        }
        g.columns.clone().for_each(|c| unit_of_mode[c] = units.len());
        units.push(g.columns.clone().collect());
    }
    let kernel: Vec<usize> = basis
        .kernel_group()
        .map(|g| g.columns.clone().collect())
        .unwrap_or_default();

    let selected: BTreeSet<usize> = match keep {
        ModeSelection::All => (0..n).collect(),
        ModeSelection::Slowest(k) => {
            if *k > n {
                return Err(Error::InvalidSelection(format!(
                    "cannot keep {k} modes of a system with {n} states"
                )));
            }
            (0..*k)
                .flat_map(|m| units[unit_of_mode[m]].iter().copied())
                .collect()
        }
        ModeSelection::Explicit(indices) => {
            let set: BTreeSet<usize> = indices.iter().copied().collect();
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidSelection(format!(
                    "mode index {bad} out of range for {n} states"
                )));
            }
            for &m in &set {
                let unit = &units[unit_of_mode[m]];
                if let Some(missing) = unit.iter().find(|c| !set.contains(c)) {
                    return Err(Error::InvalidSelection(format!(
                        "modes {m} and {missing} belong to one invariant group and must be kept together"
                    )));
                }
            }
            set
        }
    };
    if let Some(dropped) = kernel.iter().find(|m| !selected.contains(m)) {
        return Err(Error::InvalidSelection(format!(
            "selection must retain ker A modes (mode {dropped} dropped)"
        )));
    }
    let kept: Vec<usize> = selected.into_iter().collect();
    let r = kept.len();

    let mut sigma = CMatrix::zeros(n, r);
    let mut pi = CMatrix::zeros(r, n);
    for (j, &m) in kept.iter().enumerate() {
        sigma.set_column(j, &basis.right.column(m));
        pi.set_row(j, &basis.left.row(m));
    }
    if real_valued {
        realify_pairs(&mut sigma, &mut pi, &kept, basis);
        sigma = clean_real(sigma, 1e-8)?;
        pi = clean_real(pi, 1e-8)?;
    }

    let a = sys.a().matrix();
    let a_hat = &pi * a * &sigma;
    let a_hat = if real_valued { clean_real(a_hat, 1e-8)? } else { a_hat };
    let b_hat = &pi * sys.b().matrix();
    let c_hat = sys.c().matrix() * &sigma;
    let commutativity_defect = spectral_norm(&(&pi * a - &a_hat * &pi));
    let k = spectral.kernel_basis.matrix();
    let kernel_identity_defect = spectral_norm(&(&sigma * (&pi * k) - k));

    Ok(Reduction {
        kept_eigenvalues: kept.iter().map(|&m| basis.eigenvalues[m]).collect(),
        kept_modes: kept,
        pi: DenseOperator::new(pi)?,
        sigma: DenseOperator::new(sigma)?,
        a_hat: DenseOperator::new(a_hat)?,
        b_hat: DenseOperator::new(b_hat)?,
        c_hat: DenseOperator::new(c_hat)?,
        commutativity_defect,
        kernel_identity_defect,
        real_valued,
    })
}

/// Replaces each kept conjugate column pair `(v, v̄)` by `(Re v, Im v)` and the
/// matching rows `(w, w̄)` by `(2 Re w, −2 Im w)`, preserving `σπ` and `πσ = I`.
fn realify_pairs(
    sigma: &mut CMatrix,
    pi: &mut CMatrix,
    kept: &[usize],
    basis: &crate::linalg::ModalBasis,
) {
    let position = |mode: usize| kept.iter().position(|&m| m == mode);
    for g in &basis.groups {
        let GroupKind::PairUpper { partner } = g.kind else {
            continue;
        };
        let lower = &basis.groups[partner];
        for (u, l) in g.columns.clone().zip(lower.columns.clone()) {
            let (Some(ju), Some(jl)) = (position(u), position(l)) else {
                continue;
            };
            let v = sigma.column(ju).into_owned();
            let w = pi.row(ju).into_owned();
            sigma.set_column(ju, &v.map(|z| C64::new(z.re, 0.0)));
            sigma.set_column(jl, &v.map(|z| C64::new(z.im, 0.0)));
            pi.set_row(ju, &w.map(|z| C64::new(2.0 * z.re, 0.0)));
            pi.set_row(jl, &w.map(|z| C64::new(-2.0 * z.im, 0.0)));
        }
    }
}

/// Sampled `‖π e^{At} − e^{Ât} π‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub times: Vec<f64>,
    pub defects: Vec<f64>,
    pub max_defect: f64,
    /// `max_t ‖e^{At}‖` over the same samples.
    pub max_semigroup_norm: f64,
}

pub fn check_invariance(
    sys: &StateSpaceSystem,
    red: &Reduction,
    times: &[f64],
) -> Result<InvarianceReport> {
    check_compatible(sys, red)?;
    let pi = red.pi.matrix();
    let mut defects = Vec::with_capacity(times.len());
    let mut max_semigroup_norm = 0.0_f64;
    for &t in times {
        let full = matrix_exponential(sys.a(), t)?;
        let reduced = matrix_exponential(&red.a_hat, t)?;
        defects.push(spectral_norm(&(pi * full.matrix() - reduced.matrix() * pi)));
        max_semigroup_norm = max_semigroup_norm.max(full.norm());
    }
    Ok(InvarianceReport {
        times: times.to_vec(),
        max_defect: defects.iter().copied().fold(0.0, f64::max),
        defects,
        max_semigroup_norm,
    })
}

fn check_compatible(sys: &StateSpaceSystem, red: &Reduction) -> Result<()> {
    if red.sigma.rows() != sys.states() || red.b_hat.cols() != sys.inputs() {
        return Err(Error::dim(
            "reduction",
            format!(
                "reduction of an n = {} system applied to n = {}",
                red.sigma.rows(),
                sys.states()
            ),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreservationReport {
    pub original_verdict: Verdict,
    pub reduced_verdict: Verdict,
    pub original_controllability_rank: usize,
    pub reduced_controllability_rank: usize,
    pub original_controllable: bool,
    pub reduced_controllable: bool,
}

impl PreservationReport {
    /// `verdict(Â)` at least as strong as `verdict(A)`.
    pub fn semistability_preserved(&self) -> bool {
        self.reduced_verdict.at_least(self.original_verdict)
    }

    /// `(A,B)` controllable implies `(Â,B̂)` controllable.
    pub fn controllability_preserved(&self) -> bool {
        !self.original_controllable || self.reduced_controllable
    }

    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.semistability_preserved() {
            v.push("semistability not preserved");
        }
        if !self.controllability_preserved() {
            v.push("controllability not preserved");
        }
        v
    }
}

/// Classifies `Â` and compares controllability of `(A,B)` and `(Â,B̂)`.
/// Violations are reported, not raised.
pub fn check_preservation(
    sys: &StateSpaceSystem,
    red: &Reduction,
    rank_tol: Option<f64>,
) -> Result<PreservationReport> {
    check_compatible(sys, red)?;
    let tol = Tolerances {
        zero_tol: None,
        rank_tol,
    };
    let analysis = analyze(sys.a(), tol)?;
    let original = analysis.report.verdict;
    // The reduced generator is judged on the scale of the original: a block
    // that keeps only kernel modes is zero up to round-off, and tolerances
    // relative to its own norm would read that noise as spectrum.
    let inherited = Tolerances {
        zero_tol: Some(analysis.report.zero_tol),
        rank_tol: Some(analysis.spectral.rank_a.tolerance_used),
    };
    let reduced = if red.order() == 0 {
        Verdict::Stable
    } else if red.a_hat.norm() <= analysis.spectral.rank_a.tolerance_used {
        Verdict::Semistable
    } else {
        analyze(&red.a_hat, inherited)?.report.verdict
    };
    let n = sys.states();
    let r = red.order();
    let original_rank = controllability_rank(sys.a(), sys.b(), rank_tol)?;
    let reduced_rank = controllability_rank(&red.a_hat, &red.b_hat, rank_tol)?;
    Ok(PreservationReport {
        original_verdict: original,
        reduced_verdict: reduced,
        original_controllability_rank: original_rank,
        reduced_controllability_rank: reduced_rank,
        original_controllable: original_rank == n,
        reduced_controllable: reduced_rank == r,
    })
}

/// Rank of `[B, AB, …, A^{n−1}B]`, computed as the dimension of the block
/// Krylov space with each new block orthogonalized against the previous ones.
/// The rank tolerance applies to the orthogonalized residuals, relative to
/// `‖B‖` for the first block and `‖A‖` afterwards.
pub fn controllability_rank(
    a: &DenseOperator,
    b: &DenseOperator,
    rank_tol: Option<f64>,
) -> Result<usize> {
    let n = a.require_square("controllability_rank")?;
    if b.rows() != n {
        return Err(Error::dim(
            "controllability_rank",
            format!("B has {} rows, A is {n}x{n}", b.rows()),
        ));
    }
    if n == 0 {
        return Ok(0);
    }
    let m = b.cols().max(1);
    let first_tol = rank_tol.unwrap_or_else(|| default_rank_tolerance(n, m, b.norm()));
    let (mut basis, _) = range_basis(b.matrix(), Some(first_tol));
    let step_tol = rank_tol.unwrap_or_else(|| default_rank_tolerance(n, n * m, a.norm()));
    let mut block = basis.clone();
    while basis.ncols() < n && block.ncols() > 0 {
        let mut next = a.matrix() * &block;
        for _ in 0..2 {
            let coeffs = basis.adjoint() * &next;
            next -= &basis * coeffs;
        }
        let (fresh, _) = range_basis(&next, Some(step_tol));
        if fresh.ncols() == 0 {
            break;
        }
        let mut grown = CMatrix::zeros(n, basis.ncols() + fresh.ncols());
        grown.columns_mut(0, basis.ncols()).copy_from(&basis);
        grown.columns_mut(basis.ncols(), fresh.ncols()).copy_from(&fresh);
        basis = grown;
        block = fresh;
    }
    Ok(basis.ncols().min(n))
}

/// `‖e^{At}x₀ − σe^{Ât}πx₀‖` for each sample time.
pub fn trajectory_sync_defect(
    sys: &StateSpaceSystem,
    red: &Reduction,
    x0: &[C64],
    times: &[f64],
) -> Result<Vec<f64>> {
    check_compatible(sys, red)?;
    let n = sys.states();
    if x0.len() != n {
        return Err(Error::dim(
            "trajectory_sync_defect",
            format!("x0 has {} entries, system has {n} states", x0.len()),
        ));
    }
    let x = CMatrix::from_column_slice(n, 1, x0);
    let reduced0 = red.pi.matrix() * &x;
    times
        .iter()
        .map(|&t| {
            let full = matrix_exponential(sys.a(), t)?.into_matrix() * &x;
            let reduced =
                red.sigma.matrix() * (matrix_exponential(&red.a_hat, t)?.into_matrix() * &reduced0);
            Ok((full - reduced).norm())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semistability::spectral_data;
    use std::f64::consts::PI;

    fn diag_system(d: &[f64]) -> StateSpaceSystem {
        let n = d.len();
        StateSpaceSystem::new(
            DenseOperator::from_diagonal(d).unwrap(),
            DenseOperator::identity(n),
            DenseOperator::identity(n),
        )
        .unwrap()
    }

    fn reduce(sys: &StateSpaceSystem, keep: &ModeSelection) -> Result<Reduction> {
        let sd = spectral_data(sys.a(), Tolerances::default())?;
        mode_truncation(sys, &sd, keep)
    }

    #[test]
    fn selection_parsing() {
        assert_eq!("slowest:3".parse::<ModeSelection>().unwrap(), ModeSelection::Slowest(3));
        assert_eq!("all".parse::<ModeSelection>().unwrap(), ModeSelection::All);
        assert_eq!(
            "0, 2,1".parse::<ModeSelection>().unwrap(),
            ModeSelection::Explicit(vec![0, 2, 1])
        );
        assert!("slowest:x".parse::<ModeSelection>().is_err());
        assert!("1;2".parse::<ModeSelection>().is_err());
        assert_eq!(ModeSelection::Slowest(2).to_string(), "slowest:2");
    }

    #[test]
    fn diagonal_truncation() {
        let sys = diag_system(&[0.0, -1.0, -2.0]);
        let red = reduce(&sys, &ModeSelection::Slowest(2)).unwrap();
        let want = DenseOperator::from_diagonal(&[1.0, 1.0, 0.0]).unwrap();
        assert!((red.projector() - want.matrix()).norm() < 1e-14);
        let a_hat = DenseOperator::from_diagonal(&[0.0, -1.0]).unwrap();
        assert!((red.a_hat.matrix() - a_hat.matrix()).norm() < 1e-14);
        assert_eq!(red.commutativity_defect, 0.0);
        assert_eq!(red.kernel_identity_defect, 0.0);
    }

    #[test]
    fn heat_truncation() {
        let d: Vec<f64> = (0..4).map(|n| -((n * n) as f64) * PI * PI).collect();
        let red = reduce(&diag_system(&d), &ModeSelection::Slowest(2)).unwrap();
        let a_hat = DenseOperator::from_diagonal(&[0.0, -PI * PI]).unwrap();
        assert!((red.a_hat.matrix() - a_hat.matrix()).norm() < 1e-12);
        assert_eq!(red.commutativity_defect, 0.0);
    }

    #[test]
    fn keep_all_is_identity() {
        let sys = diag_system(&[0.0, -1.0, -2.0]);
        let red = reduce(&sys, &ModeSelection::All).unwrap();
        assert!((red.complement()).norm() < 1e-14);
        let report = check_invariance(&sys, &red, &[0.0, 1.0]).unwrap();
        assert!(report.max_defect < 1e-14);
    }

    #[test]
    fn kernel_modes_cannot_be_dropped() {
        let sys = diag_system(&[0.0, -1.0, -2.0]);
        for keep in [ModeSelection::Explicit(vec![1, 2]), ModeSelection::Slowest(0)] {
            let err = reduce(&sys, &keep).unwrap_err();
            assert!(matches!(err, Error::InvalidSelection(_)));
            assert!(err.to_string().contains("ker A"));
        }
        assert!(matches!(
            reduce(&sys, &ModeSelection::Explicit(vec![0, 7])),
            Err(Error::InvalidSelection(_))
        ));
    }

    #[test]
    fn stable_system_may_keep_nothing() {
        let sys = diag_system(&[-1.0]);
        let red = reduce(&sys, &ModeSelection::Slowest(0)).unwrap();
        assert_eq!(red.order(), 0);
        assert_eq!(red.a_hat.shape(), (0, 0));
    }

    #[test]
    fn conjugate_pair_kept_together_and_real() {
        // Eigenvalues 0 and -1 ± 2i.
        let a = DenseOperator::from_row_slice(
            3,
            3,
            &[0.0, 0.0, 0.0, 0.0, -1.0, 2.0, 0.0, -2.0, -1.0],
        )
        .unwrap();
        let sys = StateSpaceSystem::new(
            a,
            DenseOperator::from_row_slice(3, 1, &[1.0, 1.0, 1.0]).unwrap(),
            DenseOperator::from_row_slice(1, 3, &[1.0, 1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let red = reduce(&sys, &ModeSelection::Slowest(2)).unwrap();
        assert_eq!(red.order(), 3);
        assert!(red.real_valued);
        assert!(red.a_hat.is_real() && red.pi.is_real() && red.sigma.is_real());
        let pi_sigma = red.pi.matrix() * red.sigma.matrix();
        assert!((pi_sigma - CMatrix::identity(3, 3)).norm() < 1e-12);
        assert!(matches!(
            reduce(&sys, &ModeSelection::Explicit(vec![0, 1])),
            Err(Error::InvalidSelection(_))
        ));
    }

    #[test]
    fn complex_reduction_when_requested() {
        let a = DenseOperator::from_row_slice(2, 2, &[-1.0, 2.0, -2.0, -1.0]).unwrap();
        let sys = StateSpaceSystem::new(a, DenseOperator::identity(2), DenseOperator::identity(2))
            .unwrap();
        let sd = spectral_data(sys.a(), Tolerances::default()).unwrap();
        let opts = TruncationOptions { real_valued: false };
        let red = mode_truncation_with(&sys, &sd, &ModeSelection::Slowest(1), opts).unwrap();
        assert_eq!(red.order(), 1);
        assert!((red.a_hat[(0, 0)] - C64::new(-1.0, 2.0)).norm() < 1e-12);
        assert!(red.commutativity_defect < 1e-12);
    }

    #[test]
    fn jordan_chain_stays_whole() {
        let a = DenseOperator::from_row_slice(
            3,
            3,
            &[0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, -1.0],
        )
        .unwrap();
        let sys = StateSpaceSystem::new(a, DenseOperator::identity(3), DenseOperator::identity(3))
            .unwrap();
        let red = reduce(&sys, &ModeSelection::Slowest(2)).unwrap();
        assert_eq!(red.order(), 3);
        assert!(matches!(
            reduce(&sys, &ModeSelection::Explicit(vec![0, 1])),
            Err(Error::InvalidSelection(_))
        ));
    }

    #[test]
    fn preservation_examples() {
        let b = DenseOperator::from_row_slice(2, 1, &[1.0, 1.0]).unwrap();
        let sys = StateSpaceSystem::new(
            DenseOperator::from_diagonal(&[0.0, -1.0]).unwrap(),
            b,
            DenseOperator::identity(2),
        )
        .unwrap();
        let red = reduce(&sys, &ModeSelection::All).unwrap();
        let p = check_preservation(&sys, &red, None).unwrap();
        assert!(p.original_controllable && p.reduced_controllable);
        assert_eq!(p.reduced_verdict, Verdict::Semistable);

        let sys = StateSpaceSystem::new(
            DenseOperator::from_diagonal(&[0.0, -1.0, -2.0]).unwrap(),
            DenseOperator::from_row_slice(3, 1, &[1.0, 1.0, 1.0]).unwrap(),
            DenseOperator::identity(3),
        )
        .unwrap();
        let red = reduce(&sys, &ModeSelection::Slowest(2)).unwrap();
        let p = check_preservation(&sys, &red, None).unwrap();
        assert_eq!(p.reduced_controllability_rank, 2);
        assert!(p.reduced_controllable);
        assert_eq!(p.reduced_verdict, Verdict::Semistable);
        assert!(p.violations().is_empty());

        let sys = diag_system(&[-1.0, -2.0]);
        let red = reduce(&sys, &ModeSelection::Slowest(1)).unwrap();
        assert!((red.a_hat[(0, 0)].re + 1.0).abs() < 1e-14);
        let p = check_preservation(&sys, &red, None).unwrap();
        assert_eq!(p.reduced_verdict, Verdict::Stable);
    }

    #[test]
    fn kernel_only_reduction_is_semistable() {
        // Rotated consensus generator: the kept block is zero only up to
        // round-off.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = DenseOperator::from_row_slice(2, 2, &[-0.5, 0.5, 0.5, -0.5]).unwrap();
        let b = DenseOperator::from_row_slice(2, 1, &[s, 0.3]).unwrap();
        let sys = StateSpaceSystem::new(a, b, DenseOperator::identity(2)).unwrap();
        let red = reduce(&sys, &ModeSelection::Slowest(1)).unwrap();
        assert!(red.a_hat.norm() < 1e-14);
        let p = check_preservation(&sys, &red, None).unwrap();
        assert_eq!(p.reduced_verdict, Verdict::Semistable);
        assert!(p.violations().is_empty());
    }

    #[test]
    fn controllability_rank_matches_direct_rank() {
        let a = DenseOperator::from_diagonal(&[0.0, -1.0, -2.0]).unwrap();
        let ones = DenseOperator::from_row_slice(3, 1, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(controllability_rank(&a, &ones, None).unwrap(), 3);
        let e1 = DenseOperator::from_row_slice(3, 1, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(controllability_rank(&a, &e1, None).unwrap(), 1);
        let repeated = DenseOperator::from_diagonal(&[-1.0, -1.0]).unwrap();
        let b = DenseOperator::from_row_slice(2, 1, &[1.0, 1.0]).unwrap();
        assert_eq!(controllability_rank(&repeated, &b, None).unwrap(), 1);
    }

    #[test]
    fn sync_defect_is_dropped_mode() {
        let sys = diag_system(&[0.0, -1.0, -4.0]);
        let red = reduce(&sys, &ModeSelection::Slowest(2)).unwrap();
        let x0 = [C64::new(1.0, 0.0); 3];
        let times = [0.0, 1.0, 2.0, 3.0];
        let d = trajectory_sync_defect(&sys, &red, &x0, &times).unwrap();
        for (t, v) in times.iter().zip(&d) {
            assert!((v - (-4.0 * t).exp()).abs() < 1e-12);
        }
        let kernel_x0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let d = trajectory_sync_defect(&sys, &red, &kernel_x0, &times).unwrap();
        assert!(d.iter().all(|&v| v <= 1e-10));
    }
}
