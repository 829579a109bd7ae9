//! Eigenvalues and a block-diagonalizing basis of (generalized) eigenspaces.
//!
//! Eigenvalues are sorted by real part descending, then by |imaginary part|
//! ascending with the positive member of a conjugate pair first. Eigenvalues
//! closer than the clustering tolerance are merged into one group whose basis
//! spans the generalized eigenspace, so Jordan chains are never split.

use std::ops::Range;

use nalgebra::linalg::{Schur, SymmetricEigen};

use super::expm::expm;
use super::operator::{
    complexify, is_real_matrix, real_part, spectral_norm, CMatrix, DenseOperator, C64,
};
use super::rank::smallest_right_singular_vectors;
use crate::error::{Error, Result};

/// Relative Hermitian defect below which a matrix is treated as self-adjoint.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Condition number beyond which an eigenvector basis is rejected.
pub const MAX_BASIS_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// Eigenvalues within the zero tolerance of the origin.
    Kernel,
    /// A self-conjugate cluster (real eigenvalue of a real matrix, or any cluster
    /// of a complex matrix).
    Single,
    /// Upper (positive imaginary part) member of a conjugate pair of a real matrix;
    /// `partner` is the index of the lower member.
    PairUpper { partner: usize },
    PairLower { partner: usize },
}

#[derive(Clone, Debug)]
pub struct ModeGroup {
    pub center: C64,
    pub kind: GroupKind,
    /// Column range in the basis (and index range in the sorted eigenvalue list).
    pub columns: Range<usize>,
}

impl ModeGroup {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// `A = V · blockdiag(Λ_g) · V⁻¹` with `V` built group by group.
#[derive(Clone, Debug)]
pub struct ModalBasis {
    pub eigenvalues: Vec<C64>,
    pub groups: Vec<ModeGroup>,
    pub right: CMatrix,
    pub left: CMatrix,
    pub condition: f64,
    pub hermitian: bool,
    pub real_input: bool,
}

fn sort_key(a: &C64, b: &C64) -> std::cmp::Ordering {
    b.re.total_cmp(&a.re)
        .then(a.im.abs().total_cmp(&b.im.abs()))
        .then(b.im.total_cmp(&a.im))
}

pub(crate) fn is_hermitian(a: &CMatrix) -> bool {
    let norm = spectral_norm(a);
    let defect = spectral_norm(&(a - a.adjoint()));
    defect <= HERMITIAN_TOL * norm
}

/// Eigenvalues in canonical order.
pub fn eigenvalues(a: &DenseOperator) -> Result<Vec<C64>> {
    a.require_square("eigenvalues")?;
    Ok(sorted_eigenvalues(a.matrix(), is_hermitian(a.matrix())))
}

pub(crate) fn sorted_eigenvalues(a: &CMatrix, hermitian: bool) -> Vec<C64> {
    let mut ev: Vec<C64> = if a.is_empty() {
        Vec::new()
    } else if hermitian {
        hermitian_eigen(a).0.into_iter().map(|x| C64::new(x, 0.0)).collect()
    } else {
        let (_, t) = Schur::new(a.clone()).unpack();
        t.diagonal().iter().copied().collect()
    };
    ev.sort_by(sort_key);
    ev
}

/// Real eigenvalues and eigenvectors of the Hermitian part, ascending.
fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (a + a.adjoint()).scale(0.5);
    if is_real_matrix(&h) {
        let eig = SymmetricEigen::new(real_part(&h));
        (eig.eigenvalues.iter().copied().collect(), complexify(&eig.eigenvectors))
    } else {
        let eig = SymmetricEigen::new(h);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }
}

impl ModalBasis {
    /// Builds the basis. `zero_tol` decides which eigenvalues form the kernel group.
    pub fn new(a: &CMatrix, zero_tol: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::dim(
                "ModalBasis",
                format!("expected a square operator, got {}x{}", n, a.ncols()),
            ));
        }
        let real_input = is_real_matrix(a);
        if n == 0 {
            return Ok(Self {
                eigenvalues: Vec::new(),
                groups: Vec::new(),
                right: CMatrix::zeros(0, 0),
                left: CMatrix::zeros(0, 0),
                condition: 1.0,
                hermitian: true,
                real_input,
            });
        }
        if is_hermitian(a) {
            Ok(Self::hermitian(a, zero_tol, real_input))
        } else {
            Self::general(a, zero_tol, real_input)
        }
    }

    fn hermitian(a: &CMatrix, zero_tol: f64, real_input: bool) -> Self {
        let n = a.nrows();
        let (values, vectors) = hermitian_eigen(a);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        let right = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
        let eigenvalues: Vec<C64> = order.iter().map(|&i| C64::new(values[i], 0.0)).collect();

        let mut groups = Vec::new();
        let mut start = 0;
        while start < n {
            let is_zero = eigenvalues[start].norm() <= zero_tol;
            let mut end = start + 1;
            if is_zero {
                while end < n && eigenvalues[end].norm() <= zero_tol {
                    end += 1;
                }
            }
            groups.push(ModeGroup {
                center: if is_zero { C64::new(0.0, 0.0) } else { eigenvalues[start] },
                kind: if is_zero { GroupKind::Kernel } else { GroupKind::Single },
                columns: start..end,
            });
            start = end;
        }
        let left = right.adjoint();
        Self {
            eigenvalues,
            groups,
            right,
            left,
            condition: 1.0,
            hermitian: true,
            real_input,
        }
    }

    fn general(a: &CMatrix, zero_tol: f64, real_input: bool) -> Result<Self> {
        let n = a.nrows();
        let norm = spectral_norm(a);
        let cluster_tol = zero_tol.max(1e-7 * norm);

        let (q, t) = Schur::new(a.clone()).unpack();
        let schur_values: Vec<C64> = t.diagonal().iter().copied().collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| sort_key(&schur_values[i], &schur_values[j]));

        // Single-linkage clustering; kernel members never link to nonzero ones.
        let is_zero = |z: C64| z.norm() <= zero_tol;
        let mut label: Vec<usize> = (0..n).collect();
        fn find(label: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while label[r] != r {
                r = label[r];
            }
            let mut k = i;
            while label[k] != r {
                let next = label[k];
                label[k] = r;
                k = next;
            }
            r
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (zi, zj) = (schur_values[i], schur_values[j]);
                let link = match (is_zero(zi), is_zero(zj)) {
                    (true, true) => true,
                    (false, false) => (zi - zj).norm() <= cluster_tol,
                    _ => false,
                };
                if link {
                    let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                    label[ri.max(rj)] = ri.min(rj);
                }
            }
        }

        // Clusters ordered by their leading member in canonical order.
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut root_slot: Vec<Option<usize>> = vec![None; n];
        for &i in &order {
            let root = find(&mut label, i);
            match root_slot[root] {
                Some(slot) => clusters[slot].push(i),
                None => {
                    root_slot[root] = Some(clusters.len());
                    clusters.push(vec![i]);
                }
            }
        }
        let center_of = |members: &[usize]| {
            members.iter().map(|&i| schur_values[i]).sum::<C64>() / members.len() as f64
        };
        if real_input {
            // Conjugate partners sit next to each other, upper member first.
            let mut arranged: Vec<Vec<usize>> = Vec::with_capacity(clusters.len());
            let mut used = vec![false; clusters.len()];
            for ci in 0..clusters.len() {
                if used[ci] {
                    continue;
                }
                let c = center_of(&clusters[ci]);
                let partner = (c.im.abs() > cluster_tol)
                    .then(|| {
                        (0..clusters.len()).find(|&cj| {
                            !used[cj]
                                && cj != ci
                                && clusters[cj].len() == clusters[ci].len()
                                && (center_of(&clusters[cj]) - c.conj()).norm() <= cluster_tol
                        })
                    })
                    .flatten();
                used[ci] = true;
                match partner {
                    Some(cj) => {
                        used[cj] = true;
                        let (up, low) = if c.im > 0.0 { (ci, cj) } else { (cj, ci) };
                        arranged.push(clusters[up].clone());
                        arranged.push(clusters[low].clone());
                    }
                    None => arranged.push(clusters[ci].clone()),
                }
            }
            clusters = arranged;
        }

        let mut eigenvalues = Vec::with_capacity(n);
        let mut groups: Vec<ModeGroup> = Vec::with_capacity(clusters.len());
        let mut columns: Vec<CMatrix> = Vec::with_capacity(clusters.len());
        for members in &clusters {
            let m = members.len();
            let kernel = members.iter().all(|&i| is_zero(schur_values[i]));
            let center = if kernel {
                C64::new(0.0, 0.0)
            } else {
                center_of(members)
            };
            let start = eigenvalues.len();
            eigenvalues.extend(members.iter().map(|&i| schur_values[i]));

            let self_conjugate = !real_input || center.im.abs() <= cluster_tol;
            let kind = if kernel {
                GroupKind::Kernel
            } else if self_conjugate {
                GroupKind::Single
            } else if center.im > 0.0 {
                GroupKind::PairUpper { partner: usize::MAX }
            } else {
                GroupKind::PairLower { partner: usize::MAX }
            };

            // Lower members of a conjugate pair reuse the conjugated upper basis.
            let partner_basis = match kind {
                GroupKind::PairLower { .. } => groups
                    .iter()
                    .enumerate()
                    .find(|(_, g)| {
                        matches!(g.kind, GroupKind::PairUpper { .. })
                            && g.len() == m
                            && (g.center.conj() - center).norm() <= cluster_tol
                    })
                    .map(|(gi, _)| gi),
                _ => None,
            };

            let basis = if let Some(gi) = partner_basis {
                let own_index = groups.len();
                if let GroupKind::PairUpper { partner } = &mut groups[gi].kind {
                    *partner = own_index;
                }
                columns[gi].map(|z| z.conj())
            } else if m == 1 && !kernel {
                let k = members[0];
                let v = schur_eigenvector(&q, &t, k, norm);
                if real_input && self_conjugate {
                    realify_vector(v)
                } else {
                    v
                }
            } else {
                let shift = if real_input && self_conjugate {
                    C64::new(center.re, 0.0)
                } else {
                    center
                };
                let shifted = a - CMatrix::identity(n, n) * shift;
                let mut power = shifted.clone();
                for _ in 1..m {
                    power = &power * &shifted;
                }
                smallest_right_singular_vectors(&power, m)
            };

            let kind = match (kind, partner_basis) {
                (GroupKind::PairLower { .. }, Some(gi)) => GroupKind::PairLower { partner: gi },
                (GroupKind::PairLower { .. }, None) => GroupKind::Single,
                (k, _) => k,
            };
            groups.push(ModeGroup {
                center,
                kind,
                columns: start..start + m,
            });
            columns.push(basis);
        }
        // Unpaired upper members fall back to independent treatment.
        for g in &mut groups {
            if let GroupKind::PairUpper { partner: usize::MAX } = g.kind {
                g.kind = GroupKind::Single;
            }
        }

        let mut right = CMatrix::zeros(n, n);
        for (g, basis) in groups.iter().zip(&columns) {
            for (local, col) in g.columns.clone().enumerate() {
                let v = basis.column(local);
                let scale = v.norm();
                right.set_column(col, &v.unscale(scale));
            }
        }
        let left = right
            .clone()
            .try_inverse()
            .ok_or(Error::Conditioning {
                what: "eigenvector basis",
                condition: f64::INFINITY,
            })?;
        let condition = spectral_norm(&right) * spectral_norm(&left);
        if !(condition <= MAX_BASIS_CONDITION) {
            return Err(Error::Conditioning {
                what: "eigenvector basis",
                condition,
            });
        }
        Ok(Self {
            eigenvalues,
            groups,
            right,
            left,
            condition,
            hermitian: false,
            real_input,
        })
    }

    pub fn dim(&self) -> usize {
        self.right.nrows()
    }

    pub fn kernel_group(&self) -> Option<&ModeGroup> {
        self.groups.iter().find(|g| g.kind == GroupKind::Kernel)
    }

    /// `Λ_g = V⁻¹[g] · A · V[g]`.
    pub fn block(&self, a: &CMatrix, group: &ModeGroup) -> CMatrix {
        let r = group.columns.clone();
        let w = self.left.rows(r.start, r.len());
        let v = self.right.columns(r.start, r.len());
        w * a * v
    }
}

/// Eigenvector of the upper-triangular Schur factor for diagonal index `k`,
/// mapped back through `Q`.
fn schur_eigenvector(q: &CMatrix, t: &CMatrix, k: usize, norm: f64) -> CMatrix {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let small = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
    let mut y = vec![C64::new(0.0, 0.0); n];
    y[k] = C64::new(1.0, 0.0);
    for i in (0..k).rev() {
        let mut rhs = C64::new(0.0, 0.0);
        for j in (i + 1)..=k {
            rhs -= t[(i, j)] * y[j];
        }
        let mut d = t[(i, i)] - lambda;
        if d.norm() < small {
            d = C64::new(small, 0.0);
        }
        y[i] = rhs / d;
    }
    let y = CMatrix::from_column_slice(n, 1, &y);
    let v = q * y;
    let scale = v.norm();
    v.unscale(scale)
}

/// Rotates a (numerically) real eigenvector onto the real axis.
fn realify_vector(v: CMatrix) -> CMatrix {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    v.map(|z| C64::new((z * phase).re, 0.0))
}

/// The semigroup `t ↦ e^{At}`, evaluated through a modal basis when one with
/// condition at most `1e8` exists and by Padé scaling and squaring otherwise.
#[derive(Clone, Debug)]
pub struct Semigroup {
    generator: CMatrix,
    modal: Option<ModalEvaluator>,
    real: bool,
}

#[derive(Clone, Debug)]
struct ModalEvaluator {
    right: CMatrix,
    left: CMatrix,
    blocks: Vec<(Range<usize>, CMatrix)>,
}

impl Semigroup {
    pub const MODAL_CONDITION_LIMIT: f64 = 1e8;

    pub fn new(a: &DenseOperator) -> Result<Self> {
        let n = a.require_square("Semigroup")?;
        let tol = 100.0 * n as f64 * f64::EPSILON * a.norm();
        let modal = ModalBasis::new(a.matrix(), tol).ok();
        Ok(Self::from_parts(a.matrix(), modal.as_ref()))
    }

    pub fn with_basis(a: &DenseOperator, basis: &ModalBasis) -> Self {
        Self::from_parts(a.matrix(), Some(basis))
    }

    /// Forces Padé evaluation.
    pub fn pade(a: &DenseOperator) -> Self {
        Self::from_parts(a.matrix(), None)
    }

    fn from_parts(a: &CMatrix, basis: Option<&ModalBasis>) -> Self {
        let modal = basis
            .filter(|b| b.condition <= Self::MODAL_CONDITION_LIMIT)
            .map(|b| ModalEvaluator {
                right: b.right.clone(),
                left: b.left.clone(),
                blocks: b
                    .groups
                    .iter()
                    .map(|g| (g.columns.clone(), b.block(a, g)))
                    .collect(),
            });
        Self {
            generator: a.clone(),
            modal,
            real: is_real_matrix(a),
        }
    }

    pub fn is_modal(&self) -> bool {
        self.modal.is_some()
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    /// `e^{At}`.
    pub fn at(&self, t: f64) -> CMatrix {
        let n = self.dim();
        match &self.modal {
            Some(_) => self.apply(t, &CMatrix::identity(n, n)),
            None => expm(&self.generator, t),
        }
    }

    /// `e^{At} · x`.
    pub fn apply(&self, t: f64, x: &CMatrix) -> CMatrix {
        let out = match &self.modal {
            None => expm(&self.generator, t) * x,
            Some(m) => {
                let mut y = &m.left * x;
                for (range, block) in &m.blocks {
                    if range.len() == 1 {
                        let factor = (block[(0, 0)] * t).exp();
                        y.row_mut(range.start).iter_mut().for_each(|z| *z *= factor);
                    } else {
                        let e = expm(block, t);
                        let seg = y.rows(range.start, range.len()).into_owned();
                        y.rows_mut(range.start, range.len()).copy_from(&(e * seg));
                    }
                }
                &m.right * y
            }
        };
        if self.real && x.iter().all(|z| z.im == 0.0) {
            out.map(|z| C64::new(z.re, 0.0))
        } else {
            out
        }
    }
}
