//! Dense complex linear algebra used throughout the crate.

mod expm;
mod format;
pub(crate) mod lyapunov;
mod operator;
mod quadrature;
mod rank;
mod spectral;

pub use expm::matrix_exponential;
pub use format::{format_matrix, parse_matrix, read_matrix, write_matrix};
pub use operator::{spectral_norm, CMatrix, DenseOperator, C64};
pub(crate) use operator::{clean_real, hermitian_part};
pub use quadrature::{
    integrate_operator_valued, integrate_operator_valued_with, DecayBound, QuadratureOutcome,
    QuadratureSettings,
};
pub(crate) use quadrature::scalar;
pub use rank::{default_rank_tolerance, numerical_kernel, numerical_rank, RankDecision};
pub(crate) use rank::{kernel_basis, range_basis, rank_decision, singular_values};
pub use spectral::{eigenvalues, GroupKind, ModalBasis, ModeGroup, Semigroup, HERMITIAN_TOL};
pub(crate) use spectral::sorted_eigenvalues;
