//! Semistability analysis and invariant model reduction for linear
//! state-space systems `ẋ = Ax + Bu, y = Cx`.
//!
//! The crate classifies generators as stable, semistable or neither, computes
//! the limit projector `S∞ = lim e^{At}`, the semistability Gramian
//! `P∞ = ∫₀^∞ (e^{At} − S∞) B B* (e^{At} − S∞)* dt` (by quadrature and by a
//! constrained Lyapunov solve), builds eigenmode truncations that commute with
//! the dynamics, and evaluates their H₂ error exactly from the Gramian.

pub mod error;
pub mod gramian;
pub mod h2error;
pub mod heat;
pub mod linalg;
pub mod reduction;
pub mod report;
pub mod semistability;
pub mod system;

pub use error::{Error, Result};
pub use gramian::{GramianMethod, GramianStrategy, SemistabilityGramian};
pub use h2error::{H2ErrorResult, H2Method};
pub use heat::{BenchmarkReport, HeatSurrogate};
pub use linalg::{DenseOperator, RankDecision, C64};
pub use reduction::{ModeSelection, Reduction};
pub use semistability::{
    Analysis, LimitProjector, NotSemistableReason, SemistabilityReport, SpectralData, Tolerances,
    Verdict,
};
pub use system::{StateSpaceSystem, SystemFile};



