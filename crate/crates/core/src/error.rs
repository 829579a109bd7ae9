use std::path::PathBuf;

use crate::linalg::DenseOperator;
use crate::semistability::NotSemistableReason;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {detail}")]
    Dimension { context: &'static str, detail: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("not semistable: {0}")]
    NotSemistable(NotSemistableReason),

    #[error("invalid selection: {0}")]
    InvalidSelection(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("ill-conditioned {what}: condition estimate {condition:.3e}")]
    Conditioning { what: &'static str, condition: f64 },

    #[error("quadrature did not converge: achieved {achieved:.3e} after {panels} panels")]
    Quadrature {
        best_estimate: Box<DenseOperator>,
        achieved: f64,
        panels: usize,
    },

    #[error("inconsistent Lyapunov solution: residual {residual:.3e} exceeds {bound:.3e}")]
    Inconsistent { residual: f64, bound: f64 },

    #[error("imaginary residue {residue:.3e} on a real-valued result")]
    ImaginaryResidue { residue: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn dim(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension {
            context,
            detail: detail.into(),
        }
    }

    pub(crate) fn parse(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
