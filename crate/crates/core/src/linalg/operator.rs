use std::fmt;
use std::ops::Deref;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Dense complex matrix standing in for a bounded operator between
/// finite-dimensional spaces. Real operators carry exactly-zero imaginary parts.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    inner: CMatrix,
}

impl DenseOperator {
    /// Wraps a matrix, rejecting NaN or infinite entries.
    pub fn new(inner: CMatrix) -> Result<Self> {
        if let Some((idx, _)) = inner
            .iter()
            .enumerate()
            .find(|(_, z)| !(z.re.is_finite() && z.im.is_finite()))
        {
            let rows = inner.nrows().max(1);
            return Err(Error::NonFinite {
                row: idx % rows,
                col: idx / rows,
            });
        }
        Ok(Self { inner })
    }

    pub(crate) fn wrap(inner: CMatrix) -> Self {
        debug_assert!(inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self { inner }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    /// Row-major real entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::dim(
                "DenseOperator::from_row_slice",
                format!("{} entries for a {rows}x{cols} matrix", entries.len()),
            ));
        }
        Self::from_real(&DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Row-major complex entries.
    pub fn from_complex_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::dim(
                "DenseOperator::from_complex_row_slice",
                format!("{} entries for a {rows}x{cols} matrix", entries.len()),
            ));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(CMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::wrap(CMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = nalgebra::DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(CMatrix::from_diagonal(&d))
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.inner.adjoint())
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.inner)
    }

    pub fn max_imag(&self) -> f64 {
        max_imag(&self.inner)
    }

    pub fn is_real(&self) -> bool {
        self.max_imag() == 0.0
    }

    /// Real part, provided every imaginary part is at most `tol` in magnitude.
    pub fn to_real(&self, tol: f64) -> Option<DMatrix<f64>> {
        (self.max_imag() <= tol).then(|| self.inner.map(|z| z.re))
    }

    /// `‖A − A*‖`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        spectral_norm(&(&self.inner - self.inner.adjoint()))
    }

    pub(crate) fn require_square(&self, context: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::dim(
                context,
                format!("expected a square operator, got {}x{}", self.rows(), self.cols()),
            ))
        }
    }
}

impl Deref for DenseOperator {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.inner
    }
}

impl AsRef<CMatrix> for DenseOperator {
    fn as_ref(&self) -> &CMatrix {
        &self.inner
    }
}

impl TryFrom<CMatrix> for DenseOperator {
    type Error = Error;

    fn try_from(m: CMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseOperator({}x{})", self.rows(), self.cols())?;
        if self.rows() * self.cols() <= 64 {
            write!(f, " {}", self.inner)?;
        }
        Ok(())
    }
}

pub(crate) fn max_imag(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()))
}

pub(crate) fn is_real_matrix(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub(crate) fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub(crate) fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Largest singular value. Real matrices take the cheaper real SVD.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    super::rank::singular_values(m).first().copied().unwrap_or(0.0)
}

/// Strips imaginary parts after checking they are round-off only.
pub(crate) fn clean_real(m: CMatrix, tol: f64) -> Result<CMatrix> {
    let residue = max_imag(&m);
    let scale = m.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
    if residue > tol * scale {
        return Err(Error::ImaginaryResidue { residue });
    }
    Ok(m.map(|z| C64::new(z.re, 0.0)))
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}
