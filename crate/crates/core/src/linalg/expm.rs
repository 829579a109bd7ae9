use super::operator::{clean_real, is_real_matrix, CMatrix, DenseOperator, C64};
use crate::error::{Error, Result};

/// `e^{At}` by Padé scaling and squaring (nalgebra's Al-Mohy–Higham port).
/// Relative accuracy is about 1e-12 for well-conditioned input.
pub fn matrix_exponential(a: &DenseOperator, t: f64) -> Result<DenseOperator> {
    a.require_square("matrix_exponential")?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    let out = expm(a.matrix(), t);
    let out = if a.is_real() { clean_real(out, 1e-10)? } else { out };
    DenseOperator::new(out)
}

pub(crate) fn expm(a: &CMatrix, t: f64) -> CMatrix {
    let n = a.nrows();
    if n == 0 || t == 0.0 {
        return CMatrix::identity(n, n);
    }
    let scaled = a.scale(t);
    if is_diagonal(&scaled) {
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = scaled[(i, i)].exp();
        }
        return out;
    }
    let mut out = scaled.exp();
    if is_real_matrix(a) {
        out.iter_mut().for_each(|z| *z = C64::new(z.re, 0.0));
    }
    out
}

fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == C64::new(0.0, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_generator_gives_identity() {
        let e = matrix_exponential(&DenseOperator::zeros(3, 3), 5.0).unwrap();
        assert_eq!(e, DenseOperator::identity(3));
    }

    #[test]
    fn heat_modes_decay() {
        let a = DenseOperator::from_diagonal(&[0.0, -PI * PI]).unwrap();
        let e = matrix_exponential(&a, 1.0).unwrap();
        assert!((e[(0, 0)].re - 1.0).abs() < 1e-15);
        let expected = (-PI * PI).exp();
        assert!((e[(1, 1)].re - expected).abs() <= 1e-12 * expected);
        assert_eq!(e[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn nilpotent_closed_form() {
        let a = DenseOperator::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let e = matrix_exponential(&a, 2.0).unwrap();
        let want = DenseOperator::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!((e.matrix() - want.matrix()).norm() < 1e-13);
    }

    #[test]
    fn rotation_generator() {
        let a = DenseOperator::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
        let e = matrix_exponential(&a, PI / 2.0).unwrap();
        let want = DenseOperator::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]).unwrap();
        assert!((e.matrix() - want.matrix()).norm() < 1e-13);
        assert!(e.is_real());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matrix_exponential(&DenseOperator::zeros(2, 3), 1.0).is_err());
        assert!(matrix_exponential(&DenseOperator::identity(2), -1.0).is_err());
        assert!(matrix_exponential(&DenseOperator::identity(2), f64::NAN).is_err());
    }
}
