//! Entrywise adaptive Gauss–Kronrod quadrature of operator-valued integrands
//! over `[0, ∞)`.
//!
//! The caller supplies an exponential envelope `‖f(t)‖ ≤ K e^{-rt}`. The upper
//! limit is cut at the point where the envelope's tail integral falls below
//! half the tolerance; the remaining finite interval is integrated by global
//! adaptive bisection (G7/K15 pairs) until the summed panel error estimates
//! fall below the other half.
//!
//! Panels start on a geometric grid towards `t = 0` so that integrands made of
//! many exponentials with widely separated rates are not mistaken for zero by a
//! single coarse panel.

use super::operator::{CMatrix, DenseOperator, C64};
use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Exponential envelope `‖f(t)‖ ≤ constant · e^{-rate·t}` certified by the caller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayBound {
    pub constant: f64,
    pub rate: f64,
}

impl DecayBound {
    pub fn new(constant: f64, rate: f64) -> Result<Self> {
        if !(constant.is_finite() && constant >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "decay constant must be finite and nonnegative, got {constant}"
            )));
        }
        if !(rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "decay rate must be positive, got {rate}"
            )));
        }
        Ok(Self { constant, rate })
    }

    /// Integral of the envelope over `[t, ∞)`.
    pub fn tail(&self, t: f64) -> f64 {
        if self.rate.is_infinite() {
            return 0.0;
        }
        self.constant * (-self.rate * t).exp() / self.rate
    }

    /// Smallest `T ≥ 0` with `tail(T) ≤ budget`.
    pub fn truncation_point(&self, budget: f64) -> f64 {
        if self.constant == 0.0 || self.rate.is_infinite() {
            return 0.0;
        }
        ((self.constant / (self.rate * budget)).ln() / self.rate).max(0.0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Number of geometric panels laid down between 0 and the truncation point.
    pub initial_levels: u32,
}

impl QuadratureSettings {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_panels: 20_000,
            initial_levels: 40,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureOutcome {
    pub value: DenseOperator,
    /// Finite-panel error estimate plus the certified tail bound.
    pub error_estimate: f64,
    pub truncation_point: f64,
    pub panels: usize,
    pub evaluations: usize,
}

struct Panel {
    lo: f64,
    hi: f64,
    value: CMatrix,
    error: f64,
}

fn gauss_kronrod<F>(f: &F, lo: f64, hi: f64) -> Panel
where
    F: Fn(f64) -> CMatrix,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mid = f(center);
    let mut kronrod = mid.scale(WGK[7]);
    let mut gauss = mid.scale(WG[3]);
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let left = f(center - half * x);
        let right = f(center + half * x);
        let pair = left + right;
        kronrod += pair.scale(wk);
        if j % 2 == 1 {
            gauss += pair.scale(WG[j / 2]);
        }
    }
    kronrod.scale_mut(half);
    gauss.scale_mut(half);
    let error = kronrod
        .iter()
        .zip(gauss.iter())
        .fold(0.0_f64, |acc, (k, g)| acc.max((k - g).norm()));
    Panel {
        lo,
        hi,
        value: kronrod,
        error,
    }
}

/// `∫₀^∞ f(t) dt` entrywise to within `abs_tol`, given the decay envelope.
pub fn integrate_operator_valued<F>(f: F, bound: DecayBound, abs_tol: f64) -> Result<QuadratureOutcome>
where
    F: Fn(f64) -> CMatrix + Sync,
{
    integrate_operator_valued_with(f, bound, QuadratureSettings::with_tolerance(abs_tol))
}

pub fn integrate_operator_valued_with<F>(
    f: F,
    bound: DecayBound,
    settings: QuadratureSettings,
) -> Result<QuadratureOutcome>
where
    F: Fn(f64) -> CMatrix + Sync,
{
    let abs_tol = settings.abs_tol;
    if !(abs_tol > 0.0 && abs_tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance must be positive, got {abs_tol}"
        )));
    }
    let half_tol = 0.5 * abs_tol;
    let horizon = bound.truncation_point(half_tol);
    let tail = bound.tail(horizon);

    if horizon == 0.0 {
        let probe = f(0.0);
        return Ok(QuadratureOutcome {
            value: DenseOperator::zeros(probe.nrows(), probe.ncols()),
            error_estimate: tail,
            truncation_point: 0.0,
            panels: 0,
            evaluations: 1,
        });
    }

    let levels = settings.initial_levels.max(1);
    let mut edges = vec![0.0];
    for k in (0..levels).rev() {
        edges.push(horizon * 0.5_f64.powi(k as i32));
    }
    let mut panels: Vec<Panel> = edges
        .windows(2)
        .map(|w| gauss_kronrod(&f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * panels.len();

    loop {
        let total_error: f64 = panels.iter().map(|p| p.error).sum();
        if total_error <= half_tol {
            break;
        }
        if panels.len() >= settings.max_panels {
            let value = sum_panels(&mut panels);
            return Err(Error::Quadrature {
                best_estimate: Box::new(DenseOperator::new(value)?),
                achieved: total_error + tail,
                panels: panels.len(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let parent = panels.swap_remove(worst);
        let mid = 0.5 * (parent.lo + parent.hi);
        if !(mid > parent.lo && mid < parent.hi) {
            let value = sum_panels(&mut panels) + parent.value;
            return Err(Error::Quadrature {
                best_estimate: Box::new(DenseOperator::new(value)?),
                achieved: total_error + tail,
                panels: panels.len() + 1,
            });
        }
        let (left, right) = rayon::join(
            || gauss_kronrod(&f, parent.lo, mid),
            || gauss_kronrod(&f, mid, parent.hi),
        );
        evaluations += 30;
        panels.push(left);
        panels.push(right);
    }

    let error_estimate = panels.iter().map(|p| p.error).sum::<f64>() + tail;
    let panel_count = panels.len();
    let value = sum_panels(&mut panels);
    Ok(QuadratureOutcome {
        value: DenseOperator::new(value)?,
        error_estimate,
        truncation_point: horizon,
        panels: panel_count,
        evaluations,
    })
}

// Fixed left-to-right order keeps the result independent of the refinement history.
fn sum_panels(panels: &mut [Panel]) -> CMatrix {
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let (r, c) = panels
        .first()
        .map(|p| p.value.shape())
        .unwrap_or((0, 0));
    panels
        .iter()
        .fold(CMatrix::zeros(r, c), |acc, p| acc + &p.value)
}

/// Scalar convenience wrapper used by tests and the H₂ oracle.
pub(crate) fn scalar(value: f64) -> CMatrix {
    CMatrix::from_element(1, 1, C64::new(value, 0.0))
}
