//! H₂ error of an invariant reduction.
//!
//! With `σπ` the identity on `ker A`, the error system's impulse response is
//! `h(t) − ĥ(t) = C(I−σπ)(S(t)−S∞)B`, so
//! `‖Σ − Σ̂‖²_{H₂} = tr(C(I−σπ)P∞(I−σπ)*C*)` with `P∞` the semistability
//! Gramian. The quadrature path integrates `tr(E(t)E(t)*)` directly from the
//! two impulse responses and shares nothing with the Gramian path.

use std::fmt;

use crate::error::{Error, Result};
use crate::gramian::SemistabilityGramian;
use crate::linalg::{
    integrate_operator_valued, scalar, spectral_norm, CMatrix, DecayBound, DenseOperator,
    ModalBasis, Semigroup, C64,
};
use crate::reduction::Reduction;
use crate::report::Record;
use crate::semistability::{analyze, default_zero_tolerance, Analysis, Tolerances};
use crate::system::StateSpaceSystem;

/// Largest `‖(σπ − I)K‖` accepted as "`σπ` is the identity on `ker A`".
pub const KERNEL_IDENTITY_TOL: f64 = 1e-8;
/// Negative traces down to `−CLAMP_TOL` (relative to the problem scale) are
/// round-off and reported as zero.
pub const CLAMP_TOL: f64 = 1e-10;
/// Modal bases with a larger condition number are not used by the quadrature
/// integrand; the semigroup is applied explicitly instead.
const MODAL_INTEGRAND_CONDITION: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum H2Method {
    GramianFormula,
    ImpulseQuadrature,
}

impl H2Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            H2Method::GramianFormula => "gramian_formula",
            H2Method::ImpulseQuadrature => "impulse_quadrature",
        }
    }
}

impl fmt::Display for H2Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct H2ErrorResult {
    /// `‖Σ − Σ̂‖²_{H₂}`, clamped at zero.
    pub trace_value: f64,
    pub h2_norm: f64,
    pub method: H2Method,
    pub tolerance: f64,
    /// The computed trace was slightly negative and has been reported as 0.
    pub clamped: bool,
    /// Trace before clamping.
    pub raw_trace: f64,
    pub kernel_identity_defect: f64,
    pub commutativity_defect: f64,
    /// Quadrature error estimate including the truncated tail.
    pub error_estimate: Option<f64>,
}

impl H2ErrorResult {
    fn new(raw: f64, scale: f64, method: H2Method, tolerance: f64, red: &Reduction) -> Result<Self> {
        let floor = CLAMP_TOL * scale.max(1.0);
        if raw < -floor {
            return Err(Error::Numerical(format!(
                "H2 trace {raw:.3e} is negative beyond round-off"
            )));
        }
        let trace_value = raw.max(0.0);
        Ok(Self {
            trace_value,
            h2_norm: trace_value.sqrt(),
            method,
            tolerance,
            clamped: raw < 0.0,
            raw_trace: raw,
            kernel_identity_defect: red.kernel_identity_defect,
            commutativity_defect: red.commutativity_defect,
            error_estimate: None,
        })
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.push("method", self.method)
            .push_f64("trace_value", self.trace_value)
            .push_f64("h2_norm", self.h2_norm)
            .push_f64("tolerance", self.tolerance)
            .push("clamped", self.clamped)
            .push_f64("kernel_identity_defect", self.kernel_identity_defect)
            .push_f64("commutativity_defect", self.commutativity_defect);
        if let Some(e) = self.error_estimate {
            r.push_f64("error_estimate", e);
        }
        r
    }
}

fn check_inputs(sys: &StateSpaceSystem, red: &Reduction) -> Result<()> {
    let n = sys.states();
    if red.sigma.rows() != n || red.pi.cols() != n {
        return Err(Error::dim(
            "h2 error",
            format!("reduction acts on n = {}, system has n = {n}", red.sigma.rows()),
        ));
    }
    if red.b_hat.cols() != sys.inputs() || red.c_hat.rows() != sys.outputs() {
        return Err(Error::dim("h2 error", "reduction was built for different B or C"));
    }
    let bound = KERNEL_IDENTITY_TOL * spectral_norm(&red.projector()).max(1.0);
    if red.kernel_identity_defect > bound {
        return Err(Error::Precondition(format!(
            "σπ is not the identity on ker A (defect {:.3e})",
            red.kernel_identity_defect
        )));
    }
    Ok(())
}

/// `tr(C(I−σπ)P∞(I−σπ)*C*)`, formed as an explicit `p × p` product.
pub fn h2_error_gramian(
    sys: &StateSpaceSystem,
    red: &Reduction,
    p_inf: &SemistabilityGramian,
) -> Result<H2ErrorResult> {
    check_inputs(sys, red)?;
    if p_inf.dim() != sys.states() {
        return Err(Error::dim(
            "h2_error_gramian",
            format!("P∞ is {0}x{0}, system has n = {1}", p_inf.dim(), sys.states()),
        ));
    }
    let g = sys.c().matrix() * red.complement();
    let m = &g * p_inf.p_inf.matrix() * g.adjoint();
    let raw: f64 = m.diagonal().iter().map(|z| z.re).sum();
    let scale = spectral_norm(&g).powi(2) * p_inf.p_inf.norm();
    let tolerance = p_inf.quadrature_tol.unwrap_or(CLAMP_TOL);
    H2ErrorResult::new(raw, scale, H2Method::GramianFormula, tolerance, red)
}

/// `∫₀^∞ tr(E(t)E(t)*) dt` with `E(t) = Ce^{At}B − Ĉe^{Ât}B̂`.
pub fn h2_error_quadrature(
    sys: &StateSpaceSystem,
    red: &Reduction,
    abs_tol: f64,
) -> Result<H2ErrorResult> {
    let analysis = analyze(sys.a(), Tolerances::default())?;
    h2_error_quadrature_with(sys, red, &analysis, abs_tol)
}

/// As [`h2_error_quadrature`], reusing an existing analysis of `A`.
pub fn h2_error_quadrature_with(
    sys: &StateSpaceSystem,
    red: &Reduction,
    analysis: &Analysis,
    abs_tol: f64,
) -> Result<H2ErrorResult> {
    check_inputs(sys, red)?;
    analysis.require_semistable()?;
    let report = &analysis.report;
    let complement = spectral_norm(&red.complement());
    let p = sys.outputs();
    let m = sys.inputs();
    let constant = p.min(m) as f64
        * (sys.c().norm() * complement * report.overshoot_m * sys.b().norm()).powi(2);

    if report.mu.is_infinite() || constant == 0.0 {
        let mut r = H2ErrorResult::new(0.0, 0.0, H2Method::ImpulseQuadrature, abs_tol, red)?;
        r.error_estimate = Some(0.0);
        return Ok(r);
    }
    let bound = DecayBound::new(constant, 2.0 * report.mu)?;
    let integrand = ErrorIntegrand::new(sys, red, analysis)?;
    let outcome = integrate_operator_valued(|t| scalar(integrand.eval(t)), bound, abs_tol)?;
    let raw = outcome.value[(0, 0)].re;
    let mut r = H2ErrorResult::new(raw, constant, H2Method::ImpulseQuadrature, abs_tol, red)?;
    r.error_estimate = Some(outcome.error_estimate);
    Ok(r)
}

/// Evaluates `tr(E(t)E(t)*)`.
enum ErrorIntegrand {
    /// `E(t) = Σ_a s_a e^{λ_a t} u_a r_a` over the modes of `A` (`s = +1`) and
    /// of `Â` (`s = −1`); `weights[(a, b)] = (u_b* u_a)(r_a r_b*)`.
    Modal {
        rates: Vec<C64>,
        signs: Vec<f64>,
        weights: CMatrix,
    },
    Explicit {
        full: Semigroup,
        reduced: Option<Semigroup>,
        b: CMatrix,
        c: CMatrix,
        b_hat: CMatrix,
        c_hat: CMatrix,
    },
}

struct RankOneTerms {
    rates: Vec<C64>,
    outputs: CMatrix,
    inputs: CMatrix,
}

/// Rank-one modal expansion of `C e^{At} B`, when `A` has a well-conditioned,
/// diagonal modal form.
fn rank_one_terms(
    a: &DenseOperator,
    b: &CMatrix,
    c: &CMatrix,
    basis: &ModalBasis,
) -> Option<RankOneTerms> {
    if basis.condition > MODAL_INTEGRAND_CONDITION {
        return None;
    }
    let am = a.matrix();
    let tol = 1e-10 * a.norm().max(f64::MIN_POSITIVE);
    let mut rates = Vec::with_capacity(basis.dim());
    for g in &basis.groups {
        let block = basis.block(am, g);
        for i in 0..g.len() {
            for j in 0..g.len() {
                if i != j && block[(i, j)].norm() > tol {
                    return None;
                }
            }
            rates.push(block[(i, i)]);
        }
    }
    Some(RankOneTerms {
        rates,
        outputs: c * &basis.right,
        inputs: &basis.left * b,
    })
}

impl ErrorIntegrand {
    fn new(sys: &StateSpaceSystem, red: &Reduction, analysis: &Analysis) -> Result<Self> {
        let b = sys.b().matrix().clone();
        let c = sys.c().matrix().clone();
        let b_hat = red.b_hat.matrix().clone();
        let c_hat = red.c_hat.matrix().clone();
        let r = red.order();
        let reduced_basis = if r == 0 {
            None
        } else {
            let zero_tol = default_zero_tolerance(r, red.a_hat.norm());
            ModalBasis::new(red.a_hat.matrix(), zero_tol).ok()
        };

        let full_terms = analysis
            .spectral
            .modal_basis()
            .and_then(|basis| rank_one_terms(sys.a(), &b, &c, basis));
        let reduced_terms = match (&reduced_basis, r) {
            (_, 0) => Some(RankOneTerms {
                rates: Vec::new(),
                outputs: CMatrix::zeros(sys.outputs(), 0),
                inputs: CMatrix::zeros(0, sys.inputs()),
            }),
            (Some(basis), _) => rank_one_terms(&red.a_hat, &b_hat, &c_hat, basis),
            (None, _) => None,
        };

        if let (Some(full), Some(reduced)) = (full_terms, reduced_terms) {
            let n = full.rates.len();
            let total = n + reduced.rates.len();
            let mut outputs = CMatrix::zeros(c.nrows(), total);
            outputs.columns_mut(0, n).copy_from(&full.outputs);
            outputs.columns_mut(n, total - n).copy_from(&reduced.outputs);
            let mut inputs = CMatrix::zeros(total, b.ncols());
            inputs.rows_mut(0, n).copy_from(&full.inputs);
            inputs.rows_mut(n, total - n).copy_from(&reduced.inputs);
            let out_gram = outputs.adjoint() * &outputs;
            let in_gram = &inputs * inputs.adjoint();
            let weights = CMatrix::from_fn(total, total, |a, b| out_gram[(b, a)] * in_gram[(a, b)]);
            let mut rates = full.rates;
            rates.extend(reduced.rates);
            let signs = (0..total).map(|k| if k < n { 1.0 } else { -1.0 }).collect();
            return Ok(ErrorIntegrand::Modal {
                rates,
                signs,
                weights,
            });
        }

        let full = match analysis.spectral.modal_basis() {
            Some(basis) => Semigroup::with_basis(sys.a(), basis),
            None => Semigroup::pade(sys.a()),
        };
        let reduced = match (&reduced_basis, r) {
            (_, 0) => None,
            (Some(basis), _) => Some(Semigroup::with_basis(&red.a_hat, basis)),
            (None, _) => Some(Semigroup::pade(&red.a_hat)),
        };
        Ok(ErrorIntegrand::Explicit {
            full,
            reduced,
            b,
            c,
            b_hat,
            c_hat,
        })
    }

    fn eval(&self, t: f64) -> f64 {
        match self {
            ErrorIntegrand::Modal {
                rates,
                signs,
                weights,
            } => {
                let x: Vec<C64> = rates
                    .iter()
                    .zip(signs)
                    .map(|(l, s)| (l * t).exp() * *s)
                    .collect();
                let mut total = C64::new(0.0, 0.0);
                for (bi, xb) in x.iter().enumerate() {
                    let mut row = C64::new(0.0, 0.0);
                    for (ai, xa) in x.iter().enumerate() {
                        row += xa * weights[(ai, bi)];
                    }
                    total += row * xb.conj();
                }
                total.re
            }
            ErrorIntegrand::Explicit {
                full,
                reduced,
                b,
                c,
                b_hat,
                c_hat,
            } => {
                let mut e = c * full.apply(t, b);
                if let Some(red) = reduced {
                    e -= c_hat * red.apply(t, b_hat);
                }
                e.norm_squared()
            }
        }
    }
}
