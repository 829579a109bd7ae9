//! Heat-equation benchmark on an insulated bar.
//!
//! `∂ₜx = ∂²ₚx` on `[0, 1]` with Neumann boundaries is represented by its first
//! `M` modes in the orthonormal cosine basis `{1, √2 cos(nπp)}`, giving
//! `A = diag(0, −π², −4π², …, −(M−1)²π²)` with `B = C = I`. Keeping the kernel
//! mode and the next `N` modes leaves the trace
//! `Σ_{n=N+1}^{M−1} 1/(2π²n²)`, one closed-form term per dropped mode.
//!
//! The frequently quoted constant `Σ_{n=N+1}^∞ 1/(π²n²)` is reported alongside
//! for comparison. It is twice the infinite-surrogate trace and is stated
//! without the square root that turns the trace into the H₂ norm.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gramian::{lyapunov_rhs, solve_semistability_lyapunov};
use crate::h2error::{h2_error_gramian, h2_error_quadrature_with};
use crate::linalg::DenseOperator;
use crate::reduction::{mode_truncation, ModeSelection};
use crate::report::{fmt_f64, Record};
use crate::semistability::{analyze, Tolerances};
use crate::system::StateSpaceSystem;

pub const DEFAULT_MODES: usize = 200;
pub const DEFAULT_KEPT: usize = 10;

#[derive(Clone, Debug)]
pub struct HeatSurrogate {
    pub modes: usize,
    pub a: DenseOperator,
    pub b: DenseOperator,
    pub c: DenseOperator,
    /// `Σ_{n≥M} 1/(2π²n²)`: the trace carried by modes outside the surrogate.
    pub tail_bound: f64,
}

impl HeatSurrogate {
    pub fn eigenvalue(n: usize) -> f64 {
        -((n * n) as f64) * PI * PI
    }

    pub fn system(&self) -> Result<StateSpaceSystem> {
        StateSpaceSystem::new(self.a.clone(), self.b.clone(), self.c.clone())
    }
}

/// `Σ_{n≥1} 1/n² − Σ_{n<from} 1/n²`, i.e. `Σ_{n≥from} 1/n²`.
fn zeta2_tail(from: usize) -> f64 {
    let head: f64 = (1..from).rev().map(|n| 1.0 / (n as f64 * n as f64)).sum();
    PI * PI / 6.0 - head
}

pub fn build_heat_surrogate(modes: usize) -> Result<HeatSurrogate> {
    if modes < 2 {
        return Err(Error::InvalidParameter(format!(
            "the heat surrogate needs at least 2 modes, got {modes}"
        )));
    }
    let diag: Vec<f64> = (0..modes).map(HeatSurrogate::eigenvalue).collect();
    Ok(HeatSurrogate {
        modes,
        a: DenseOperator::from_diagonal(&diag)?,
        b: DenseOperator::identity(modes),
        c: DenseOperator::identity(modes),
        tail_bound: zeta2_tail(modes) / (2.0 * PI * PI),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticTruncation {
    /// `Σ_{n=N+1}^{M−1} 1/(2π²n²)`, the trace the surrogate must reproduce.
    pub derived: f64,
    /// `Σ_{n=N+1}^∞ 1/(π²n²)`, reported for comparison only.
    pub published: f64,
}

pub fn analytic_truncation_error(kept: usize, modes: usize) -> Result<AnalyticTruncation> {
    if kept < 1 || kept >= modes {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= N < M, got N = {kept}, M = {modes}"
        )));
    }
    let derived: f64 = ((kept + 1)..modes)
        .rev()
        .map(|n| 1.0 / (2.0 * PI * PI * (n * n) as f64))
        .sum();
    Ok(AnalyticTruncation {
        derived,
        published: zeta2_tail(kept + 1) / (PI * PI),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkReport {
    pub kept: usize,
    pub modes: usize,
    pub abs_tol: f64,
    pub trace_gramian: f64,
    pub trace_quadrature: f64,
    pub trace_analytic: f64,
    pub published_constant: f64,
    pub tail_bound: f64,
    pub h2_norm: f64,
    pub quadrature_error_estimate: f64,
}

pub const CSV_HEADER: &str = "N,trace_gramian,trace_quadrature,trace_analytic,paper_constant";

impl BenchmarkReport {
    pub fn gramian_vs_quadrature(&self) -> f64 {
        (self.trace_gramian - self.trace_quadrature).abs()
    }

    pub fn gramian_vs_analytic(&self) -> f64 {
        (self.trace_gramian - self.trace_analytic).abs()
    }

    pub fn quadrature_vs_analytic(&self) -> f64 {
        (self.trace_quadrature - self.trace_analytic).abs()
    }

    /// Largest pairwise deviation among the three computed traces.
    pub fn max_deviation(&self) -> f64 {
        self.gramian_vs_quadrature()
            .max(self.gramian_vs_analytic())
            .max(self.quadrature_vs_analytic())
    }

    /// `published_constant / trace_analytic`; tends to 2 as `M → ∞`.
    pub fn published_ratio(&self) -> f64 {
        if self.trace_analytic == 0.0 {
            f64::NAN
        } else {
            self.published_constant / self.trace_analytic
        }
    }

    pub fn to_record(&self) -> Record {
        let mut r = Record::new();
        r.push("N", self.kept)
            .push("M", self.modes)
            .push_f64("abs_tol", self.abs_tol)
            .push_f64("trace_gramian", self.trace_gramian)
            .push_f64("trace_quadrature", self.trace_quadrature)
            .push_f64("trace_analytic", self.trace_analytic)
            .push_f64("h2_norm", self.h2_norm)
            .push_f64("dev_gramian_quadrature", self.gramian_vs_quadrature())
            .push_f64("dev_gramian_analytic", self.gramian_vs_analytic())
            .push_f64("dev_quadrature_analytic", self.quadrature_vs_analytic())
            .push_f64("quadrature_error_estimate", self.quadrature_error_estimate)
            .push_f64("surrogate_tail_bound", self.tail_bound)
            .push_f64("paper_constant", self.published_constant)
            .push_f64("paper_constant_ratio", self.published_ratio())
            .push(
                "paper_constant_note",
                "sum 1/(pi^2 n^2) is twice the derived trace sum 1/(2 pi^2 n^2) and omits the square root of the H2 norm; not asserted",
            );
        r
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.kept,
            fmt_f64(self.trace_gramian),
            fmt_f64(self.trace_quadrature),
            fmt_f64(self.trace_analytic),
            fmt_f64(self.published_constant)
        )
    }
}

/// CSV document with one row per report.
pub fn benchmark_csv(reports: &[BenchmarkReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Truncates the `M`-mode surrogate to its kernel mode plus `N` cosine modes
/// and evaluates the trace by the Gramian formula, by impulse-response
/// quadrature, and in closed form.
pub fn run_benchmark(kept: usize, modes: usize, abs_tol: f64) -> Result<BenchmarkReport> {
    let analytic = analytic_truncation_error(kept, modes)?;
    let surrogate = build_heat_surrogate(modes)?;
    let sys = surrogate.system()?;
    let analysis = analyze(sys.a(), Tolerances::default())?;
    let s_inf = analysis.require_semistable()?;
    let q = lyapunov_rhs(sys.b(), s_inf)?;
    let p_inf = solve_semistability_lyapunov(sys.a(), &q, s_inf, &analysis.spectral)?;
    let red = mode_truncation(&sys, &analysis.spectral, &ModeSelection::Slowest(kept + 1))?;
    let by_gramian = h2_error_gramian(&sys, &red, &p_inf)?;
    let by_quadrature = h2_error_quadrature_with(&sys, &red, &analysis, abs_tol)?;
    Ok(BenchmarkReport {
        kept,
        modes,
        abs_tol,
        trace_gramian: by_gramian.trace_value,
        trace_quadrature: by_quadrature.trace_value,
        trace_analytic: analytic.derived,
        published_constant: analytic.published,
        tail_bound: surrogate.tail_bound,
        h2_norm: by_gramian.h2_norm,
        quadrature_error_estimate: by_quadrature.error_estimate.unwrap_or(0.0),
    })
}
