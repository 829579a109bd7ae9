use std::path::Path;

use semigram_core::gramian::semistability_gramian;
use semigram_core::h2error::{h2_error_gramian, h2_error_quadrature_with};
use semigram_core::heat::{benchmark_csv, run_benchmark};
use semigram_core::reduction::{check_preservation, mode_truncation};
use semigram_core::report::Record;
use semigram_core::semistability::analyze as analyze_generator;
use semigram_core::system::load_system;
use semigram_core::{
    Analysis, DenseOperator, Error, ModeSelection, Result, StateSpaceSystem, SystemFile, Tolerances,
    C64,
};

use crate::output::{join_c64, render, short, short_c64, write_files, write_text, Outcome};
use crate::{Format, H2Arg, RunConfig};

fn tolerances(config: &RunConfig) -> Tolerances {
    Tolerances {
        zero_tol: None,
        rank_tol: config.rank_tol,
    }
}

fn load(path: &Path) -> Result<SystemFile> {
    load_system(path)
}

/// Scales a kernel vector so its first largest entry is real and positive.
fn normalize_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).copied().unwrap();
    let phase = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

fn kernel_vectors(basis: &DenseOperator) -> Vec<Vec<C64>> {
    (0..basis.cols())
        .map(|j| {
            let mut v: Vec<C64> = (0..basis.rows()).map(|i| basis[(i, j)]).collect();
            normalize_phase(&mut v);
            v
        })
        .collect()
}

fn describe_vector(v: &[C64], labels: &[String]) -> String {
    v.iter()
        .enumerate()
        .map(|(i, z)| match labels.get(i) {
            Some(l) => format!("{l}:{}", short_c64(*z)),
            None => short_c64(*z),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn analysis_record(an: &Analysis, labels: &[String]) -> Record {
    let r = &an.report;
    let sd = &an.spectral;
    let mut rec = Record::new();
    rec.push("verdict", r.verdict)
        .push_f64("mu", r.mu)
        .push("kernel_dim", r.kernel_dim)
        .push_f64("overshoot_m", r.overshoot_m)
        .push_f64("zero_tol", r.zero_tol)
        .push("rank_a", sd.rank_a.numerical_rank)
        .push("rank_a2", sd.rank_a2.numerical_rank)
        .push_f64("rank_tol", sd.rank_a.tolerance_used)
        .push("self_adjoint", sd.self_adjoint)
        .push("eigenvalues", join_c64(&sd.eigenvalues));
    if let Some(reason) = &r.reason {
        rec.push("reason", reason);
    }
    for (j, v) in kernel_vectors(&sd.kernel_basis).iter().enumerate() {
        rec.push(format!("kernel.{j}"), describe_vector(v, labels));
    }
    if let Some(p) = &an.projector {
        rec.push_f64("s_inf.idempotency_defect", p.idempotency_defect)
            .push_f64("s_inf.annihilation_defect", p.annihilation_defect)
            .push("s_inf.orthogonal", p.orthogonal);
    }
    rec
}

pub fn analyze(path: &Path, config: &RunConfig) -> Result<Outcome> {
    let file = load(path)?;
    let an = analyze_generator(&file.a, tolerances(config))?;
    let mut rec = analysis_record(&an, &file.labels);
    let summary = format!(
        "{}, mu={}, ker dim={}",
        an.report.verdict,
        short(an.report.mu),
        an.report.kernel_dim
    );
    let mut files: Vec<(&str, &DenseOperator)> = vec![("kernel_basis", &an.spectral.kernel_basis)];
    if let Some(p) = &an.projector {
        files.push(("s_inf", &p.s_inf));
    }
    write_files(config.output.as_deref(), &files, &mut rec)?;
    let shown: Vec<(&str, &DenseOperator)> = an.projector.iter().map(|p| ("s_inf", &p.s_inf)).collect();
    let stdout = render(config.format, Some(&summary), &rec, &shown);
    let failure = an.report.reason.clone().map(Error::NotSemistable);
    Ok(Outcome { stdout, failure })
}

fn semistable_system(path: &Path, config: &RunConfig) -> Result<(StateSpaceSystem, Analysis)> {
    let sys = load(path)?.into_system()?;
    let an = analyze_generator(sys.a(), tolerances(config))?;
    an.require_semistable()?;
    Ok((sys, an))
}

pub fn gramian(path: &Path, config: &RunConfig) -> Result<Outcome> {
    let file = load(path)?;
    let b = file.require_b()?.clone();
    let an = analyze_generator(&file.a, tolerances(config))?;
    an.require_semistable()?;
    let g = semistability_gramian(&file.a, &b, &an, config.strategy, config.quad_tol)?;
    let trace: f64 = (0..g.dim()).map(|i| g.p_inf[(i, i)].re).sum();
    let mut rec = Record::new();
    rec.push("method", g.method)
        .push_f64("lyapunov_residual", g.lyapunov_residual)
        .push_f64("constraint_defect", g.constraint_defect)
        .push_f64("trace", trace)
        .push_f64("min_eigenvalue", g.min_eigenvalue());
    if let Some(tol) = g.quadrature_tol {
        rec.push_f64("quadrature_tol", tol);
    }
    write_files(config.output.as_deref(), &[("p_inf", &g.p_inf)], &mut rec)?;
    let summary = format!("P_inf by {}, trace={}", g.method, short(trace));
    Ok(Outcome::ok(render(config.format, Some(&summary), &rec, &[("p_inf", &g.p_inf)])))
}

pub fn reduce(path: &Path, keep: &ModeSelection, h2: H2Arg, config: &RunConfig) -> Result<Outcome> {
    let (sys, an) = semistable_system(path, config)?;
    let red = mode_truncation(&sys, &an.spectral, keep)?;
    let preservation = check_preservation(&sys, &red, config.rank_tol)?;

    let mut rec = Record::new();
    rec.push("selection", keep)
        .push("order", red.order())
        .push(
            "kept_modes",
            red.kept_modes.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
        )
        .push("kept_eigenvalues", join_c64(&red.kept_eigenvalues))
        .push("real_valued", red.real_valued)
        .push_f64("commutativity_defect", red.commutativity_defect)
        .push_f64("kernel_identity_defect", red.kernel_identity_defect)
        .push("preservation.original_verdict", preservation.original_verdict)
        .push("preservation.reduced_verdict", preservation.reduced_verdict)
        .push("preservation.original_controllability_rank", preservation.original_controllability_rank)
        .push("preservation.reduced_controllability_rank", preservation.reduced_controllability_rank)
        .push("preservation.violations", preservation.violations().join(" "));

    let mut traces = Vec::new();
    if matches!(h2, H2Arg::Gramian | H2Arg::Both) {
        let g = semistability_gramian(sys.a(), sys.b(), &an, config.strategy, config.quad_tol)?;
        let e = h2_error_gramian(&sys, &red, &g)?;
        rec.push("h2.gramian_method", g.method);
        rec.extend_prefixed("h2.gramian", &e.to_record());
        traces.push(e.trace_value);
    }
    if matches!(h2, H2Arg::Quadrature | H2Arg::Both) {
        let e = h2_error_quadrature_with(&sys, &red, &an, config.quad_tol)?;
        rec.extend_prefixed("h2.quadrature", &e.to_record());
        traces.push(e.trace_value);
    }

    let files = [("a_hat", &red.a_hat), ("b_hat", &red.b_hat), ("c_hat", &red.c_hat)];
    write_files(config.output.as_deref(), &files, &mut rec)?;
    let summary = format!(
        "order {} of {}, h2 trace={}",
        red.order(),
        sys.states(),
        traces.iter().map(|t| short(*t)).collect::<Vec<_>>().join(" / ")
    );
    Ok(Outcome::ok(render(config.format, Some(&summary), &rec, &files)))
}

pub fn heat_bench(kept: usize, modes: usize, config: &RunConfig) -> Result<Outcome> {
    let report = run_benchmark(kept, modes, config.quad_tol)?;
    let csv = benchmark_csv(std::slice::from_ref(&report));
    let mut rec = report.to_record();
    if let Some(dir) = &config.output {
        let path = write_text(dir, "heat_bench.csv", &csv)?;
        rec.push("file.heat_bench", path.display());
    }
    let stdout = match config.format {
        Format::Csv => csv,
        _ => {
            let summary = format!(
                "N={kept} M={modes}: trace {} (max deviation {})",
                short(report.trace_gramian),
                short(report.max_deviation())
            );
            render(config.format, Some(&summary), &rec, &[])
        }
    };
    Ok(Outcome::ok(stdout))
}
