//! Deterministic fixtures shared by the benchmarks.

use semigram_core::heat::build_heat_surrogate;
use semigram_core::linalg::CMatrix;
use semigram_core::{DenseOperator, StateSpaceSystem, C64};

/// `−L` for a ring of `n ≥ 3` nodes with one extra chord, so the spectrum is
/// not fully degenerate. Semistable with a one-dimensional kernel.
pub fn consensus_generator(n: usize) -> DenseOperator {
    assert!(n >= 3, "ring needs at least 3 nodes");
    let mut a = CMatrix::zeros(n, n);
    let mut edge = |i: usize, j: usize, w: f64| {
        a[(i, j)] += C64::new(w, 0.0);
        a[(j, i)] += C64::new(w, 0.0);
        a[(i, i)] -= C64::new(w, 0.0);
        a[(j, j)] -= C64::new(w, 0.0);
    };
    for i in 0..n {
        edge(i, (i + 1) % n, 1.0 + 0.1 * (i % 3) as f64);
    }
    edge(0, n / 2, 0.5);
    DenseOperator::new(a).expect("finite")
}

/// Consensus generator with a non-normal perturbation `V A V⁻¹`, where `V`
/// is unit upper bidiagonal.
pub fn directed_generator(n: usize) -> DenseOperator {
    let a = consensus_generator(n);
    let v = CMatrix::from_fn(n, n, |i, j| match j.checked_sub(i) {
        Some(0) => C64::new(1.0, 0.0),
        Some(1) => C64::new(0.3, 0.0),
        _ => C64::new(0.0, 0.0),
    });
    let v_inv = v.clone().try_inverse().expect("unit triangular");
    DenseOperator::new(v * a.matrix() * v_inv).expect("finite")
}

/// `inputs` actuated nodes spread around the ring, averaged output.
pub fn consensus_system(n: usize, inputs: usize, directed: bool) -> StateSpaceSystem {
    let a = if directed {
        directed_generator(n)
    } else {
        consensus_generator(n)
    };
    let b = CMatrix::from_fn(n, inputs, |i, j| {
        C64::new(if i == j * n / inputs.max(1) { 1.0 } else { 0.0 }, 0.0)
    });
    let c = CMatrix::from_fn(2, n, |r, i| {
        C64::new(if r == 0 { 1.0 / n as f64 } else { (i as f64 / n as f64) - 0.5 }, 0.0)
    });
    StateSpaceSystem::new(
        a,
        DenseOperator::new(b).expect("finite"),
        DenseOperator::new(c).expect("finite"),
    )
    .expect("consistent shapes")
}

pub fn heat_system(modes: usize) -> StateSpaceSystem {
    build_heat_surrogate(modes)
        .and_then(|h| h.system())
        .expect("modes >= 2")
}
