#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semigram_core::{DenseOperator, StateSpaceSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    uniform_matrix(rng, n, n).qr().q()
}

/// `A = −Q diag(0_k, d) Qᵀ` with `d` uniform in `[0.2, 10]`.
#[derive(Clone, Debug)]
pub struct SymmetricFixture {
    pub a: DenseOperator,
    pub kernel_dim: usize,
    pub decay_rates: Vec<f64>,
    pub q: DMatrix<f64>,
}

pub fn symmetric_semistable(rng: &mut ChaCha8Rng, n: usize, kernel_dim: usize) -> SymmetricFixture {
    assert!(kernel_dim < n);
    let q = random_orthogonal(rng, n);
    let decay_rates: Vec<f64> = (kernel_dim..n).map(|_| rng.random_range(0.2..10.0)).collect();
    let mut d = vec![0.0; kernel_dim];
    d.extend(decay_rates.iter().map(|r| -r));
    let a = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    SymmetricFixture {
        a: DenseOperator::from_real(&a).unwrap(),
        kernel_dim,
        decay_rates,
        q,
    }
}

/// Random symmetric semistable system with `n` in `n_range`, kernel dimension
/// `1..=3`, random `B` (`n × inputs`) and random `C` (`outputs × n`).
pub fn random_system(
    rng: &mut ChaCha8Rng,
    n_range: std::ops::RangeInclusive<usize>,
    inputs: usize,
    outputs: usize,
) -> (StateSpaceSystem, SymmetricFixture) {
    let n = rng.random_range(n_range);
    let kernel_dim = rng.random_range(1..=3.min(n - 1));
    let fixture = symmetric_semistable(rng, n, kernel_dim);
    let b = DenseOperator::from_real(&uniform_matrix(rng, n, inputs)).unwrap();
    let c = DenseOperator::from_real(&uniform_matrix(rng, outputs, n)).unwrap();
    let sys = StateSpaceSystem::new(fixture.a.clone(), b, c).unwrap();
    (sys, fixture)
}

pub fn diff_norm(a: &DenseOperator, b: &DenseOperator) -> f64 {
    semigram_core::linalg::spectral_norm(&(a.matrix() - b.matrix()))
}
