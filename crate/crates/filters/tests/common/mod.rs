#![allow(dead_code)]

use filters::{CMatrix, CVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cnormal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn cmat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| cnormal(rng))
}

pub fn cvec(len: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(len, |_, _| cnormal(rng))
}

/// Random Hermitian positive-definite matrix.
pub fn pd(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = cmat(n, 2 * n, rng);
    let mut r = &a * a.adjoint();
    for i in 0..n {
        r[(i, i)] += Complex64::new(0.1, 0.0);
    }
    r
}

pub fn rel(a: &CVector, b: &CVector) -> f64 {
    (a - b).norm() / b.norm()
}
