//! Fixtures shared by the benchmarks.

use arank_core::{PrimeField, Tensor};

/// Seeded random tensor; panics on an invalid shape.
pub fn random_tensor(p: u64, n: usize, d: usize, seed: u64) -> Tensor {
    Tensor::random(PrimeField::new(p).expect("prime"), n, d, seed).expect("shape fits")
}

pub fn identity(p: u64, n: usize, d: usize) -> Tensor {
    Tensor::identity(PrimeField::new(p).expect("prime"), n, d).expect("shape fits")
}
