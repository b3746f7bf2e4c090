//! Seeded random test data. Each call derives its own stream from `seed`, so
//! corpora are reproducible item by item.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{re, Matrix, Scalar};
use super::tensor::Tensor;
use crate::error::Result;

/// Standard normal real entries.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_real_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Standard normal real entries in vec order.
pub fn gaussian_tensor(shape: &[usize], seed: u64) -> Result<Tensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.iter().product();
    let values: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Tensor::from_real(shape, &values)
}

/// `AAᴴ / tr(AAᴴ)` for a complex Gaussian `A`: Hermitian, positive
/// semidefinite, unit trace.
pub fn random_density_matrix(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Matrix::from_fn(n, n, |_, _| Scalar::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let g = &a * &a.adjoint();
    let t = g.trace().re;
    // exact Hermitian symmetry keeps density checks independent of rounding
    Matrix::from_fn(n, n, |i, j| {
        let z = (g[(i, j)] + g[(j, i)].conj()) / 2.0;
        if i == j {
            re(z.re / t)
        } else {
            z / t
        }
    })
}
