//! Dense real/complex kernels: matrices, tensors, the matrix exponential,
//! reference factorizations and the array text format.

mod expm;
mod hull;
pub mod io;
pub mod random;
mod matrix;
pub mod oracle;
mod tensor;

pub use expm::mat_exp;
pub use hull::{convex_hull_2d, convex_hull_area_2d, polygon_area};
pub use matrix::{kron, kron_sum, re, Matrix, Scalar};
pub use oracle::{oracle_chol, oracle_eigenvalues, oracle_lu, oracle_qr, oracle_svd};
pub use tensor::{IndexGrouping, Tensor};

/// `Σ f(|x|)` over every entry.
pub fn entrywise_cost(values: &[Scalar], f: impl Fn(f64) -> f64) -> f64 {
    values.iter().map(|z| f(z.norm())).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entrywise_examples() {
        let m = Matrix::from_rows(&[&[1.0, -2.0], &[0.0, 3.0]]);
        assert_eq!(entrywise_cost(m.as_slice(), |x| x), 6.0);
        let d = Matrix::diag_real(&[4.0, 9.0]);
        assert_eq!(entrywise_cost(d.as_slice(), |x| x.powf(0.5)), 5.0);
    }
}
