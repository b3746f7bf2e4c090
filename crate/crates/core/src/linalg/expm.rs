//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (degrees 3, 5, 7, 9, 13 chosen from the 1-norm, Higham 2005 thresholds).

use super::matrix::{re, Matrix};
use crate::error::Result;

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// `exp(a)` for a square matrix.
pub fn mat_exp(a: &Matrix) -> Result<Matrix> {
    let n = a.ensure_square()?;
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    for (m, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, coeffs);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = a.scale(re(0.5f64.powi(s)));
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn axpy_into(acc: &mut Matrix, c: f64, x: &Matrix) {
    for (a, v) in acc.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *a += v * c;
    }
}

fn pade_low(a: &Matrix, b: &[f64]) -> Result<Matrix> {
    let n = a.rows();
    let a2 = a * a;
    // powers[k] = A^{2k}
    let mut powers = vec![Matrix::identity(n), a2.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = Matrix::zeros(n, n);
    let mut v = Matrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            axpy_into(&mut u_inner, b[2 * k + 1], p);
        }
        axpy_into(&mut v, b[2 * k], p);
    }
    let u = a * &u_inner;
    finish(&u, &v)
}

fn pade13(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let id = Matrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;

    let mut t = Matrix::zeros(n, n);
    axpy_into(&mut t, b[13], &a6);
    axpy_into(&mut t, b[11], &a4);
    axpy_into(&mut t, b[9], &a2);
    let mut u_inner = &a6 * &t;
    axpy_into(&mut u_inner, b[7], &a6);
    axpy_into(&mut u_inner, b[5], &a4);
    axpy_into(&mut u_inner, b[3], &a2);
    axpy_into(&mut u_inner, b[1], &id);
    let u = a * &u_inner;

    let mut t = Matrix::zeros(n, n);
    axpy_into(&mut t, b[12], &a6);
    axpy_into(&mut t, b[10], &a4);
    axpy_into(&mut t, b[8], &a2);
    let mut v = &a6 * &t;
    axpy_into(&mut v, b[6], &a6);
    axpy_into(&mut v, b[4], &a4);
    axpy_into(&mut v, b[2], &a2);
    axpy_into(&mut v, b[0], &id);
    finish(&u, &v)
}

fn finish(u: &Matrix, v: &Matrix) -> Result<Matrix> {
    (v - u).solve(&(v + u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_zero_is_identity() {
        assert_eq!(mat_exp(&Matrix::zeros(3, 3)).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn exp_diagonal() {
        for (a, b) in [(0.001, -0.002), (0.3, -0.7), (1.5, 2.0), (-9.0, 7.5)] {
            let e = mat_exp(&Matrix::diag_real(&[a, b])).unwrap();
            assert!((e[(0, 0)].re - f64::exp(a)).abs() <= 1e-13 * f64::exp(a));
            assert!((e[(1, 1)].re - f64::exp(b)).abs() <= 1e-13 * f64::exp(b));
            assert!(e[(0, 1)].norm() < 1e-15 && e[(1, 0)].norm() < 1e-15);
        }
    }

    #[test]
    fn rotation_closed_form() {
        for theta in [0.01, 0.5, 1.3, 3.0, 7.0] {
            let z = Matrix::from_rows(&[&[0.0, -theta], &[theta, 0.0]]);
            let e = mat_exp(&z).unwrap();
            let (s, c) = f64::sin_cos(theta);
            let expect = Matrix::from_rows(&[&[c, -s], &[s, c]]);
            assert!(e.distance(&expect) < 1e-13, "theta={theta}");
        }
    }

    #[test]
    fn nilpotent_is_polynomial() {
        // exp(N) = I + N + N²/2 for a strictly lower 3x3 N
        let n = Matrix::from_rows(&[&[0.0, 0.0, 0.0], &[1.2, 0.0, 0.0], &[4.0, -23.0, 0.0]]);
        let n2 = &n * &n;
        let expect = &(&Matrix::identity(3) + &n) + &n2.scale(re(0.5));
        let e = mat_exp(&n).unwrap();
        assert!(e.distance(&expect) < 1e-11 * expect.frobenius_norm());
    }

    #[test]
    fn non_square_rejected() {
        assert!(mat_exp(&Matrix::zeros(2, 3)).is_err());
    }
}
