//! Reference factorizations used to verify and canonicalize optimizer output.
//!
//! These are plain textbook algorithms for tiny dense matrices: one-sided
//! Jacobi SVD, unpivoted Doolittle LU, Gram-Schmidt QR, LDLᴴ Cholesky and a
//! characteristic-polynomial eigenvalue routine.

use num_complex::Complex64;

use super::matrix::{re, Matrix, Scalar, ONE, ZERO};
use crate::error::{GooError, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    /// Rectangular `rows x cols` diagonal, descending and nonnegative.
    pub sigma: Matrix,
    pub v: Matrix,
}

impl Svd {
    pub fn singular_values(&self) -> Vec<f64> {
        self.sigma.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn reconstruct(&self) -> Matrix {
        &(&self.u * &self.sigma) * &self.v.adjoint()
    }
}

/// One-sided Jacobi SVD, `M = U Σ V*`.
pub fn oracle_svd(m: &Matrix) -> Result<Svd> {
    if !m.is_finite() {
        return Err(GooError::NonFinite);
    }
    if m.rows() < m.cols() {
        let t = oracle_svd(&m.adjoint())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma.transpose(),
            v: t.u,
        });
    }
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut v = Matrix::identity(cols);
    let mut converged = false;
    let mut worst = 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        worst = 0.0f64;
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = {
                    let ap = a.column(p);
                    let aq = a.column(q);
                    let alpha: f64 = ap.iter().map(|z| z.norm_sqr()).sum();
                    let beta: f64 = aq.iter().map(|z| z.norm_sqr()).sum();
                    let gamma: Scalar = ap.iter().zip(aq).map(|(x, y)| x.conj() * y).sum();
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                let scale = (alpha * beta).sqrt();
                if scale > 0.0 {
                    worst = worst.max(g / scale);
                }
                if g <= 1e-15 * scale || g == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let phase = (gamma / g).conj();
                rotate_columns(&mut a, p, q, c, s, phase);
                rotate_columns(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(GooError::NonConvergence {
            iterations: JACOBI_MAX_SWEEPS,
            residual: worst,
        });
    }

    let norms: Vec<f64> = (0..cols)
        .map(|c| a.column(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let tiny = 1e-300_f64.max(f64::EPSILON * m.frobenius_norm() * 1e-3);
    let mut u_cols: Vec<Vec<Scalar>> = Vec::with_capacity(rows);
    let mut sigma = Matrix::zeros(rows, cols);
    let mut v_sorted = Matrix::zeros(cols, cols);
    for (k, &j) in order.iter().enumerate() {
        v_sorted.column_mut(k).copy_from_slice(v.column(j));
        if norms[j] > tiny {
            sigma[(k, k)] = re(norms[j]);
            u_cols.push(a.column(j).iter().map(|z| z / norms[j]).collect());
        } else {
            break;
        }
    }
    let u = complete_basis(rows, u_cols);
    Ok(Svd {
        u,
        sigma,
        v: v_sorted,
    })
}

fn rotate_columns(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64, phase: Scalar) {
    // [a_p, a_q] <- [a_p, a_q] [[c, s], [-s·φ, c·φ]]
    for r in 0..a.rows() {
        let xp = a[(r, p)];
        let xq = a[(r, q)] * phase;
        a[(r, p)] = xp * c - xq * s;
        a[(r, q)] = xp * s + xq * c;
    }
}

/// Extends orthonormal columns to a full unitary basis of size `n`.
fn complete_basis(n: usize, mut cols: Vec<Vec<Scalar>>) -> Matrix {
    let mut e = 0;
    while cols.len() < n && e < n {
        let mut cand = vec![ZERO; n];
        cand[e] = ONE;
        e += 1;
        for _ in 0..2 {
            for c in &cols {
                let dot: Scalar = c.iter().zip(&cand).map(|(x, y)| x.conj() * y).sum();
                for (y, x) in cand.iter_mut().zip(c) {
                    *y -= dot * x;
                }
            }
        }
        let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(cand.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut u = Matrix::zeros(n, n);
    for (k, c) in cols.iter().enumerate() {
        u.column_mut(k).copy_from_slice(c);
    }
    u
}

/// `M = L · D · U` with `L` unit lower, `U` unit upper, `D` diagonal.
#[derive(Clone, Debug)]
pub struct Ldu {
    pub l: Matrix,
    pub d: Matrix,
    pub u: Matrix,
}

impl Ldu {
    /// The non-unit upper factor `D·U`.
    pub fn upper(&self) -> Matrix {
        &self.d * &self.u
    }
}

/// Unpivoted Doolittle LU.
pub fn oracle_lu(m: &Matrix) -> Result<Ldu> {
    let n = m.ensure_square()?;
    let tol = 1e-14 * m.frobenius_norm();
    let mut a = m.clone();
    let mut l = Matrix::identity(n);
    for k in 0..n {
        let pivot = a[(k, k)];
        if pivot.norm() <= tol {
            return Err(GooError::PivotBreakdown(k));
        }
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            l[(i, k)] = f;
            a[(i, k)] = ZERO;
            for j in k + 1..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    let d = Matrix::diag(&a.diagonal());
    let u = Matrix::from_fn(n, n, |i, j| if j >= i { a[(i, j)] / a[(i, i)] } else { ZERO });
    Ok(Ldu { l, d, u })
}

/// `M = Q · D · R`, `Q` with orthonormal columns, `D` positive diagonal, `R` unit upper.
#[derive(Clone, Debug)]
pub struct Qdr {
    pub q: Matrix,
    pub d: Matrix,
    pub r: Matrix,
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
pub fn oracle_qr(m: &Matrix) -> Result<Qdr> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(GooError::DimensionMismatch(format!(
            "QR oracle needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let scale = m.frobenius_norm();
    let mut q = m.clone();
    let mut r = Matrix::zeros(cols, cols);
    for j in 0..cols {
        for _ in 0..2 {
            for i in 0..j {
                let dot: Scalar = q
                    .column(i)
                    .iter()
                    .zip(q.column(j))
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                r[(i, j)] += dot;
                let qi: Vec<Scalar> = q.column(i).to_vec();
                for (y, x) in q.column_mut(j).iter_mut().zip(&qi) {
                    *y -= dot * x;
                }
            }
        }
        let norm = q.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-14 * scale {
            return Err(GooError::Singular);
        }
        r[(j, j)] = re(norm);
        for y in q.column_mut(j) {
            *y /= norm;
        }
    }
    let d = Matrix::diag(&r.diagonal());
    let unit = Matrix::from_fn(cols, cols, |i, j| r[(i, j)] / r[(i, i)]);
    Ok(Qdr { q, d, r: unit })
}

/// `A = L · diag(d) · Lᴴ` with `L` unit lower.
#[derive(Clone, Debug)]
pub struct Ldl {
    pub l: Matrix,
    pub d: Vec<f64>,
}

impl Ldl {
    /// The classical Cholesky factor `L · diag(√d)`.
    pub fn factor(&self) -> Matrix {
        let sq: Vec<f64> = self.d.iter().map(|x| x.sqrt()).collect();
        &self.l * &Matrix::diag_real(&sq)
    }
}

pub fn is_hermitian(a: &Matrix, tol: f64) -> bool {
    a.is_square() && a.distance(&a.adjoint()) <= tol * a.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// LDLᴴ factorization of a Hermitian positive definite matrix.
pub fn oracle_chol(a: &Matrix) -> Result<Ldl> {
    let n = a.ensure_square()?;
    if !a.is_finite() {
        return Err(GooError::NonFinite);
    }
    if !is_hermitian(a, 1e-12) {
        return Err(GooError::NotPositiveDefinite);
    }
    let tol = 1e-14 * a.frobenius_norm();
    let mut l = Matrix::identity(n);
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = a[(j, j)].re;
        for k in 0..j {
            dj -= l[(j, k)].norm_sqr() * d[k];
        }
        if !(dj > tol) {
            return Err(GooError::NotPositiveDefinite);
        }
        d[j] = dj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj() * d[k];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(Ldl { l, d })
}

/// Characteristic polynomial coefficients `[c_0, …, c_{n-1}, 1]` by Faddeev-LeVerrier.
pub fn char_poly(a: &Matrix) -> Result<Vec<Scalar>> {
    let n = a.ensure_square()?;
    let mut c = vec![ZERO; n + 1];
    c[n] = ONE;
    let mut mk = Matrix::zeros(n, n);
    let id = Matrix::identity(n);
    for k in 1..=n {
        mk = &(a * &mk) + &id.scale(c[n - k + 1]);
        let amk = a * &mk;
        c[n - k] = -amk.trace() / (k as f64);
    }
    Ok(c)
}

/// Eigenvalues of a small matrix as roots of its characteristic polynomial
/// (Durand-Kerner iteration, Newton polish). Intended for n <= 4.
pub fn oracle_eigenvalues(a: &Matrix) -> Result<Vec<Scalar>> {
    let coeffs = char_poly(a)?;
    Ok(poly_roots(&coeffs))
}

fn poly_eval(coeffs: &[Scalar], x: Scalar) -> (Scalar, Scalar) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Roots of a monic polynomial with coefficients in ascending order.
pub fn poly_roots(coeffs: &[Scalar]) -> Vec<Scalar> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let radius = 1.0 + coeffs[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Scalar> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let (p, _) = poly_eval(coeffs, z[i]);
            let mut denom = ONE;
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom == ZERO {
                continue;
            }
            let step = p / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..5 {
            let (p, dp) = poly_eval(coeffs, *r);
            if dp == ZERO {
                break;
            }
            *r -= p / dp;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_m() -> Matrix {
        Matrix::from_rows(&[
            &[0.17658, 0.517888, 0.448587],
            &[0.214066, 0.718154, 0.849892],
            &[0.796042, 0.197801, 0.233489],
        ])
    }

    #[test]
    fn svd_of_identity() {
        let s = oracle_svd(&Matrix::identity(3)).unwrap();
        assert_eq!(s.singular_values(), vec![1.0, 1.0, 1.0]);
        assert!(s.reconstruct().distance(&Matrix::identity(3)) < 1e-15);
    }

    #[test]
    fn svd_of_worked_example() {
        let m = example_m();
        let s = oracle_svd(&m).unwrap();
        let sv = s.singular_values();
        for (got, want) in sv.iter().zip([1.43557, 0.66535, 0.0910448]) {
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
        }
        assert!(s.reconstruct().distance(&m) <= 1e-10 * m.frobenius_norm());
        assert!((&s.u.adjoint() * &s.u).distance(&Matrix::identity(3)) < 1e-13);
    }

    #[test]
    fn svd_rank_deficient_and_wide() {
        let m = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]);
        let s = oracle_svd(&m).unwrap();
        assert_eq!(s.u.shape(), (2, 2));
        assert_eq!(s.v.shape(), (3, 3));
        let sv = s.singular_values();
        assert!((sv[0] - (70.0f64).sqrt()).abs() < 1e-12);
        assert!(sv[1].abs() < 1e-12);
        assert!(s.reconstruct().distance(&m) < 1e-12);
        assert!((&s.v.adjoint() * &s.v).distance(&Matrix::identity(3)) < 1e-13);
    }

    #[test]
    fn svd_complex_input() {
        let m = Matrix::from_fn(3, 2, |i, j| Complex64::new(i as f64 - j as f64, (i * j) as f64 + 0.5));
        let s = oracle_svd(&m).unwrap();
        assert!(s.reconstruct().distance(&m) < 1e-12 * m.frobenius_norm());
        assert!((&s.u.adjoint() * &s.u).distance(&Matrix::identity(3)) < 1e-13);
    }

    #[test]
    fn lu_worked_example() {
        let f = oracle_lu(&example_m()).unwrap();
        assert!((f.l[(1, 0)].re - 1.21229).abs() < 1e-4);
        assert!((f.l[(2, 0)].re - 4.50812).abs() < 1e-4);
        // the printed input is rounded to six digits and the second pivot is
        // small, so the last row agrees with the printed factors only relatively
        assert!((f.l[(2, 1)].re + 23.6585).abs() < 1e-4 * 23.6585);
        let upper = f.upper();
        assert!((upper[(2, 2)].re - 5.45245).abs() < 1e-4 * 5.45245);
        assert!((&f.l * &upper).distance(&example_m()) < 1e-12);
    }

    #[test]
    fn lu_pivot_breakdown() {
        let m = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(oracle_lu(&m).unwrap_err(), GooError::PivotBreakdown(0));
    }

    #[test]
    fn qr_worked_example() {
        let m = example_m();
        let f = oracle_qr(&m).unwrap();
        let d: Vec<f64> = f.d.diagonal().iter().map(|z| z.norm()).collect();
        for (got, want) in d.iter().zip([0.843023, 0.771339, 0.133735]) {
            assert!((got - want).abs() < 1e-5);
        }
        assert!((f.r[(0, 1)].re - 0.566548).abs() < 1e-5);
        let back = &(&f.q * &f.d) * &f.r;
        assert!(back.distance(&m) < 1e-12);
    }

    #[test]
    fn chol_worked_example() {
        let m = example_m();
        let a = &m.transpose() * &m;
        let c = oracle_chol(&a).unwrap().factor();
        for (i, want) in [0.843023, 0.477613, 0.530248].iter().enumerate() {
            assert!((c[(i, 0)].re - want).abs() < 1e-5);
        }
        assert!((&c * &c.adjoint()).distance(&a) < 1e-12);
    }

    #[test]
    fn chol_rejects_indefinite_and_asymmetric() {
        let indefinite = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert_eq!(oracle_chol(&indefinite).unwrap_err(), GooError::NotPositiveDefinite);
        let asym = Matrix::from_rows(&[&[2.0, 1.0], &[0.0, 2.0]]);
        assert_eq!(oracle_chol(&asym).unwrap_err(), GooError::NotPositiveDefinite);
    }

    #[test]
    fn eigenvalues_worked_example() {
        let ev = oracle_eigenvalues(&example_m()).unwrap();
        let expect = [
            Complex64::new(1.38943, 0.0),
            Complex64::new(-0.130605, 0.213379),
            Complex64::new(-0.130605, -0.213379),
        ];
        for e in expect {
            assert!(ev.iter().any(|z| (z - e).norm() < 2e-6), "{e} not in {ev:?}");
        }
    }
}
