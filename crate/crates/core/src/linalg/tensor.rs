//! Dense tensors with first-index-fastest linear indexing.
//!
//! Modes are 0-based here: mode `a` of a tensor with shape `(n_0, …, n_{k-1})`
//! has stride `n_0 ⋯ n_{a-1}`. An order-2 tensor has exactly the layout of
//! the column-major [`Matrix`] with the same shape.

use serde::{Deserialize, Serialize};

use super::matrix::{Matrix, Scalar, ZERO};
use crate::error::{GooError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<Scalar>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![ZERO; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<Scalar>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(GooError::InvalidArgument(format!(
                "tensor shape {shape:?} must be nonempty with positive extents"
            )));
        }
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(GooError::DimensionMismatch(format!(
                "{} values for shape {shape:?}",
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn from_real(shape: &[usize], values: &[f64]) -> Result<Self> {
        Self::from_vec(shape, values.iter().map(|&v| super::matrix::re(v)).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Scalar] {
        &self.data
    }

    pub fn vec(&self) -> Vec<Scalar> {
        self.data.clone()
    }

    pub fn into_vec(self) -> Vec<Scalar> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut lin = 0;
        let mut stride = 1;
        for (i, n) in idx.iter().zip(&self.shape) {
            debug_assert!(i < n);
            lin += i * stride;
            stride *= n;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> Scalar {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: Scalar) {
        let l = self.linear_index(idx);
        self.data[l] = v;
    }

    /// Reshape to a new shape with the same vec.
    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        Tensor::from_vec(shape, self.data.clone())
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        match self.shape.as_slice() {
            [r, c] => Matrix::from_col_major(*r, *c, self.data.clone()),
            s => Err(GooError::DimensionMismatch(format!(
                "order-{} tensor is not a matrix",
                s.len()
            ))),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn distance(&self, other: &Tensor) -> f64 {
        assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Mode-`a` product: `y[…j…] = Σ_i x[…i…] u[j, i]`.
    pub fn mode_product(&self, mode: usize, u: &Matrix) -> Result<Tensor> {
        if mode >= self.order() {
            return Err(GooError::DimensionMismatch(format!(
                "mode {mode} out of range for order-{} tensor",
                self.order()
            )));
        }
        let n = self.shape[mode];
        if u.cols() != n {
            return Err(GooError::DimensionMismatch(format!(
                "mode {mode} has extent {n} but factor is {}x{}",
                u.rows(),
                u.cols()
            )));
        }
        let m = u.rows();
        let before: usize = self.shape[..mode].iter().product();
        let after: usize = self.shape[mode + 1..].iter().product();
        let mut shape = self.shape.clone();
        shape[mode] = m;
        let mut out = vec![ZERO; before * m * after];
        for ia in 0..after {
            for i in 0..n {
                let src = &self.data[before * (i + n * ia)..before * (i + n * ia + 1)];
                for j in 0..m {
                    let w = u[(j, i)];
                    if w == ZERO {
                        continue;
                    }
                    let dst = &mut out[before * (j + m * ia)..before * (j + m * ia + 1)];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += s * w;
                    }
                }
            }
        }
        Ok(Tensor { shape, data: out })
    }

    /// `𝒳 ×₀ U₀ ×₁ U₁ ⋯` with one factor per mode.
    pub fn multi_mode_product(&self, us: &[Matrix]) -> Result<Tensor> {
        if us.len() != self.order() {
            return Err(GooError::DimensionMismatch(format!(
                "{} factors for an order-{} tensor",
                us.len(),
                self.order()
            )));
        }
        let mut t = self.clone();
        for (mode, u) in us.iter().enumerate() {
            t = t.mode_product(mode, u)?;
        }
        Ok(t)
    }

    /// Groups modes into a lower-order tensor. Within a group, modes vary
    /// first-fastest in ascending order; groups appear in the given order.
    pub fn unfold(&self, grouping: &IndexGrouping) -> Result<Tensor> {
        grouping.validate(self.order())?;
        let new_shape = grouping.unfolded_shape(&self.shape);
        let mut out = vec![ZERO; self.data.len()];
        let k = self.order();
        let mut idx = vec![0usize; k];
        // per-mode stride inside the unfolded tensor
        let mut stride = vec![0usize; k];
        let mut outer = 1;
        for group in grouping.groups() {
            let mut s = outer;
            for &mode in group {
                stride[mode] = s;
                s *= self.shape[mode];
            }
            outer = s;
        }
        for v in &self.data {
            let dst: usize = idx.iter().zip(&stride).map(|(i, s)| i * s).sum();
            out[dst] = *v;
            for (i, n) in idx.iter_mut().zip(&self.shape) {
                *i += 1;
                if *i < *n {
                    break;
                }
                *i = 0;
            }
        }
        Tensor::from_vec(&new_shape, out)
    }
}

impl From<Matrix> for Tensor {
    fn from(m: Matrix) -> Self {
        let shape = vec![m.rows(), m.cols()];
        Tensor {
            shape,
            data: m.into_vec(),
        }
    }
}

/// Ordered partition of the modes `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexGrouping {
    groups: Vec<Vec<usize>>,
}

impl IndexGrouping {
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        let groups = groups
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                g
            })
            .collect();
        Self { groups }
    }

    /// One singleton group per mode.
    pub fn identity(order: usize) -> Self {
        Self::new((0..order).map(|i| vec![i]).collect())
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn validate(&self, order: usize) -> Result<()> {
        let mut seen = vec![false; order];
        for g in &self.groups {
            if g.is_empty() {
                return Err(GooError::BadIndexGrouping("empty group".into()));
            }
            for &m in g {
                if m >= order {
                    return Err(GooError::BadIndexGrouping(format!(
                        "mode {m} out of range for order {order}"
                    )));
                }
                if std::mem::replace(&mut seen[m], true) {
                    return Err(GooError::BadIndexGrouping(format!("mode {m} repeated")));
                }
            }
        }
        if let Some(m) = seen.iter().position(|s| !s) {
            return Err(GooError::BadIndexGrouping(format!("mode {m} missing")));
        }
        Ok(())
    }

    pub fn unfolded_shape(&self, shape: &[usize]) -> Vec<usize> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|&m| shape[m]).product())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::re;

    fn counting(shape: &[usize]) -> Tensor {
        let n: usize = shape.iter().product();
        Tensor::from_real(shape, &(0..n).map(|i| i as f64).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn first_index_fastest() {
        let t = counting(&[2, 3, 4]);
        assert_eq!(t.get(&[1, 0, 0]), re(1.0));
        assert_eq!(t.get(&[0, 1, 0]), re(2.0));
        assert_eq!(t.get(&[0, 0, 1]), re(6.0));
        assert_eq!(t.get(&[1, 2, 3]), re(23.0));
    }

    #[test]
    fn identity_grouping_is_noop() {
        let t = counting(&[2, 3, 2]);
        assert_eq!(t.unfold(&IndexGrouping::identity(3)).unwrap(), t);
    }

    #[test]
    fn unfold_matches_index_loop() {
        let t = counting(&[2, 3, 4]);
        let u = t.unfold(&IndexGrouping::new(vec![vec![0], vec![1, 2]])).unwrap();
        assert_eq!(u.shape(), &[2, 12]);
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..4 {
                    assert_eq!(u.get(&[i, j + 3 * k]), t.get(&[i, j, k]));
                }
            }
        }
        // non-contiguous grouping permutes entries
        let p = t.unfold(&IndexGrouping::new(vec![vec![1], vec![0, 2]])).unwrap();
        assert_eq!(p.shape(), &[3, 8]);
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..4 {
                    assert_eq!(p.get(&[j, i + 2 * k]), t.get(&[i, j, k]));
                }
            }
        }
    }

    #[test]
    fn bad_groupings_rejected() {
        let t = counting(&[2, 2, 2]);
        for g in [
            vec![vec![0], vec![1]],
            vec![vec![0, 1], vec![1, 2]],
            vec![vec![0], vec![], vec![1, 2]],
            vec![vec![0, 1, 2, 3]],
        ] {
            assert!(matches!(
                t.unfold(&IndexGrouping::new(g)),
                Err(GooError::BadIndexGrouping(_))
            ));
        }
    }

    #[test]
    fn mode_product_shape_error() {
        let t = counting(&[2, 3]);
        assert!(t.mode_product(1, &Matrix::identity(2)).is_err());
        assert!(t.mode_product(2, &Matrix::identity(2)).is_err());
    }
}
