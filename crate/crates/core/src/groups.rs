//! Unit groups, their Lie-algebra charts, and orbit actions on data.
//!
//! Every group here is reached as `exp(Z)` where `Z` is built from an
//! unconstrained real parameter vector so that it satisfies the algebra
//! constraint exactly. Inverses are `exp(-Z)`, or the adjoint for the
//! orthogonal and unitary groups.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GooError, Result};
use crate::linalg::{mat_exp, re, Matrix, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    SpecialOrthogonal,
    Unitary,
    SpecialLinear,
    LowerUnitTriangular,
    UpperUnitTriangular,
    Identity,
}

impl GroupKind {
    fn tag(self) -> &'static str {
        match self {
            GroupKind::SpecialOrthogonal => "so",
            GroupKind::Unitary => "u",
            GroupKind::SpecialLinear => "sl",
            GroupKind::LowerUnitTriangular => "lut",
            GroupKind::UpperUnitTriangular => "uut",
            GroupKind::Identity => "id",
        }
    }

    pub const ALL: [GroupKind; 6] = [
        GroupKind::SpecialOrthogonal,
        GroupKind::Unitary,
        GroupKind::SpecialLinear,
        GroupKind::LowerUnitTriangular,
        GroupKind::UpperUnitTriangular,
        GroupKind::Identity,
    ];
}

/// A matrix group of size `n`, written `so:3`, `u:3`, `sl:2`, `lut:3`, `uut:3`, `id:3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub n: usize,
}

impl GroupSpec {
    pub fn new(kind: GroupKind, n: usize) -> Self {
        Self { kind, n }
    }

    pub fn so(n: usize) -> Self {
        Self::new(GroupKind::SpecialOrthogonal, n)
    }

    pub fn u(n: usize) -> Self {
        Self::new(GroupKind::Unitary, n)
    }

    pub fn sl(n: usize) -> Self {
        Self::new(GroupKind::SpecialLinear, n)
    }

    pub fn lut(n: usize) -> Self {
        Self::new(GroupKind::LowerUnitTriangular, n)
    }

    pub fn uut(n: usize) -> Self {
        Self::new(GroupKind::UpperUnitTriangular, n)
    }

    pub fn id(n: usize) -> Self {
        Self::new(GroupKind::Identity, n)
    }

    /// Number of real parameters of the chart.
    pub fn lie_dim(&self) -> usize {
        let n = self.n;
        match self.kind {
            GroupKind::SpecialOrthogonal
            | GroupKind::LowerUnitTriangular
            | GroupKind::UpperUnitTriangular => n * (n - 1) / 2,
            // the SL chart takes a free n x n matrix, so it is not injective
            GroupKind::Unitary | GroupKind::SpecialLinear => n * n,
            GroupKind::Identity => 0,
        }
    }

    fn check_len(&self, params: &[f64]) -> Result<()> {
        if params.len() == self.lie_dim() {
            Ok(())
        } else {
            Err(GooError::ParamLength {
                expected: self.lie_dim(),
                got: params.len(),
            })
        }
    }

    /// Maps chart parameters to an element of the Lie algebra.
    ///
    /// Strictly triangular entries are packed column by column. The unitary
    /// chart takes the `n` imaginary diagonal parts first, then a
    /// (real, imaginary) pair per strictly-lower entry.
    pub fn param_to_algebra(&self, params: &[f64]) -> Result<Matrix> {
        self.check_len(params)?;
        let n = self.n;
        let mut z = Matrix::zeros(n, n);
        match self.kind {
            GroupKind::SpecialOrthogonal => {
                let mut k = 0;
                for j in 0..n {
                    for i in j + 1..n {
                        z[(i, j)] = re(params[k]);
                        z[(j, i)] = re(-params[k]);
                        k += 1;
                    }
                }
            }
            GroupKind::Unitary => {
                for i in 0..n {
                    z[(i, i)] = Complex64::new(0.0, params[i]);
                }
                let mut k = n;
                for j in 0..n {
                    for i in j + 1..n {
                        let w = Complex64::new(params[k], params[k + 1]);
                        z[(i, j)] = w;
                        z[(j, i)] = -w.conj();
                        k += 2;
                    }
                }
            }
            GroupKind::SpecialLinear => {
                let trace: f64 = (0..n).map(|i| params[i * n + i]).sum();
                for j in 0..n {
                    for i in 0..n {
                        z[(i, j)] = re(params[j * n + i]);
                    }
                }
                z[(0, 0)] -= re(trace);
            }
            GroupKind::LowerUnitTriangular => {
                let mut k = 0;
                for j in 0..n {
                    for i in j + 1..n {
                        z[(i, j)] = re(params[k]);
                        k += 1;
                    }
                }
            }
            GroupKind::UpperUnitTriangular => {
                let mut k = 0;
                for j in 0..n {
                    for i in 0..j {
                        z[(i, j)] = re(params[k]);
                        k += 1;
                    }
                }
            }
            GroupKind::Identity => {}
        }
        Ok(z)
    }

    /// `exp(Z)`, or `exp(-Z)` when `inverse` is set.
    pub fn exp_params(&self, params: &[f64], inverse: bool) -> Result<Matrix> {
        if self.kind == GroupKind::Identity {
            self.check_len(params)?;
            return Ok(Matrix::identity(self.n));
        }
        let z = self.param_to_algebra(params)?;
        match (inverse, self.kind) {
            (false, _) => mat_exp(&z),
            // exp(Z)⁻¹ = exp(Z)ᴴ for skew-Hermitian Z
            (true, GroupKind::SpecialOrthogonal | GroupKind::Unitary) => Ok(mat_exp(&z)?.adjoint()),
            (true, _) => mat_exp(&-&z),
        }
    }

    pub fn embed(&self, params: &[f64]) -> Result<GroupElement> {
        if self.kind == GroupKind::Identity {
            self.check_len(params)?;
            return Ok(GroupElement::identity(*self));
        }
        let z = self.param_to_algebra(params)?;
        let matrix = mat_exp(&z)?;
        // exp(Z)⁻¹ = exp(Z)ᴴ for skew-Hermitian Z
        let inverse = match self.kind {
            GroupKind::SpecialOrthogonal | GroupKind::Unitary => matrix.adjoint(),
            _ => mat_exp(&-&z)?,
        };
        Ok(GroupElement {
            spec: *self,
            matrix,
            inverse,
        })
    }

    pub fn is_member(&self, g: &Matrix, tol: f64) -> bool {
        let n = self.n;
        if g.shape() != (n, n) || !g.is_finite() {
            return false;
        }
        let id = Matrix::identity(n);
        let det_is_one = || g.det().map(|d| (d - re(1.0)).norm() <= tol).unwrap_or(false);
        match self.kind {
            GroupKind::SpecialOrthogonal => {
                g.is_real(tol) && (&g.transpose() * g).distance(&id) <= tol && det_is_one()
            }
            GroupKind::Unitary => (&g.adjoint() * g).distance(&id) <= tol,
            GroupKind::SpecialLinear => det_is_one(),
            GroupKind::LowerUnitTriangular => {
                g.is_lower_triangular(tol) && (0..n).all(|i| (g[(i, i)] - re(1.0)).norm() <= tol)
            }
            GroupKind::UpperUnitTriangular => {
                g.is_upper_triangular(tol) && (0..n).all(|i| (g[(i, i)] - re(1.0)).norm() <= tol)
            }
            GroupKind::Identity => g.distance(&id) <= tol,
        }
    }

    /// Whether the chart and the action stay real on real data.
    pub fn is_real_group(&self) -> bool {
        self.kind != GroupKind::Unitary
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.tag(), self.n)
    }
}

impl FromStr for GroupSpec {
    type Err = GooError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || GooError::Parse(format!("bad group spec '{s}' (expected e.g. so:3)"));
        let (tag, n) = s.trim().split_once(':').ok_or_else(bad)?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        let kind = GroupKind::ALL
            .into_iter()
            .find(|k| k.tag() == tag.trim().to_ascii_lowercase())
            .ok_or_else(bad)?;
        Ok(GroupSpec { kind, n })
    }
}

impl From<GroupSpec> for String {
    fn from(g: GroupSpec) -> String {
        g.to_string()
    }
}

impl TryFrom<String> for GroupSpec {
    type Error = GooError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A group element together with its exact inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub spec: GroupSpec,
    pub matrix: Matrix,
    pub inverse: Matrix,
}

impl GroupElement {
    pub fn identity(spec: GroupSpec) -> Self {
        Self {
            spec,
            matrix: Matrix::identity(spec.n),
            inverse: Matrix::identity(spec.n),
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            spec: self.spec,
            matrix: &self.matrix * &other.matrix,
            inverse: &other.inverse * &self.inverse,
        }
    }

    pub fn inverted(&self) -> GroupElement {
        GroupElement {
            spec: self.spec,
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
        }
    }

    fn is_identity_kind(&self) -> bool {
        self.spec.kind == GroupKind::Identity
    }
}

/// How the right-hand group enters a two-sided action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RightOp {
    Transpose,
    ConjTranspose,
    Inverse,
}

/// Which groups act on which side of the data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum OrbitAction {
    /// `G_left · M · op(G_right)`.
    TwoSided {
        left: GroupSpec,
        right: GroupSpec,
        right_op: RightOp,
    },
    /// `G⁻¹ · M · G`.
    Similarity(GroupSpec),
    /// `G⁻¹ · M`.
    LeftOnly(GroupSpec),
    /// `𝒯 ×₀ G₀ ×₁ G₁ ⋯`.
    TensorModes(Vec<GroupSpec>),
}

impl OrbitAction {
    pub fn two_sided(left: GroupSpec, right: GroupSpec, right_op: RightOp) -> Self {
        OrbitAction::TwoSided {
            left,
            right,
            right_op,
        }
    }

    /// Groups in parameter-vector order.
    pub fn specs(&self) -> Vec<GroupSpec> {
        match self {
            OrbitAction::TwoSided { left, right, .. } => vec![*left, *right],
            OrbitAction::Similarity(g) | OrbitAction::LeftOnly(g) => vec![*g],
            OrbitAction::TensorModes(gs) => gs.clone(),
        }
    }

    pub fn param_dim(&self) -> usize {
        self.specs().iter().map(GroupSpec::lie_dim).sum()
    }

    pub fn embed(&self, params: &[f64]) -> Result<Vec<GroupElement>> {
        let dim = self.param_dim();
        if params.len() != dim {
            return Err(GooError::ParamLength {
                expected: dim,
                got: params.len(),
            });
        }
        let mut offset = 0;
        self.specs()
            .iter()
            .map(|g| {
                let d = g.lie_dim();
                let e = g.embed(&params[offset..offset + d]);
                offset += d;
                e
            })
            .collect()
    }

    /// The data shape this action expects.
    pub fn check_shape(&self, shape: &[usize]) -> Result<()> {
        let ok = match (self, shape) {
            (OrbitAction::TwoSided { left, right, .. }, [r, c]) => left.n == *r && right.n == *c,
            (OrbitAction::Similarity(g), [r, c]) => g.n == *r && g.n == *c,
            (OrbitAction::LeftOnly(g), [r, _]) => g.n == *r,
            (OrbitAction::TensorModes(gs), s) => {
                gs.len() == s.len() && gs.iter().zip(s).all(|(g, n)| g.n == *n)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(GooError::DimensionMismatch(format!(
                "action '{self}' cannot act on data of shape {shape:?}"
            )))
        }
    }

    fn split<'a>(&self, params: &'a [f64]) -> Result<Vec<(GroupSpec, &'a [f64])>> {
        let dim = self.param_dim();
        if params.len() != dim {
            return Err(GooError::ParamLength {
                expected: dim,
                got: params.len(),
            });
        }
        let mut offset = 0;
        Ok(self
            .specs()
            .into_iter()
            .map(|g| {
                let d = g.lie_dim();
                offset += d;
                (g, &params[offset - d..offset])
            })
            .collect())
    }

    /// Applies the action, exponentiating only the factors it needs.
    pub fn apply(&self, params: &[f64], data: &Tensor) -> Result<Tensor> {
        match self {
            OrbitAction::TensorModes(_) => {
                self.check_shape(data.shape())?;
                let mut t = data.clone();
                for (mode, (g, p)) in self.split(params)?.into_iter().enumerate() {
                    if g.kind != GroupKind::Identity {
                        t = t.mode_product(mode, &g.exp_params(p, false)?)?;
                    }
                }
                Ok(t)
            }
            _ => Ok(self.apply_matrix(params, &data.to_matrix()?)?.into()),
        }
    }

    pub fn apply_matrix(&self, params: &[f64], m: &Matrix) -> Result<Matrix> {
        self.check_shape(&[m.rows(), m.cols()])?;
        let parts = self.split(params)?;
        match self {
            OrbitAction::TwoSided { right_op, .. } => {
                let ((gl, pl), (gr, pr)) = (parts[0], parts[1]);
                let mut out = if gl.kind == GroupKind::Identity {
                    m.clone()
                } else {
                    gl.exp_params(pl, false)?.matmul(m)?
                };
                if gr.kind != GroupKind::Identity {
                    let op = match right_op {
                        RightOp::Transpose => gr.exp_params(pr, false)?.transpose(),
                        RightOp::ConjTranspose => gr.exp_params(pr, false)?.adjoint(),
                        RightOp::Inverse => gr.exp_params(pr, true)?,
                    };
                    out = out.matmul(&op)?;
                }
                Ok(out)
            }
            OrbitAction::Similarity(_) => {
                let (g, p) = parts[0];
                let e = g.embed(p)?;
                e.inverse.matmul(m)?.matmul(&e.matrix)
            }
            OrbitAction::LeftOnly(_) => {
                let (g, p) = parts[0];
                g.exp_params(p, true)?.matmul(m)
            }
            OrbitAction::TensorModes(_) => {
                let ((g0, p0), (g1, p1)) = (parts[0], parts[1]);
                g0.exp_params(p0, false)?.matmul(m)?.matmul(&g1.exp_params(p1, false)?.transpose())
            }
        }
    }

    pub fn apply_elements(&self, elems: &[GroupElement], data: &Tensor) -> Result<Tensor> {
        self.check_shape(data.shape())?;
        match self {
            OrbitAction::TensorModes(_) => {
                let mut t = data.clone();
                for (mode, g) in elems.iter().enumerate() {
                    if !g.is_identity_kind() {
                        t = t.mode_product(mode, &g.matrix)?;
                    }
                }
                Ok(t)
            }
            _ => Ok(self.apply_elements_matrix(elems, &data.to_matrix()?)?.into()),
        }
    }

    pub fn apply_elements_matrix(&self, elems: &[GroupElement], m: &Matrix) -> Result<Matrix> {
        self.check_shape(&[m.rows(), m.cols()])?;
        match self {
            OrbitAction::TwoSided { right_op, .. } => {
                let (gl, gr) = (&elems[0], &elems[1]);
                let mut out = if gl.is_identity_kind() {
                    m.clone()
                } else {
                    gl.matrix.matmul(m)?
                };
                if !gr.is_identity_kind() {
                    let op = match right_op {
                        RightOp::Transpose => gr.matrix.transpose(),
                        RightOp::ConjTranspose => gr.matrix.adjoint(),
                        RightOp::Inverse => gr.inverse.clone(),
                    };
                    out = out.matmul(&op)?;
                }
                Ok(out)
            }
            OrbitAction::Similarity(_) => {
                let g = &elems[0];
                g.inverse.matmul(m)?.matmul(&g.matrix)
            }
            OrbitAction::LeftOnly(_) => elems[0].inverse.matmul(m),
            OrbitAction::TensorModes(_) => {
                // order-2 tensor: G₀ · M · G₁ᵀ
                let mut out = elems[0].matrix.matmul(m)?;
                out = out.matmul(&elems[1].matrix.transpose())?;
                Ok(out)
            }
        }
    }

    /// Inverts the action: recovers data from a core.
    pub fn reconstruct(&self, elems: &[GroupElement], core: &Tensor) -> Result<Tensor> {
        match self {
            OrbitAction::TensorModes(_) => {
                let mut t = core.clone();
                for (mode, g) in elems.iter().enumerate() {
                    if !g.is_identity_kind() {
                        t = t.mode_product(mode, &g.inverse)?;
                    }
                }
                Ok(t)
            }
            _ => Ok(self.reconstruct_matrix(elems, &core.to_matrix()?)?.into()),
        }
    }

    pub fn reconstruct_matrix(&self, elems: &[GroupElement], core: &Matrix) -> Result<Matrix> {
        match self {
            OrbitAction::TwoSided { right_op, .. } => {
                let (gl, gr) = (&elems[0], &elems[1]);
                let inv_op = match right_op {
                    RightOp::Transpose => gr.inverse.transpose(),
                    RightOp::ConjTranspose => gr.inverse.adjoint(),
                    RightOp::Inverse => gr.matrix.clone(),
                };
                gl.inverse.matmul(core)?.matmul(&inv_op)
            }
            OrbitAction::Similarity(_) => elems[0].matrix.matmul(core)?.matmul(&elems[0].inverse),
            OrbitAction::LeftOnly(_) => elems[0].matrix.matmul(core),
            OrbitAction::TensorModes(_) => elems[0]
                .inverse
                .matmul(core)?
                .matmul(&elems[1].inverse.transpose()),
        }
    }
}

impl fmt::Display for OrbitAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitAction::TwoSided {
                left,
                right,
                right_op,
            } => {
                write!(f, "two-sided:{left},{right}")?;
                match right_op {
                    RightOp::Transpose => Ok(()),
                    RightOp::ConjTranspose => write!(f, ",conj-transpose"),
                    RightOp::Inverse => write!(f, ",inverse"),
                }
            }
            OrbitAction::Similarity(g) => write!(f, "similarity:{g}"),
            OrbitAction::LeftOnly(g) => write!(f, "left:{g}"),
            OrbitAction::TensorModes(gs) => {
                let parts: Vec<String> = gs.iter().map(|g| g.to_string()).collect();
                write!(f, "modes:{}", parts.join(";"))
            }
        }
    }
}

/// Parses `so:3;sl:2;…` into a list of groups.
pub fn parse_group_list(s: &str) -> Result<Vec<GroupSpec>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

impl FromStr for OrbitAction {
    type Err = GooError;

    /// `two-sided:<left>,<right>[,transpose|conj-transpose|inverse]`,
    /// `similarity:<g>`, `left:<g>`, `modes:<g>;<g>;…`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || GooError::Parse(format!("bad action '{s}'"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "two-sided" => {
                let parts: Vec<&str> = rest.split(',').collect();
                let right_op = match parts.get(2).map(|p| p.trim()) {
                    None | Some("transpose") | Some("t") => RightOp::Transpose,
                    Some("conj-transpose") | Some("h") => RightOp::ConjTranspose,
                    Some("inverse") | Some("inv") => RightOp::Inverse,
                    Some(_) => return Err(bad()),
                };
                if parts.len() < 2 || parts.len() > 3 {
                    return Err(bad());
                }
                Ok(OrbitAction::TwoSided {
                    left: parts[0].parse()?,
                    right: parts[1].parse()?,
                    right_op,
                })
            }
            "similarity" => Ok(OrbitAction::Similarity(rest.parse()?)),
            "left" => Ok(OrbitAction::LeftOnly(rest.parse()?)),
            "modes" => {
                let gs = parse_group_list(rest)?;
                if gs.is_empty() {
                    return Err(bad());
                }
                Ok(OrbitAction::TensorModes(gs))
            }
            _ => Err(bad()),
        }
    }
}

impl From<OrbitAction> for String {
    fn from(a: OrbitAction) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for OrbitAction {
    type Error = GooError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lie_dims() {
        assert_eq!(GroupSpec::so(3).lie_dim(), 3);
        assert_eq!(GroupSpec::sl(2).lie_dim(), 4);
        assert_eq!(GroupSpec::u(2).lie_dim(), 4);
        assert_eq!(GroupSpec::lut(3).lie_dim(), 3);
        assert_eq!(GroupSpec::uut(4).lie_dim(), 6);
        assert_eq!(GroupSpec::id(5).lie_dim(), 0);
    }

    #[test]
    fn zero_params_give_zero_algebra_and_identity() {
        for kind in GroupKind::ALL {
            let g = GroupSpec::new(kind, 3);
            let p = vec![0.0; g.lie_dim()];
            assert_eq!(g.param_to_algebra(&p).unwrap(), Matrix::zeros(3, 3));
            assert_eq!(g.embed(&p).unwrap().matrix, Matrix::identity(3));
        }
    }

    #[test]
    fn so2_chart_and_quarter_turn() {
        let g = GroupSpec::so(2);
        let z = g.param_to_algebra(&[0.7]).unwrap();
        assert_eq!(z, Matrix::from_rows(&[&[0.0, -0.7], &[0.7, 0.0]]));
        let r = g.embed(&[std::f64::consts::FRAC_PI_2]).unwrap().matrix;
        assert!(r.distance(&Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]])) < 1e-12);
    }

    #[test]
    fn sl_chart_follows_trace_formula() {
        // X = [[1,2],[3,4]] packed column-major
        let z = GroupSpec::sl(2).param_to_algebra(&[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!(z, Matrix::from_rows(&[&[-4.0, 2.0], &[3.0, 4.0]]));
        assert_eq!(z.trace(), re(0.0));
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(matches!(
            GroupSpec::so(3).param_to_algebra(&[1.0]),
            Err(GooError::ParamLength { expected: 3, got: 1 })
        ));
        assert!(GroupSpec::id(2).embed(&[1.0]).is_err());
    }

    #[test]
    fn membership_examples() {
        let rot = Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(GroupSpec::so(2).is_member(&rot, 1e-12));
        assert!(!GroupSpec::uut(2).is_member(&rot, 1e-12));
        for kind in GroupKind::ALL {
            assert!(GroupSpec::new(kind, 3).is_member(&Matrix::identity(3), 1e-12));
        }
        let mirror = Matrix::diag_real(&[1.0, -1.0]);
        assert!(!GroupSpec::so(2).is_member(&mirror, 1e-9));
        assert!(GroupSpec::u(2).is_member(&mirror, 1e-9));
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["so:3", "u:3", "sl:2", "lut:3", "uut:3", "id:3"] {
            assert_eq!(s.parse::<GroupSpec>().unwrap().to_string(), s);
        }
        assert!("so".parse::<GroupSpec>().is_err());
        assert!("xx:3".parse::<GroupSpec>().is_err());
        assert!("so:0".parse::<GroupSpec>().is_err());
        for s in [
            "two-sided:so:3,so:3",
            "two-sided:u:3,u:3,conj-transpose",
            "two-sided:sl:3,sl:3,inverse",
            "similarity:u:3",
            "left:lut:3",
            "modes:sl:2;sl:2;sl:2",
        ] {
            assert_eq!(s.parse::<OrbitAction>().unwrap().to_string(), s);
        }
        assert!("two-sided:so:3".parse::<OrbitAction>().is_err());
        assert!("spin:so:3".parse::<OrbitAction>().is_err());
    }

    #[test]
    fn zero_params_leave_data_unchanged() {
        let m = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 10.0]]);
        for a in [
            "two-sided:so:3,so:3",
            "two-sided:sl:3,uut:3,inverse",
            "similarity:u:3",
            "left:lut:3",
            "modes:so:3;sl:3",
        ] {
            let act: OrbitAction = a.parse().unwrap();
            let out = act.apply_matrix(&vec![0.0; act.param_dim()], &m).unwrap();
            assert_eq!(out, m, "{a}");
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let act: OrbitAction = "two-sided:so:3,so:2".parse().unwrap();
        let m = Matrix::zeros(3, 3);
        assert!(act.apply_matrix(&[0.0; 4], &m).is_err());
        let act = OrbitAction::LeftOnly(GroupSpec::lut(2));
        assert!(act.apply_matrix(&[0.0], &m).is_err());
    }

    #[test]
    fn reconstruct_inverts_apply() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[0.5, -1.0]]);
        for a in [
            "two-sided:so:2,so:2",
            "two-sided:u:2,u:2,conj-transpose",
            "two-sided:sl:2,sl:2,inverse",
            "similarity:u:2",
            "left:lut:2",
        ] {
            let act: OrbitAction = a.parse().unwrap();
            let p: Vec<f64> = (0..act.param_dim()).map(|i| 0.3 * i as f64 - 0.4).collect();
            let elems = act.embed(&p).unwrap();
            let core = act.apply_elements_matrix(&elems, &m).unwrap();
            let back = act.reconstruct_matrix(&elems, &core).unwrap();
            assert!(back.distance(&m) < 1e-12, "{a}");
        }
    }
}
