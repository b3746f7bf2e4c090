//! Tucker-style cores found by orbit search over per-mode groups, sparse-core
//! estimation by decreasing ℓp exponents, and the subgroup and lifting
//! inequality harnesses.

use serde::{Deserialize, Serialize};

use crate::costs::CostSpec;
use crate::decomposer::lp_norm;
use crate::error::{GooError, Result};
use crate::groups::{GroupElement, GroupSpec, OrbitAction};
use crate::linalg::oracle::oracle_svd;
use crate::linalg::{IndexGrouping, Matrix, Tensor};
use crate::optimizer::{multi_start, NmOptions, OptResult};

/// Entries above this fraction of the largest magnitude count as nonzero.
pub const NNZ_RELATIVE_THRESHOLD: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p: f64,
    pub objective: f64,
    pub nnz: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeFactor {
    pub mode: usize,
    pub group: GroupSpec,
    pub matrix: Matrix,
    pub inverse: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorGooResult {
    pub specs: Vec<GroupSpec>,
    pub cost: CostSpec,
    /// `core = t ×₀ G₀ ×₁ G₁ ⋯`, so `t = core ×₀ G₀⁻¹ ×₁ G₁⁻¹ ⋯`.
    pub mode_factors: Vec<ModeFactor>,
    pub core: Tensor,
    pub objective: f64,
    pub nnz_estimate: usize,
    pub p_sweep: Vec<SweepPoint>,
    pub reconstruction_residual: f64,
    pub params: Vec<f64>,
    pub converged: bool,
    pub evals: usize,
    pub restart_index: usize,
    pub seed: u64,
}

/// Entries with `|x| > NNZ_RELATIVE_THRESHOLD · max|x|`.
pub fn nnz_relative(t: &Tensor) -> usize {
    let cut = NNZ_RELATIVE_THRESHOLD * t.max_abs();
    t.as_slice().iter().filter(|z| z.norm() > cut).count()
}

fn check_specs(t: &Tensor, specs: &[GroupSpec]) -> Result<OrbitAction> {
    if !t.as_slice().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(GooError::NonFinite);
    }
    let action = OrbitAction::TensorModes(specs.to_vec());
    action.check_shape(t.shape())?;
    Ok(action)
}

fn assemble(
    t: &Tensor,
    action: &OrbitAction,
    cost: &CostSpec,
    opt: OptResult,
    opts: &NmOptions,
) -> Result<TensorGooResult> {
    let elems: Vec<GroupElement> = action.embed(&opt.best_params)?;
    let core = action.apply_elements(&elems, t)?;
    let rebuilt = action.reconstruct(&elems, &core)?;
    let norm = t.frobenius_norm();
    let reconstruction_residual = if norm > 0.0 {
        rebuilt.distance(t) / norm
    } else {
        rebuilt.frobenius_norm()
    };
    Ok(TensorGooResult {
        specs: action.specs(),
        cost: cost.clone(),
        mode_factors: elems
            .into_iter()
            .enumerate()
            .map(|(mode, e)| ModeFactor {
                mode,
                group: e.spec,
                matrix: e.matrix,
                inverse: e.inverse,
            })
            .collect(),
        objective: cost.eval(&core)?,
        nnz_estimate: nnz_relative(&core),
        core,
        p_sweep: Vec::new(),
        reconstruction_residual,
        params: opt.best_params,
        converged: opt.converged,
        evals: opt.evals,
        restart_index: opt.restart_index,
        seed: opts.seed,
    })
}

/// Minimizes `cost(t ×₀ G₀ ×₁ G₁ ⋯)` over one group per mode.
pub fn tucker_goo(t: &Tensor, specs: &[GroupSpec], cost: &CostSpec, opts: &NmOptions) -> Result<TensorGooResult> {
    tucker_goo_from(t, specs, cost, opts, None)
}

/// As [`tucker_goo`], with restart 0 started from `warm` parameters.
pub fn tucker_goo_from(
    t: &Tensor,
    specs: &[GroupSpec],
    cost: &CostSpec,
    opts: &NmOptions,
    warm: Option<&[f64]>,
) -> Result<TensorGooResult> {
    let action = check_specs(t, specs)?;
    cost.validate()?;
    let dim = action.param_dim();
    if let Some(w) = warm {
        if w.len() != dim {
            return Err(GooError::ParamLength {
                expected: dim,
                got: w.len(),
            });
        }
    }
    let objective = |p: &[f64]| {
        action
            .apply(p, t)
            .and_then(|c| cost.eval(&c))
            .unwrap_or(f64::INFINITY)
    };
    let opt = multi_start(&objective, dim, opts, warm)?;
    assemble(t, &action, cost, opt, opts)
}

/// Runs `Σ|x|^p` for each `p` in `p_list` (descending, within (0, 2)); each
/// stage starts from the previous optimum when `warm` is set. The result is
/// the last stage, with the whole sweep recorded.
pub fn sparse_core_scan(
    t: &Tensor,
    specs: &[GroupSpec],
    p_list: &[f64],
    opts: &NmOptions,
    warm: bool,
) -> Result<TensorGooResult> {
    if p_list.is_empty() {
        return Err(GooError::InvalidArgument("empty exponent list".into()));
    }
    if p_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(GooError::InvalidArgument("exponents must be strictly descending".into()));
    }
    let mut sweep = Vec::with_capacity(p_list.len());
    let mut last: Option<TensorGooResult> = None;
    for &p in p_list {
        let cost = CostSpec::EntrywisePow(p);
        let start = if warm { last.as_ref().map(|r| r.params.clone()) } else { None };
        let r = tucker_goo_from(t, specs, &cost, opts, start.as_deref())?;
        sweep.push(SweepPoint {
            p,
            objective: r.objective,
            nnz: r.nnz_estimate,
        });
        last = Some(r);
    }
    let mut out = last.expect("nonempty sweep");
    out.p_sweep = sweep;
    Ok(out)
}

/// Which groups a harness places on each mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupFamily {
    /// Special orthogonal on real data, unitary on complex data.
    Orthogonal,
    SpecialLinear,
}

impl GroupFamily {
    pub fn spec(self, n: usize, complex: bool) -> GroupSpec {
        match (self, complex) {
            (GroupFamily::Orthogonal, false) => GroupSpec::so(n),
            (GroupFamily::Orthogonal, true) => GroupSpec::u(n),
            (GroupFamily::SpecialLinear, _) => GroupSpec::sl(n),
        }
    }

    pub fn specs(self, shape: &[usize], complex: bool) -> Vec<GroupSpec> {
        shape.iter().map(|&n| self.spec(n, complex)).collect()
    }

    /// Whether every group of `self` is a subgroup of the matching group of `wide`.
    pub fn is_subgroup_of(self, wide: GroupFamily) -> bool {
        self == wide || (self == GroupFamily::Orthogonal && wide == GroupFamily::SpecialLinear)
    }
}

impl std::str::FromStr for GroupFamily {
    type Err = GooError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "so" | "u" | "orthogonal" | "unitary" => Ok(GroupFamily::Orthogonal),
            "sl" | "special-linear" => Ok(GroupFamily::SpecialLinear),
            _ => Err(GooError::Parse(format!("unknown group family '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftingReport {
    pub tensor_value: f64,
    pub unfolded_value: f64,
    /// `tensor_value − unfolded_value`; nonnegative for exact infima.
    pub gap: f64,
    /// Trace norm of the unfolding when it is a matrix.
    pub unfolded_schatten1: Option<f64>,
}

/// Compares the optimum over per-mode groups with the optimum over the
/// larger groups acting on an unfolding.
pub fn lifting_gap(
    t: &Tensor,
    grouping: &IndexGrouping,
    family: GroupFamily,
    cost: &CostSpec,
    opts: &NmOptions,
) -> Result<LiftingReport> {
    grouping.validate(t.order())?;
    let complex = !t.is_real(0.0);
    let tensor_value = tucker_goo(t, &family.specs(t.shape(), complex), cost, opts)?.objective;
    let unfolded = t.unfold(grouping)?;
    let unfolded_value = tucker_goo(&unfolded, &family.specs(unfolded.shape(), complex), cost, opts)?.objective;
    let unfolded_schatten1 = if unfolded.order() == 2 {
        let sigma = oracle_svd(&unfolded.to_matrix()?)?.singular_values();
        Some(lp_norm(sigma, 1.0))
    } else {
        None
    };
    Ok(LiftingReport {
        tensor_value,
        unfolded_value,
        gap: tensor_value - unfolded_value,
        unfolded_schatten1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgroupReport {
    pub narrow_value: f64,
    pub wide_value: f64,
    /// `narrow_value − wide_value`; nonnegative for exact infima.
    pub gap: f64,
}

/// Optimum over `narrow` groups against the optimum over `wide` groups on
/// every mode, with equal budgets. Only subgroup pairs are accepted.
pub fn subgroup_gap(
    t: &Tensor,
    narrow: GroupFamily,
    wide: GroupFamily,
    cost: &CostSpec,
    opts: &NmOptions,
) -> Result<SubgroupReport> {
    if !narrow.is_subgroup_of(wide) {
        return Err(GooError::InvalidArgument(format!(
            "{narrow:?} is not a subgroup family of {wide:?}"
        )));
    }
    let complex = !t.is_real(0.0);
    if complex && narrow != wide {
        // the unitary group is not inside the real special linear chart
        return Err(GooError::InvalidArgument("subgroup pair requires real data".into()));
    }
    let narrow_value = tucker_goo(t, &narrow.specs(t.shape(), complex), cost, opts)?.objective;
    let wide_value = tucker_goo(t, &wide.specs(t.shape(), complex), cost, opts)?.objective;
    Ok(SubgroupReport {
        narrow_value,
        wide_value,
        gap: narrow_value - wide_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    fn quick() -> NmOptions {
        NmOptions {
            restarts: 4,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn superdiagonal_is_a_fixed_point() {
        let mut t = Tensor::zeros(&[2, 2, 2]);
        t.set(&[0, 0, 0], re(2.0));
        t.set(&[1, 1, 1], re(-0.5));
        let r = tucker_goo(&t, &GroupFamily::Orthogonal.specs(t.shape(), false), &CostSpec::l1(), &quick()).unwrap();
        assert!((r.objective - 2.5).abs() < 1e-12);
        assert!(r.reconstruction_residual < 1e-12);
        assert_eq!(r.nnz_estimate, 2);
    }

    #[test]
    fn spec_mismatch_is_an_error() {
        let t = Tensor::zeros(&[2, 3]);
        assert!(tucker_goo(&t, &[GroupSpec::so(2)], &CostSpec::l1(), &quick()).is_err());
        assert!(tucker_goo(&t, &[GroupSpec::so(2), GroupSpec::so(2)], &CostSpec::l1(), &quick()).is_err());
    }

    #[test]
    fn sweep_validation() {
        let t = Tensor::zeros(&[2, 2]);
        let specs = [GroupSpec::so(2), GroupSpec::so(2)];
        assert!(sparse_core_scan(&t, &specs, &[], &quick(), true).is_err());
        assert!(sparse_core_scan(&t, &specs, &[0.5, 1.0], &quick(), true).is_err());
        assert!(sparse_core_scan(&t, &specs, &[1.0, 2.5], &quick(), true).is_err());
    }

    #[test]
    fn unsupported_family_pair() {
        let t = Tensor::zeros(&[2, 2]);
        let e = subgroup_gap(&t, GroupFamily::SpecialLinear, GroupFamily::Orthogonal, &CostSpec::l1(), &quick());
        assert!(e.is_err());
    }

    #[test]
    fn identical_families_agree() {
        let t = Tensor::from_real(&[2, 2], &[0.3, -1.0, 0.7, 0.2]).unwrap();
        let r = subgroup_gap(&t, GroupFamily::Orthogonal, GroupFamily::Orthogonal, &CostSpec::l1(), &quick()).unwrap();
        assert!(r.gap.abs() <= 1e-9);
    }

    #[test]
    fn family_parsing() {
        assert_eq!("so".parse::<GroupFamily>().unwrap(), GroupFamily::Orthogonal);
        assert_eq!("SL".parse::<GroupFamily>().unwrap(), GroupFamily::SpecialLinear);
        assert!("gl".parse::<GroupFamily>().is_err());
    }
}
