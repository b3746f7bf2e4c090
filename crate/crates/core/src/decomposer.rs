//! Matrix decompositions induced by minimizing a cost over a group orbit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::costs::CostSpec;
use crate::error::{GooError, Result};
use crate::groups::{GroupElement, GroupSpec, OrbitAction, RightOp};
use crate::linalg::oracle::{is_hermitian, oracle_chol, oracle_svd};
use crate::linalg::{re, Matrix, Scalar};
use crate::optimizer::{multi_start, NmOptions, OptResult};

/// Tolerance for treating input as real or Hermitian.
const SHAPE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionKind {
    Svd,
    SvdComplex,
    Qr,
    Lu,
    Cholesky,
    Schur,
    Equivalence,
}

impl DecompositionKind {
    pub const ALL: [DecompositionKind; 7] = [
        DecompositionKind::Svd,
        DecompositionKind::SvdComplex,
        DecompositionKind::Qr,
        DecompositionKind::Lu,
        DecompositionKind::Cholesky,
        DecompositionKind::Schur,
        DecompositionKind::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecompositionKind::Svd => "svd",
            DecompositionKind::SvdComplex => "svd-complex",
            DecompositionKind::Qr => "qr",
            DecompositionKind::Lu => "lu",
            DecompositionKind::Cholesky => "cholesky",
            DecompositionKind::Schur => "schur",
            DecompositionKind::Equivalence => "equivalence",
        }
    }

    /// The group action for data of shape `rows x cols`.
    pub fn action(self, rows: usize, cols: usize) -> OrbitAction {
        match self {
            DecompositionKind::Svd => OrbitAction::two_sided(GroupSpec::so(rows), GroupSpec::so(cols), RightOp::Transpose),
            DecompositionKind::SvdComplex => {
                OrbitAction::two_sided(GroupSpec::u(rows), GroupSpec::u(cols), RightOp::ConjTranspose)
            }
            DecompositionKind::Qr => OrbitAction::two_sided(GroupSpec::so(rows), GroupSpec::uut(cols), RightOp::Inverse),
            DecompositionKind::Lu | DecompositionKind::Cholesky => OrbitAction::LeftOnly(GroupSpec::lut(rows)),
            DecompositionKind::Schur => OrbitAction::Similarity(GroupSpec::u(rows)),
            DecompositionKind::Equivalence => {
                OrbitAction::two_sided(GroupSpec::sl(rows), GroupSpec::sl(cols), RightOp::Inverse)
            }
        }
    }

    pub fn cost(self) -> CostSpec {
        match self {
            DecompositionKind::Lu | DecompositionKind::Cholesky | DecompositionKind::Schur => CostSpec::masked_l1_lower(),
            _ => CostSpec::l1(),
        }
    }

    /// Whether the target core is pseudo-diagonal (otherwise upper triangular).
    pub fn diagonal_core(self) -> bool {
        matches!(
            self,
            DecompositionKind::Svd | DecompositionKind::SvdComplex | DecompositionKind::Qr | DecompositionKind::Equivalence
        )
    }
}

impl fmt::Display for DecompositionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecompositionKind {
    type Err = GooError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| GooError::Parse(format!("unknown decomposition kind '{s}'")))
    }
}

/// Outcome of a raw orbit search.
#[derive(Clone, Debug, PartialEq)]
pub struct GooSolution {
    pub params: Vec<f64>,
    pub elements: Vec<GroupElement>,
    pub core: Matrix,
    pub objective: f64,
    pub opt: OptResult,
}

/// Minimizes `cost` over the orbit of `data` under `action`. Restart 0 starts
/// at the identity, so the objective never exceeds the cost of `data` itself.
pub fn goo_solve(data: &Matrix, action: &OrbitAction, cost: &CostSpec, opts: &NmOptions) -> Result<GooSolution> {
    goo_solve_from(data, action, cost, opts, None)
}

pub fn goo_solve_from(
    data: &Matrix,
    action: &OrbitAction,
    cost: &CostSpec,
    opts: &NmOptions,
    warm: Option<&[f64]>,
) -> Result<GooSolution> {
    action.check_shape(&[data.rows(), data.cols()])?;
    cost.validate()?;
    if !data.is_finite() {
        return Err(GooError::NonFinite);
    }
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
            .apply_matrix(p, data)
            .and_then(|c| cost.eval_matrix(&c))
            .unwrap_or(f64::INFINITY)
    };
    let opt = multi_start(&objective, dim, opts, warm)?;
    let elements = action.embed(&opt.best_params)?;
    let core = action.apply_elements_matrix(&elements, data)?;
    let objective = cost.eval_matrix(&core)?;
    Ok(GooSolution {
        params: opt.best_params.clone(),
        elements,
        core,
        objective,
        opt,
    })
}

/// Pseudo-diagonal reading of a core: the entries `(rows[t], permutation[t])`
/// carry the sorted magnitudes `canon[t, t]` with phases `signs[t]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Canonical {
    pub rows: Vec<usize>,
    pub permutation: Vec<usize>,
    pub signs: Vec<Scalar>,
    pub canon: Matrix,
    /// Frobenius mass outside the matched entries, relative to the core.
    pub off_pattern_residual: f64,
}

/// Largest exhaustive search over injective assignments.
const EXHAUSTIVE_LIMIT: usize = 50_000;

pub fn canonicalize_pseudo_diagonal(core: &Matrix) -> Canonical {
    let (r, c) = core.shape();
    let k = r.min(c);
    let weight = |i: usize, j: usize| core[(i, j)].norm_sqr();
    // Pairs (row, col), searched from the shorter side.
    let pairs: Vec<(usize, usize)> = if r <= c {
        assign(r, c, |a, b| weight(a, b))
    } else {
        assign(c, r, |a, b| weight(b, a)).into_iter().map(|(a, b)| (b, a)).collect()
    };
    let mut pairs = pairs;
    pairs.sort_by(|a, b| core[*b].norm().total_cmp(&core[*a].norm()).then(a.0.cmp(&b.0)));

    let mut canon = Matrix::zeros(r, c);
    let mut signs = Vec::with_capacity(k);
    let mut captured = 0.0;
    for (t, &(i, j)) in pairs.iter().enumerate() {
        let z = core[(i, j)];
        let mag = z.norm();
        canon[(t, t)] = re(mag);
        signs.push(if mag > 0.0 { z / mag } else { re(1.0) });
        captured += z.norm_sqr();
    }
    let total = core.frobenius_norm().powi(2);
    let off_pattern_residual = if total > 0.0 {
        (total - captured).max(0.0).sqrt() / total.sqrt()
    } else {
        0.0
    };
    Canonical {
        rows: pairs.iter().map(|p| p.0).collect(),
        permutation: pairs.iter().map(|p| p.1).collect(),
        signs,
        canon,
        off_pattern_residual,
    }
}

/// Injective map from `0..short` into `0..long` maximizing total weight.
/// Exhaustive in lexicographic order (first maximum wins) when small,
/// greedy by largest remaining weight otherwise.
fn assign(short: usize, long: usize, w: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let count = (0..short).fold(1usize, |acc, i| acc.saturating_mul(long - i));
    if count <= EXHAUSTIVE_LIMIT {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let mut current = Vec::with_capacity(short);
        let mut used = vec![false; long];
        search(0, short, long, &w, 0.0, &mut current, &mut used, &mut best);
        return best.1.into_iter().enumerate().collect();
    }
    let mut used_a = vec![false; short];
    let mut used_b = vec![false; long];
    let mut out = Vec::with_capacity(short);
    for _ in 0..short {
        let mut pick = (f64::NEG_INFINITY, 0, 0);
        for a in (0..short).filter(|&a| !used_a[a]) {
            for b in (0..long).filter(|&b| !used_b[b]) {
                if w(a, b) > pick.0 {
                    pick = (w(a, b), a, b);
                }
            }
        }
        used_a[pick.1] = true;
        used_b[pick.2] = true;
        out.push((pick.1, pick.2));
    }
    out.sort();
    out
}

#[allow(clippy::too_many_arguments)]
fn search(
    depth: usize,
    short: usize,
    long: usize,
    w: &impl Fn(usize, usize) -> f64,
    acc: f64,
    current: &mut Vec<usize>,
    used: &mut [bool],
    best: &mut (f64, Vec<usize>),
) {
    if depth == short {
        if acc > best.0 {
            *best = (acc, current.clone());
        }
        return;
    }
    for b in 0..long {
        if !used[b] {
            used[b] = true;
            current.push(b);
            search(depth + 1, short, long, w, acc + w(depth, b), current, used, best);
            current.pop();
            used[b] = false;
        }
    }
}

/// A factor of a decomposition. `group` is `None` for derived factors such as
/// a scaled Cholesky factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFactor {
    pub name: String,
    pub group: Option<GroupSpec>,
    pub matrix: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖left · pattern(core) · right − M‖_F / ‖M‖_F`, where `pattern` keeps
    /// only the entries of the target zero pattern.
    pub reconstruction: f64,
    pub off_pattern: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub kind: DecompositionKind,
    pub action: OrbitAction,
    pub cost: CostSpec,
    pub objective: f64,
    /// Raw core; `M = left · core · right` with the factors listed in order.
    pub core: Matrix,
    pub factors: Vec<NamedFactor>,
    /// Sorted nonnegative diagonal, for pseudo-diagonal kinds.
    pub canonical_core: Option<Matrix>,
    pub rows: Vec<usize>,
    pub permutation: Vec<usize>,
    pub signs: Vec<Scalar>,
    pub residuals: Residuals,
    pub params: Vec<f64>,
    pub converged: bool,
    pub evals: usize,
    pub restart_index: usize,
    pub seed: u64,
}

impl DecompositionResult {
    pub fn factor(&self, name: &str) -> Option<&Matrix> {
        self.factors.iter().find(|f| f.name == name).map(|f| &f.matrix)
    }
}

fn check_preconditions(kind: DecompositionKind, m: &Matrix) -> Result<()> {
    if !m.is_finite() {
        return Err(GooError::NonFinite);
    }
    use DecompositionKind::*;
    if matches!(kind, Lu | Cholesky | Schur | Equivalence) {
        m.ensure_square()?;
    }
    if matches!(kind, Svd | Qr | Lu | Cholesky) {
        // the triangular and rotation charts are real
        m.ensure_real(SHAPE_TOL * m.max_abs().max(1.0))?;
    }
    match kind {
        Cholesky => {
            if !is_hermitian(m, SHAPE_TOL * m.max_abs().max(1.0)) {
                return Err(GooError::NotPositiveDefinite);
            }
            oracle_chol(m)?;
        }
        Equivalence => {
            if m.det()?.norm() <= f64::EPSILON * m.max_abs().powi(m.rows() as i32) {
                return Err(GooError::Singular);
            }
        }
        _ => {}
    }
    Ok(())
}

fn upper_part(m: &Matrix) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| if i <= j { m[(i, j)] } else { re(0.0) })
}

fn relative(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Iterations per parameter used by [`recover`] when `max_iters` is unset.
/// The ℓ1 cores sit on kinks and, for the special linear group, in a flat
/// valley of equal-determinant scalings, so polishing needs a long tail.
pub const RECOVER_ITERS_PER_PARAM: usize = 4000;

/// Recovers the decomposition of `m` of the given kind by orbit search.
pub fn recover(kind: DecompositionKind, m: &Matrix, opts: &NmOptions) -> Result<DecompositionResult> {
    check_preconditions(kind, m)?;
    let action = kind.action(m.rows(), m.cols());
    let cost = kind.cost();
    let mut opts = opts.clone();
    if opts.max_iters.is_none() {
        opts.max_iters = Some(RECOVER_ITERS_PER_PARAM * action.param_dim().max(1));
    }
    let opts = &opts;
    let sol = goo_solve(m, &action, &cost, opts)?;
    let g = &sol.elements;
    let core = sol.core.clone();

    let named = |name: &str, spec: GroupSpec, matrix: Matrix| NamedFactor {
        name: name.into(),
        group: Some(spec),
        matrix,
    };
    // (left, right) with M = left · core · right
    let (factors, left, right) = match kind {
        DecompositionKind::Svd | DecompositionKind::SvdComplex => {
            let u = g[0].matrix.adjoint();
            let v = g[1].matrix.adjoint();
            let right = g[1].matrix.clone();
            (vec![named("U", g[0].spec, u.clone()), named("V", g[1].spec, v)], u, right)
        }
        DecompositionKind::Qr => {
            let q = g[0].matrix.transpose();
            let r = g[1].matrix.clone();
            (
                vec![named("Q", g[0].spec, q.clone()), named("R", g[1].spec, r.clone())],
                q,
                r,
            )
        }
        DecompositionKind::Equivalence => {
            let a = g[0].inverse.clone();
            let b = g[1].matrix.clone();
            (
                vec![named("A", g[0].spec, a.clone()), named("B", g[1].spec, b.clone())],
                a,
                b,
            )
        }
        DecompositionKind::Lu => {
            let l = g[0].matrix.clone();
            (vec![named("L", g[0].spec, l.clone())], l, Matrix::identity(m.cols()))
        }
        DecompositionKind::Cholesky => {
            let l = g[0].matrix.clone();
            let scale: Vec<Scalar> = core.diagonal().iter().map(|d| re(d.re.max(0.0).sqrt())).collect();
            let scaled = &l * &Matrix::diag(&scale);
            (
                vec![
                    named("L", g[0].spec, l.clone()),
                    NamedFactor {
                        name: "LLambda".into(),
                        group: None,
                        matrix: scaled,
                    },
                ],
                l,
                Matrix::identity(m.cols()),
            )
        }
        DecompositionKind::Schur => {
            let q = g[0].matrix.clone();
            let right = g[0].inverse.clone();
            (vec![named("Q", g[0].spec, q.clone())], q, right)
        }
    };

    let (canonical_core, rows, permutation, signs, off_pattern, pattern_core) = if kind.diagonal_core() {
        let c = canonicalize_pseudo_diagonal(&core);
        let mut kept = Matrix::zeros(core.rows(), core.cols());
        for (&i, &j) in c.rows.iter().zip(&c.permutation) {
            kept[(i, j)] = core[(i, j)];
        }
        (Some(c.canon), c.rows, c.permutation, c.signs, c.off_pattern_residual, kept)
    } else {
        let kept = upper_part(&core);
        let off = relative(core.strict_lower_norm(), core.frobenius_norm());
        let n = core.rows();
        (None, (0..n).collect(), (0..n).collect(), vec![re(1.0); n], off, kept)
    };
    let rebuilt = left.matmul(&pattern_core)?.matmul(&right)?;
    let reconstruction = relative(rebuilt.distance(m), m.frobenius_norm());

    Ok(DecompositionResult {
        kind,
        action,
        cost,
        objective: sol.objective,
        core,
        factors,
        canonical_core,
        rows,
        permutation,
        signs,
        residuals: Residuals {
            reconstruction,
            off_pattern,
        },
        params: sol.params,
        converged: sol.opt.converged,
        evals: sol.opt.evals,
        restart_index: sol.opt.restart_index,
        seed: opts.seed,
    })
}

/// One inequality `lhs ≥ rhs`; `slack = lhs − rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl InequalityCheck {
    fn new(name: String, lhs: f64, rhs: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            slack: lhs - rhs,
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub singular_values: Vec<f64>,
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.holds(tol))
    }

    pub fn violations(&self, tol: f64) -> Vec<&InequalityCheck> {
        self.checks.iter().filter(|c| !c.holds(tol)).collect()
    }
}

/// `(Σ|x|^p)^{1/p}`.
pub fn lp_norm(values: impl IntoIterator<Item = f64>, p: f64) -> f64 {
    values.into_iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn shannon(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .map(|x| {
            let a = x.abs();
            if a > 0.0 {
                -a * a.ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// Entrywise norms against Schatten norms: `ℓp ≥ S_p` for `p < 2`,
/// `S_p ≥ ℓp` for `p > 2`, the chain `‖M‖_p ≥ ‖σ‖_p ≥ ‖σ‖_q ≥ ‖M‖_q` for every
/// `p < 2 < q` among `ps`, and for density matrices the entropy bound
/// `Σ f(|m_ij|) ≥ Σ f(σ_i)` with `f(x) = −x log x`.
pub fn verify_inequalities(m: &Matrix, ps: &[f64]) -> Result<InequalityReport> {
    if let Some(p) = ps.iter().find(|p| !(**p > 0.0) || **p == 2.0 || !p.is_finite()) {
        return Err(GooError::InvalidArgument(format!("exponent {p} outside (0,2)∪(2,∞)")));
    }
    if !m.is_finite() {
        return Err(GooError::NonFinite);
    }
    let sigma = oracle_svd(m)?.singular_values();
    let entries: Vec<f64> = m.as_slice().iter().map(|z| z.norm()).collect();
    let mut checks = Vec::new();
    for &p in ps {
        let lp = lp_norm(entries.iter().copied(), p);
        let sp = lp_norm(sigma.iter().copied(), p);
        if p < 2.0 {
            checks.push(InequalityCheck::new(format!("l{p} >= schatten{p}"), lp, sp));
        } else {
            checks.push(InequalityCheck::new(format!("schatten{p} >= l{p}"), sp, lp));
        }
    }
    for &p in ps.iter().filter(|p| **p < 2.0) {
        for &q in ps.iter().filter(|q| **q > 2.0) {
            let mp = lp_norm(entries.iter().copied(), p);
            let dp = lp_norm(sigma.iter().copied(), p);
            let dq = lp_norm(sigma.iter().copied(), q);
            let mq = lp_norm(entries.iter().copied(), q);
            checks.push(InequalityCheck::new(format!("l{p} >= schatten{p} (chain {p},{q})"), mp, dp));
            checks.push(InequalityCheck::new(format!("schatten{p} >= schatten{q}"), dp, dq));
            checks.push(InequalityCheck::new(format!("schatten{q} >= l{q} (chain {p},{q})"), dq, mq));
        }
    }
    if is_density_matrix(m, 1e-9) {
        checks.push(InequalityCheck::new(
            "entrywise entropy >= von Neumann entropy".into(),
            shannon(entries.iter().copied()),
            shannon(sigma.iter().copied()),
        ));
    }
    Ok(InequalityReport {
        singular_values: sigma,
        checks,
    })
}

/// Hermitian, positive semidefinite, unit trace.
pub fn is_density_matrix(m: &Matrix, tol: f64) -> bool {
    if !m.is_square() || !is_hermitian(m, tol) || (m.trace() - re(1.0)).norm() > tol {
        return false;
    }
    // PSD: every Hermitian shift by tol admits a Cholesky factorization
    let n = m.rows();
    let shifted = m + &Matrix::identity(n).scale(re(tol));
    oracle_chol(&shifted).is_ok()
}
