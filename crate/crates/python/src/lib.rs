//! Python bindings. Matrices cross the boundary as nested lists (rows of
//! floats, or complex numbers when any entry is complex); tensors as a shape
//! plus a flat vec-order list, first index fastest.

use goo_core::decomposer::{verify_inequalities as verify_core, DecompositionResult};
use goo_core::groups::parse_group_list;
use goo_core::linalg::{mat_exp as mat_exp_core, oracle::oracle_svd, Matrix, Scalar, Tensor};
use goo_core::pointcloud::{
    canonical_orientation_2d, center, hull_is_square, normalize_options, normalize_sl, pca_normalize,
    so_normalize, PointCloud,
};
use goo_core::tensor_goo::{sparse_core_scan, tucker_goo, TensorGooResult};
use goo_core::{CostSpec, DecompositionKind, GroupSpec, NmOptions};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(goo, GooError, PyException, "Raised for invalid input or failed numerical preconditions.");

fn err(e: goo_core::GooError) -> PyErr {
    GooError::new_err(e.to_string())
}

fn matrix_from(rows: Vec<Vec<Scalar>>) -> PyResult<Matrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(GooError::new_err("expected a non-empty rectangular list of rows"));
    }
    Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn matrix_to<'py>(py: Python<'py>, m: &Matrix) -> PyResult<Bound<'py, PyAny>> {
    let (r, c) = m.shape();
    if m.is_real(0.0) {
        let rows: Vec<Vec<f64>> = (0..r).map(|i| (0..c).map(|j| m[(i, j)].re).collect()).collect();
        Ok(rows.into_pyobject(py)?.into_any())
    } else {
        let rows: Vec<Vec<Scalar>> = (0..r).map(|i| (0..c).map(|j| m[(i, j)]).collect()).collect();
        Ok(rows.into_pyobject(py)?.into_any())
    }
}

fn values_to<'py>(py: Python<'py>, values: &[Scalar]) -> PyResult<Bound<'py, PyAny>> {
    if values.iter().all(|z| z.im == 0.0) {
        let v: Vec<f64> = values.iter().map(|z| z.re).collect();
        Ok(v.into_pyobject(py)?.into_any())
    } else {
        Ok(values.to_vec().into_pyobject(py)?.into_any())
    }
}

/// Optimizer settings; restart 0 always starts at the identity.
#[pyclass(name = "NmOptions", from_py_object)]
#[derive(Clone)]
struct PyNmOptions {
    inner: NmOptions,
}

#[pymethods]
impl PyNmOptions {
    #[new]
    #[pyo3(signature = (restarts=32, seed=0, max_iters=None, f_tol=1e-12, x_tol=1e-10, init_scale=0.25, init_sigma=0.8))]
    fn new(
        restarts: usize,
        seed: u64,
        max_iters: Option<usize>,
        f_tol: f64,
        x_tol: f64,
        init_scale: f64,
        init_sigma: f64,
    ) -> Self {
        Self {
            inner: NmOptions {
                max_iters,
                f_tol,
                x_tol,
                init_scale,
                restarts,
                init_sigma,
                seed,
                record_trace: false,
            },
        }
    }

    #[getter]
    fn restarts(&self) -> usize {
        self.inner.restarts
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

fn opts_or(opts: Option<PyNmOptions>, base: NmOptions) -> NmOptions {
    opts.map_or(base, |o| o.inner)
}

#[pyclass(name = "Decomposition", frozen)]
struct PyDecomposition {
    inner: DecompositionResult,
}

#[pymethods]
impl PyDecomposition {
    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn core<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        matrix_to(py, &self.inner.core)
    }

    /// Sorted magnitudes of the matched core entries, for diagonal kinds.
    #[getter]
    fn core_diagonal(&self) -> Option<Vec<f64>> {
        self.inner
            .canonical_core
            .as_ref()
            .map(|c| c.diagonal().iter().map(|z| z.re).collect())
    }

    /// Factor matrices by name, in the order `M = left · core · right`.
    #[getter]
    fn factors<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for f in &self.inner.factors {
            d.set_item(&f.name, matrix_to(py, &f.matrix)?)?;
        }
        Ok(d)
    }

    #[getter]
    fn reconstruction_residual(&self) -> f64 {
        self.inner.residuals.reconstruction
    }

    #[getter]
    fn off_pattern_residual(&self) -> f64 {
        self.inner.residuals.off_pattern
    }

    #[getter]
    fn params(&self) -> Vec<f64> {
        self.inner.params.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Decomposition(kind={}, objective={:.6}, converged={})",
            self.inner.kind.name(),
            self.inner.objective,
            self.inner.converged
        )
    }
}

#[pyclass(name = "TuckerResult", frozen)]
struct PyTuckerResult {
    inner: TensorGooResult,
}

#[pymethods]
impl PyTuckerResult {
    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn nnz_estimate(&self) -> usize {
        self.inner.nnz_estimate
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn core_shape(&self) -> Vec<usize> {
        self.inner.core.shape().to_vec()
    }

    /// Core entries in vec order.
    #[getter]
    fn core<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        values_to(py, self.inner.core.as_slice())
    }

    /// Per-mode group elements `G_i` with `core = t ×₀ G₀ ×₁ G₁ ⋯`.
    #[getter]
    fn factors<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.inner.mode_factors.iter().map(|f| matrix_to(py, &f.matrix)).collect()
    }

    /// `(p, objective, nnz)` per stage of an exponent sweep.
    #[getter]
    fn sweep(&self) -> Vec<(f64, f64, usize)> {
        self.inner.p_sweep.iter().map(|s| (s.p, s.objective, s.nnz)).collect()
    }

    #[getter]
    fn reconstruction_residual(&self) -> f64 {
        self.inner.reconstruction_residual
    }

    fn __repr__(&self) -> String {
        format!(
            "TuckerResult(objective={:.6}, nnz_estimate={}, converged={})",
            self.inner.objective, self.inner.nnz_estimate, self.inner.converged
        )
    }
}

#[pyclass(name = "Normalized", frozen)]
struct PyNormalized {
    #[pyo3(get)]
    points: Vec<Vec<f64>>,
    /// Row-vector transform applied after centering; `None` for PCA.
    #[pyo3(get)]
    transform: Option<Vec<Vec<f64>>>,
    #[pyo3(get)]
    centroid: Vec<f64>,
    #[pyo3(get)]
    inf_norm: f64,
    /// Only for 2-D clouds.
    #[pyo3(get)]
    hull_is_square: Option<bool>,
}

fn real_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)].re).collect()).collect()
}

/// Induce a matrix decomposition by orbit optimization.
#[pyfunction]
#[pyo3(signature = (kind, matrix, opts=None))]
fn recover(py: Python<'_>, kind: &str, matrix: Vec<Vec<Scalar>>, opts: Option<PyNmOptions>) -> PyResult<PyDecomposition> {
    let kind: DecompositionKind = kind.parse().map_err(err)?;
    let m = matrix_from(matrix)?;
    let opts = opts_or(opts, NmOptions::default());
    let inner = py.detach(|| goo_core::recover(kind, &m, &opts)).map_err(err)?;
    Ok(PyDecomposition { inner })
}

/// Sparsify a tensor core with per-mode groups such as `"sl:2;sl:2;sl:2"`.
/// With `scan`, runs a descending ℓp sweep instead of `cost`.
#[pyfunction]
#[pyo3(signature = (shape, data, groups, cost="lp:1", opts=None, scan=None))]
fn tucker(
    py: Python<'_>,
    shape: Vec<usize>,
    data: Vec<Scalar>,
    groups: &str,
    cost: &str,
    opts: Option<PyNmOptions>,
    scan: Option<Vec<f64>>,
) -> PyResult<PyTuckerResult> {
    let t = Tensor::from_vec(&shape, data).map_err(err)?;
    let specs: Vec<GroupSpec> = parse_group_list(groups).map_err(err)?;
    let opts = opts_or(opts, NmOptions::default());
    let inner = match scan {
        Some(ps) => py.detach(|| sparse_core_scan(&t, &specs, &ps, &opts, true)),
        None => {
            let cost: CostSpec = cost.parse().map_err(err)?;
            py.detach(|| tucker_goo(&t, &specs, &cost, &opts))
        }
    }
    .map_err(err)?;
    Ok(PyTuckerResult { inner })
}

/// Center a 2-D or 3-D cloud and normalize it: special linear by default,
/// or the `"so"` / `"pca"` baselines.
#[pyfunction]
#[pyo3(signature = (points, baseline=None, opts=None))]
fn normalize(
    py: Python<'_>,
    points: Vec<Vec<f64>>,
    baseline: Option<&str>,
    opts: Option<PyNmOptions>,
) -> PyResult<PyNormalized> {
    let pc = PointCloud::from_points(&points).map_err(err)?;
    let opts = opts_or(opts, normalize_options(0));
    let (centered, centroid) = center(&pc);
    let (normalized, transform) = py
        .detach(|| -> goo_core::Result<(PointCloud, Option<Matrix>)> {
            match baseline {
                None => {
                    let (n, g) = normalize_sl(&centered, &opts)?;
                    let n = if n.dim() == 2 { canonical_orientation_2d(&n)? } else { n };
                    Ok((n, Some(g.matrix)))
                }
                Some("so") => {
                    let (n, g) = so_normalize(&centered, &opts)?;
                    Ok((n, Some(g.matrix)))
                }
                Some("pca") => Ok((pca_normalize(&centered)?, None)),
                Some(other) => Err(goo_core::GooError::InvalidArgument(format!("unknown baseline '{other}'"))),
            }
        })
        .map_err(err)?;
    let square = if normalized.dim() == 2 {
        Some(hull_is_square(&normalized).map_err(err)?)
    } else {
        None
    };
    Ok(PyNormalized {
        points: real_rows(&normalized.points),
        transform: transform.as_ref().map(real_rows),
        centroid,
        inf_norm: normalized.inf_norm(),
        hull_is_square: square,
    })
}

/// Reference one-sided Jacobi SVD: `(U, singular_values, V)` with `M = U Σ Vᴴ`.
#[pyfunction]
fn svd<'py>(
    py: Python<'py>,
    matrix: Vec<Vec<Scalar>>,
) -> PyResult<(Bound<'py, PyAny>, Vec<f64>, Bound<'py, PyAny>)> {
    let s = oracle_svd(&matrix_from(matrix)?).map_err(err)?;
    Ok((matrix_to(py, &s.u)?, s.singular_values(), matrix_to(py, &s.v)?))
}

/// Matrix exponential.
#[pyfunction]
fn mat_exp<'py>(py: Python<'py>, matrix: Vec<Vec<Scalar>>) -> PyResult<Bound<'py, PyAny>> {
    let e = mat_exp_core(&matrix_from(matrix)?).map_err(err)?;
    matrix_to(py, &e)
}

/// Map Lie-algebra parameters onto a group such as `"sl:3"`.
#[pyfunction]
fn embed<'py>(py: Python<'py>, group: &str, params: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let spec: GroupSpec = group.parse().map_err(err)?;
    let g = spec.embed(&params).map_err(err)?;
    matrix_to(py, &g.matrix)
}

/// Number of free parameters of a group such as `"u:3"`.
#[pyfunction]
fn lie_dim(group: &str) -> PyResult<usize> {
    let spec: GroupSpec = group.parse().map_err(err)?;
    Ok(spec.lie_dim())
}

/// Norm inequalities as `(name, lhs, rhs, slack)`; each should have `slack ≥ 0`.
#[pyfunction]
fn verify_inequalities(matrix: Vec<Vec<Scalar>>, ps: Vec<f64>) -> PyResult<Vec<(String, f64, f64, f64)>> {
    let report = verify_core(&matrix_from(matrix)?, &ps).map_err(err)?;
    Ok(report
        .checks
        .into_iter()
        .map(|c| (c.name, c.lhs, c.rhs, c.slack))
        .collect())
}

#[pymodule]
fn goo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", goo_core::VERSION)?;
    m.add("GooError", m.py().get_type::<GooError>())?;
    m.add_class::<PyNmOptions>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_class::<PyTuckerResult>()?;
    m.add_class::<PyNormalized>()?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(tucker, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(svd, m)?)?;
    m.add_function(wrap_pyfunction!(mat_exp, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(lie_dim, m)?)?;
    m.add_function(wrap_pyfunction!(verify_inequalities, m)?)?;
    Ok(())
}
