//! Point-cloud normalization under the special linear group, orientation
//! canonicalization, PCA and rotation baselines, distortions, shape metrics
//! and cloud I/O.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{GooError, Result};
use crate::groups::{GroupElement, GroupSpec};
use crate::linalg::oracle::oracle_svd;
use crate::linalg::{convex_hull_area_2d, re, Matrix};
use crate::optimizer::{multi_start, NmOptions};

/// Restart count used for the non-smooth ∞-norm searches.
pub const NORMALIZE_RESTARTS: usize = 64;

/// Optimizer defaults for cloud normalization.
pub fn normalize_options(seed: u64) -> NmOptions {
    NmOptions {
        restarts: NORMALIZE_RESTARTS,
        seed,
        ..Default::default()
    }
}

/// `n x d` real coordinates, one point per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Matrix,
    pub label: Option<String>,
}

impl PointCloud {
    pub fn new(points: Matrix) -> Result<Self> {
        if !matches!(points.cols(), 2 | 3) {
            return Err(GooError::InvalidArgument(format!(
                "clouds must be 2-D or 3-D, got {} columns",
                points.cols()
            )));
        }
        if !points.is_finite() {
            return Err(GooError::NonFinite);
        }
        points.ensure_real(0.0)?;
        Ok(Self { points, label: None })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != d) {
            return Err(GooError::DimensionMismatch("points of unequal dimension".into()));
        }
        Self::new(Matrix::from_real_fn(points.len(), d, |i, j| points[i][j]))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        (0..self.dim()).map(|j| self.points[(i, j)].re).collect()
    }

    /// Right-multiplies every point by `g`.
    pub fn transform(&self, g: &Matrix) -> Result<PointCloud> {
        Ok(PointCloud {
            points: self.points.matmul(g)?.map(|z| re(z.re)),
            label: self.label.clone(),
        })
    }

    /// Largest absolute coordinate.
    pub fn inf_norm(&self) -> f64 {
        self.points.max_abs()
    }

    pub fn rows_subset(&self, keep: &[usize]) -> PointCloud {
        let d = self.dim();
        PointCloud {
            points: Matrix::from_fn(keep.len(), d, |i, j| self.points[(keep[i], j)]),
            label: self.label.clone(),
        }
    }
}

/// Translates the cloud to zero column means; returns the removed centroid.
pub fn center(pc: &PointCloud) -> (PointCloud, Vec<f64>) {
    let (n, d) = pc.points.shape();
    let centroid: Vec<f64> = (0..d)
        .map(|j| (0..n).map(|i| pc.points[(i, j)].re).sum::<f64>() / n.max(1) as f64)
        .collect();
    let points = Matrix::from_real_fn(n, d, |i, j| pc.points[(i, j)].re - centroid[j]);
    (
        PointCloud {
            points,
            label: pc.label.clone(),
        },
        centroid,
    )
}

fn singular_values(pc: &PointCloud) -> Result<Vec<f64>> {
    Ok(oracle_svd(&pc.points)?.singular_values())
}

fn ensure_full_rank(pc: &PointCloud) -> Result<()> {
    let d = pc.dim();
    if pc.len() < d + 1 {
        return Err(GooError::RankDeficient);
    }
    let s = singular_values(pc)?;
    if s[0] == 0.0 || s[d - 1] <= 1e-9 * s[0] {
        return Err(GooError::RankDeficient);
    }
    Ok(())
}

/// Symmetric `(XᵀX)^{-1/2}` rescaled to determinant one.
fn unimodular_whitening(pc: &PointCloud) -> Result<Matrix> {
    let d = pc.dim();
    let svd = oracle_svd(&pc.points)?;
    let sigma = svd.singular_values();
    let v = &svd.v;
    let scale = sigma.iter().map(|s| s.ln()).sum::<f64>() / d as f64;
    // W = V diag(1/σ) Vᵀ · (∏σ)^{1/d}
    let inv: Vec<f64> = sigma.iter().map(|s| (scale - s.ln()).exp()).collect();
    Ok(Matrix::from_real_fn(d, d, |i, j| {
        (0..d).map(|k| v[(i, k)].re * inv[k] * v[(j, k)].re).sum()
    }))
}

fn real_rows(m: &Matrix) -> Vec<f64> {
    let (n, d) = m.shape();
    let mut out = Vec::with_capacity(n * d);
    for i in 0..n {
        for j in 0..d {
            out.push(m[(i, j)].re);
        }
    }
    out
}

/// `max |x·G|` over row-major points `x`.
fn inf_norm_product(rows: &[f64], d: usize, g: &Matrix) -> f64 {
    let gr: Vec<f64> = (0..d * d).map(|k| g[(k / d, k % d)].re).collect();
    let mut best = 0.0f64;
    for x in rows.chunks_exact(d) {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += x[k] * gr[k * d + j];
            }
            best = best.max(s.abs());
        }
    }
    best
}

/// Minimizes `‖X·G‖_∞` over `G` in `spec`, searching from `pre` (whose
/// determinant is one). Falls back to the identity if nothing beats it.
fn inf_norm_search(pc: &PointCloud, spec: GroupSpec, pre: &Matrix, opts: &NmOptions) -> Result<(PointCloud, GroupElement)> {
    let d = pc.dim();
    let start = pc.points.matmul(pre)?;
    let rows = real_rows(&start);
    let objective = |p: &[f64]| match spec.exp_params(p, false) {
        Ok(g) => inf_norm_product(&rows, d, &g),
        Err(_) => f64::INFINITY,
    };
    let opt = multi_start(&objective, spec.lie_dim(), opts, None)?;
    let found = spec.embed(&opt.best_params)?;
    let matrix = pre.matmul(&found.matrix)?.map(|z| re(z.re));
    let candidate = pc.transform(&matrix)?;
    if candidate.inf_norm() <= pc.inf_norm() {
        let inverse = matrix.inverse()?.map(|z| re(z.re));
        Ok((candidate, GroupElement { spec, matrix, inverse }))
    } else {
        Ok((pc.clone(), GroupElement::identity(spec)))
    }
}

/// Minimizes `‖X·G‖_∞` over `G ∈ SL(d)`. The search starts from the
/// determinant-one whitening of the cloud, which maps any affine image of a
/// cube to a rotated cube.
pub fn normalize_sl(pc: &PointCloud, opts: &NmOptions) -> Result<(PointCloud, GroupElement)> {
    ensure_full_rank(pc)?;
    let w = unimodular_whitening(pc)?;
    inf_norm_search(pc, GroupSpec::sl(pc.dim()), &w, opts)
}

/// Minimizes `‖X·G‖_∞` over `G ∈ SO(d)`.
pub fn so_normalize(pc: &PointCloud, opts: &NmOptions) -> Result<(PointCloud, GroupElement)> {
    ensure_full_rank(pc)?;
    inf_norm_search(pc, GroupSpec::so(pc.dim()), &Matrix::identity(pc.dim()), opts)
}

/// Rotates onto principal axes in descending variance; each axis is signed
/// so its largest-magnitude loading is positive.
pub fn pca_normalize(pc: &PointCloud) -> Result<PointCloud> {
    ensure_full_rank(pc)?;
    let d = pc.dim();
    let mut v = oracle_svd(&pc.points)?.v.map(|z| re(z.re));
    for j in 0..d {
        let lead = (0..d)
            .map(|i| v[(i, j)].re)
            .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        if lead < 0.0 {
            for i in 0..d {
                v[(i, j)] = -v[(i, j)];
            }
        }
    }
    pc.transform(&v)
}

/// The four quarter-turn candidates `[x,y]`, `[−y,x]`, `[−x,−y]`, `[y,−x]`.
pub fn quarter_turns(pc: &PointCloud) -> Result<Vec<PointCloud>> {
    if pc.dim() != 2 {
        return Err(GooError::InvalidArgument("orientation candidates need a 2-D cloud".into()));
    }
    let (n, _) = pc.points.shape();
    let col = |j: usize, s: f64| (0..n).map(move |i| s * pc.points[(i, j)].re);
    let make = |a: Vec<f64>, b: Vec<f64>| PointCloud {
        points: Matrix::from_real_fn(n, 2, |i, j| if j == 0 { a[i] } else { b[i] }),
        label: pc.label.clone(),
    };
    Ok(vec![
        make(col(0, 1.0).collect(), col(1, 1.0).collect()),
        make(col(1, -1.0).collect(), col(0, 1.0).collect()),
        make(col(0, -1.0).collect(), col(1, -1.0).collect()),
        make(col(1, 1.0).collect(), col(0, -1.0).collect()),
    ])
}

/// `‖max(0, X)‖_F`.
pub fn positive_mass(pc: &PointCloud) -> f64 {
    pc.points
        .as_slice()
        .iter()
        .map(|z| z.re.max(0.0).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Picks the quarter turn with the least positive mass; the first candidate
/// wins ties.
pub fn canonical_orientation_2d(pc: &PointCloud) -> Result<PointCloud> {
    let candidates = quarter_turns(pc)?;
    let mut best = 0;
    let mut best_value = positive_mass(&candidates[0]);
    for (k, c) in candidates.iter().enumerate().skip(1) {
        let v = positive_mass(c);
        if v < best_value {
            best = k;
            best_value = v;
        }
    }
    Ok(candidates.into_iter().nth(best).expect("four candidates"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DistortionKind {
    /// Gaussian matrix rescaled to determinant one.
    RandomSl,
    /// `rotation(θ) · diag(λ, 1/λ) · shear(s) · mirror`, acting on the
    /// first two coordinates.
    Compose {
        theta: f64,
        shear: f64,
        squeeze: f64,
        mirror: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionSpec {
    pub seed: u64,
    pub kind: DistortionKind,
}

impl DistortionSpec {
    pub fn random_sl(seed: u64) -> Self {
        Self {
            seed,
            kind: DistortionKind::RandomSl,
        }
    }
}

const MAX_RESAMPLES: usize = 100;

/// Emits a `d x d` matrix with determinant +1 (−1 when mirrored).
pub fn random_distortion(spec: &DistortionSpec, d: usize) -> Result<Matrix> {
    if !matches!(d, 2 | 3) {
        return Err(GooError::InvalidArgument(format!("distortions are 2-D or 3-D, got {d}")));
    }
    match spec.kind {
        DistortionKind::RandomSl => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for _ in 0..MAX_RESAMPLES {
                let mut g = Matrix::from_real_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
                let det = g.det()?.re;
                if det.abs() < 1e-6 {
                    continue;
                }
                if det < 0.0 {
                    for i in 0..d {
                        g[(i, 0)] = -g[(i, 0)];
                    }
                }
                return Ok(g.scale(re(det.abs().powf(-1.0 / d as f64))));
            }
            Err(GooError::InvalidArgument("could not sample a well-conditioned distortion".into()))
        }
        DistortionKind::Compose {
            theta,
            shear,
            squeeze,
            mirror,
        } => {
            if !(squeeze > 0.0) {
                return Err(GooError::InvalidArgument(format!("squeeze {squeeze} must be positive")));
            }
            let (s, c) = theta.sin_cos();
            let rot = Matrix::from_rows(&[&[c, -s], &[s, c]]);
            let sq = Matrix::diag_real(&[squeeze, 1.0 / squeeze]);
            let sh = Matrix::from_rows(&[&[1.0, shear], &[0.0, 1.0]]);
            let mi = Matrix::diag_real(&[1.0, if mirror { -1.0 } else { 1.0 }]);
            let block = &(&(&rot * &sq) * &sh) * &mi;
            Ok(Matrix::from_fn(d, d, |i, j| match (i < 2, j < 2) {
                (true, true) => block[(i, j)],
                _ if i == j => re(1.0),
                _ => re(0.0),
            }))
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn directed_hausdorff2(a: &[f64], b: &[f64], d: usize) -> f64 {
    let mut worst = 0.0f64;
    for p in a.chunks_exact(d) {
        let near = b.chunks_exact(d).map(|q| dist2(p, q)).fold(f64::INFINITY, f64::min);
        worst = worst.max(near);
    }
    worst
}

/// Symmetric Hausdorff distance between two point sets.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(GooError::DimensionMismatch("clouds of different dimension".into()));
    }
    let d = a.dim();
    let (ra, rb) = (real_rows(&a.points), real_rows(&b.points));
    Ok(directed_hausdorff2(&ra, &rb, d).max(directed_hausdorff2(&rb, &ra, d)).sqrt())
}

/// The 24 proper rotations of the cube (signed permutation matrices with det +1).
pub fn cube_rotations() -> Vec<Matrix> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(24);
    for p in perms {
        for signs in 0..8u32 {
            let m = Matrix::from_real_fn(3, 3, |i, j| {
                if p[i] == j {
                    if signs >> i & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                } else {
                    0.0
                }
            });
            if m.det().map(|z| z.re > 0.0).unwrap_or(false) {
                out.push(m);
            }
        }
    }
    out
}

/// Hausdorff distance minimized over the residual symmetries of the square
/// (quarter turns) or the cube (24 rotations) applied to `b`.
pub fn hausdorff_modulo_orientation(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    let candidates = match b.dim() {
        2 => quarter_turns(b)?,
        _ => cube_rotations()
            .iter()
            .map(|r| b.transform(r))
            .collect::<Result<Vec<_>>>()?,
    };
    candidates
        .iter()
        .map(|c| hausdorff(a, c))
        .try_fold(f64::INFINITY, |m, h| h.map(|h| m.min(h)))
}

/// Largest pairwise distance.
pub fn diameter(pc: &PointCloud) -> f64 {
    let rows = real_rows(&pc.points);
    let d = pc.dim();
    let pts: Vec<&[f64]> = rows.chunks_exact(d).collect();
    let mut best = 0.0f64;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            best = best.max(dist2(p, q));
        }
    }
    best.sqrt()
}

/// Axis-aligned bounding box within 5% of square, filled to at least 95%
/// by the convex hull.
pub fn hull_is_square(pc: &PointCloud) -> Result<bool> {
    if pc.dim() != 2 {
        return Err(GooError::InvalidArgument("squareness test needs a 2-D cloud".into()));
    }
    let xs: Vec<f64> = (0..pc.len()).map(|i| pc.points[(i, 0)].re).collect();
    let ys: Vec<f64> = (0..pc.len()).map(|i| pc.points[(i, 1)].re).collect();
    let span = |v: &[f64]| {
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let (w, h) = (span(&xs), span(&ys));
    if !(w > 0.0 && h > 0.0) {
        return Ok(false);
    }
    let aspect = w.max(h) / w.min(h);
    let fill = convex_hull_area_2d(&pc.points) / (w * h);
    Ok(aspect <= 1.05 && fill >= 0.95)
}

/// `n x n` grid over `[−1, 1]^2`.
pub fn square_grid(n: usize) -> PointCloud {
    let step = if n > 1 { 2.0 / (n - 1) as f64 } else { 0.0 };
    let points = Matrix::from_real_fn(n * n, 2, |k, j| {
        let idx = if j == 0 { k % n } else { k / n };
        -1.0 + step * idx as f64
    });
    PointCloud { points, label: None }
}

/// Parses `x,y[,z]` rows; `#` lines are comments and `# label: name` names the cloud.
pub fn read_cloud(text: &str) -> Result<PointCloud> {
    let mut label = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(l) = comment.trim().strip_prefix("label:") {
                label = Some(l.trim().to_string());
            }
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| GooError::Parse(format!("line {}: bad coordinates '{line}'", lineno + 1)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(GooError::Parse("cloud has no points".into()));
    }
    let mut pc = PointCloud::from_points(&rows)?;
    pc.label = label;
    Ok(pc)
}

pub fn write_cloud(pc: &PointCloud) -> String {
    let mut out = String::new();
    if let Some(l) = &pc.label {
        writeln!(out, "# label: {l}").unwrap();
    }
    for i in 0..pc.len() {
        let row: Vec<String> = pc.point(i).iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

/// 512x512 scatter plot, autoscaled with a margin, points as 2px circles.
pub fn svg_scatter(pc: &PointCloud) -> Result<String> {
    if pc.dim() != 2 {
        return Err(GooError::InvalidArgument("scatter plots need a 2-D cloud".into()));
    }
    const SIZE: f64 = 512.0;
    const MARGIN: f64 = 16.0;
    let reach = pc.inf_norm().max(f64::MIN_POSITIVE);
    let s = (SIZE / 2.0 - MARGIN) / reach;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="512" height="512" viewBox="0 0 512 512">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="512" height="512" fill="white"/>"#).unwrap();
    if let Some(l) = &pc.label {
        let escaped = l.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        writeln!(out, "<title>{escaped}</title>").unwrap();
    }
    for i in 0..pc.len() {
        let p = pc.point(i);
        let (x, y) = (SIZE / 2.0 + s * p[0], SIZE / 2.0 - s * p[1]);
        writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="black"/>"#).unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}
