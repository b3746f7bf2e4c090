use std::collections::BTreeMap;

use goo_core::linalg::{convex_hull_area_2d, Matrix};
use goo_core::pointcloud::{
    canonical_orientation_2d, center, hull_is_square, normalize_options, normalize_sl, pca_normalize,
    random_distortion, read_cloud, so_normalize, svg_scatter, write_cloud, DistortionSpec, PointCloud,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{json_artifact, read_input, write_text, OutputFormat, RunConfig};
use crate::{Baseline, NormalizeArgs, Status};

#[derive(Serialize)]
struct Report {
    method: &'static str,
    points: usize,
    dim: usize,
    centroid: Vec<f64>,
    input_inf_norm: f64,
    inf_norm: f64,
    /// Row-vector transform applied after centering, when one exists.
    transform: Option<Vec<Vec<f64>>>,
    /// Only for 2-D clouds.
    hull_is_square: Option<bool>,
    hull_area_before: Option<f64>,
    hull_area_after: Option<f64>,
    cloud: PointCloudRows,
}

#[derive(Serialize)]
struct PointCloudRows {
    label: Option<String>,
    points: Vec<Vec<f64>>,
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)].re).collect()).collect()
}

pub fn run(a: &NormalizeArgs) -> anyhow::Result<Status> {
    let format = a.out.format.unwrap_or(OutputFormat::Csv);
    let mut pc = read_cloud(&read_input(&a.input)?)?;
    if let Some(seed) = a.distort_seed {
        let g = random_distortion(&DistortionSpec::random_sl(seed), pc.dim())?;
        pc = pc.transform(&g)?;
    }
    let opts = a.opt.options(normalize_options(a.opt.seed));
    let mut flags = BTreeMap::new();
    flags.insert("baseline", json!(a.baseline));
    flags.insert("distort_seed", json!(a.distort_seed));
    flags.insert("svg", json!(a.svg));
    flags.insert("report", json!(a.report));
    let cfg = RunConfig {
        subcommand: "normalize",
        inputs: vec![a.input.clone()],
        kind: None,
        groups: Some(match a.baseline {
            None => format!("sl:{}", pc.dim()),
            Some(Baseline::So) => format!("so:{}", pc.dim()),
            Some(Baseline::Pca) => "pca".into(),
        }),
        cost: Some("inf".into()),
        optimizer: a.baseline.ne(&Some(Baseline::Pca)).then(|| opts.clone()),
        seed: opts.seed,
        output: a.out.output.clone(),
        format,
        flags,
    };

    let (centered, centroid) = center(&pc);
    let (method, normalized, transform): (_, PointCloud, _) = match a.baseline {
        None => {
            let (n, g) = normalize_sl(&centered, &opts)?;
            let n = if n.dim() == 2 { canonical_orientation_2d(&n)? } else { n };
            ("special-linear", n, Some(rows(&g.matrix)))
        }
        Some(Baseline::So) => {
            let (n, g) = so_normalize(&centered, &opts)?;
            ("special-orthogonal", n, Some(rows(&g.matrix)))
        }
        Some(Baseline::Pca) => ("pca", pca_normalize(&centered)?, None),
    };
    let planar = pc.dim() == 2;
    let report = Report {
        method,
        points: pc.len(),
        dim: pc.dim(),
        centroid,
        input_inf_norm: centered.inf_norm(),
        inf_norm: normalized.inf_norm(),
        transform,
        hull_is_square: planar.then(|| hull_is_square(&normalized)).transpose()?,
        hull_area_before: planar.then(|| convex_hull_area_2d(&centered.points)),
        hull_area_after: planar.then(|| convex_hull_area_2d(&normalized.points)),
        cloud: PointCloudRows {
            label: normalized.label.clone(),
            points: rows(&normalized.points),
        },
    };
    let json = json_artifact(&cfg, &report)?;
    match format {
        OutputFormat::Json => write_text(a.out.output.as_deref(), &json)?,
        OutputFormat::Csv => write_text(a.out.output.as_deref(), &write_cloud(&normalized))?,
        OutputFormat::Svg => write_text(a.out.output.as_deref(), &svg_scatter(&normalized)?)?,
    }
    if let Some(p) = &a.report {
        write_text(Some(p), &json)?;
    }
    if let Some(p) = &a.svg {
        write_text(Some(p), &svg_scatter(&normalized)?)?;
    }
    Ok(Status::Ok)
}
