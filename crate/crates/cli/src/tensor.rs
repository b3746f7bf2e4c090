use std::collections::BTreeMap;

use anyhow::{bail, Context};
use goo_core::groups::parse_group_list;
use goo_core::linalg::io::read_tensor;
use goo_core::linalg::random::gaussian_tensor;
use goo_core::linalg::{IndexGrouping, Tensor};
use goo_core::tensor_goo::{lifting_gap, sparse_core_scan, subgroup_gap, tucker_goo, GroupFamily};
use goo_core::{CostSpec, GroupSpec, NmOptions};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ensure_json, json_artifact, read_input, write_text, OutputFormat, RunConfig};
use crate::{CheckKind, Status, TensorArgs};

/// `0|1,2` → `[[0], [1, 2]]`.
fn parse_grouping(s: &str) -> anyhow::Result<IndexGrouping> {
    let groups = s
        .split('|')
        .map(|g| {
            g.split(',')
                .map(|i| i.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("bad grouping '{s}'"))?;
    Ok(IndexGrouping::new(groups))
}

fn family(a: &TensorArgs) -> anyhow::Result<GroupFamily> {
    Ok(a.family.as_deref().unwrap_or("so").parse()?)
}

#[derive(Serialize)]
struct HarnessRow {
    index: usize,
    seed: u64,
    narrow_or_tensor_value: f64,
    wide_or_unfolded_value: f64,
    gap: f64,
    holds: bool,
}

#[derive(Serialize)]
struct HarnessReport {
    check: CheckKind,
    count: usize,
    min_gap: f64,
    violations: usize,
    rows: Vec<HarnessRow>,
}

fn corpus(a: &TensorArgs) -> anyhow::Result<Vec<(u64, Tensor)>> {
    if let Some(path) = &a.input {
        return Ok(vec![(a.opt.seed, read_tensor(&read_input(path)?)?)]);
    }
    if a.seeds == 0 {
        bail!("--seeds must be positive");
    }
    (0..a.seeds as u64)
        .map(|k| {
            let seed = a.opt.seed.wrapping_add(k);
            Ok((seed, gaussian_tensor(&a.shape, seed)?))
        })
        .collect()
}

fn run_check(a: &TensorArgs, check: CheckKind, cfg: &RunConfig, opts: &NmOptions) -> anyhow::Result<Status> {
    let cost: CostSpec = a.cost.parse()?;
    let tensors = corpus(a)?;
    let fam = family(a)?;
    let rows = tensors
        .par_iter()
        .enumerate()
        .map(|(index, (seed, t))| -> anyhow::Result<HarnessRow> {
            let opts = NmOptions {
                seed: *seed,
                ..opts.clone()
            };
            let (lhs, rhs, gap) = match check {
                CheckKind::Lifting => {
                    let grouping = match &a.grouping {
                        Some(g) => parse_grouping(g)?,
                        None => IndexGrouping::new(vec![vec![0], (1..t.order()).collect()]),
                    };
                    let r = lifting_gap(t, &grouping, fam, &cost, &opts)?;
                    (r.tensor_value, r.unfolded_value, r.gap)
                }
                CheckKind::Subgroup => {
                    let r = subgroup_gap(t, GroupFamily::Orthogonal, GroupFamily::SpecialLinear, &cost, &opts)?;
                    (r.narrow_value, r.wide_value, r.gap)
                }
            };
            Ok(HarnessRow {
                index,
                seed: *seed,
                narrow_or_tensor_value: lhs,
                wide_or_unfolded_value: rhs,
                gap,
                holds: gap >= -a.slack,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let violations = rows.iter().filter(|r| !r.holds).count();
    let report = HarnessReport {
        check,
        count: rows.len(),
        min_gap: rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min),
        violations,
        rows,
    };
    write_text(a.out.output.as_deref(), &json_artifact(cfg, &report)?)?;
    if violations > 0 {
        eprintln!("{violations} inequality violation(s) beyond slack {}", a.slack);
        return Ok(Status::InequalityViolation);
    }
    Ok(Status::Ok)
}

pub fn run(a: &TensorArgs) -> anyhow::Result<Status> {
    let format = a.out.format.unwrap_or(OutputFormat::Json);
    ensure_json(format, "tensor")?;
    let opts = a.opt.options(NmOptions::default());
    let mut flags = BTreeMap::new();
    flags.insert("family", json!(a.family));
    flags.insert("scan", json!(a.scan));
    flags.insert("check", json!(a.check));
    flags.insert("seeds", json!(a.seeds));
    flags.insert("shape", json!(a.shape));
    flags.insert("grouping", json!(a.grouping));
    flags.insert("slack", json!(a.slack));
    let cfg = RunConfig {
        subcommand: "tensor",
        inputs: a.input.iter().cloned().collect(),
        kind: None,
        groups: a.groups.clone(),
        cost: Some(a.cost.clone()),
        optimizer: Some(opts.clone()),
        seed: opts.seed,
        output: a.out.output.clone(),
        format,
        flags,
    };
    if let Some(check) = a.check {
        return run_check(a, check, &cfg, &opts);
    }
    let Some(path) = &a.input else {
        bail!("--input is required unless --check is given");
    };
    let t = read_tensor(&read_input(path)?)?;
    let specs: Vec<GroupSpec> = match &a.groups {
        Some(g) => parse_group_list(g)?,
        None => family(a)?.specs(t.shape(), !t.is_real(0.0)),
    };
    let result = match &a.scan {
        Some(ps) => sparse_core_scan(&t, &specs, ps, &opts, true)?,
        None => tucker_goo(&t, &specs, &a.cost.parse()?, &opts)?,
    };
    write_text(a.out.output.as_deref(), &json_artifact(&cfg, &result)?)?;
    if !result.converged {
        eprintln!("warning: optimizer budget exhausted before convergence");
        return Ok(Status::NotConverged);
    }
    Ok(Status::Ok)
}
