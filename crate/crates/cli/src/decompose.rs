use std::collections::BTreeMap;

use goo_core::linalg::io::read_matrix_any;
use goo_core::{recover, DecompositionKind, DecompositionResult, NmOptions};
use serde::Serialize;

use crate::config::{ensure_json, json_artifact, read_input, write_text, OutputFormat, RunConfig};
use crate::{DecomposeArgs, Status};

/// Human-facing digest next to the full result.
#[derive(Serialize)]
struct Summary {
    objective: f64,
    converged: bool,
    /// Sorted magnitudes of the matched core entries, for diagonal kinds.
    core_diagonal: Option<Vec<f64>>,
    reconstruction_residual: f64,
    off_pattern_residual: f64,
}

#[derive(Serialize)]
struct Output<'a> {
    summary: Summary,
    decomposition: &'a DecompositionResult,
}

pub fn run(a: &DecomposeArgs) -> anyhow::Result<Status> {
    let kind: DecompositionKind = a.kind.parse()?;
    let format = a.out.format.unwrap_or(OutputFormat::Json);
    ensure_json(format, "decompose")?;
    let m = read_matrix_any(&read_input(&a.input)?)?;
    let opts = a.opt.options(NmOptions::default());
    let cfg = RunConfig {
        subcommand: "decompose",
        inputs: vec![a.input.clone()],
        kind: Some(kind.name().to_string()),
        groups: Some(kind.action(m.rows(), m.cols()).to_string()),
        cost: Some(kind.cost().to_string()),
        optimizer: Some(opts.clone()),
        seed: opts.seed,
        output: a.out.output.clone(),
        format,
        flags: BTreeMap::new(),
    };
    let r = recover(kind, &m, &opts)?;
    let summary = Summary {
        objective: r.objective,
        converged: r.converged,
        core_diagonal: r
            .canonical_core
            .as_ref()
            .map(|c| c.diagonal().iter().map(|z| z.re).collect()),
        reconstruction_residual: r.residuals.reconstruction,
        off_pattern_residual: r.residuals.off_pattern,
    };
    let text = json_artifact(
        &cfg,
        &Output {
            summary,
            decomposition: &r,
        },
    )?;
    write_text(a.out.output.as_deref(), &text)?;
    if !r.converged {
        eprintln!("warning: optimizer budget exhausted before convergence");
        return Ok(Status::NotConverged);
    }
    Ok(Status::Ok)
}
