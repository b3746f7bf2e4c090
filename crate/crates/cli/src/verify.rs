use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::bail;
use goo_core::costs::{check_sparsifying, default_samples, SparsifyingReport};
use goo_core::decomposer::verify_inequalities;
use goo_core::linalg::io::read_matrix_any;
use goo_core::linalg::random::{gaussian_matrix, random_density_matrix};
use goo_core::linalg::Matrix;
use goo_core::CostSpec;
use serde::Serialize;
use serde_json::json;

use crate::config::{json_artifact, read_input, write_text, OutputFormat, RunConfig};
use crate::{Status, VerifyArgs};

/// Functions the default battery claims are sparsifying.
const DEFAULT_CLAIMS: [&str; 4] = ["lp:0.5", "log1p", "entropy", "conical(0.5*lp:0.5;0.5*log1p)"];

const CONCAVITY_TOL: f64 = 1e-12;

#[derive(Serialize)]
struct Row {
    check: String,
    subject: String,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct Table {
    passed: usize,
    failed: usize,
    rows: Vec<Row>,
}

fn norm_rows(subject: &str, m: &Matrix, ps: &[f64], slack: f64, rows: &mut Vec<Row>) -> anyhow::Result<()> {
    let report = verify_inequalities(m, ps)?;
    for c in report.checks {
        rows.push(Row {
            pass: c.holds(slack),
            detail: format!("lhs {:.12} rhs {:.12} slack {:.3e}", c.lhs, c.rhs, c.slack),
            check: c.name,
            subject: subject.to_string(),
        });
    }
    Ok(())
}

fn claimed_fn(name: &str) -> anyhow::Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    if name == "log-abs" {
        return Ok(Box::new(|x: f64| x.abs().ln()));
    }
    let cost: CostSpec = name.parse()?;
    match cost.scalar_fn() {
        Some(f) => Ok(f),
        None => bail!("cost '{name}' is not entrywise"),
    }
}

fn describe(r: &SparsifyingReport) -> String {
    let mut failed = Vec::new();
    if !r.even {
        failed.push("even");
    }
    if !r.subadditive {
        failed.push("subadditive");
    }
    if !r.strictly_concave {
        failed.push("strictly concave");
    }
    if !r.nonneg_at_zero {
        failed.push("f(0) >= 0");
    }
    if failed.is_empty() {
        "all conditions hold".into()
    } else {
        format!("fails: {}", failed.join(", "))
    }
}

fn text_table(t: &Table) -> String {
    let mut out = String::new();
    for r in &t.rows {
        writeln!(
            out,
            "{:4}  {:<44} {:<18} {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.subject,
            r.detail
        )
        .unwrap();
    }
    writeln!(out, "{} passed, {} failed", t.passed, t.failed).unwrap();
    out
}

pub fn run(a: &VerifyArgs) -> anyhow::Result<Status> {
    let mut rows = Vec::new();
    for (k, path) in a.input.iter().enumerate() {
        let m = read_matrix_any(&read_input(path)?)?;
        norm_rows(&format!("input{k}"), &m, &a.p, a.slack, &mut rows)?;
    }
    for k in 0..a.count as u64 {
        // cycle through every shape from 2x2 to 5x5
        let (r, c) = (2 + (k % 4) as usize, 2 + (k / 4 % 4) as usize);
        let m = gaussian_matrix(r, c, a.seed.wrapping_add(k));
        norm_rows(&format!("random{k} {r}x{c}"), &m, &a.p, a.slack, &mut rows)?;
    }
    for k in 0..a.density_count as u64 {
        let n = 2 + (k % 3) as usize;
        let rho = random_density_matrix(n, a.seed.wrapping_add(10_000 + k));
        let report = verify_inequalities(&rho, &[1.0])?;
        let entropy = report.checks.into_iter().find(|c| c.name.contains("entropy"));
        rows.push(match entropy {
            Some(c) => Row {
                pass: c.holds(a.slack),
                detail: format!("entrywise {:.12} von Neumann {:.12}", c.lhs, c.rhs),
                check: c.name,
                subject: format!("density{k} {n}x{n}"),
            },
            None => Row {
                check: "entrywise entropy >= von Neumann entropy".into(),
                subject: format!("density{k} {n}x{n}"),
                pass: false,
                detail: "generated matrix failed the density-matrix test".into(),
            },
        });
    }
    let samples = default_samples();
    for name in DEFAULT_CLAIMS.iter().copied().chain(a.claim.iter().map(String::as_str)) {
        let f = claimed_fn(name)?;
        let r = check_sparsifying(&*f, &samples, CONCAVITY_TOL);
        rows.push(Row {
            check: "sparsifying".into(),
            subject: name.to_string(),
            pass: r.passes(),
            detail: describe(&r),
        });
    }

    let failed = rows.iter().filter(|r| !r.pass).count();
    let table = Table {
        passed: rows.len() - failed,
        failed,
        rows,
    };
    let text = if a.json {
        let mut flags = BTreeMap::new();
        flags.insert("count", json!(a.count));
        flags.insert("density_count", json!(a.density_count));
        flags.insert("p", json!(a.p));
        flags.insert("claim", json!(a.claim));
        flags.insert("slack", json!(a.slack));
        let cfg = RunConfig {
            subcommand: "verify",
            inputs: a.input.clone(),
            kind: None,
            groups: None,
            cost: None,
            optimizer: None,
            seed: a.seed,
            output: a.output.clone(),
            format: OutputFormat::Json,
            flags,
        };
        json_artifact(&cfg, &table)?
    } else {
        text_table(&table)
    };
    write_text(a.output.as_deref(), &text)?;
    Ok(if failed == 0 {
        Status::Ok
    } else {
        Status::InequalityViolation
    })
}
