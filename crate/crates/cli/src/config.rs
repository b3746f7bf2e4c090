//! Run configuration echo, shared flags and output plumbing.

use std::collections::BTreeMap;
use std::io::Read;

use anyhow::Context;
use clap::{Args, ValueEnum};
use goo_core::NmOptions;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
    Svg,
}

#[derive(Args, Debug, Clone)]
pub struct OptFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of optimizer restarts (restart 0 starts at the identity).
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Iteration budget per restart.
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub f_tol: Option<f64>,
    #[arg(long)]
    pub x_tol: Option<f64>,
    #[arg(long)]
    pub init_scale: Option<f64>,
    #[arg(long)]
    pub init_sigma: Option<f64>,
}

impl OptFlags {
    /// Applies the flags over `base`.
    pub fn options(&self, base: NmOptions) -> NmOptions {
        NmOptions {
            seed: self.seed,
            restarts: self.restarts.unwrap_or(base.restarts),
            max_iters: self.max_iters.or(base.max_iters),
            f_tol: self.f_tol.unwrap_or(base.f_tol),
            x_tol: self.x_tol.unwrap_or(base.x_tol),
            init_scale: self.init_scale.unwrap_or(base.init_scale),
            init_sigma: self.init_sigma.unwrap_or(base.init_sigma),
            record_trace: false,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputFlags {
    /// Output path; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

/// Everything needed to reproduce an artifact, echoed into its JSON.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub inputs: Vec<String>,
    pub kind: Option<String>,
    pub groups: Option<String>,
    pub cost: Option<String>,
    pub optimizer: Option<NmOptions>,
    pub seed: u64,
    pub output: Option<String>,
    pub format: OutputFormat,
    /// Subcommand-specific flags.
    pub flags: BTreeMap<&'static str, serde_json::Value>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    config: &'a RunConfig,
    result: &'a T,
}

pub fn read_input(path: &str) -> anyhow::Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

pub fn write_text(path: Option<&str>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) if p != "-" => std::fs::write(p, text).with_context(|| format!("writing {p}")),
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Pretty JSON with the config echo and version; deterministic for fixed inputs.
pub fn json_artifact<T: Serialize>(cfg: &RunConfig, result: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope {
        version: goo_core::VERSION,
        config: cfg,
        result,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn ensure_json(format: OutputFormat, subcommand: &str) -> anyhow::Result<()> {
    if format != OutputFormat::Json {
        anyhow::bail!("{subcommand} only writes json");
    }
    Ok(())
}
