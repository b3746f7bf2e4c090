use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod config;
mod decompose;
mod normalize;
mod tensor;
mod verify;

use config::{OptFlags, OutputFlags};

/// Group orbit optimization: decompositions, sparse tensor cores and
/// point-cloud normalization from the command line.
#[derive(Parser, Debug)]
#[command(name = "goo", version = goo_core::VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Induce a matrix decomposition by orbit optimization.
    Decompose(DecomposeArgs),
    /// Sparsify a tensor core, or run the lifting/subgroup inequality harness.
    Tensor(TensorArgs),
    /// Normalize a point cloud under the special linear group.
    Normalize(NormalizeArgs),
    /// Run the norm-inequality and sparsifying-function battery.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// svd, svd-complex, qr, lu, cholesky, schur or equivalence.
    #[arg(long)]
    pub kind: String,
    /// Matrix file (`-` for stdin): rows per line, or the `# shape:` array format.
    #[arg(long)]
    pub input: String,
    #[command(flatten)]
    pub opt: OptFlags,
    #[command(flatten)]
    pub out: OutputFlags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Lifting,
    Subgroup,
}

#[derive(Args, Debug)]
pub struct TensorArgs {
    /// Tensor file in the `# shape:` array format (`-` for stdin).
    #[arg(long)]
    pub input: Option<String>,
    /// Per-mode groups separated by `;`, e.g. `sl:2;sl:2;sl:2`.
    #[arg(long, conflicts_with = "family")]
    pub groups: Option<String>,
    /// Group family placed on every mode: so (or u on complex data) or sl.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, default_value = "lp:1")]
    pub cost: String,
    /// Descending exponents for an ℓp sweep, e.g. `1,0.7,0.5`.
    #[arg(long, value_delimiter = ',')]
    pub scan: Option<Vec<f64>>,
    /// Run an inequality harness instead of a single decomposition.
    #[arg(long, value_enum)]
    pub check: Option<CheckKind>,
    /// Size of the seeded random corpus for `--check` when no input is given.
    #[arg(long, default_value_t = 50)]
    pub seeds: usize,
    /// Shape of the random corpus tensors.
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    pub shape: Vec<usize>,
    /// Index grouping for the lifting check, modes separated by `|`, e.g. `0|1,2`.
    #[arg(long)]
    pub grouping: Option<String>,
    /// Allowed negative gap before an inequality counts as violated.
    #[arg(long, default_value_t = 1e-4)]
    pub slack: f64,
    #[command(flatten)]
    pub opt: OptFlags,
    #[command(flatten)]
    pub out: OutputFlags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    Pca,
    So,
}

#[derive(Args, Debug)]
pub struct NormalizeArgs {
    /// Point cloud CSV, `x,y[,z]` per line (`-` for stdin).
    #[arg(long)]
    pub input: String,
    /// Use a baseline instead of the special linear normalization.
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    /// Apply a seeded random special linear distortion before normalizing.
    #[arg(long)]
    pub distort_seed: Option<u64>,
    /// Also write a scatter plot of the result.
    #[arg(long)]
    pub svg: Option<String>,
    /// Also write the JSON report next to a CSV or SVG output.
    #[arg(long)]
    pub report: Option<String>,
    #[command(flatten)]
    pub opt: OptFlags,
    #[command(flatten)]
    pub out: OutputFlags,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Extra matrix files to check alongside the generated ones.
    #[arg(long)]
    pub input: Vec<String>,
    /// Number of random matrices (sizes 2 to 5).
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Number of random density matrices for the entropy bound.
    #[arg(long, default_value_t = 50)]
    pub density_count: usize,
    /// Exponents for the norm inequalities.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,3")]
    pub p: Vec<f64>,
    /// Extra functions claimed to be sparsifying: cost strings or `log-abs`.
    #[arg(long)]
    pub claim: Vec<String>,
    #[arg(long, default_value_t = 1e-9)]
    pub slack: f64,
    /// Print JSON instead of a text table.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<String>,
}

/// Process exit protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotConverged,
    InequalityViolation,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::NotConverged => 2,
            Status::InequalityViolation => 3,
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("GOO_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("GOO_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            anyhow::bail!("GOO_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    configure_threads()?;
    match cli.command {
        Command::Decompose(a) => decompose::run(&a),
        Command::Tensor(a) => tensor::run(&a),
        Command::Normalize(a) => normalize::run(&a),
        Command::Verify(a) => verify::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
