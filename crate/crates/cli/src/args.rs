use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "cutquad", about = "Cut-cell quadrature benchmark harness")]
pub struct Cli {
    /// TOML file with default flag values; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Load test cases from the *.json files in DIR instead of the built-in catalog.
    #[arg(long, global = true, value_name = "DIR")]
    pub catalog_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print integrator descriptors and test cases.
    List(ListArgs),
    /// Run the benchmark matrix and write artifacts.
    Run(RunArgs),
    /// Run a mesh-refinement study and report convergence orders.
    Convergence(RunArgs),
    /// Move a test case through a fixed mesh and record the error per step.
    Shift(ShiftArgs),
    /// Compare measurement CSVs against a baseline.
    Compare(CompareArgs),
    /// Record a baseline from measurement CSVs or from a fresh run.
    Baseline(BaselineArgs),
    /// Build the HTML summary and plots from measurement CSVs.
    Report(ReportArgs),
    /// Write a GitLab CI pipeline and a starter baseline.
    CiInit(CiInitArgs),
}

#[derive(Debug, Args)]
pub struct ListArgs {
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Default, Clone)]
pub struct SuiteArgs {
    /// Comma-separated integrator names (default: all).
    #[arg(long, value_delimiter = ',')]
    pub integrator: Vec<String>,

    /// Comma-separated test-case ids (default: all).
    #[arg(long, value_delimiter = ',')]
    pub testcase: Vec<String>,

    /// Comma-separated operations (default: all six).
    #[arg(long, value_delimiter = ',')]
    pub operation: Vec<String>,

    /// Comma-separated, strictly increasing mesh divisions per axis.
    #[arg(long, value_delimiter = ',')]
    pub mesh: Vec<usize>,

    /// Gauss points per direction [default: 5].
    #[arg(long)]
    pub order: Option<usize>,

    /// quick, extensive or all [default: all].
    #[arg(long)]
    pub tier: Option<String>,

    /// Integrator parameter as integrator.key=value (repeatable), e.g. quadtree.depth=4.
    #[arg(long = "param", value_name = "NAME.KEY=VALUE")]
    pub params: Vec<String>,

    /// Seed for the Monte-Carlo integrator.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Serialize calls and record median-of-3 runtimes.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args, Clone)]
pub struct OutArgs {
    /// Output directory (default: artifacts).
    #[arg(long, env = "CUTQUAD_OUTPUT_DIR", value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub suite: SuiteArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Gate the run against this baseline (exit 1 on tolerance failures).
    #[arg(long, value_name = "FILE")]
    pub baseline: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShiftArgs {
    /// Comma-separated integrator names (default: all).
    #[arg(long, value_delimiter = ',')]
    pub integrator: Vec<String>,
    #[arg(long, default_value = "circle")]
    pub testcase: String,
    #[arg(long, default_value = "area2d")]
    pub operation: String,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Mesh divisions per axis.
    #[arg(long, default_value_t = 8)]
    pub mesh: usize,
    /// Start position of the test-case center (comma-separated) [default: 0.25,0.5].
    #[arg(long, value_delimiter = ',')]
    pub from: Vec<f64>,
    /// End position of the test-case center [default: 0.75,0.5].
    #[arg(long, value_delimiter = ',')]
    pub to: Vec<f64>,
    /// Gauss points per direction [default: 5].
    #[arg(long)]
    pub order: Option<usize>,
    /// Integrator parameter as integrator.key=value (repeatable).
    #[arg(long = "param", value_name = "NAME.KEY=VALUE")]
    pub params: Vec<String>,
    /// Seed for the Monte-Carlo integrator.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Serialize calls and record median-of-3 runtimes.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Baseline to judge the CSVs against.
    #[arg(long, value_name = "FILE")]
    pub baseline: PathBuf,
    /// Also write summary/comparison.json into this directory.
    #[command(flatten)]
    pub out: OutArgs,
    /// Measurement CSV files.
    #[arg(required = true, value_name = "CSV")]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub suite: SuiteArgs,
    /// Where to write the baseline.
    #[arg(long, default_value = "baseline.json", value_name = "FILE")]
    pub output: PathBuf,
    /// Absolute slack.
    #[arg(long, default_value_t = 1e-12)]
    pub absolute: f64,
    /// Multiplicative slack.
    #[arg(long, default_value_t = 0.25)]
    pub multiplicative: f64,
    /// Record from these CSVs instead of running the suite.
    #[arg(value_name = "CSV")]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub out: OutArgs,
    /// Show pass/fail badges against this baseline.
    #[arg(long, value_name = "FILE")]
    pub baseline: Option<PathBuf>,
    #[arg(required = true, value_name = "CSV")]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CiInitArgs {
    #[command(flatten)]
    pub suite: SuiteArgs,
    /// Directory receiving .gitlab-ci.yml and ci/baseline.json.
    #[arg(long, default_value = ".", value_name = "DIR")]
    pub dir: PathBuf,
    /// Runner tag for an integrator's jobs, as integrator=tag (repeatable).
    #[arg(long = "tag", value_name = "INTEGRATOR=TAG")]
    pub tags: Vec<String>,
    /// Runner tag for the build and report jobs.
    #[arg(long)]
    pub default_tag: Option<String>,
    /// How long GitLab keeps job artifacts.
    #[arg(long, default_value = "2 days")]
    pub retention: String,
    /// Overwrite existing files.
    #[arg(long)]
    pub force: bool,
}
