use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod input;

#[derive(Parser, Debug)]
#[command(
    name = "phaseflow",
    version,
    about = "Phase-field flows on weighted graphs"
)]
struct Cli {
    /// Worker threads for experiment fan-out (defaults to all cores).
    #[arg(long, global = true, env = "PHASEFLOW_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scheme from an initial state and write the trajectory.
    Evolve(EvolveArgs),
    /// Run a verification experiment and write its table as CSV.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentKind,
    },
    /// Write a generated graph as an edge list.
    Graph(GraphCmdArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Path,
    Cycle,
    Complete,
    Star,
    TwoCluster,
    Random,
}

/// Where the graph comes from.
#[derive(Args, Debug, Clone)]
pub struct GraphSource {
    /// Edge-list file with `i j w` lines.
    #[arg(long, conflicts_with = "generator")]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorKind>,
    /// Number of vertices for generated graphs.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Edge weight for generated graphs (intra-cluster weight for two-cluster).
    #[arg(long, default_value_t = 1.0)]
    pub weight: f64,
    /// Weight between the two clusters.
    #[arg(long, default_value_t = 0.05)]
    pub inter: f64,
    /// Extra-edge probability for random graphs.
    #[arg(long = "edge-prob", default_value_t = 0.3)]
    pub edge_prob: f64,
    /// Degree exponent in the vertex inner product.
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Semidiscrete,
    Mbo,
    AcReference,
    Regularized,
    TimeSplitting,
    Elmo,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_enum)]
    pub scheme: Scheme,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Step size of the discrete schemes.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Set the semi-discrete scheme by `λ = τ/ε` instead of by `ε`.
    #[arg(long, conflicts_with = "eps")]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Final time of the continuous-time flows.
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Reference step of the Allen-Cahn flow (default ε/1024).
    #[arg(long)]
    pub tau_ref: Option<f64>,
    /// Spacing of the stored samples of continuous-time flows (default: every step).
    #[arg(long)]
    pub sample_dt: Option<f64>,
    /// Penalization width of the regularized flow.
    #[arg(long, default_value_t = 0.01)]
    pub nu: f64,
    /// Time step of the regularized and curvature flows.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Exponent of the gradient norms in the curvature flow (`inf` allowed).
    #[arg(long = "p-norm", default_value_t = 2.0)]
    pub p_norm: f64,
    /// Initial state: `random`, `const:c`, `indicator:i,j,...` or `values:x0,x1,...`.
    #[arg(long, default_value = "random")]
    pub u0: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ExperimentKind {
    /// Errors of the scheme against a fine reference for several step sizes.
    Convergence {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        taus: Vec<f64>,
        #[arg(long)]
        tau_ref: Option<f64>,
        #[arg(long, default_value = "random")]
        u0: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid minimizers of the Ginzburg-Landau energy as ε decreases.
    Gamma {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, value_delimiter = ',', required = true)]
        eps_list: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Comparison with forced subsolutions over seeded samples.
    Cp1(ComparisonArgs),
    /// Comparison of ordered pairs of solutions over seeded samples.
    Cp2(ComparisonArgs),
    /// Pinning thresholds for every nonempty proper subset.
    PinningMap {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// How often the smoothed set minimization reproduces the MBO step.
    McfAgreement {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, value_delimiter = ',', required = true)]
        taus: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Members of the initial set.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        set: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ComparisonArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long)]
    pub tau_ref: Option<f64>,
    /// Number of seeded samples.
    #[arg(long, default_value_t = 100)]
    pub count: u64,
    /// First seed; samples use `seed..seed + count`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GraphCmdArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Seed for random graphs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Evolve(args) => commands::evolve(&args),
        Command::Experiment { kind } => commands::experiment(&kind),
        Command::Graph(args) => commands::graph(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
