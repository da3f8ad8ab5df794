mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Physics-aware generative airfoil parameterization toolkit.
#[derive(Debug, Parser)]
#[command(name = "airgen", version)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Output root; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for evaluation.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, resample and filter a directory of coordinate files.
    Preprocess {
        raw_dir: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write this many synthetic sections into RAW_DIR first.
        #[arg(long)]
        synthetic: Option<usize>,
    },
    /// Train a generator on a preprocessed dataset.
    Train {
        #[arg(short, long)]
        dataset: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sequential hyperparameter search.
    Gridsearch {
        #[arg(short, long)]
        dataset: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample sections, optionally pinning physical features.
    Generate {
        #[arg(short = 'm', long)]
        model: PathBuf,
        #[arg(short, long, default_value_t = 10)]
        n: usize,
        /// `feature=value` in physical units (m_max, gamma_te, t_max, r_le).
        #[arg(long = "fix")]
        fix: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print latent means of coordinate files as CSV.
    Encode {
        #[arg(short = 'm', long)]
        model: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Inverse-fit validation sections with the genetic algorithm.
    Fit {
        #[arg(long)]
        method: String,
        #[arg(long)]
        ndv: Option<usize>,
        #[arg(short, long)]
        dataset: PathBuf,
        #[arg(short = 'm', long)]
        model: Option<PathBuf>,
        #[arg(long)]
        targets: Option<usize>,
    },
    /// Comparison metrics and latent exports.
    Evaluate {
        #[arg(long, value_enum)]
        metric: Metric,
        #[arg(short, long)]
        dataset: PathBuf,
        #[arg(short = 'm', long)]
        model: Option<PathBuf>,
        /// Methods as `name` or `name:ndv`; defaults to every baseline plus
        /// the generator when a model is given.
        #[arg(long = "method")]
        methods: Vec<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 9)]
        steps: usize,
        /// Dataset sample used as the traversal base.
        #[arg(long, default_value_t = 0)]
        base: usize,
    },
    /// Genetic-algorithm shape optimization.
    Optimize {
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value = "ag")]
        method: String,
        #[arg(long)]
        ndv: Option<usize>,
        #[arg(short, long)]
        dataset: PathBuf,
        #[arg(short = 'm', long)]
        model: Option<PathBuf>,
    },
    /// Parallel-coordinate samples of the constrained design space.
    Export {
        #[arg(short, long)]
        dataset: PathBuf,
        #[arg(short = 'm', long)]
        model: Option<PathBuf>,
        #[arg(long = "method")]
        methods: Vec<String>,
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Feasibility,
    Cmax,
    Cdf,
    Traversal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Unconstrained,
    Constrained,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Solver(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Solver(m) => f.write_str(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}

data_error!(airgen::geom::GeomError, airgen::param::ParamError, airgen::vae::VaeError, airgen::train::TrainError);

impl From<airgen::aso::AsoError> for CliError {
    fn from(e: airgen::aso::AsoError) -> Self {
        use airgen::aso::AsoError;
        match e {
            AsoError::SolverNotFound(_) | AsoError::Timeout(_) => CliError::Solver(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("\nUsage: airgen [OPTIONS] <COMMAND>\nRun `airgen --help` for the command list.");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
