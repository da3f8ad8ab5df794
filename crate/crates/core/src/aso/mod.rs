//! Airfoil shape optimization: the genetic algorithm, constraint handling,
//! solver coupling and repeated-trial statistics.

mod ga;
mod problem;
mod xfoil;

use std::time::Duration;

use thiserror::Error;

pub use ga::{ga_maximize, ga_maximize_observed, ga_maximize_seeded, GaConfig, Generation, RunHistory, DEATH_PENALTY, MAX_FAILED_GENERATIONS};
pub use problem::{
    band, ga_optimize, ga_optimize_observed, impose_constraints, objective, parallel_coordinates_export,
    repeated_trials, trial_seed, write_history_csv, write_parallel_csv, ConstrainedDomain, ConstraintFlags,
    ConstraintSet, LeRadiusDirection, OptimizationProblem, OptimizationRun, ParallelSample, RejectionCounts,
    RejectionLog, TrialStatistics,
};
pub use xfoil::{parse_polar, AeroEvaluator, ThinAirfoilSurrogate, Xfoil, XfoilCase, XfoilResult, SOLVER_ENV};

use crate::param::ParamError;

#[derive(Debug, Error)]
pub enum AsoError {
    #[error("invalid optimization setup: {0}")]
    InvalidConfig(String),
    #[error("every evaluation failed for {generations} consecutive generations")]
    EvaluatorFailure { generations: usize },
    #[error("constraint cannot be met inside the search box: {0}")]
    InfeasibleBox(String),
    #[error("flow solver not found ({0})")]
    SolverNotFound(String),
    #[error("flow solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("section rejected before analysis: {0}")]
    InfeasibleInput(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
