//! Small dense block-diagonal semidefinite programs.

mod check;
mod problem;
mod solver;

pub use check::{check_certificate, check_solution, Certificate, CheckReport};
pub use problem::{lp_as_sdp, Constraint, SdpBuilder, SdpProblem, Triplet};
pub use solver::{solve, IterationLog, SdpSolution, SdpStatus, SolverSettings};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite data in {0}")]
    NonFinite(String),
    #[error("infeasible data: {0}")]
    InfeasibleData(String),
    #[error("invalid solver settings: {0}")]
    Settings(String),
    #[error("cannot parse problem: {0}")]
    Parse(String),
}
