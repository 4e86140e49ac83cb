use thiserror::Error;

use crate::money::Money;
use crate::schedule::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid schedule: {}", join(.0))]
    InvalidSchedule(Vec<Violation>),

    #[error("period mismatch: expected {expected} schedule, got {actual}")]
    PeriodMismatch { expected: &'static str, actual: &'static str },

    #[error("rate undefined for a zero base")]
    UndefinedRate,

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("household {household_id}: {message}")]
    Validation { household_id: u64, message: String },

    #[error("target revenue {target} unreachable (achievable range {min} to {max})")]
    Unreachable { target: Money, min: Money, max: Money },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("policy file: {0}")]
    PolicyFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
