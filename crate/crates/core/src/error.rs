use thiserror::Error;

use crate::parser::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("duplicate reaction: {0}")]
    DuplicateReaction(String),

    #[error("rate must be positive (reaction {index})")]
    NonPositiveRate { index: usize },

    #[error("rate vector has length {got}, network has {expected} reactions")]
    RateLength { expected: usize, got: usize },

    #[error("species mismatch: {0}")]
    SpeciesMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("state must be strictly positive, got {value} at coordinate {index}")]
    NonPositiveState { index: usize, value: f64 },

    #[error("matrix is not positive semi-definite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("networks have identical reaction sets")]
    IdenticalNetworks,

    #[error("invalid simulation settings: {0}")]
    Simulation(String),

    #[error("internal check failed: {0}")]
    Internal(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T> = std::result::Result<T, Error>;
