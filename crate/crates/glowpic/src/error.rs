//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("particle capacity exhausted (capacity {capacity})")]
    CapacityExhausted { capacity: usize },

    #[error("summed collision probability {total:.6} >= 1; timestep too large")]
    ProbabilityOverflow { total: f64 },

    #[error("kinetic energy {energy_ev:.6e} eV below threshold {threshold_ev:.6e} eV")]
    BelowThreshold { energy_ev: f64, threshold_ev: f64 },

    #[error("particle collision probability {p_total:.6e} exceeds null ceiling {p_null:.6e}")]
    NullUnderflow { p_total: f64, p_null: f64 },

    #[error("write cursor for cell {cell} exceeded its segment")]
    IndexOverflow { cell: usize },

    #[error("CFL violation ({name}): ratio {ratio:.4} exceeds limit {limit}")]
    CflViolation {
        name: &'static str,
        ratio: f64,
        limit: f64,
    },

    #[error("negative density for {species} in cell {cell}: {value:.6e}")]
    NegativeDensity {
        species: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid cross-section table: {0}")]
    Validation(String),

    #[error("piecewise fit failed: {0}")]
    FitFailure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("no steady state after {steps} steps")]
    NonConvergence { steps: usize },

    #[error("grid on rank {rank} diverged from rank 0")]
    RankDivergence { rank: usize },

    #[error("reduction failed: {0}")]
    Reduction(String),

    #[error("no live particles")]
    EmptyEnsemble,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
