use thiserror::Error;

pub type Result<T> = std::result::Result<T, FusionError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("invalid interval [{lo}, {hi}]: lower endpoint exceeds upper or is not finite")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("value {x} lies outside [-{x_max}, {x_max}]")]
    OutOfRange { x: f64, x_max: u32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("reading [{lo}, {hi}] is not a cell of the x_max = {x_max} lattice")]
    OffLattice { lo: f64, hi: f64, x_max: u32 },

    #[error("no fault pattern is consistent with the readings (zero posterior mass)")]
    Inconsistent,

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:.3e}) at lambda = {lambda}; cross moments: {cross:?}")]
    Singular {
        condition: f64,
        lambda: f64,
        cross: Vec<Vec<f64>>,
    },

    #[error("no feasible candidate found: {0}")]
    Infeasible(String),
}
