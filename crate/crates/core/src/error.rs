use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("x = {x} lies outside [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("digit {digit} is outside the digit range [{min}, {max}]")]
    InvalidDigit { digit: u64, min: u64, max: u64 },

    #[error("alpha = {alpha} is outside the plateau [{lo}, {hi}]")]
    Classification { alpha: f64, lo: f64, hi: f64 },

    #[error("branch {digit} has no pre-image at y = {y}")]
    InvalidBranch { digit: u64, y: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point ({x}, {y}) is outside the domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("attractor iteration did not stabilize after {rounds} rounds")]
    NonConvergence { rounds: usize },

    #[error("interval union fragmented into more than {limit} parts")]
    TooManyParts { limit: usize },

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
