use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A column of the previous iterate violates the size constraint `S(F_l) >= m`.
    #[error("infeasible iterate: column {column} has S = {value} < m = {min}")]
    InfeasibleIterate { column: usize, value: f64, min: f64 },

    #[error("numeric failure at iteration {iteration}: {what}")]
    NumericFailure { iteration: usize, what: String },

    #[error("all {0} initializations were degenerate; no valid partition found")]
    AllDegenerate(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
