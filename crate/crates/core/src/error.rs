use alloc::string::String;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("t = {t} lies outside the domain [{a}, {b}]")]
    Domain { t: f64, a: f64, b: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid construction parameters: {0}")]
    Construction(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("infeasible boundary data: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;
