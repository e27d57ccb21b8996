use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("quadrature did not converge on [{lo}, {hi}] within depth {depth}")]
    Quadrature { lo: f64, hi: f64, depth: u32 },

    #[error("parameter layout mismatch: {0}")]
    Layout(String),

    #[error("invalid dataset: {0}")]
    Data(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient draws: need at least {need}, got {got}")]
    InsufficientDraws { need: usize, got: usize },

    #[error("sampler initialisation failed: {0}")]
    Initialisation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(what: &'static str, value: f64) -> Result<T> {
    Err(Error::Domain { what, value })
}
