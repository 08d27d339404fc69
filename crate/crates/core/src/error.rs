use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("imaginary k: radicand m^2 + q*eta*hbar^2*sigma^2/(2 mu) = {radicand} is negative")]
    ImaginaryK { radicand: f64 },

    #[error("hypergeometric series does not terminate (no non-positive integer upper parameter)")]
    NonTerminating,

    #[error("lower hypergeometric parameter {parameter} makes a Pochhammer symbol vanish at term {term}")]
    VanishingDenominator { parameter: f64, term: usize },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("recurrence coefficient of the unknown vanishes at s = {s}")]
    ZeroCoefficient { s: i32 },

    #[error("missing recurrence parent: {0}")]
    MissingParent(String),

    #[error("first-order correction invalid: {0}")]
    FirstOrderInvalid(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("overflow while assembling {0} in log space")]
    Overflow(String),

    #[error("config error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
