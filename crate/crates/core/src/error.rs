use thiserror::Error;

/// Errors raised by the analytic core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("g'' is discontinuous at the threshold a = {a}; pass an explicit side")]
    Discontinuity { a: f64 },

    #[error("argument ordering violated: {0}")]
    Ordering(String),

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi}) while {context}")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        context: String,
    },

    #[error("root finder did not converge after {iterations} iterations while {context}")]
    NoConvergence { iterations: usize, context: String },

    #[error("quadrature on [{lo}, {hi}] stopped at estimated error {estimate:e}")]
    Quadrature { lo: f64, hi: f64, estimate: f64 },

    #[error("{what} = {x} lies outside its domain {domain}")]
    Domain {
        what: &'static str,
        x: f64,
        domain: String,
    },

    #[error("{message} [trace: {trace}]")]
    Solver { message: String, trace: String },

    #[error("empty feasible grid: {0}")]
    EmptyGrid(String),

    #[error("invalid simulation config: {0}")]
    SimConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
