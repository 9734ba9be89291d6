use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A walker or query left the simulated window. The window has to be
    /// enlarged; positions are never wrapped silently.
    #[error("window too small: site {site} outside [{lo}, {hi}]")]
    WindowTooSmall { site: i64, lo: i64, hi: i64 },

    #[error("time {requested} lies beyond the schedule horizon {horizon}")]
    HorizonExceeded { requested: f64, horizon: f64 },

    #[error("time {requested} precedes the environment clock {now}")]
    TimeReversed { requested: f64, now: f64 },

    #[error("state space of {states} states exceeds the cap of {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },

    #[error("truncation target {target:e} not reached within {steps} steps")]
    TruncationUnreachable { target: f64, steps: usize },

    #[error("probability mass {leaked:e} leaked out of the walker window")]
    MassLeak { leaked: f64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
