use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("empty word")]
    EmptyWord,

    #[error("word of length {len} exceeds the maximum depth {max}")]
    WordTooLong { len: usize, max: usize },

    #[error("ring {0} is a tail aggregate; its potential is not a single value")]
    TailRing(String),

    #[error("depth {0} is below the minimum of 3")]
    DepthTooSmall(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "power iteration did not converge after {iterations} steps (last change {last_change:e})"
    )]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("beta = {beta} exceeds the power-iteration cap {cap}; use the secular solver")]
    BetaAboveCap { beta: f64, cap: f64 },

    #[error("secular equation has no sign change in bracket: G(lo) = {g_lo:e}, G(hi) = {g_hi:e}")]
    NoSignChange { g_lo: f64, g_hi: f64 },

    #[error("secular denominator is not positive at the candidate root P = {0:e}")]
    NonPositiveDenominator(f64),

    #[error("linear solve is singular at P = {pressure:e} (residual {residual:e})")]
    Singular { pressure: f64, residual: f64 },

    #[error("tail closure diverges: e^P must exceed the tail self-weight")]
    TailDivergence,

    #[error("non-positive quantity where a positive one is required: {0}")]
    NonPositive(&'static str),

    #[error("pressure underflows double precision (log P near {ln_pressure:.1})")]
    PressureUnderflow { ln_pressure: f64 },

    #[error("cannot extrapolate: {0}")]
    Extrapolation(String),
}
