use alloc::string::String;

use crate::C64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("|φ(z)| is below 1e-14 at z = {at}")]
    ZeroValue { at: C64 },

    #[error("dilation kernel z^λ needs Re z > 0, got z = {at}")]
    DomainError { at: C64 },

    #[error("bases {first} and {second} are within merge tolerance but not equal")]
    BaseCollision { first: C64, second: C64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("φ is a multiple of an exponential function (|h''| < 1e-10 everywhere sampled)")]
    ExponentialLike,

    #[error("no strictly convex segment found (step shrank below 1e-9)")]
    NoSegment,

    #[error("search exhausted: {0}")]
    NotFound(String),

    #[error("|P| does not cross 1 on the unit disk grid, so P(B) is not hypercyclic")]
    NoCrossing,

    #[error("multi-index set rejected: {0}")]
    Infeasible(String),

    #[error("precondition must be asserted by the caller: {0}")]
    PreconditionNotAsserted(String),

    #[error("ω estimate did not converge: relative change {relative_change:e} exceeds 1e-2")]
    OmegaUnconverged { relative_change: f64 },

    #[error("vector kind does not match the open set's metric")]
    KindMismatch,

    #[error("the neighbourhood W must be centred at 0")]
    WNotCenteredAtZero,

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
