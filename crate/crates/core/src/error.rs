use thiserror::Error;

/// Everything that can go wrong inside the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("position {position} is outside 1..={b}")]
    InvalidPosition { position: usize, b: usize },

    #[error("sample ({sampled}, {seen}) is inconsistent with position {position}: {reason}")]
    InconsistentSample {
        position: usize,
        sampled: usize,
        seen: usize,
        reason: String,
    },

    #[error("{what} = {value} is out of range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("{op} requires equal group sizes; use the asymmetric variant")]
    AsymmetricNotSupported { op: &'static str },

    #[error("{op} requires {requirement}")]
    Precondition {
        op: &'static str,
        requirement: &'static str,
    },

    #[error("enumeration over {players} players exceeds the cap of {cap}")]
    EnumerationCap { players: usize, cap: usize },

    #[error("bound is vacuous: denominator {denominator} is not positive")]
    VacuousBound { denominator: f64 },

    #[error("no interior critical pair: max S = {max_s} does not exceed 1")]
    NoCriticalPair { max_s: f64 },

    #[error("information set {0} is unreachable at first order in the tremble")]
    UnreachableInfoSet(String),

    #[error("no return in [0, N] makes the profile an equilibrium")]
    NoPureRegion,
}

pub type Result<T> = std::result::Result<T, GameError>;
