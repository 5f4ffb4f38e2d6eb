use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node count {0} is too small (need n >= 16)")]
    TooFewNodes(u64),
    #[error("epsilon {0} outside (0, 1/4)")]
    EpsilonOutOfRange(f64),
    #[error("fraction p = {0} outside [1/2, 1]")]
    FractionOutOfRange(f64),
    #[error("override `{name}` must be positive and finite, got {value}")]
    BadOverride { name: &'static str, value: f64 },
    #[error("derived constant `{name}` = {value} is degenerate ({reason})")]
    DegenerateConstant {
        name: &'static str,
        value: u64,
        reason: &'static str,
    },
    #[error("majority of an empty bit multiset is undefined")]
    EmptyBits,
    #[error("protocol produced state {state} outside its declared universe ({context})")]
    StateEscaped { state: String, context: &'static str },
    #[error("state universe of {size} states exceeds the analyzer limit of {limit}")]
    UniverseTooLarge { size: u64, limit: u64 },
    #[error("analyzer did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("requested time {requested} lies beyond the recorded trace (ends at {end})")]
    TimeBeyondTrace { requested: f64, end: f64 },
    #[error("no snapshot recorded for time {0}")]
    MissingSnapshot(f64),
    #[error("invalid table protocol: {0}")]
    InvalidTable(String),
}
