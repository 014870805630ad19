use crate::pattern::Parity;

/// Errors produced while building, loading or running a matcher.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pattern set is empty")]
    EmptyPatternSet,

    #[error("pattern #{0} is shorter than 3 bytes")]
    PatternTooShort(usize),

    #[error("pattern #{index} is {len} bytes long; the limit is {max}")]
    PatternTooLong { index: usize, len: usize, max: usize },

    #[error("cost function requires trace statistics")]
    MissingStats,

    #[error("trace statistics were collected over zero pairs")]
    ZeroPairStats,

    #[error("motif set does not cover pattern #{pattern} at {parity} parity")]
    InfeasibleMotifSet { pattern: usize, parity: Parity },

    #[error("inconsistent plan: {0}")]
    InconsistentPlan(String),

    #[error("corrupt artifact at byte {offset}: {msg}")]
    Artifact { offset: usize, msg: String },

    #[error("pattern file line {line}: {msg}")]
    PatternFile { line: usize, msg: String },

    #[error("stats file: {0}")]
    StatsFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
