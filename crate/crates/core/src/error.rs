use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("letter id {id} is out of range (alphabet has {size} letters)")]
    InvalidLetter { id: usize, size: usize },

    #[error("unknown letter name `{0}`")]
    UnknownLetter(String),

    #[error("state {state} is out of range 1..={n}")]
    StateOutOfRange { state: usize, n: usize },

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("automaton is not synchronizing")]
    NotSynchronizing,

    #[error("automaton is not strongly connected")]
    NotStronglyConnected,

    #[error("the permutation group generated by the chosen letters is not transitive")]
    NotTransitive,

    #[error("letter `{0}` is not a permutation")]
    NotAPermutation(String),

    #[error("every letter is a permutation; no deficient letters")]
    NoDeficientLetters,

    #[error("no letter of defect 1")]
    NoDefectOneLetters,

    #[error("word has defect {0}, expected 1")]
    WrongDefect(usize),

    #[error("letter `{letter}` has defect {defect}; only defects 0 and 1 are supported here")]
    UnsupportedAlphabet { letter: String, defect: usize },

    #[error("resource cap exceeded: {what} (limit {limit})")]
    ResourceCap { what: String, limit: usize },

    #[error("group has more than {cap} elements (enumerated {partial} before stopping)")]
    CapExceeded { cap: usize, partial: usize },

    #[error("random generation failed after {attempts} attempts: {reason}")]
    RetryExhausted { attempts: usize, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal contradiction: {0}")]
    InternalContradiction(String),
}
