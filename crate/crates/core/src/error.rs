use thiserror::Error;

/// A syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at position {pos}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("unknown world or point `{0}`")]
    UnknownWorld(String),
    #[error("no valuation entry for letter `{0}`")]
    MissingValuation(String),
    #[error("modality index {0} is not supported here")]
    UnsupportedModality(usize),
    #[error("validity check needs {needed} evaluations, budget is {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },
    #[error("frame is not rooted: {0}")]
    NotRooted(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid path with stops: {0}")]
    InvalidStopWord(String),
    #[error("Horn theory is outside the chain class: {0}")]
    NotChainTheory(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("domain alphabet too small: need {needed} letters at {at}, have {have}")]
    AlphabetTooSmall { needed: usize, have: usize, at: String },
    #[error("frame is not a tree: {0}")]
    NotTree(String),
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("formula is not closed: free variable `{0}`")]
    NotClosed(String),
    #[error("{0}")]
    Substitution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
