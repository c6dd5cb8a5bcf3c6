use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("edge index {0} out of range")]
    InvalidEdge(usize),
    #[error("state index {0} out of range")]
    InvalidState(usize),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("a path must contain at least one edge")]
    EmptyPath,
    #[error("word of length {len} is shorter than the window length {window}")]
    WordTooShort { len: usize, window: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("automaton is not ({m},{a})-local")]
    NotLocal { m: usize, a: usize },
    #[error("illegal amalgamation: {0}")]
    IllegalAmalgamation(String),
    #[error("block map: {0}")]
    BlockMap(String),
    #[error("not an isomorphism: {0}")]
    NotIsomorphic(String),
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid automaton: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
