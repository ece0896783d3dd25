use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseWordError {
    #[error("unexpected character {ch:?} at byte {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("malformed exponent after '^' at byte {pos}")]
    BadExponent { pos: usize },
    #[error("exponent too large at byte {pos}")]
    ExponentTooLarge { pos: usize },
    #[error("word too long")]
    TooLong,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum F2Error {
    #[error("{0} is not primitive")]
    NotPrimitive(String),
    #[error("{0} is undefined")]
    Undefined(String),
    #[error("{0} and {1} do not form an edge")]
    NotAnEdge(String, String),
    #[error("level {level} exceeds the configured cap {cap}")]
    LevelCapExceeded { level: u32, cap: u32 },
    #[error("{0} and {1} are not conjugate")]
    NotConjugate(String, String),
    #[error("{0} and {1} are not 1-conjugate")]
    NotACEdge(String, String),
    #[error("{0} and {1} are not at conjugacy distance 2")]
    NotDistanceTwo(String, String),
    #[error("not a conjugacy path: {0}")]
    NotACPath(String),
    #[error("the class of b has no tile length")]
    ClassIsBaseB,
    #[error("classes {0} and {1} are not adjacent")]
    NotAdjacent(String, String),
    #[error("not a substructure: {0}")]
    NotASubstructure(String),
    #[error("not a strong embedding: {0}")]
    NotStrong(String),
    #[error("path not in structure: {0}")]
    PathNotInStructure(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error(transparent)]
    Parse(#[from] ParseWordError),
}

pub type Result<T> = std::result::Result<T, F2Error>;
