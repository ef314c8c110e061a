use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid level: {0}")]
    InvalidLevel(String),
    #[error("level {level} exceeds the enumeration ceiling {ceiling}")]
    LevelTooLarge { level: u64, ceiling: u64 },
    #[error("{value} is not coprime to the level {level}")]
    NotCoprime { value: u64, level: u64 },
    #[error("invalid field size q = {0}")]
    InvalidField(u64),
    #[error("q = {q} exceeds the enumeration ceiling {ceiling}")]
    FieldTooLarge { q: u64, ceiling: u64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("bad reduction: p = {p} divides the level {level}")]
    BadReduction { p: u64, level: u64 },
    #[error("Weil bound violated for {curve} over F_{q}: {total} points, genus {genus}")]
    WeilBound { curve: String, q: u64, total: u64, genus: u64 },
    #[error("malformed curve syntax: {0}")]
    CurveSyntax(String),
    #[error("malformed facts file: {0}")]
    Facts(String),
    #[error("contradiction: {0}")]
    Contradiction(String),
    #[error("unverified modular unit: {0}")]
    UnverifiedUnit(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
