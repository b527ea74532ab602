use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("value-space mismatch: {0}")]
    Type(String),
    #[error("pairing expects {expected} g-slots, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("unsupported group element: {0}")]
    Capability(String),
    #[error("patch mismatch: {0}")]
    Patch(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("fixture format: {0}")]
    Fixture(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
