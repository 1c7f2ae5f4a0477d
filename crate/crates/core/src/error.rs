use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("state matrix is singular (smallest/largest singular value ratio {ratio:e})")]
    SingularStateMatrix { ratio: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("admissible set exceeds the exhaustive cap of {cap} signals")]
    ExhaustiveCapExceeded { cap: usize },

    #[error("random system generation gave up after {attempts} rejected draws")]
    GenerationExhausted { attempts: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
