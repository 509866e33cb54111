use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("exponent at position {position} is not a polynomial")]
    NonPolynomialExponent { position: usize },

    #[error("function is identically zero")]
    ZeroFunction,

    #[error("polynomial must be non-constant")]
    ConstantPolynomial,

    #[error("expected a polynomial: {0}")]
    NotPolynomial(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ray at angle {theta} is critical")]
    CriticalRay { theta: f64 },

    #[error("problem instance has no d·e^P decomposition")]
    MissingDecomposition,

    #[error("decomposition does not reproduce A")]
    DecompositionMismatch,

    #[error("candidate grid is empty")]
    EmptyGrid,

    #[error("series truncation insufficient: {0}")]
    TruncationInsufficient(String),

    #[error("numerically unreliable: {0}")]
    Unreliable(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
