use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("rejection sampler exhausted after {attempts} attempts")]
    RejectionExhausted { attempts: u64 },

    #[error("fixed-width path count overflowed at n={n}, d={d}")]
    Overflow { n: u32, d: i64 },

    #[error("enumeration too large: {0}")]
    TooLarge(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("coupled chains did not coalesce within {cap} events")]
    CapExceeded { cap: u64 },

    #[error("coupling invariant violated at event {event}: curve {curve}, column {column}")]
    CouplingViolated { event: u64, curve: usize, column: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{context}: {source}")]
    Nested {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Nested { context: context.into(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
