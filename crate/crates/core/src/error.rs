//! Error types shared across the crate.

use std::fmt;

use thiserror::Error;

use crate::quadrature::QuadError;

/// One violated configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every invariant a configuration violates, collected in one pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl ConfigErrors {
    pub fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(ConfigIssue {
            field: field.into(),
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn issues(&self) -> &[ConfigIssue] {
        &self.0
    }

    /// True when some issue concerns `field`.
    pub fn mentions(&self, field: &str) -> bool {
        self.0.iter().any(|i| i.field == field)
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigErrors),

    #[error("numerical integration failed ({context}): {source}")]
    Quadrature {
        context: String,
        #[source]
        source: QuadError,
    },

    #[error("conditional on tier {tier} state {state} is undefined: association probability is zero")]
    UndefinedConditional { tier: String, state: String },

    #[error("alternating sum lost precision ({context}); try a smaller gamma order")]
    Cancellation { context: String },

    #[error("no interior optimum of rho: the {regime} regime holds on the whole range")]
    NoInteriorOptimum { regime: String },

    #[error("{0}")]
    Domain(String),

    #[error("failed to parse configuration: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attach context to a quadrature failure.
pub(crate) trait QuadContext<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> QuadContext<T> for std::result::Result<T, QuadError> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| Error::Quadrature {
            context: what(),
            source,
        })
    }
}
