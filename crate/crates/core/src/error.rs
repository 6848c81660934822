use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A search space failed validation; the message lists the violations.
    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    /// A genotype or space document could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A configuration value is missing, unknown, or out of range.
    #[error("config error: {0}")]
    Config(String),

    /// A loss, gradient, or metric left the finite range.
    #[error("non-finite {quantity}{context}")]
    NonFinite { quantity: String, context: String },

    /// Scheduler bookkeeping violation (unknown id, wrong rung, double report).
    #[error("scheduler error: {0}")]
    Scheduler(String),

    /// Enumeration refused because the space is too large.
    #[error("space has {count} architectures, above the limit of {limit}")]
    TooManyArchitectures { count: String, limit: u64 },

    /// Reproduction re-run could not be performed.
    #[error("reproduction error: {0}")]
    Repro(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn non_finite(quantity: &str, context: impl Into<String>) -> Self {
        let context = context.into();
        let context = if context.is_empty() {
            context
        } else {
            format!(" ({context})")
        };
        Error::NonFinite {
            quantity: quantity.to_string(),
            context,
        }
    }
}
