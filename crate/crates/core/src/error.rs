use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (bad player,
    /// bad action index, unknown example name, ...).
    #[error("invalid input: {0}")]
    Domain(String),

    /// A game file or payoff literal could not be parsed.
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    /// A configured size cap would be exceeded.
    #[error("resource limit exceeded: {what} is {requested}, limit {limit}")]
    Resource {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    /// The linear solve for absorption probabilities did not meet its residual bound.
    #[error("numerical failure: residual {residual:e} exceeds {bound:e}")]
    Numerical { residual: f64, bound: f64 },

    /// A proved implication failed on some game. Always a bug.
    #[error("internal consistency failure: {message}")]
    InternalConsistency {
        message: String,
        /// The offending game in the JSON game file format.
        game: Option<String>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn resource(what: &'static str, requested: u128, limit: u128) -> Self {
        Error::Resource {
            what,
            requested,
            limit,
        }
    }
}
