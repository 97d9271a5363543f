use thiserror::Error;

use crate::syntax::SyntaxError;
use crate::type_system::TypeError;

/// Engine errors, as opposed to ordinary relational failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("unknown relation `{0}/{1}`")]
    UnknownRelation(String, usize),
    #[error("checkpoint is no longer live")]
    StaleCheckpoint,
    #[error("{0}")]
    Mode(String),
    #[error("character `{0}` is not in the surface alphabet")]
    Alphabet(char),
}

/// Outcome of a constraint-solving step that did not succeed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Fail {
    /// Ordinary failure: type clash, value clash or violated constraint.
    #[error("unification failure")]
    Clash,
    #[error(transparent)]
    Error(#[from] EngineError),
}

impl Fail {
    pub fn is_clash(&self) -> bool {
        matches!(self, Fail::Clash)
    }
}

impl From<TypeError> for Fail {
    fn from(e: TypeError) -> Self {
        Fail::Error(EngineError::Type(e))
    }
}

/// Problems found while loading grammar, rule or lexicon files.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("{file}: {source}")]
    Syntax {
        file: String,
        #[source]
        source: SyntaxError,
    },
    #[error("{file}: line {line}: {message}")]
    Invalid {
        file: String,
        line: usize,
        message: String,
    },
}

impl LoadError {
    pub fn invalid(file: &str, line: usize, message: impl Into<String>) -> Self {
        LoadError::Invalid {
            file: file.to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn syntax(file: &str, source: SyntaxError) -> Self {
        LoadError::Syntax {
            file: file.to_string(),
            source,
        }
    }
}
