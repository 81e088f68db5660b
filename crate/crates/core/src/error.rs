use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A malformed line in one of the line-oriented input formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Line(#[from] LineError),

    #[error("expected a noun phrase, got a {0} chunk")]
    NotNounPhrase(&'static str),

    #[error("invalid type name `{0}` (expected WDN_ or NEL_ followed by [a-z0-9_]+)")]
    BadTypeName(String),

    #[error("invalid event config: {0}")]
    EventConfig(String),

    #[error("no trigger verbs configured for any event type")]
    NoTriggerVerbs,

    #[error("template {0} is accepted but has no role labels")]
    MissingRoles(String),

    #[error("unknown template id `{0}`")]
    UnknownTemplate(String),

    #[error("invalid role labels: {0}")]
    BadRoles(String),

    #[error("template {template} belongs to iteration {actual}, not {requested}")]
    WrongIteration { template: String, actual: u32, requested: u32 },

    #[error("no accepted templates; curate candidates before bootstrapping")]
    NoAcceptedTemplates,

    #[error("project format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("project integrity violation: {0}")]
    Integrity(String),

    #[error("project file is malformed: {0}")]
    Format(#[from] serde_json::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Whether the error comes from the state of the project rather than
    /// from malformed or missing inputs.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NoAcceptedTemplates
                | Error::MissingRoles(_)
                | Error::UnknownTemplate(_)
                | Error::BadRoles(_)
                | Error::WrongIteration { .. }
                | Error::NoTriggerVerbs
        )
    }
}
