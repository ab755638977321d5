use std::fmt;

/// Process exit categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Validation = 2,
    External = 3,
}

/// A failed command, carrying the exit status it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub kind: ExitKind,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { kind: ExitKind::Usage, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Failure { kind: ExitKind::Validation, message: message.into() }
    }

    /// Provider, network or filesystem trouble.
    pub fn external(message: impl Into<String>) -> Self {
        Failure { kind: ExitKind::External, message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        self.kind as u8
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::external(e.to_string())
    }
}

impl From<lrmt_core::CorpusError> for Failure {
    fn from(e: lrmt_core::CorpusError) -> Self {
        Failure::validation(e.to_string())
    }
}
