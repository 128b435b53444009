use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unstable coding: {reason} (verified through length {verified_len})")]
    UnstableCoding { reason: String, verified_len: usize },

    #[error("empty spectrum: component {0} has no cycle")]
    EmptySpectrum(usize),

    #[error("pressure has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("pressure derivative at root is not negative: {0}")]
    NonDecreasingPressure(f64),

    #[error("pruning audit failed: {0}")]
    PruningAudit(String),

    #[error("duplicate conjugate from distinct accepted paths: {0}")]
    DuplicateConjugate(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code, printed by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Config(_) => "invalid-config",
            Error::UnstableCoding { .. } => "unstable-coding",
            Error::EmptySpectrum(_) => "empty-spectrum",
            Error::NoSignChange { .. } => "no-sign-change",
            Error::NonDecreasingPressure(_) => "non-decreasing-pressure",
            Error::PruningAudit(_) => "pruning-audit",
            Error::DuplicateConjugate(_) => "duplicate-conjugate",
            Error::Budget(_) => "budget-exceeded",
            Error::DegenerateWindow(_) => "degenerate-window",
            Error::Check(_) => "check-failed",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}
