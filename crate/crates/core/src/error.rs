use thiserror::Error;

use crate::data::Violation;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// The data cannot support the requested computation (too few trials,
    /// zero variance where a scale estimate is required, and so on).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A nonempty collection was required.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A histogram class has no mass.
    #[error("empty histogram: {0}")]
    EmptyHistogram(String),

    /// Malformed input file; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A dataset failed validation at an ingestion boundary.
    #[error("dataset invariants violated: {}", format_violations(.0))]
    InvariantViolations(Vec<Violation>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    let shown: Vec<String> = violations.iter().take(5).map(|v| v.to_string()).collect();
    let mut s = shown.join("; ");
    if violations.len() > 5 {
        s.push_str(&format!(" (and {} more)", violations.len() - 5));
    }
    s
}

pub type Result<T> = std::result::Result<T, Error>;
