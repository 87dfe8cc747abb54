use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed ontology or scenario document.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("ontology failed validation with {} violation(s): {}", .0.len(), join_violations(.0))]
    Validation(Vec<Violation>),

    /// An oracle answer that cannot be used (out of range, missing, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Session driven out of order.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("level out of budget range: level index {level} is not below depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("invalid context: {0}")]
    Context(String),

    #[error("unknown name: {0}")]
    Lookup(String),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
