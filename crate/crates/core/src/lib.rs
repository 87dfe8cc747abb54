//! Contextual reasoning over hierarchical knowledge units.
//!
//! A query descends an [`Ontology`](model::Ontology) from its root. How deep
//! it may go and how many censors it checks at each level are set by the
//! user's [`ContextInfo`](context::ContextInfo); premise confidences and
//! censor verdicts come from an [`Oracle`](engine::Oracle), either a live
//! user or a scripted [`Scenario`](corpus::Scenario).

pub mod context;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod model;

pub use context::{ContextInfo, PriorityClass};
pub use engine::{
    run_dba, Answer, DiagnosisResult, Oracle, Question, Session, Status, Step, Verdict,
};
pub use error::{Error, Result};
pub use model::{load_ontology, save_ontology, validate_ontology, KnowledgeUnit, Ontology};
