//! JSON messages of the session protocol.

use cr_core::corpus::Scenario;
use cr_core::engine::{DiagnosisResult, Status, TraceEvent};
use cr_core::{Answer, ContextInfo, Question, Step, Verdict};
use serde::{Deserialize, Serialize};

use crate::render;

/// `POST /sessions` body. A scenario drives the session to completion on
/// creation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub ci: ContextInfo,
    #[serde(default)]
    pub scenario: Option<Scenario>,
}

/// `POST /sessions/{id}/answers` body: exactly one of `premise_prob` and
/// `verdict`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerBody {
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

impl AnswerBody {
    pub fn premise(seq: u64, probability: f64) -> Self {
        Self {
            seq,
            premise_prob: Some(probability),
            verdict: None,
        }
    }

    pub fn verdict(seq: u64, verdict: Verdict) -> Self {
        Self {
            seq,
            premise_prob: None,
            verdict: Some(verdict),
        }
    }

    pub fn answer(&self) -> Result<Answer, String> {
        match (self.premise_prob, self.verdict) {
            (Some(p), None) => Ok(Answer::Premise(p)),
            (None, Some(v)) => Ok(Answer::Verdict(v)),
            _ => Err("answer must carry exactly one of premise_prob and verdict".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMessage {
    pub status: Status,
    pub answer: Option<String>,
    pub negated: bool,
    pub fell_back: bool,
    pub confidence: String,
    pub path: Vec<String>,
    pub trace: Vec<TraceEvent>,
    /// Recommended follow-up actions. No catalog exists yet.
    pub actions: Vec<serde_json::Value>,
}

impl From<&DiagnosisResult> for ResultMessage {
    fn from(result: &DiagnosisResult) -> Self {
        Self {
            status: result.status,
            answer: result.answer.clone(),
            negated: result.negated,
            fell_back: result.fell_back,
            confidence: render::confidence(result.confidence),
            path: result.path.clone(),
            trace: result.trace.clone(),
            actions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Question(Question),
    Result(ResultMessage),
}

impl From<Step> for Payload {
    fn from(step: Step) -> Self {
        match step {
            Step::Ask(question) => Payload::Question(question),
            Step::Done(result) => Payload::Result(ResultMessage::from(&result)),
        }
    }
}

/// Every session response. `seq` is the value the next answer must carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub session_id: String,
    pub seq: u64,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
