//! Text forms of results and trace events shared by every transport.

use cr_core::engine::{DiagnosisResult, Status, TraceEvent};

/// Up to ten fractional digits, trailing zeros dropped: `0.8544`, `1`,
/// `0.8290234656`.
pub fn confidence(value: f64) -> String {
    let text = format!("{value:.10}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    text.to_string()
}

/// The one-line answer: `isOutdoor 0.803136`, `NOT isInCityR 1`, or
/// `INDETERMINATE`.
pub fn answer_line(result: &DiagnosisResult) -> String {
    match (&result.status, &result.answer) {
        (Status::Indeterminate, _) | (_, None) => "INDETERMINATE".to_string(),
        (Status::NegatedRoot, Some(root)) => {
            format!("NOT {root} {}", confidence(result.confidence))
        }
        (Status::Identified, Some(concept)) => {
            format!("{concept} {}", confidence(result.confidence))
        }
    }
}

pub fn trace_line(event: &TraceEvent) -> String {
    match event {
        TraceEvent::Depth {
            depth,
            total_levels,
        } => format!("depth N={depth} of {total_levels} levels"),
        TraceEvent::Visit { concept, level } => format!("visit {concept} at level {level}"),
        TraceEvent::Premise {
            concept,
            premise,
            probability,
        } => format!("  premise {premise} of {concept} = {probability}"),
        TraceEvent::PremiseGate {
            concept,
            passed,
            min_premise,
        } => format!(
            "  {concept} {} (min premise {min_premise})",
            if *passed { "passes" } else { "rejected" }
        ),
        TraceEvent::Budget {
            concept,
            level,
            budget,
            available,
        } => {
            format!("  budget X={budget} of {available} exceptions for {concept} at level {level}")
        }
        TraceEvent::Exception {
            concept,
            exception,
            verdict,
        } => format!("  exception {exception} of {concept} is {verdict}"),
        TraceEvent::Censored { concept, exception } => {
            format!("  {concept} censored by {exception}")
        }
        TraceEvent::Omega {
            concept,
            delta,
            omega,
            accepted,
        } => format!(
            "  {concept} delta {} omega {} {}",
            confidence(*delta),
            confidence(*omega),
            if *accepted {
                "accepted"
            } else {
                "below threshold"
            }
        ),
    }
}
