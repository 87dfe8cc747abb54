//! The diagnostic belief descent.
//!
//! Starting at the root, concepts are visited breadth-first. The first
//! concept at a level whose premises all clear the gate wins the level and
//! its siblings are dropped. The winner's censors are then asked up to the
//! level's exception budget: a true censor voids the concept, false ones add
//! their precision. The concept's confidence is the smaller of its parent's
//! confidence and its weakest premise, times that precision. Descent stops at
//! the depth budget, on a censor, or when confidence drops below `m`; the
//! answer is always the deepest concept that was accepted.

mod session;

pub use session::{Session, Step};

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::context::ContextInfo;
use crate::error::{Error, Result};
use crate::model::{KnowledgeUnit, Ontology};

/// Truth value of a censor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    True,
    False,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::True => "TRUE",
            Verdict::False => "FALSE",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "true" | "t" | "yes" | "y" => Ok(Verdict::True),
            "false" | "f" | "no" | "n" => Ok(Verdict::False),
            "unknown" | "u" | "unk" | "?" => Ok(Verdict::Unknown),
            other => Err(Error::Input(format!("not a verdict: {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionKind {
    Premise,
    Exception,
}

/// One thing the engine needs to know from the user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub kind: QuestionKind,
    pub concept: String,
    /// Premise or exception name.
    pub name: String,
    /// 1-based level of the concept.
    pub level: usize,
}

impl Question {
    fn premise(concept: &str, name: &str, level: usize) -> Self {
        Self {
            kind: QuestionKind::Premise,
            concept: concept.to_string(),
            name: name.to_string(),
            level,
        }
    }

    fn exception(concept: &str, name: &str, level: usize) -> Self {
        Self {
            kind: QuestionKind::Exception,
            concept: concept.to_string(),
            name: name.to_string(),
            level,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Answer {
    Premise(f64),
    Verdict(Verdict),
}

/// Source of premise confidences and censor verdicts.
pub trait Oracle {
    fn premise_confidence(&mut self, question: &Question) -> Result<f64>;
    fn exception_verdict(&mut self, question: &Question) -> Result<Verdict>;
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn premise_confidence(&mut self, question: &Question) -> Result<f64> {
        (**self).premise_confidence(question)
    }

    fn exception_verdict(&mut self, question: &Question) -> Result<Verdict> {
        (**self).exception_verdict(question)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Depth {
        depth: usize,
        total_levels: usize,
    },
    Visit {
        concept: String,
        level: usize,
    },
    Premise {
        concept: String,
        premise: String,
        probability: f64,
    },
    PremiseGate {
        concept: String,
        passed: bool,
        min_premise: f64,
    },
    Budget {
        concept: String,
        level: usize,
        budget: usize,
        available: usize,
    },
    Exception {
        concept: String,
        exception: String,
        verdict: Verdict,
    },
    Censored {
        concept: String,
        exception: String,
    },
    Omega {
        concept: String,
        delta: f64,
        omega: f64,
        accepted: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Identified,
    NegatedRoot,
    Indeterminate,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Identified => "IDENTIFIED",
            Status::NegatedRoot => "NEGATED_ROOT",
            Status::Indeterminate => "INDETERMINATE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisResult {
    pub status: Status,
    /// The accepted concept, or the negated root.
    pub answer: Option<String>,
    pub negated: bool,
    /// The answer came from an ancestor after a deeper concept was censored
    /// or fell below the threshold.
    pub fell_back: bool,
    pub confidence: f64,
    /// Accepted concepts, root first.
    pub path: Vec<String>,
    pub trace: Vec<TraceEvent>,
}

impl DiagnosisResult {
    /// Depth budget recorded at the start of the run.
    pub fn depth(&self) -> Option<usize> {
        self.trace.iter().find_map(|event| match event {
            TraceEvent::Depth { depth, .. } => Some(*depth),
            _ => None,
        })
    }

    /// Exception budgets in the order concepts won their level.
    pub fn budgets(&self) -> Vec<usize> {
        self.trace
            .iter()
            .filter_map(|event| match event {
                TraceEvent::Budget { budget, .. } => Some(*budget),
                _ => None,
            })
            .collect()
    }

    /// Number of oracle questions asked.
    pub fn question_count(&self) -> usize {
        self.trace
            .iter()
            .filter(|event| {
                matches!(
                    event,
                    TraceEvent::Premise { .. } | TraceEvent::Exception { .. }
                )
            })
            .count()
    }
}

/// Why the descent stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Halt {
    /// Depth budget reached or nothing left to visit.
    Exhausted,
    /// A censor on the concept being evaluated was true.
    Censored,
    /// The concept's confidence fell below `m`.
    BelowThreshold,
}

/// Builds the final result from the stack of accepted concepts.
pub(crate) fn conclude(
    halt: Halt,
    stack: &[(String, f64)],
    halted_on: Option<&str>,
    trace: Vec<TraceEvent>,
) -> DiagnosisResult {
    let path: Vec<String> = stack.iter().map(|(name, _)| name.clone()).collect();
    match (halt, stack.last()) {
        (Halt::Censored, None) => DiagnosisResult {
            status: Status::NegatedRoot,
            answer: halted_on.map(str::to_string),
            negated: true,
            fell_back: false,
            confidence: 1.0,
            path,
            trace,
        },
        (_, None) => DiagnosisResult {
            status: Status::Indeterminate,
            answer: None,
            negated: false,
            fell_back: false,
            confidence: 0.0,
            path,
            trace,
        },
        (halt, Some((name, omega))) => DiagnosisResult {
            status: Status::Identified,
            answer: Some(name.clone()),
            negated: false,
            fell_back: halt != Halt::Exhausted,
            confidence: *omega,
            path,
            trace,
        },
    }
}

pub(crate) fn check_probability(question: &Question, probability: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&probability) {
        Ok(probability)
    } else {
        Err(Error::Input(format!(
            "probability {probability} for premise {} of {} is outside [0,1]",
            question.name, question.concept
        )))
    }
}

/// Outcome of asking a concept's premises.
#[derive(Debug, Clone, PartialEq)]
pub struct PremiseCheck {
    pub passed: bool,
    /// Smallest probability seen; 1.0 when the concept has no premises.
    pub min_premise: f64,
    /// Answers in the order they were asked.
    pub answers: Vec<(String, f64)>,
}

/// Asks each premise in order, stopping at the first one below the gate.
pub fn check_premises(
    unit: &KnowledgeUnit,
    level: usize,
    oracle: &mut impl Oracle,
    df_threshold: f64,
) -> Result<PremiseCheck> {
    let mut check = PremiseCheck {
        passed: true,
        min_premise: 1.0,
        answers: Vec::with_capacity(unit.premises.len()),
    };
    for premise in &unit.premises {
        let question = Question::premise(&unit.name, premise, level);
        let probability = check_probability(&question, oracle.premise_confidence(&question)?)?;
        check.answers.push((premise.clone(), probability));
        check.min_premise = check.min_premise.min(probability);
        if probability < df_threshold {
            check.passed = false;
            break;
        }
    }
    Ok(check)
}

/// Outcome of evaluating a concept's censors.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaOutcome {
    /// The exception that came back true, if any.
    pub censored: Option<String>,
    /// gamma plus the deltas of the false exceptions. Meaningless when
    /// censored.
    pub delta: f64,
    pub verdicts: Vec<(String, Verdict)>,
}

/// Asks the first `budget` exceptions in list order. A true verdict stops
/// immediately; unknown adds nothing; false adds the exception's delta. The
/// standing unknown censor is never asked.
pub fn calc_delta(
    unit: &KnowledgeUnit,
    level: usize,
    budget: usize,
    oracle: &mut impl Oracle,
) -> Result<DeltaOutcome> {
    let mut outcome = DeltaOutcome {
        censored: None,
        delta: unit.gamma,
        verdicts: Vec::with_capacity(budget),
    };
    for exception in unit.exceptions.iter().take(budget) {
        let question = Question::exception(&unit.name, &exception.name, level);
        let verdict = oracle.exception_verdict(&question)?;
        outcome.verdicts.push((exception.name.clone(), verdict));
        match verdict {
            Verdict::True => {
                outcome.censored = Some(exception.name.clone());
                break;
            }
            Verdict::Unknown => {}
            Verdict::False => outcome.delta += exception.delta,
        }
    }
    Ok(outcome)
}

/// `min(parent, weakest premise) × delta`. The root's parent confidence is 1.
pub fn calc_omega(parent_omega: f64, min_premise: f64, delta: f64) -> f64 {
    parent_omega.min(min_premise) * delta
}

/// Runs a whole descent against an oracle.
pub fn run_dba(
    ontology: &Ontology,
    ci: &ContextInfo,
    oracle: &mut impl Oracle,
) -> Result<DiagnosisResult> {
    ci.validate()?;
    let depth = ci.specificity_depth(ontology.depth());
    let mut trace = vec![TraceEvent::Depth {
        depth,
        total_levels: ontology.depth(),
    }];
    let mut stack: Vec<(String, f64)> = Vec::new();
    let mut queue = VecDeque::from([ontology.root()]);
    let mut level = 1;

    while level <= depth {
        let Some(name) = queue.pop_front() else { break };
        let unit = ontology
            .concept(name)
            .ok_or_else(|| Error::Lookup(name.to_string()))?;
        trace.push(TraceEvent::Visit {
            concept: unit.name.clone(),
            level,
        });

        let check = check_premises(unit, level, oracle, ci.df_threshold)?;
        trace.extend(
            check
                .answers
                .iter()
                .map(|(premise, probability)| TraceEvent::Premise {
                    concept: unit.name.clone(),
                    premise: premise.clone(),
                    probability: *probability,
                }),
        );
        trace.push(TraceEvent::PremiseGate {
            concept: unit.name.clone(),
            passed: check.passed,
            min_premise: check.min_premise,
        });
        if !check.passed {
            continue;
        }

        // This concept wins the level; siblings are never visited.
        queue.clear();
        let available = unit.exception_count();
        let budget = ci.exception_budget(depth, level - 1, available)?;
        trace.push(TraceEvent::Budget {
            concept: unit.name.clone(),
            level,
            budget,
            available,
        });

        let outcome = calc_delta(unit, level, budget, oracle)?;
        trace.extend(
            outcome
                .verdicts
                .iter()
                .map(|(exception, verdict)| TraceEvent::Exception {
                    concept: unit.name.clone(),
                    exception: exception.clone(),
                    verdict: *verdict,
                }),
        );
        if let Some(exception) = outcome.censored {
            trace.push(TraceEvent::Censored {
                concept: unit.name.clone(),
                exception,
            });
            return Ok(conclude(Halt::Censored, &stack, Some(&unit.name), trace));
        }

        let parent = stack.last().map_or(1.0, |(_, omega)| *omega);
        let omega = calc_omega(parent, check.min_premise, outcome.delta);
        let accepted = omega >= ci.m;
        trace.push(TraceEvent::Omega {
            concept: unit.name.clone(),
            delta: outcome.delta,
            omega,
            accepted,
        });
        if !accepted {
            return Ok(conclude(
                Halt::BelowThreshold,
                &stack,
                Some(&unit.name),
                trace,
            ));
        }

        stack.push((unit.name.clone(), omega));
        level += 1;
        queue.extend(unit.children.iter().map(String::as_str));
    }

    Ok(conclude(Halt::Exhausted, &stack, None, trace))
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::model::Exception;

    /// Answers from fixed tables; records every question asked.
    #[derive(Default)]
    struct Table {
        premises: HashMap<String, f64>,
        verdicts: Vec<Verdict>,
        asked: Vec<Question>,
    }

    impl Oracle for Table {
        fn premise_confidence(&mut self, question: &Question) -> Result<f64> {
            self.asked.push(question.clone());
            Ok(self.premises[&question.name])
        }

        fn exception_verdict(&mut self, question: &Question) -> Result<Verdict> {
            self.asked.push(question.clone());
            Ok(if self.verdicts.is_empty() {
                Verdict::False
            } else {
                self.verdicts.remove(0)
            })
        }
    }

    fn table(premises: &[(&str, f64)], verdicts: &[Verdict]) -> Table {
        Table {
            premises: premises.iter().map(|(n, p)| (n.to_string(), *p)).collect(),
            verdicts: verdicts.to_vec(),
            asked: Vec::new(),
        }
    }

    fn root_unit() -> KnowledgeUnit {
        let mut unit = KnowledgeUnit::new("isInCityR", 0.95);
        unit.premises = vec!["livesInCityR".into(), "worksInCityR".into()];
        unit.exceptions = vec![
            Exception::new("isOnTour", 0.01),
            Exception::new("hasLongVacation", 0.01),
            Exception::new("isEntertainingOutCity", 0.02),
        ];
        unit.unk_delta = 0.01;
        unit
    }

    #[test]
    fn premises_pass_with_minimum() {
        let mut oracle = table(&[("livesInCityR", 0.90), ("worksInCityR", 0.89)], &[]);
        let check = check_premises(&root_unit(), 1, &mut oracle, 0.88).unwrap();
        assert!(check.passed);
        assert_eq!(check.min_premise, 0.89);
    }

    #[test]
    fn premise_below_gate_fails_and_stops() {
        let mut unit = KnowledgeUnit::new("isAtHome", 0.9);
        unit.premises = vec!["timeNight".into(), "never".into()];
        let mut oracle = table(&[("timeNight", 0.81)], &[]);
        let check = check_premises(&unit, 2, &mut oracle, 0.88).unwrap();
        assert!(!check.passed);
        assert_eq!(check.min_premise, 0.81);
        assert_eq!(oracle.asked.len(), 1);
    }

    #[test]
    fn premise_at_gate_passes() {
        let mut unit = KnowledgeUnit::new("c", 0.9);
        unit.premises = vec!["p".into()];
        let mut oracle = table(&[("p", 0.88)], &[]);
        assert!(check_premises(&unit, 1, &mut oracle, 0.88).unwrap().passed);
    }

    #[test]
    fn no_premises_pass_vacuously() {
        let mut oracle = table(&[], &[]);
        let check = check_premises(&KnowledgeUnit::new("c", 0.9), 1, &mut oracle, 0.88).unwrap();
        assert_eq!((check.passed, check.min_premise), (true, 1.0));
    }

    #[test]
    fn out_of_range_probability_is_an_input_error() {
        let mut unit = KnowledgeUnit::new("c", 0.9);
        unit.premises = vec!["p".into()];
        for bad in [1.2, -0.1, f64::NAN] {
            let mut oracle = table(&[("p", bad)], &[]);
            assert!(matches!(
                check_premises(&unit, 1, &mut oracle, 0.88),
                Err(Error::Input(_))
            ));
        }
    }

    #[test]
    fn delta_accumulates_false_verdicts() {
        let mut oracle = table(&[], &[Verdict::False, Verdict::False]);
        let out = calc_delta(&root_unit(), 1, 2, &mut oracle).unwrap();
        assert_eq!(out.censored, None);
        assert!((out.delta - 0.97).abs() < 1e-12);
    }

    #[test]
    fn unknown_contributes_nothing() {
        let mut oracle = table(&[], &[Verdict::False, Verdict::Unknown, Verdict::False]);
        let out = calc_delta(&root_unit(), 1, 3, &mut oracle).unwrap();
        assert!((out.delta - 0.98).abs() < 1e-12);
        assert_eq!(out.verdicts.len(), 3);
    }

    #[test]
    fn true_verdict_censors_immediately() {
        let mut oracle = table(&[], &[Verdict::True, Verdict::False]);
        let out = calc_delta(&root_unit(), 1, 3, &mut oracle).unwrap();
        assert_eq!(out.censored.as_deref(), Some("isOnTour"));
        assert_eq!(oracle.asked.len(), 1);
    }

    #[test]
    fn zero_budget_is_gamma() {
        let mut oracle = table(&[], &[]);
        let out = calc_delta(&root_unit(), 1, 0, &mut oracle).unwrap();
        assert_eq!((out.censored, out.delta), (None, 0.95));
        assert!(oracle.asked.is_empty());
    }

    #[test]
    fn omega_examples() {
        assert!((calc_omega(1.0, 0.89, 0.96) - 0.8544).abs() < 1e-12);
        assert!((calc_omega(0.8544, 0.92, 0.94) - 0.803136).abs() < 1e-12);
        assert_eq!(calc_omega(1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn verdict_parsing() {
        assert_eq!("TRUE".parse::<Verdict>().unwrap(), Verdict::True);
        assert_eq!(" f ".parse::<Verdict>().unwrap(), Verdict::False);
        assert_eq!("unknown".parse::<Verdict>().unwrap(), Verdict::Unknown);
        assert!("maybe".parse::<Verdict>().is_err());
    }

    #[test]
    fn failing_root_is_indeterminate() {
        let o = Ontology::build("t", "1", "isInCityR", vec![root_unit()]).unwrap();
        let mut oracle = table(&[("livesInCityR", 0.5), ("worksInCityR", 0.9)], &[]);
        let ci = ContextInfo::new(0.5, 1.0, 1.0).unwrap();
        let result = run_dba(&o, &ci, &mut oracle).unwrap();
        assert_eq!(result.status, Status::Indeterminate);
        assert_eq!(result.answer, None);
    }

    #[test]
    fn full_threshold_explores_nothing() {
        let o = Ontology::build("t", "1", "isInCityR", vec![root_unit()]).unwrap();
        let mut oracle = table(&[], &[]);
        let ci = ContextInfo::new(1.0, 1.0, 1.0).unwrap();
        let result = run_dba(&o, &ci, &mut oracle).unwrap();
        assert_eq!(result.depth(), Some(0));
        assert_eq!(result.status, Status::Indeterminate);
        assert!(oracle.asked.is_empty());
    }
}
