//! Resumable form of the descent: one question out, one answer in.
//!
//! A [`Session`] holds only names and numbers, never a reference to the
//! ontology, so it can be parked in a service between requests. Every call
//! that advances it takes the ontology it was started on.

use std::collections::VecDeque;

use serde::Serialize;

use super::{
    calc_omega, check_probability, conclude, Answer, DiagnosisResult, Halt, Oracle, Question,
    TraceEvent, Verdict,
};
use crate::context::ContextInfo;
use crate::error::{Error, Result};
use crate::model::{KnowledgeUnit, Ontology};

/// What the session needs next.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Ask(Question),
    Done(DiagnosisResult),
}

#[derive(Debug, Clone)]
enum Phase {
    AwaitingPremise {
        concept: String,
        index: usize,
        min_premise: f64,
    },
    AwaitingException {
        concept: String,
        index: usize,
        budget: usize,
        delta: f64,
        min_premise: f64,
    },
    Done(DiagnosisResult),
}

enum Flow {
    Asked,
    Continue,
    Finished,
}

#[derive(Debug, Clone)]
pub struct Session {
    ci: ContextInfo,
    depth: usize,
    level: usize,
    queue: VecDeque<String>,
    stack: Vec<(String, f64)>,
    trace: Vec<TraceEvent>,
    pending: Option<Question>,
    phase: Phase,
}

impl Session {
    /// Starts a descent and runs it up to the first question.
    pub fn start(ontology: &Ontology, ci: ContextInfo) -> Result<Self> {
        ci.validate()?;
        let depth = ci.specificity_depth(ontology.depth());
        let mut session = Self {
            ci,
            depth,
            level: 1,
            queue: VecDeque::from([ontology.root().to_string()]),
            stack: Vec::new(),
            trace: vec![TraceEvent::Depth {
                depth,
                total_levels: ontology.depth(),
            }],
            pending: None,
            // Replaced by `advance` before anyone can observe it.
            phase: Phase::AwaitingPremise {
                concept: String::new(),
                index: 0,
                min_premise: 1.0,
            },
        };
        session.advance(ontology)?;
        Ok(session)
    }

    pub fn context(&self) -> &ContextInfo {
        &self.ci
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// 1-based level currently being decided.
    pub fn level(&self) -> usize {
        self.level
    }

    /// Accepted concepts with their confidences, root first.
    pub fn accepted(&self) -> &[(String, f64)] {
        &self.stack
    }

    pub fn trace(&self) -> &[TraceEvent] {
        match &self.phase {
            Phase::Done(result) => &result.trace,
            _ => &self.trace,
        }
    }

    pub fn is_done(&self) -> bool {
        matches!(self.phase, Phase::Done(_))
    }

    pub fn result(&self) -> Option<&DiagnosisResult> {
        match &self.phase {
            Phase::Done(result) => Some(result),
            _ => None,
        }
    }

    pub fn current(&self) -> Step {
        match (&self.phase, &self.pending) {
            (Phase::Done(result), _) => Step::Done(result.clone()),
            (_, Some(question)) => Step::Ask(question.clone()),
            (_, None) => unreachable!("an open session always has a pending question"),
        }
    }

    /// Feeds one answer. A rejected answer leaves the session unchanged.
    pub fn answer(&mut self, ontology: &Ontology, answer: Answer) -> Result<Step> {
        let flow = match (&mut self.phase, answer) {
            (Phase::Done(_), _) => {
                return Err(Error::Protocol("session has already finished".into()));
            }
            (Phase::AwaitingPremise { .. }, Answer::Verdict(_)) => {
                return Err(Error::Protocol(
                    "expected a premise probability, got an exception verdict".into(),
                ));
            }
            (Phase::AwaitingException { .. }, Answer::Premise(_)) => {
                return Err(Error::Protocol(
                    "expected an exception verdict, got a premise probability".into(),
                ));
            }
            (
                Phase::AwaitingPremise {
                    concept,
                    index,
                    min_premise,
                },
                Answer::Premise(probability),
            ) => {
                let question = self.pending.as_ref().expect("pending premise question");
                let probability = check_probability(question, probability)?;
                let concept = concept.clone();
                let unit = lookup(ontology, &concept)?;
                self.trace.push(TraceEvent::Premise {
                    concept: concept.clone(),
                    premise: unit.premises[*index].clone(),
                    probability,
                });
                *min_premise = min_premise.min(probability);
                let min_premise = *min_premise;
                *index += 1;
                let next = *index;

                if probability < self.ci.df_threshold {
                    self.trace.push(TraceEvent::PremiseGate {
                        concept,
                        passed: false,
                        min_premise,
                    });
                    Flow::Continue
                } else if next < unit.premises.len() {
                    self.pending = Some(Question::premise(
                        &concept,
                        &unit.premises[next],
                        self.level,
                    ));
                    Flow::Asked
                } else {
                    self.trace.push(TraceEvent::PremiseGate {
                        concept,
                        passed: true,
                        min_premise,
                    });
                    self.premises_passed(unit, min_premise)?
                }
            }
            (
                Phase::AwaitingException {
                    concept,
                    index,
                    budget,
                    delta,
                    min_premise,
                },
                Answer::Verdict(verdict),
            ) => {
                let concept = concept.clone();
                let unit = lookup(ontology, &concept)?;
                let exception = &unit.exceptions[*index];
                self.trace.push(TraceEvent::Exception {
                    concept: concept.clone(),
                    exception: exception.name.clone(),
                    verdict,
                });
                match verdict {
                    Verdict::True => {
                        self.trace.push(TraceEvent::Censored {
                            concept: concept.clone(),
                            exception: exception.name.clone(),
                        });
                        self.finish(Halt::Censored, Some(&concept));
                        return Ok(self.current());
                    }
                    Verdict::Unknown => {}
                    Verdict::False => *delta += exception.delta,
                }
                *index += 1;
                if *index < *budget {
                    self.pending = Some(Question::exception(
                        &concept,
                        &unit.exceptions[*index].name,
                        self.level,
                    ));
                    Flow::Asked
                } else {
                    let (delta, min_premise) = (*delta, *min_premise);
                    self.settle(unit, min_premise, delta)
                }
            }
        };

        if let Flow::Continue = flow {
            self.advance(ontology)?;
        }
        Ok(self.current())
    }

    /// Answers every question from `oracle` until the session finishes.
    pub fn run_with(
        &mut self,
        ontology: &Ontology,
        oracle: &mut impl Oracle,
    ) -> Result<DiagnosisResult> {
        loop {
            let question = match self.current() {
                Step::Done(result) => return Ok(result),
                Step::Ask(question) => question,
            };
            let answer = match question.kind {
                super::QuestionKind::Premise => {
                    Answer::Premise(oracle.premise_confidence(&question)?)
                }
                super::QuestionKind::Exception => {
                    Answer::Verdict(oracle.exception_verdict(&question)?)
                }
            };
            self.answer(ontology, answer)?;
        }
    }

    /// Visits queued concepts until one needs an answer or the descent ends.
    fn advance(&mut self, ontology: &Ontology) -> Result<()> {
        loop {
            if self.level > self.depth {
                self.finish(Halt::Exhausted, None);
                return Ok(());
            }
            let Some(name) = self.queue.pop_front() else {
                self.finish(Halt::Exhausted, None);
                return Ok(());
            };
            let unit = lookup(ontology, &name)?;
            self.trace.push(TraceEvent::Visit {
                concept: name.clone(),
                level: self.level,
            });

            let flow = if let Some(first) = unit.premises.first() {
                self.pending = Some(Question::premise(&name, first, self.level));
                self.phase = Phase::AwaitingPremise {
                    concept: name,
                    index: 0,
                    min_premise: 1.0,
                };
                Flow::Asked
            } else {
                self.trace.push(TraceEvent::PremiseGate {
                    concept: name,
                    passed: true,
                    min_premise: 1.0,
                });
                self.premises_passed(unit, 1.0)?
            };

            match flow {
                Flow::Continue => continue,
                Flow::Asked | Flow::Finished => return Ok(()),
            }
        }
    }

    fn premises_passed(&mut self, unit: &KnowledgeUnit, min_premise: f64) -> Result<Flow> {
        self.queue.clear();
        let available = unit.exception_count();
        let budget = self
            .ci
            .exception_budget(self.depth, self.level - 1, available)?;
        self.trace.push(TraceEvent::Budget {
            concept: unit.name.clone(),
            level: self.level,
            budget,
            available,
        });
        if budget == 0 {
            return Ok(self.settle(unit, min_premise, unit.gamma));
        }
        self.pending = Some(Question::exception(
            &unit.name,
            &unit.exceptions[0].name,
            self.level,
        ));
        self.phase = Phase::AwaitingException {
            concept: unit.name.clone(),
            index: 0,
            budget,
            delta: unit.gamma,
            min_premise,
        };
        Ok(Flow::Asked)
    }

    /// Computes the concept's confidence and either accepts it or stops.
    fn settle(&mut self, unit: &KnowledgeUnit, min_premise: f64, delta: f64) -> Flow {
        let parent = self.stack.last().map_or(1.0, |(_, omega)| *omega);
        let omega = calc_omega(parent, min_premise, delta);
        let accepted = omega >= self.ci.m;
        self.trace.push(TraceEvent::Omega {
            concept: unit.name.clone(),
            delta,
            omega,
            accepted,
        });
        if !accepted {
            self.finish(Halt::BelowThreshold, Some(&unit.name));
            return Flow::Finished;
        }
        self.stack.push((unit.name.clone(), omega));
        self.level += 1;
        self.queue.extend(unit.children.iter().cloned());
        Flow::Continue
    }

    fn finish(&mut self, halt: Halt, halted_on: Option<&str>) {
        let trace = std::mem::take(&mut self.trace);
        self.pending = None;
        self.phase = Phase::Done(conclude(halt, &self.stack, halted_on, trace));
    }
}

fn lookup<'o>(ontology: &'o Ontology, name: &str) -> Result<&'o KnowledgeUnit> {
    ontology
        .concept(name)
        .ok_or_else(|| Error::Lookup(name.to_string()))
}
