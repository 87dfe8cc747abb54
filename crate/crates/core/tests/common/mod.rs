//! Helpers shared by the integration suites: random valid ontologies and
//! scripts, the structural checks every run must satisfy, and an exact
//! rational recomputation of the published NRC numbers.

#![allow(dead_code)]

use std::collections::BTreeMap;

use cr_core::corpus::cases::published_cases;
use cr_core::corpus::sweep::{table_6a, K_VALUES};

use cr_core::corpus::Scenario;
use cr_core::engine::{DiagnosisResult, Status, TraceEvent};
use cr_core::model::{Exception, KnowledgeUnit};
use cr_core::{Answer, ContextInfo, Ontology, Session, Step, Verdict};
use num_rational::Ratio;
use rand::Rng;

pub type Exact = Ratio<i128>;

const PREMISE_POOL: usize = 8;

/// A random valid ontology: at most `max_levels` levels and `max_children`
/// children per concept.
pub fn random_ontology(rng: &mut impl Rng, max_levels: usize, max_children: usize) -> Ontology {
    let levels = rng.gen_range(1..=max_levels);
    let mut units = Vec::new();
    let mut next_id = 0usize;
    let mut frontier = vec![(new_unit(rng, &mut next_id, None), 1usize)];
    while let Some((mut unit, level)) = frontier.pop() {
        if level < levels {
            let children = rng.gen_range(0..=max_children);
            for _ in 0..children {
                let child = new_unit(rng, &mut next_id, Some(unit.name.clone()));
                unit.children.push(child.name.clone());
                frontier.push((child, level + 1));
            }
        }
        units.push(unit);
    }
    Ontology::build("random", "0", "c0", units).expect("generator builds valid trees")
}

fn new_unit(rng: &mut impl Rng, next_id: &mut usize, parent: Option<String>) -> KnowledgeUnit {
    let name = format!("c{next_id}");
    *next_id += 1;
    let total: f64 = rng.gen_range(0.55..=1.0);
    let unk: f64 = rng.gen_range(0.0..0.02);
    let named = total - unk;
    let exception_count = rng.gen_range(0..=4);
    let gamma = if exception_count == 0 {
        named
    } else {
        named * rng.gen_range(0.7..1.0)
    };
    let mut weights: Vec<f64> = (0..exception_count)
        .map(|_| rng.gen_range(0.1..1.0))
        .collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w = *w / sum * (named - gamma);
    }

    let mut unit = KnowledgeUnit::new(name.clone(), gamma);
    unit.parent = parent;
    unit.unk_delta = unk;
    unit.exceptions = weights
        .into_iter()
        .enumerate()
        .map(|(i, delta)| Exception::new(format!("{name}x{i}"), delta))
        .collect();
    let premise_count = rng.gen_range(0..=3);
    unit.premises = (0..premise_count)
        .map(|_| format!("p{}", rng.gen_range(0..PREMISE_POOL)))
        .collect();
    unit.premises.sort();
    unit.premises.dedup();
    unit
}

/// Probabilities for every pooled premise and a verdict for every exception.
pub fn random_scenario(rng: &mut impl Rng, ontology: &Ontology) -> Scenario {
    let mut scenario = Scenario::new("random");
    for i in 0..PREMISE_POOL {
        let p = if rng.gen_bool(0.6) {
            rng.gen_range(0.85..=1.0)
        } else {
            rng.gen_range(0.0..=1.0)
        };
        scenario.premise_probs.insert(format!("p{i}"), p);
    }
    for unit in ontology.concepts() {
        let verdicts = (0..unit.exception_count())
            .map(|_| match rng.gen_range(0..10) {
                0 => Verdict::True,
                1 => Verdict::Unknown,
                _ => Verdict::False,
            })
            .collect();
        scenario.verdicts.insert(unit.name.clone(), verdicts);
    }
    scenario
}

pub fn random_context(rng: &mut impl Rng) -> ContextInfo {
    ContextInfo::new(
        rng.gen_range(0.05..=1.0),
        rng.gen_range(0.125..=8.0),
        rng.gen_range(0.25..=4.0),
    )
    .unwrap()
}

/// Drives a session one answer at a time from the scenario.
pub fn replay(ontology: &Ontology, ci: ContextInfo, scenario: &Scenario) -> DiagnosisResult {
    let mut session = Session::start(ontology, ci).unwrap();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    loop {
        let question = match session.current() {
            Step::Done(result) => return result,
            Step::Ask(q) => q,
        };
        let answer = match question.kind {
            cr_core::engine::QuestionKind::Premise => {
                Answer::Premise(scenario.premise_probs[&question.name])
            }
            cr_core::engine::QuestionKind::Exception => {
                let i = seen.entry(question.concept.clone()).or_default();
                let v = scenario
                    .verdicts
                    .get(&question.concept)
                    .and_then(|l| l.get(*i))
                    .copied()
                    .unwrap_or(Verdict::False);
                *i += 1;
                Answer::Verdict(v)
            }
        };
        session.answer(ontology, answer).unwrap();
    }
}

/// Invariants every finished run must satisfy. Returns a description of the
/// first one broken.
pub fn check_run(
    ontology: &Ontology,
    ci: &ContextInfo,
    result: &DiagnosisResult,
) -> Result<(), String> {
    let accepted: Vec<(&str, f64)> = result
        .trace
        .iter()
        .filter_map(|e| match e {
            TraceEvent::Omega {
                concept,
                omega,
                accepted: true,
                ..
            } => Some((concept.as_str(), *omega)),
            _ => None,
        })
        .collect();

    // Confidence never rises on the way down.
    for pair in accepted.windows(2) {
        if pair[1].1 > pair[0].1 {
            return Err(format!("omega rose from {:?} to {:?}", pair[0], pair[1]));
        }
    }

    // A true censor hands the answer to the parent untouched.
    let censored = result
        .trace
        .iter()
        .any(|e| matches!(e, TraceEvent::Censored { .. }));
    if censored {
        match accepted.last() {
            None => {
                if result.status != Status::NegatedRoot || result.confidence != 1.0 {
                    return Err("censored root must negate with confidence 1".into());
                }
            }
            Some((name, omega)) => {
                if result.answer.as_deref() != Some(*name) || result.confidence != *omega {
                    return Err(format!("censor did not fall back to {name} at {omega}"));
                }
            }
        }
    }

    // Result/status consistency.
    match result.status {
        Status::Identified => {
            if result.answer.is_none() || !(result.confidence > 0.0 && result.confidence <= 1.0) {
                return Err("identified result without answer or valid confidence".into());
            }
            if !result.fell_back && result.confidence < ci.m {
                return Err("descended answer below threshold".into());
            }
        }
        Status::NegatedRoot => {
            if result.confidence != 1.0 || !result.negated {
                return Err("negated root must carry confidence 1".into());
            }
        }
        Status::Indeterminate => {
            if result.answer.is_some() {
                return Err("indeterminate result names an answer".into());
            }
        }
    }

    // Question count bound and depth bound.
    let depth = result.depth().ok_or("trace has no depth")?;
    let mut bound = 0;
    let mut won_levels = Vec::new();
    for event in &result.trace {
        match event {
            TraceEvent::Visit { concept, level } => {
                if *level > depth {
                    return Err(format!(
                        "visited {concept} at level {level} beyond depth {depth}"
                    ));
                }
                if won_levels.contains(level) {
                    return Err(format!(
                        "sibling {concept} visited after level {level} was won"
                    ));
                }
                bound += ontology.concept(concept).unwrap().premises.len();
            }
            TraceEvent::Budget { budget, level, .. } => {
                bound += budget;
                won_levels.push(*level);
            }
            _ => {}
        }
    }
    if result.question_count() > bound {
        return Err(format!(
            "{} questions asked, bound {bound}",
            result.question_count()
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Exact recomputation of the NRC numbers.

/// Parses a plain decimal literal exactly.
pub fn exact(literal: &str) -> Exact {
    let (whole, fraction) = literal.split_once('.').unwrap_or((literal, ""));
    let scale = 10i128.pow(fraction.len() as u32);
    let digits: i128 = format!("{whole}{fraction}").parse().unwrap();
    Ratio::new(digits, scale)
}

/// The decimal an `f64` was written as.
pub fn exact_f64(value: f64) -> Exact {
    exact(&format!("{value}"))
}

pub fn truncate_exact(value: Exact, places: u32) -> Exact {
    let scale = 10i128.pow(places);
    Ratio::new((value * scale).floor().to_integer(), scale)
}

/// Concepts on the published answer path, top down.
pub const NRC_PATH: [&str; 4] = [
    "isInCityR",
    "isOutdoor",
    "isWorkingOutdoor",
    "isPlantingCrops",
];

/// One published number expressed over the stored precisions.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub label: String,
    /// `(1-based level, budget)` for each accepted level.
    pub factors: Vec<(usize, usize)>,
    pub value: Exact,
    /// Printed value is a truncation at this many decimals.
    pub truncated_at: Option<u32>,
}

/// Smallest premise on each path level under the published premises.
pub fn path_premise_minimum(level: usize) -> Exact {
    match level {
        1 => exact("0.89"),
        2 => exact("0.92"),
        3 => exact("0.95"),
        4 => exact("0.97"),
        _ => unreachable!(),
    }
}

/// Budget formula, evaluated independently of the library.
pub fn budget(m: f64, e: f64, k: f64, depth: usize, level0: usize, available: usize) -> usize {
    let raw =
        available as f64 * (1.0 - (1.0 - m) * (((level0 + 1) as f64) / depth as f64).powf(e / k));
    (raw.round().max(0.0) as usize).min(available)
}

pub fn depth(m: f64, e: f64, k: f64, levels: usize) -> usize {
    (levels as f64 * (1.0 - m).powf(1.0 / (e * k))).ceil() as usize
}

/// Cumulative precision of a path level after `budget` false exceptions,
/// exactly, from the stored parameters.
pub fn stored_cumulative(ontology: &Ontology, level: usize, budget: usize) -> Exact {
    let unit = ontology.concept(NRC_PATH[level - 1]).unwrap();
    unit.exceptions
        .iter()
        .take(budget)
        .fold(exact_f64(unit.gamma), |acc, e| acc + exact_f64(e.delta))
}

/// Confidence of a constraint's chain given per-level cumulative precisions.
pub fn chain(factors: &[(usize, usize)], cumulative: impl Fn(usize, usize) -> Exact) -> Exact {
    let mut omega = Exact::from_integer(1);
    for &(level, budget) in factors {
        let parent = omega.min(path_premise_minimum(level));
        omega = parent * cumulative(level, budget);
    }
    omega
}

pub fn constraint_holds(c: &Constraint, computed: Exact) -> bool {
    match c.truncated_at {
        None => computed == c.value,
        Some(places) => truncate_exact(computed, places) == c.value,
    }
}

const NRC_LEVELS: usize = 4;
const NRC_AVAILABLE: usize = 3;

/// Walks the answer path the way the published runs did and records which
/// levels contributed. `script` yields the verdict list for a level; stopping
/// on a low confidence uses the stored values.
fn path_factors(
    ontology: &Ontology,
    (m, e, k): (f64, f64, f64),
    script: impl Fn(usize) -> Vec<Verdict>,
) -> Vec<(usize, usize)> {
    let n = depth(m, e, k, NRC_LEVELS).min(NRC_LEVELS);
    let mut factors = Vec::new();
    for level in 1..=n {
        let x = budget(m, e, k, n, level - 1, NRC_AVAILABLE);
        let verdicts = script(level);
        if verdicts.iter().take(x).any(|v| *v == Verdict::True) {
            break;
        }
        let mut next = factors.clone();
        next.push((level, x));
        let omega = chain(&next, |l, b| stored_cumulative(ontology, l, b));
        if omega < exact_f64(m) {
            break;
        }
        factors = next;
    }
    factors
}

/// Every published confidence that depends on the path precisions.
pub fn nrc_constraints(ontology: &Ontology) -> Vec<Constraint> {
    let mut constraints = Vec::new();
    for case in published_cases() {
        if case.negated {
            continue;
        }
        let script = |level: usize| {
            case.verdicts
                .iter()
                .find(|(c, _)| *c == NRC_PATH[level - 1])
                .map(|(_, v)| v.clone())
                .unwrap_or_default()
        };
        constraints.push(Constraint {
            label: format!("test case {}", case.number),
            factors: path_factors(ontology, (case.m, case.e, case.k()), script),
            value: exact(case.confidence),
            truncated_at: None,
        });
    }
    for (row, &k) in K_VALUES.iter().enumerate() {
        for (col, &m) in table_6a::M_VALUES.iter().enumerate() {
            if (m, k) == table_6a::DIVERGENT_CELL {
                continue;
            }
            constraints.push(Constraint {
                label: format!("threshold table m={m} k={k}"),
                factors: path_factors(ontology, (m, table_6a::E, k), |_| Vec::new()),
                value: exact(table_6a::PUBLISHED[row][col]),
                truncated_at: Some(6),
            });
        }
    }
    constraints
}

/// Pins cumulative precisions `(level, budget)` that some constraint leaves
/// as its only unknown, iterating to a fixpoint. Truncated constraints only
/// pin a value when one two-decimal precision fits their interval.
pub fn solve_cumulative(constraints: &[Constraint]) -> BTreeMap<(usize, usize), Exact> {
    let mut solved: BTreeMap<(usize, usize), Exact> = BTreeMap::new();
    loop {
        let mut progress = false;
        for c in constraints {
            let unknown: Vec<_> = c
                .factors
                .iter()
                .filter(|f| !solved.contains_key(f))
                .copied()
                .collect();
            let [target] = unknown[..] else { continue };
            // Below the root every parent confidence is under the premise
            // minimum, so the chain is the root premise times the product.
            let known = c
                .factors
                .iter()
                .filter(|f| **f != target)
                .fold(path_premise_minimum(1), |acc, f| acc * solved[f]);
            let value = match c.truncated_at {
                None => c.value / known,
                Some(places) => {
                    let step = Ratio::new(1, 10i128.pow(places));
                    let lo = c.value / known;
                    let hi = (c.value + step) / known;
                    let first = (lo * 100).ceil().to_integer();
                    let candidates: Vec<i128> = (first..)
                        .take_while(|n| Ratio::from_integer(*n) < hi * 100)
                        .collect();
                    let [hundredths] = candidates[..] else {
                        continue;
                    };
                    Ratio::new(hundredths, 100)
                }
            };
            solved.insert(target, value);
            progress = true;
        }
        if !progress {
            return solved;
        }
    }
}
