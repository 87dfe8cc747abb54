use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::engine::{Oracle, Question, Verdict};
use crate::error::{Error, Result};
use crate::model::Ontology;

/// A scripted user: fixed premise probabilities plus, per concept, the
/// verdicts of its exceptions in list order. Exceptions without a scripted
/// verdict answer FALSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    pub premise_probs: BTreeMap<String, f64>,
    #[serde(default)]
    pub verdicts: BTreeMap<String, Vec<Verdict>>,
}

impl Scenario {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            premise_probs: BTreeMap::new(),
            verdicts: BTreeMap::new(),
        }
    }

    pub fn with_premise(mut self, premise: impl Into<String>, probability: f64) -> Self {
        self.premise_probs.insert(premise.into(), probability);
        self
    }

    pub fn with_verdicts(mut self, concept: impl Into<String>, verdicts: Vec<Verdict>) -> Self {
        self.verdicts.insert(concept.into(), verdicts);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Parses a scenario document and checks its probabilities.
    pub fn load(document: &str) -> Result<Self> {
        let scenario: Self =
            serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        for (premise, probability) in &self.premise_probs {
            if !(0.0..=1.0).contains(probability) {
                return Err(Error::Parse(format!(
                    "premise_probs.{premise}: {probability} is outside [0,1]"
                )));
            }
        }
        Ok(())
    }

    /// Checks the verdict lists fit the concepts they script.
    pub fn validate_against(&self, ontology: &Ontology) -> Result<()> {
        self.validate()?;
        for (concept, verdicts) in &self.verdicts {
            let unit = ontology
                .concept(concept)
                .ok_or_else(|| Error::Parse(format!("verdicts.{concept}: unknown concept")))?;
            if verdicts.len() > unit.exception_count() {
                return Err(Error::Parse(format!(
                    "verdicts.{concept}: {} verdicts for {} exceptions",
                    verdicts.len(),
                    unit.exception_count()
                )));
            }
        }
        Ok(())
    }

    pub fn oracle(&self) -> ScenarioOracle<'_> {
        ScenarioOracle {
            scenario: self,
            asked: HashMap::new(),
        }
    }
}

/// Plays a [`Scenario`] back. Exceptions are matched to verdicts by the
/// order they are asked in, per concept.
#[derive(Debug)]
pub struct ScenarioOracle<'s> {
    scenario: &'s Scenario,
    asked: HashMap<String, usize>,
}

impl Oracle for ScenarioOracle<'_> {
    fn premise_confidence(&mut self, question: &Question) -> Result<f64> {
        self.scenario
            .premise_probs
            .get(&question.name)
            .copied()
            .ok_or_else(|| {
                Error::Input(format!(
                    "scenario {:?} has no probability for premise {} of {}",
                    self.scenario.label, question.name, question.concept
                ))
            })
    }

    fn exception_verdict(&mut self, question: &Question) -> Result<Verdict> {
        let index = self.asked.entry(question.concept.clone()).or_default();
        let verdict = self
            .scenario
            .verdicts
            .get(&question.concept)
            .and_then(|list| list.get(*index))
            .copied()
            .unwrap_or(Verdict::False);
        *index += 1;
        Ok(verdict)
    }
}
