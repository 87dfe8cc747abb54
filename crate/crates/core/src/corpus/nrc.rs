//! The normal-routine-context ontology ("where is Robert?") and the premise
//! confidences its worked examples were run with.
//!
//! Concept precisions on the accepted path are reconstructed so that every
//! published answer and Table 6(a) cell is reproduced; concepts off that path
//! only need to fail the premise gate.

use crate::corpus::Scenario;
use crate::model::{load_ontology, Ontology};

/// Bundled ontology document.
pub const NRC_DOCUMENT: &str = include_str!("../../data/nrc.json");

pub fn builtin_nrc() -> Ontology {
    load_ontology(NRC_DOCUMENT).expect("bundled NRC ontology is valid")
}

/// Premise confidences for Robert in Mumbai, all exceptions false.
pub fn builtin_scenario() -> Scenario {
    [
        ("livesInCityR", 0.90),
        ("worksInCityR", 0.89),
        ("timeNight", 0.81),
        ("timeDay", 0.92),
        ("workingDay", 0.95),
        ("daySunday", 0.75),
        ("isFarmer", 0.97),
        ("hasSoilFertile", 0.98),
        ("hasHarvestingTool", 0.55),
        ("isTeacher", 0.45),
        ("isShopkeeper", 0.67),
    ]
    .into_iter()
    .fold(Scenario::new("robert-mumbai"), |s, (premise, p)| {
        s.with_premise(premise, p)
    })
}
