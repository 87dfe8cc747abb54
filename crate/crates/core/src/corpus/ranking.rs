//! Feature coverage of human-context ontologies and the overall ranking
//! `available essential features / total essential features`.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Feature {
    Device,
    Environment,
    Interface,
    Location,
    Network,
    Provider,
    Role,
    Service,
    ContextSource,
    Time,
    User,
    UncertaintyManagement,
    Message,
    BehaviorGranularity,
    SocialInteraction,
    ImplementationAvailable,
}

impl Feature {
    pub const ALL: [Feature; 16] = [
        Feature::Device,
        Feature::Environment,
        Feature::Interface,
        Feature::Location,
        Feature::Network,
        Feature::Provider,
        Feature::Role,
        Feature::Service,
        Feature::ContextSource,
        Feature::Time,
        Feature::User,
        Feature::UncertaintyManagement,
        Feature::Message,
        Feature::BehaviorGranularity,
        Feature::SocialInteraction,
        Feature::ImplementationAvailable,
    ];
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feature::Device => "Device",
            Feature::Environment => "Environment",
            Feature::Interface => "Interface",
            Feature::Location => "Location",
            Feature::Network => "Network",
            Feature::Provider => "Provider",
            Feature::Role => "Role",
            Feature::Service => "Service",
            Feature::ContextSource => "Context Source",
            Feature::Time => "Time",
            Feature::User => "User",
            Feature::UncertaintyManagement => "Uncertainty Management",
            Feature::Message => "Message",
            Feature::BehaviorGranularity => "Behavior Granularity",
            Feature::SocialInteraction => "Social Interaction",
            Feature::ImplementationAvailable => "Implementation available",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FeatureMatrix {
    rows: IndexMap<String, BTreeSet<Feature>>,
}

impl FeatureMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        ontology: impl Into<String>,
        features: impl IntoIterator<Item = Feature>,
    ) {
        self.rows
            .entry(ontology.into())
            .or_default()
            .extend(features);
    }

    pub fn features(&self, ontology: &str) -> Option<&BTreeSet<Feature>> {
        self.rows.get(ontology)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }
}

const TABLE_2_COLUMNS: [&str; 13] = [
    "CC/PP",
    "CoBrA-Ont",
    "CoDAMoS",
    "Delivery Context",
    "SOUPA",
    "mIO!",
    "PalSPOT",
    "CONON",
    "PiVOn",
    "Situation Ontology",
    "CAMeOnto",
    "3LConOnt",
    "Sup_Ont",
];

/// One string per feature, one character per column: `x` ticked, `.` not.
const TABLE_2_TICKS: [(Feature, &str); 16] = [
    (Feature::Device, "xxxx.xxxxxxxx"),
    (Feature::Environment, ".xxx.xxxxxxxx"),
    (Feature::Interface, "...x.x.....xx"),
    (Feature::Location, ".xxxxxxxxxxxx"),
    (Feature::Network, "x..x.x.x...xx"),
    (Feature::Provider, ".....x..x..xx"),
    (Feature::Role, ".xx..x..x.xxx"),
    (Feature::Service, "..xx.x.xx.xxx"),
    (Feature::ContextSource, ".....xx.xx.xx"),
    (Feature::Time, ".xx.xxxxxxxxx"),
    (Feature::User, "xxx.xxxxxxxxx"),
    (Feature::UncertaintyManagement, "............."),
    (Feature::Message, "........x..xx"),
    (Feature::BehaviorGranularity, ".xx...xxxx..x"),
    (Feature::SocialInteraction, "......x.x...x"),
    (Feature::ImplementationAvailable, "xxx.xxx...xxx"),
];

/// The comparative feature table of thirteen human-context ontologies.
pub fn table2() -> FeatureMatrix {
    let mut matrix = FeatureMatrix::new();
    for (column, name) in TABLE_2_COLUMNS.iter().enumerate() {
        let ticked = TABLE_2_TICKS
            .iter()
            .filter(|(_, ticks)| ticks.as_bytes()[column] == b'x')
            .map(|(feature, _)| *feature);
        matrix.insert(*name, ticked);
    }
    matrix
}

pub fn rank_ontology(matrix: &FeatureMatrix, name: &str) -> Result<f64> {
    let features = matrix
        .features(name)
        .ok_or_else(|| Error::Lookup(format!("ontology {name:?} is not in the feature matrix")))?;
    Ok(features.len() as f64 / Feature::ALL.len() as f64)
}

/// Every ontology with its rank, best first. Ties keep table order.
pub fn rank_all(matrix: &FeatureMatrix) -> Vec<(String, f64)> {
    let mut ranked: Vec<_> = matrix
        .names()
        .map(|name| (name.to_string(), rank_ontology(matrix, name).unwrap()))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked
}
