//! Knowledge-unit ontology: concepts with distinctive features, censors and
//! hierarchy links, plus the JSON document format they are stored in.
//!
//! An [`Ontology`] is immutable once built. Share it behind an `Arc` when
//! several sessions reason over it at the same time.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::io;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};

/// Slack used when comparing summed precisions against the `(0.5, 1]` band.
const TOTAL_EPSILON: f64 = 1e-9;

/// A named censor (UNLESS condition) and the precision it adds when it is
/// known to be false.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exception {
    pub name: String,
    pub delta: f64,
}

impl Exception {
    pub fn new(name: impl Into<String>, delta: f64) -> Self {
        Self {
            name: name.into(),
            delta,
        }
    }
}

/// A default part or property that may be overridden lower in the taxonomy.
/// Stored and validated, never consulted during inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CancellableFeature {
    pub part: String,
    pub default: String,
    pub constraints: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub id: String,
    #[serde(default)]
    pub temporal: String,
    #[serde(default)]
    pub spatial: String,
}

/// Opaque textual/audio/video/pictorial encodings of a concept.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Encodings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picture_ref: Option<String>,
}

/// One concept of the ontology.
///
/// `gamma` is the rule's own precision; every exception evaluated false adds
/// its `delta`. `unk_delta` is the mass reserved for the standing unknown
/// censor, which is never asked and never contributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnowledgeUnit {
    pub name: String,
    pub parent: Option<String>,
    pub children: Vec<String>,
    pub premises: Vec<String>,
    pub gamma: f64,
    pub exceptions: Vec<Exception>,
    pub unk_delta: f64,
    #[serde(default)]
    pub cancellable: Vec<CancellableFeature>,
    #[serde(default)]
    pub instances: Vec<Instance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encodings: Option<Encodings>,
}

impl KnowledgeUnit {
    /// A bare concept with no links, premises or exceptions.
    pub fn new(name: impl Into<String>, gamma: f64) -> Self {
        Self {
            name: name.into(),
            parent: None,
            children: Vec::new(),
            premises: Vec::new(),
            gamma,
            exceptions: Vec::new(),
            unk_delta: 0.0,
            cancellable: Vec::new(),
            instances: Vec::new(),
            encodings: None,
        }
    }

    /// Total named exceptions at this node.
    pub fn exception_count(&self) -> usize {
        self.exceptions.len()
    }

    /// gamma + every delta + the UNK reservation.
    pub fn delta_total(&self) -> f64 {
        self.gamma + self.exceptions.iter().map(|e| e.delta).sum::<f64>() + self.unk_delta
    }

    /// Precision reached when the first `budget` exceptions are all false.
    pub fn cumulative_delta(&self, budget: usize) -> f64 {
        self.gamma
            + self
                .exceptions
                .iter()
                .take(budget)
                .map(|e| e.delta)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    DeltaTotal,
    GammaRange,
    NegativeDelta,
    DefaultNotInConstraints,
    DuplicateChild,
    MissingChild,
    ChildParentMismatch,
    MissingParent,
    NotListedByParent,
    MissingRoot,
    RootHasParent,
    Unreachable,
}

/// A broken invariant, attributed to the concept it was found on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub concept: String,
    pub rule: Rule,
    pub detail: String,
}

impl Violation {
    fn new(concept: &str, rule: Rule, detail: impl Into<String>) -> Self {
        Self {
            concept: concept.to_string(),
            rule,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.concept, self.detail)
    }
}

/// On-disk shape of an ontology.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OntologyDocument {
    name: String,
    version: String,
    root: String,
    concepts: Vec<KnowledgeUnit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ontology {
    name: String,
    version: String,
    root: String,
    concepts: IndexMap<String, KnowledgeUnit>,
    depth: usize,
}

impl Ontology {
    /// Assembles and validates an ontology from its concepts.
    pub fn build(
        name: impl Into<String>,
        version: impl Into<String>,
        root: impl Into<String>,
        concepts: Vec<KnowledgeUnit>,
    ) -> Result<Self> {
        let ontology = Self::assemble(name.into(), version.into(), root.into(), concepts)?;
        let violations = validate_ontology(&ontology);
        if violations.is_empty() {
            Ok(ontology)
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Indexes concepts by name without checking tree invariants. Only name
    /// uniqueness is enforced here.
    fn assemble(
        name: String,
        version: String,
        root: String,
        units: Vec<KnowledgeUnit>,
    ) -> Result<Self> {
        let mut concepts = IndexMap::with_capacity(units.len());
        for unit in units {
            if concepts.contains_key(&unit.name) {
                return Err(Error::Parse(format!("duplicate concept {:?}", unit.name)));
            }
            concepts.insert(unit.name.clone(), unit);
        }
        let mut ontology = Self {
            name,
            version,
            root,
            concepts,
            depth: 0,
        };
        ontology.depth = ontology.measure_depth();
        Ok(ontology)
    }

    /// Longest root-to-leaf path, counted in concepts. Tolerates broken
    /// links and cycles so it can run before validation.
    fn measure_depth(&self) -> usize {
        if !self.concepts.contains_key(&self.root) {
            return 0;
        }
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([(self.root.as_str(), 1usize)]);
        let mut depth = 0;
        while let Some((name, level)) = queue.pop_front() {
            if !seen.insert(name) {
                continue;
            }
            depth = depth.max(level);
            if let Some(unit) = self.concepts.get(name) {
                for child in &unit.children {
                    if self.concepts.contains_key(child) {
                        queue.push_back((child.as_str(), level + 1));
                    }
                }
            }
        }
        depth
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    /// Total number of levels, root at level 1.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concept(&self, name: &str) -> Option<&KnowledgeUnit> {
        self.concepts.get(name)
    }

    pub fn root_concept(&self) -> &KnowledgeUnit {
        &self.concepts[&self.root]
    }

    pub fn concepts(&self) -> impl Iterator<Item = &KnowledgeUnit> {
        self.concepts.values()
    }

    /// 1-based level of a concept, following parent links to the root.
    pub fn level_of(&self, name: &str) -> Option<usize> {
        let mut level = 1;
        let mut current = self.concepts.get(name)?;
        while let Some(parent) = &current.parent {
            current = self.concepts.get(parent)?;
            level += 1;
            if level > self.concepts.len() {
                return None;
            }
        }
        Some(level)
    }

    /// Concepts at a given 1-based level, in breadth-first file order.
    pub fn concepts_at_level(&self, level: usize) -> Vec<&KnowledgeUnit> {
        let mut frontier = vec![self.root_concept()];
        for _ in 1..level {
            frontier = frontier
                .iter()
                .flat_map(|unit| unit.children.iter())
                .filter_map(|child| self.concepts.get(child))
                .collect();
        }
        frontier
    }

    /// Returns a copy with one concept replaced. The result is re-validated.
    pub fn with_concept(&self, unit: KnowledgeUnit) -> Result<Self> {
        let mut concepts: Vec<_> = self.concepts.values().cloned().collect();
        match concepts.iter_mut().find(|c| c.name == unit.name) {
            Some(slot) => *slot = unit,
            None => return Err(Error::Lookup(unit.name)),
        }
        Self::build(&self.name, &self.version, &self.root, concepts)
    }
}

/// Checks every tree and knowledge-unit invariant. An empty list means the
/// ontology is valid.
pub fn validate_ontology(ontology: &Ontology) -> Vec<Violation> {
    let mut violations = Vec::new();

    match ontology.concepts.get(&ontology.root) {
        None => violations.push(Violation::new(
            &ontology.root,
            Rule::MissingRoot,
            "root concept is not defined",
        )),
        Some(root) if root.parent.is_some() => violations.push(Violation::new(
            &root.name,
            Rule::RootHasParent,
            "root concept must not have a parent",
        )),
        Some(_) => {}
    }

    for unit in ontology.concepts.values() {
        check_unit(unit, &mut violations);
        check_links(ontology, unit, &mut violations);
    }

    // Anything not reached from the root is disconnected or sits on a cycle.
    let mut reached = HashSet::new();
    if ontology.concepts.contains_key(&ontology.root) {
        let mut queue = VecDeque::from([ontology.root.as_str()]);
        while let Some(name) = queue.pop_front() {
            if !reached.insert(name) {
                continue;
            }
            for child in &ontology.concepts[name].children {
                if ontology.concepts.contains_key(child) {
                    queue.push_back(child);
                }
            }
        }
    }
    for name in ontology.concepts.keys() {
        if !reached.contains(name.as_str()) {
            violations.push(Violation::new(
                name,
                Rule::Unreachable,
                "concept is not reachable from the root",
            ));
        }
    }

    violations
}

fn check_unit(unit: &KnowledgeUnit, out: &mut Vec<Violation>) {
    if !(unit.gamma > 0.0 && unit.gamma <= 1.0) {
        out.push(Violation::new(
            &unit.name,
            Rule::GammaRange,
            format!("gamma {} ∉ (0,1]", unit.gamma),
        ));
    }
    for exception in &unit.exceptions {
        if exception.delta.is_nan() || exception.delta < 0.0 {
            out.push(Violation::new(
                &unit.name,
                Rule::NegativeDelta,
                format!(
                    "exception {} has negative delta {}",
                    exception.name, exception.delta
                ),
            ));
        }
    }
    if unit.unk_delta.is_nan() || unit.unk_delta < 0.0 {
        out.push(Violation::new(
            &unit.name,
            Rule::NegativeDelta,
            format!("unk_delta {} is negative", unit.unk_delta),
        ));
    }

    let total = unit.delta_total();
    if !(total > 0.5 && total <= 1.0 + TOTAL_EPSILON) {
        out.push(Violation::new(
            &unit.name,
            Rule::DeltaTotal,
            format!("delta-total {total:.2} ∉ (0.5,1]"),
        ));
    }

    for feature in &unit.cancellable {
        if !feature.constraints.contains(&feature.default) {
            out.push(Violation::new(
                &unit.name,
                Rule::DefaultNotInConstraints,
                format!(
                    "cancellable part {} has default {:?} outside its constraints",
                    feature.part, feature.default
                ),
            ));
        }
    }
}

fn check_links(ontology: &Ontology, unit: &KnowledgeUnit, out: &mut Vec<Violation>) {
    let mut seen = HashSet::new();
    for child in &unit.children {
        if !seen.insert(child) {
            out.push(Violation::new(
                &unit.name,
                Rule::DuplicateChild,
                format!("child {child} listed more than once"),
            ));
            continue;
        }
        match ontology.concepts.get(child) {
            None => out.push(Violation::new(
                &unit.name,
                Rule::MissingChild,
                format!("child {child} is not defined"),
            )),
            Some(c) if c.parent.as_deref() != Some(unit.name.as_str()) => out.push(Violation::new(
                &unit.name,
                Rule::ChildParentMismatch,
                format!("child {child} does not name {} as its parent", unit.name),
            )),
            Some(_) => {}
        }
    }

    if let Some(parent) = &unit.parent {
        match ontology.concepts.get(parent) {
            None => out.push(Violation::new(
                &unit.name,
                Rule::MissingParent,
                format!("parent {parent} is not defined"),
            )),
            Some(p) if !p.children.contains(&unit.name) => out.push(Violation::new(
                &unit.name,
                Rule::NotListedByParent,
                format!("parent {parent} does not list this concept as a child"),
            )),
            Some(_) => {}
        }
    } else if unit.name != ontology.root {
        out.push(Violation::new(
            &unit.name,
            Rule::MissingParent,
            "only the root may omit its parent",
        ));
    }
}

/// Parses and validates an ontology document. Depth is always recomputed.
pub fn load_ontology(document: &str) -> Result<Ontology> {
    let doc: OntologyDocument =
        serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    Ontology::build(doc.name, doc.version, doc.root, doc.concepts)
}

/// Serializes an ontology to its JSON document form.
///
/// Numbers are written with at least two fractional digits so stored
/// precisions read back as the same decimals they were authored as.
pub fn save_ontology(ontology: &Ontology) -> String {
    let doc = OntologyDocument {
        name: ontology.name.clone(),
        version: ontology.version.clone(),
        root: ontology.root.clone(),
        concepts: ontology.concepts.values().cloned().collect(),
    };
    let mut out = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut out, DecimalFormatter::new());
    doc.serialize(&mut serializer)
        .expect("ontology documents always serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// Renders an `f64` as its shortest round-trip decimal, padded to at least
/// two fractional digits.
pub(crate) fn decimal_literal(value: f64) -> String {
    let mut text = format!("{value}");
    match text.find('.') {
        None => text.push_str(".00"),
        Some(dot) => {
            let fraction = text.len() - dot - 1;
            for _ in fraction..2 {
                text.push('0');
            }
        }
    }
    text
}

struct DecimalFormatter {
    inner: PrettyFormatter<'static>,
}

impl DecimalFormatter {
    fn new() -> Self {
        Self {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Formatter for DecimalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(decimal_literal(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}
