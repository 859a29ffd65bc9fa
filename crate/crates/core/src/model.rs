//! Core process-model types: elements, associations between them, and
//! feedback annotations.
//!
//! A process model is a directed graph over two kinds of elements.
//! Activities consume artifacts (`require`) and emit artifacts (`produce`);
//! both association kinds point "forward" along the process. Feedback
//! annotations mark intended backward jumps and carry no execution
//! semantics of their own — the step rules in [`crate::semantics`] already
//! permit the moves they describe.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Identifier for activities and artifacts.
///
/// Valid identifiers match `[a-z][a-z0-9_]*`. Construction does not
/// enforce the pattern — well-formedness checking (rule W1) does — so that
/// deliberately broken models can be built and validated in tests.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(String);

impl ElementId {
    pub fn new(id: impl Into<String>) -> Self {
        ElementId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Whether the identifier matches `[a-z][a-z0-9_]*`.
    pub fn is_valid(&self) -> bool {
        let mut chars = self.0.chars();
        match chars.next() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        ElementId::new(s)
    }
}

/// Process phase, ordered by when it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Planning,
    Development,
    Deployment,
    Operations,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::Planning,
        Phase::Development,
        Phase::Deployment,
        Phase::Operations,
    ];

    /// Keyword used in the model format.
    pub fn keyword(self) -> &'static str {
        match self {
            Phase::Planning => "planning",
            Phase::Development => "development",
            Phase::Deployment => "deployment",
            Phase::Operations => "operations",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Phase> {
        Phase::ALL.into_iter().find(|p| p.keyword() == word)
    }

    /// Capitalized label for rendered output.
    pub fn label(self) -> &'static str {
        match self {
            Phase::Planning => "Planning",
            Phase::Development => "Development",
            Phase::Deployment => "Deployment",
            Phase::Operations => "Operations",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActivityKind {
    /// Carried out by people; progress is reported, not observed.
    HumanTask,
    /// Fully automated; can run without supervision.
    AutomatedProcedure,
}

impl ActivityKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ActivityKind::HumanTask => "human",
            ActivityKind::AutomatedProcedure => "automated",
        }
    }

    pub fn from_keyword(word: &str) -> Option<ActivityKind> {
        match word {
            "human" => Some(ActivityKind::HumanTask),
            "automated" => Some(ActivityKind::AutomatedProcedure),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArtifactKind {
    /// Data sets and raw inputs.
    Data,
    /// Logical statements: specifications, indicator sets, verdicts, seals.
    LogicalStatement,
    /// Functional descriptions: models and other executable artifacts.
    FunctionalDescription,
}

impl ArtifactKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ArtifactKind::Data => "data",
            ArtifactKind::LogicalStatement => "logical",
            ArtifactKind::FunctionalDescription => "functional",
        }
    }

    pub fn from_keyword(word: &str) -> Option<ArtifactKind> {
        match word {
            "data" => Some(ArtifactKind::Data),
            "logical" => Some(ArtifactKind::LogicalStatement),
            "functional" => Some(ArtifactKind::FunctionalDescription),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Activity(ActivityKind),
    Artifact(ArtifactKind),
}

impl ElementKind {
    pub fn is_activity(self) -> bool {
        matches!(self, ElementKind::Activity(_))
    }

    pub fn is_artifact(self) -> bool {
        matches!(self, ElementKind::Artifact(_))
    }
}

/// A node of the process graph: either an activity or an artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub id: ElementId,
    pub kind: ElementKind,
    pub phase: Phase,
    /// Free-text organizational label; empty when unset.
    pub lane: String,
    /// Human-readable name; empty when unset (output falls back to the id).
    pub display_name: String,
    /// External artifacts originate outside the process and need no
    /// producing activity. Only artifacts may be external.
    pub external: bool,
}

impl Element {
    pub fn activity(id: impl Into<String>, phase: Phase, kind: ActivityKind) -> Element {
        Element {
            id: ElementId::new(id),
            kind: ElementKind::Activity(kind),
            phase,
            lane: String::new(),
            display_name: String::new(),
            external: false,
        }
    }

    pub fn artifact(id: impl Into<String>, phase: Phase, kind: ArtifactKind) -> Element {
        Element {
            id: ElementId::new(id),
            kind: ElementKind::Artifact(kind),
            phase,
            lane: String::new(),
            display_name: String::new(),
            external: false,
        }
    }

    pub fn external_artifact(id: impl Into<String>, phase: Phase, kind: ArtifactKind) -> Element {
        let mut e = Element::artifact(id, phase, kind);
        e.external = true;
        e
    }

    pub fn with_lane(mut self, lane: impl Into<String>) -> Element {
        self.lane = lane.into();
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Element {
        self.display_name = name.into();
        self
    }

    /// Display name if set, otherwise the id.
    pub fn label(&self) -> &str {
        if self.display_name.is_empty() {
            self.id.as_str()
        } else {
            &self.display_name
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssociationKind {
    /// Activity -> artifact: the activity emits the artifact.
    Produce,
    /// Artifact -> activity: the activity needs the artifact.
    Require,
}

/// A directed association. `from -> to` always points forward along the
/// process: Produce goes activity to artifact, Require artifact to activity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Association {
    pub kind: AssociationKind,
    pub from: ElementId,
    pub to: ElementId,
}

impl Association {
    pub fn produce(from: impl Into<String>, to: impl Into<String>) -> Association {
        Association {
            kind: AssociationKind::Produce,
            from: ElementId::new(from),
            to: ElementId::new(to),
        }
    }

    pub fn require(from: impl Into<String>, to: impl Into<String>) -> Association {
        Association {
            kind: AssociationKind::Require,
            from: ElementId::new(from),
            to: ElementId::new(to),
        }
    }
}

/// Documentation of an intended backward jump: when `source` turns out
/// unsatisfactory, work resumes at `target`. The target must lie strictly
/// earlier in the dependency order (checked as rule W6).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeedbackAnnotation {
    pub source: ElementId,
    pub target: ElementId,
    /// Free-text label; empty when unset.
    pub label: String,
}

impl FeedbackAnnotation {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> FeedbackAnnotation {
        FeedbackAnnotation {
            source: ElementId::new(source),
            target: ElementId::new(target),
            label: String::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> FeedbackAnnotation {
        self.label = label.into();
        self
    }
}

/// A complete process model. Declaration order is preserved (validation
/// must be able to see duplicates), but equality and all derived views are
/// order-independent.
#[derive(Debug, Clone, Eq)]
pub struct ProcessModel {
    pub name: String,
    pub elements: Vec<Element>,
    pub associations: Vec<Association>,
    pub feedback: Vec<FeedbackAnnotation>,
}

impl PartialEq for ProcessModel {
    fn eq(&self, other: &Self) -> bool {
        fn sorted<T: Clone + Ord>(v: &[T]) -> Vec<T> {
            let mut v = v.to_vec();
            v.sort();
            v
        }
        let mut a = self.elements.clone();
        let mut b = other.elements.clone();
        a.sort_by(|x, y| x.id.cmp(&y.id));
        b.sort_by(|x, y| x.id.cmp(&y.id));
        self.name == other.name
            && a == b
            && sorted(&self.associations) == sorted(&other.associations)
            && sorted(&self.feedback) == sorted(&other.feedback)
    }
}

/// Errors from model queries.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("association graph has a cycle involving: {}", join_ids(.0))]
    Cycle(Vec<ElementId>),
}

fn join_ids(ids: &[ElementId]) -> String {
    ids.iter()
        .map(ElementId::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

impl ProcessModel {
    pub fn new(name: impl Into<String>) -> ProcessModel {
        ProcessModel {
            name: name.into(),
            elements: Vec::new(),
            associations: Vec::new(),
            feedback: Vec::new(),
        }
    }

    pub fn element(&self, id: &ElementId) -> Option<&Element> {
        self.elements.iter().find(|e| &e.id == id)
    }

    pub fn contains(&self, id: &ElementId) -> bool {
        self.element(id).is_some()
    }

    pub fn activities(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(|e| e.kind.is_activity())
    }

    pub fn artifacts(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(|e| e.kind.is_artifact())
    }

    /// All element ids in lexicographic order.
    pub fn element_ids(&self) -> BTreeSet<ElementId> {
        self.elements.iter().map(|e| e.id.clone()).collect()
    }

    /// Direct prerequisites of `id`: for an activity the artifacts it
    /// requires, for an artifact the activities that produce it.
    pub fn pre(&self, id: &ElementId) -> Result<BTreeSet<ElementId>, ModelError> {
        if !self.contains(id) {
            return Err(ModelError::UnknownElement(id.clone()));
        }
        Ok(self
            .associations
            .iter()
            .filter(|a| &a.to == id)
            .map(|a| a.from.clone())
            .collect())
    }

    /// Direct dependents of `id`; exact inverse of [`ProcessModel::pre`].
    pub fn post(&self, id: &ElementId) -> Result<BTreeSet<ElementId>, ModelError> {
        if !self.contains(id) {
            return Err(ModelError::UnknownElement(id.clone()));
        }
        Ok(self
            .associations
            .iter()
            .filter(|a| &a.from == id)
            .map(|a| a.to.clone())
            .collect())
    }

    /// Dependency depth of every element: 1 for elements with no
    /// prerequisites, otherwise one more than the deepest prerequisite.
    ///
    /// This is the earliest step at which an element can become Active, so
    /// it doubles as a lower bound for reachability queries.
    pub fn topo_levels(&self) -> Result<BTreeMap<ElementId, u64>, ModelError> {
        let ids = self.element_ids();
        // In-degree counting over associations with known endpoints;
        // dangling references are a W7 matter, not a cycle.
        let mut indegree: BTreeMap<&ElementId, usize> = ids.iter().map(|id| (id, 0)).collect();
        let mut out: BTreeMap<&ElementId, BTreeSet<&ElementId>> =
            ids.iter().map(|id| (id, BTreeSet::new())).collect();
        let mut incoming: BTreeMap<&ElementId, BTreeSet<&ElementId>> =
            ids.iter().map(|id| (id, BTreeSet::new())).collect();
        for a in &self.associations {
            if let (Some(from), Some(to)) = (ids.get(&a.from), ids.get(&a.to)) {
                if incoming.get_mut(to).unwrap().insert(from) {
                    out.get_mut(from).unwrap().insert(to);
                    *indegree.get_mut(to).unwrap() += 1;
                }
            }
        }

        let mut levels: BTreeMap<ElementId, u64> = BTreeMap::new();
        let mut ready: Vec<&ElementId> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(id, _)| *id)
            .collect();
        while let Some(id) = ready.pop() {
            let level = incoming[id]
                .iter()
                .map(|p| levels[*p])
                .max()
                .map_or(1, |m| m + 1);
            levels.insert(id.clone(), level);
            for succ in &out[id] {
                let d = indegree.get_mut(succ).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(succ);
                }
            }
        }

        if levels.len() != ids.len() {
            let stuck: Vec<ElementId> = ids
                .iter()
                .filter(|id| !levels.contains_key(*id))
                .cloned()
                .collect();
            return Err(ModelError::Cycle(stuck));
        }
        Ok(levels)
    }

    /// Index-based dependency view used by the execution engine.
    pub(crate) fn dep_index(&self) -> DepIndex {
        let ids: Vec<ElementId> = self.element_ids().into_iter().collect();
        let index_of: BTreeMap<ElementId, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let mut pre = vec![BTreeSet::new(); ids.len()];
        let mut post = vec![BTreeSet::new(); ids.len()];
        for a in &self.associations {
            if let (Some(&f), Some(&t)) = (index_of.get(&a.from), index_of.get(&a.to)) {
                pre[t].insert(f);
                post[f].insert(t);
            }
        }
        DepIndex {
            ids,
            index_of,
            pre: pre.into_iter().map(|s| s.into_iter().collect()).collect(),
            post: post.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }
}

/// Dense adjacency built once per engine operation: elements are numbered
/// by lexicographic id order.
#[derive(Debug, Clone)]
pub(crate) struct DepIndex {
    pub ids: Vec<ElementId>,
    pub index_of: BTreeMap<ElementId, usize>,
    pub pre: Vec<Vec<usize>>,
    pub post: Vec<Vec<usize>>,
}

impl DepIndex {
    pub fn len(&self) -> usize {
        self.ids.len()
    }
}
