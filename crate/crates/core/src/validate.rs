//! Well-formedness checking for process models.
//!
//! Validation is a separate, explicit step: models can always be
//! constructed, including deliberately broken ones, and this module reports
//! everything wrong with them. An empty violation list means the model is
//! well-formed; warnings flag legal-but-unusual structure.
//!
//! Rules:
//! - W1: duplicate or invalid element id
//! - W2: association or feedback endpoint has the wrong element kind
//! - W3: activity produces nothing
//! - W4: non-external artifact has no producer
//! - W5: association graph has a cycle
//! - W6: feedback annotation does not point strictly backwards
//! - W7: association or feedback references an unknown id

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{AssociationKind, ElementId, ModelError, ProcessModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WellFormednessRule {
    W1InvalidId,
    W2EndpointKind,
    W3ActivityProducesNothing,
    W4ArtifactUnproduced,
    W5Cycle,
    W6FeedbackNotBackward,
    W7UnknownReference,
}

impl WellFormednessRule {
    pub fn code(self) -> &'static str {
        match self {
            WellFormednessRule::W1InvalidId => "W1",
            WellFormednessRule::W2EndpointKind => "W2",
            WellFormednessRule::W3ActivityProducesNothing => "W3",
            WellFormednessRule::W4ArtifactUnproduced => "W4",
            WellFormednessRule::W5Cycle => "W5",
            WellFormednessRule::W6FeedbackNotBackward => "W6",
            WellFormednessRule::W7UnknownReference => "W7",
        }
    }
}

impl fmt::Display for WellFormednessRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WellFormednessViolation {
    pub rule: WellFormednessRule,
    /// Involved element ids, primary offender first.
    pub elements: Vec<ElementId>,
    pub message: String,
}

impl fmt::Display for WellFormednessViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.rule, self.message)
    }
}

/// Legal but suspicious structure, e.g. an artifact with several producers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModelWarning {
    pub elements: Vec<ElementId>,
    pub message: String,
}

impl fmt::Display for ModelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning: {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WellFormednessReport {
    pub violations: Vec<WellFormednessViolation>,
    pub warnings: Vec<ModelWarning>,
}

impl WellFormednessReport {
    /// Well-formed means zero violations; warnings do not count.
    pub fn is_well_formed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_rule(&self, rule: WellFormednessRule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// Check every rule and report all findings, canonically ordered.
///
/// The result is independent of declaration order: findings are sorted by
/// (rule, elements, message).
pub fn validate(model: &ProcessModel) -> WellFormednessReport {
    let mut violations = Vec::new();
    let mut warnings = Vec::new();

    let known: BTreeSet<&ElementId> = model.elements.iter().map(|e| &e.id).collect();

    // W1: invalid ids, then duplicate ids.
    let mut seen: BTreeMap<&ElementId, usize> = BTreeMap::new();
    for e in &model.elements {
        *seen.entry(&e.id).or_insert(0) += 1;
    }
    for (id, count) in &seen {
        if !id.is_valid() {
            violations.push(WellFormednessViolation {
                rule: WellFormednessRule::W1InvalidId,
                elements: vec![(*id).clone()],
                message: format!("element id `{id}` does not match [a-z][a-z0-9_]*"),
            });
        }
        if *count > 1 {
            violations.push(WellFormednessViolation {
                rule: WellFormednessRule::W1InvalidId,
                elements: vec![(*id).clone()],
                message: format!("element id `{id}` declared {count} times"),
            });
        }
    }

    // W7 for associations, W2 for those whose endpoints exist.
    for a in &model.associations {
        let mut unknown = Vec::new();
        for end in [&a.from, &a.to] {
            if !known.contains(end) {
                unknown.push(end.clone());
            }
        }
        let (verb, ok) = match a.kind {
            AssociationKind::Produce => ("produce", endpoint_kinds(model, a, true)),
            AssociationKind::Require => ("require", endpoint_kinds(model, a, false)),
        };
        if !unknown.is_empty() {
            violations.push(WellFormednessViolation {
                rule: WellFormednessRule::W7UnknownReference,
                elements: unknown.clone(),
                message: format!(
                    "{verb} {} -> {} references unknown element{} {}",
                    a.from,
                    a.to,
                    if unknown.len() > 1 { "s" } else { "" },
                    unknown
                        .iter()
                        .map(|id| format!("`{id}`"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            });
        } else if !ok {
            let (want_from, want_to) = match a.kind {
                AssociationKind::Produce => ("an activity", "an artifact"),
                AssociationKind::Require => ("an artifact", "an activity"),
            };
            violations.push(WellFormednessViolation {
                rule: WellFormednessRule::W2EndpointKind,
                elements: vec![a.from.clone(), a.to.clone()],
                message: format!(
                    "{verb} {} -> {} must go from {want_from} to {want_to}",
                    a.from, a.to
                ),
            });
        }
    }

    // W3: every activity must produce something.
    let producers: BTreeSet<&ElementId> = model
        .associations
        .iter()
        .filter(|a| a.kind == AssociationKind::Produce)
        .map(|a| &a.from)
        .collect();
    for e in model.activities() {
        if !producers.contains(&e.id) {
            violations.push(WellFormednessViolation {
                rule: WellFormednessRule::W3ActivityProducesNothing,
                elements: vec![e.id.clone()],
                message: format!("activity `{}` has no produce association", e.id),
            });
        }
    }

    // W4: every non-external artifact needs a producer. Several producers
    // are allowed (alternative paths) but worth a warning.
    let mut produced_by: BTreeMap<&ElementId, BTreeSet<&ElementId>> = BTreeMap::new();
    for a in &model.associations {
        if a.kind == AssociationKind::Produce && known.contains(&a.to) {
            produced_by.entry(&a.to).or_default().insert(&a.from);
        }
    }
    for e in model.artifacts() {
        let n = produced_by.get(&e.id).map_or(0, BTreeSet::len);
        if n == 0 && !e.external {
            violations.push(WellFormednessViolation {
                rule: WellFormednessRule::W4ArtifactUnproduced,
                elements: vec![e.id.clone()],
                message: format!(
                    "artifact `{}` is not external and nothing produces it",
                    e.id
                ),
            });
        }
        if n > 1 {
            let mut involved = vec![e.id.clone()];
            involved.extend(produced_by[&e.id].iter().map(|id| (*id).clone()));
            warnings.push(ModelWarning {
                elements: involved,
                message: format!(
                    "artifact `{}` has {n} producers: {}",
                    e.id,
                    produced_by[&e.id]
                        .iter()
                        .map(|id| id.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            });
        }
    }

    // W5: the association graph must be acyclic.
    if let Err(ModelError::Cycle(members)) = model.topo_levels() {
        violations.push(WellFormednessViolation {
            rule: WellFormednessRule::W5Cycle,
            elements: members.clone(),
            message: format!(
                "association graph has a cycle involving: {}",
                members
                    .iter()
                    .map(|id| id.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        });
    }

    // Feedback annotations: W7 unknown ends, W2 non-artifact source,
    // W6 not strictly backwards (target must be a strict ancestor of the
    // source in the association graph).
    for f in &model.feedback {
        let mut unknown = Vec::new();
        for end in [&f.source, &f.target] {
            if !known.contains(end) {
                unknown.push(end.clone());
            }
        }
        if !unknown.is_empty() {
            violations.push(WellFormednessViolation {
                rule: WellFormednessRule::W7UnknownReference,
                elements: unknown.clone(),
                message: format!(
                    "feedback {} -> {} references unknown element{} {}",
                    f.source,
                    f.target,
                    if unknown.len() > 1 { "s" } else { "" },
                    unknown
                        .iter()
                        .map(|id| format!("`{id}`"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            });
            continue;
        }
        if model
            .element(&f.source)
            .is_some_and(|e| !e.kind.is_artifact())
        {
            violations.push(WellFormednessViolation {
                rule: WellFormednessRule::W2EndpointKind,
                elements: vec![f.source.clone()],
                message: format!("feedback source `{}` must be an artifact", f.source),
            });
        }
        if !is_strict_ancestor(model, &f.target, &f.source) {
            violations.push(WellFormednessViolation {
                rule: WellFormednessRule::W6FeedbackNotBackward,
                elements: vec![f.source.clone(), f.target.clone()],
                message: format!(
                    "feedback {} -> {} does not point strictly backwards: `{}` is not a strict ancestor of `{}`",
                    f.source, f.target, f.target, f.source
                ),
            });
        }
    }

    violations.sort();
    warnings.sort();
    WellFormednessReport {
        violations,
        warnings,
    }
}

fn endpoint_kinds(model: &ProcessModel, a: &crate::model::Association, produce: bool) -> bool {
    let from = model.element(&a.from);
    let to = model.element(&a.to);
    match (from, to) {
        (Some(f), Some(t)) => {
            if produce {
                f.kind.is_activity() && t.kind.is_artifact()
            } else {
                f.kind.is_artifact() && t.kind.is_activity()
            }
        }
        // Unknown endpoints are W7's business.
        _ => true,
    }
}

/// Is there a non-empty association path `from -> ... -> to`?
fn is_strict_ancestor(model: &ProcessModel, from: &ElementId, to: &ElementId) -> bool {
    if from == to {
        return false;
    }
    let mut stack: Vec<&ElementId> = vec![from];
    let mut seen: BTreeSet<&ElementId> = BTreeSet::new();
    while let Some(cur) = stack.pop() {
        for a in &model.associations {
            if &a.from == cur {
                if &a.to == to {
                    return true;
                }
                if seen.insert(&a.to) {
                    stack.push(&a.to);
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ActivityKind, ArtifactKind, Association, Element, FeedbackAnnotation, Phase,
    };

    fn valid_pair() -> ProcessModel {
        let mut m = ProcessModel::new("pair");
        m.elements = vec![
            Element::activity(
                "build",
                Phase::Development,
                ActivityKind::AutomatedProcedure,
            ),
            Element::artifact(
                "binary",
                Phase::Development,
                ArtifactKind::FunctionalDescription,
            ),
        ];
        m.associations = vec![Association::produce("build", "binary")];
        m
    }

    #[test]
    fn valid_model_has_empty_report() {
        let report = validate(&valid_pair());
        assert!(report.is_well_formed());
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn lone_activity_without_produce_is_exactly_w3() {
        let mut m = ProcessModel::new("lonely");
        m.elements = vec![Element::activity(
            "ponder",
            Phase::Planning,
            ActivityKind::HumanTask,
        )];
        let report = validate(&m);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(
            report.violations[0].rule,
            WellFormednessRule::W3ActivityProducesNothing
        );
        assert_eq!(
            report.violations[0].elements,
            vec![ElementId::new("ponder")]
        );
    }

    #[test]
    fn produce_require_two_cycle_is_w5() {
        // The activity both produces and requires the same artifact.
        let mut m = valid_pair();
        m.associations.push(Association::require("binary", "build"));
        let report = validate(&m);
        assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
        assert_eq!(report.violations[0].rule, WellFormednessRule::W5Cycle);
    }

    #[test]
    fn duplicate_and_invalid_ids_are_w1() {
        let mut m = valid_pair();
        m.elements.push(Element::artifact(
            "binary",
            Phase::Development,
            ArtifactKind::Data,
        ));
        m.elements.push(Element::artifact(
            "Bad-Id",
            Phase::Development,
            ArtifactKind::Data,
        ));
        let report = validate(&m);
        let w1: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.rule == WellFormednessRule::W1InvalidId)
            .collect();
        assert_eq!(w1.len(), 2);
        // The invalid id is also an unproduced artifact; that is expected.
        assert!(report.has_rule(WellFormednessRule::W4ArtifactUnproduced));
    }

    #[test]
    fn wrong_endpoint_kinds_are_w2() {
        let mut m = valid_pair();
        // Artifact "producing" an activity is backwards on both ends.
        m.associations.push(Association {
            kind: AssociationKind::Produce,
            from: ElementId::new("binary"),
            to: ElementId::new("build"),
        });
        let report = validate(&m);
        assert!(report.has_rule(WellFormednessRule::W2EndpointKind));
    }

    #[test]
    fn unproduced_artifact_is_w4_unless_external() {
        let mut m = valid_pair();
        m.elements.push(Element::artifact(
            "dataset",
            Phase::Development,
            ArtifactKind::Data,
        ));
        let report = validate(&m);
        assert!(report.has_rule(WellFormednessRule::W4ArtifactUnproduced));

        let mut m2 = valid_pair();
        m2.elements.push(Element::external_artifact(
            "dataset",
            Phase::Development,
            ArtifactKind::Data,
        ));
        assert!(validate(&m2).is_well_formed());
    }

    #[test]
    fn forward_feedback_is_w6() {
        let mut m = valid_pair();
        m.elements.push(Element::external_artifact(
            "contract",
            Phase::Planning,
            ArtifactKind::LogicalStatement,
        ));
        m.associations
            .push(Association::require("contract", "build"));
        // Forward: contract precedes binary, so this points the wrong way.
        m.feedback = vec![FeedbackAnnotation::new("contract", "binary")];
        let report = validate(&m);
        assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
        assert_eq!(
            report.violations[0].rule,
            WellFormednessRule::W6FeedbackNotBackward
        );

        // Backwards: binary is downstream of contract.
        let mut ok = m.clone();
        ok.feedback = vec![FeedbackAnnotation::new("binary", "contract")];
        assert!(validate(&ok).is_well_formed(), "{:?}", validate(&ok));
    }

    #[test]
    fn self_feedback_is_w6() {
        let mut m = valid_pair();
        m.feedback = vec![FeedbackAnnotation::new("binary", "binary")];
        assert!(validate(&m).has_rule(WellFormednessRule::W6FeedbackNotBackward));
    }

    #[test]
    fn feedback_from_activity_is_w2() {
        let mut m = valid_pair();
        // Source must be an artifact; build is an activity. The direction
        // itself is fine (build is an ancestor of binary... it is not a
        // strict ancestor of build), so W6 fires too — both are reported.
        m.feedback = vec![FeedbackAnnotation::new("build", "build")];
        let report = validate(&m);
        assert!(report.has_rule(WellFormednessRule::W2EndpointKind));
    }

    #[test]
    fn unknown_references_are_w7() {
        let mut m = valid_pair();
        m.associations.push(Association::require("ghost", "build"));
        m.feedback = vec![FeedbackAnnotation::new("binary", "phantom")];
        let report = validate(&m);
        let w7: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.rule == WellFormednessRule::W7UnknownReference)
            .collect();
        assert_eq!(w7.len(), 2);
    }

    #[test]
    fn multi_producer_is_a_warning_not_a_violation() {
        let mut m = valid_pair();
        m.elements.push(Element::activity(
            "rebuild",
            Phase::Development,
            ActivityKind::AutomatedProcedure,
        ));
        m.associations
            .push(Association::produce("rebuild", "binary"));
        let report = validate(&m);
        assert!(report.is_well_formed(), "{:?}", report.violations);
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].message.contains("2 producers"));
    }

    #[test]
    fn report_is_order_independent() {
        let mut m = valid_pair();
        m.elements.push(Element::artifact(
            "dataset",
            Phase::Development,
            ArtifactKind::Data,
        ));
        m.associations.push(Association::require("ghost", "build"));
        let mut permuted = m.clone();
        permuted.elements.reverse();
        permuted.associations.reverse();
        assert_eq!(validate(&m), validate(&permuted));
    }
}
