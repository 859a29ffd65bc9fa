//! Trace generation: executing a model step by step under a policy.
//!
//! Every produced trace starts from the all-inactive state and is validated
//! step by step with the same rules the conformance checker applies, so a
//! successful simulation is conforming by construction. Policies:
//!
//! - [`SimulationPolicy::Eager`]: activate every enabled element at once and
//!   complete it after `dwell` states in Active. The workhorse for demos and
//!   for computing earliest-possible schedules.
//! - [`SimulationPolicy::UniformRandom`]: flip a fair coin per element per
//!   step between staying put and taking the forward move (activate when
//!   enabled, complete when active). Seeded, hence reproducible.
//! - [`SimulationPolicy::Scripted`]: play back explicit per-step state
//!   changes, e.g. recorded operator decisions.
//!
//! An optional overlay of scripted deltas is applied on top of any policy;
//! that is how rework is injected into an otherwise eager run: force the
//! loop's elements back and let the policy re-execute them.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conformance::Trace;
use crate::model::{DepIndex, ElementId, ProcessModel};
use crate::semantics::{self, ElementState, InstanceState, LegalityViolation};

/// Explicit state assignments keyed by time index, applied on top of the
/// previous state when the step to that index is taken.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScriptedDeltas {
    pub per_step: BTreeMap<u64, Vec<(ElementId, ElementState)>>,
}

impl ScriptedDeltas {
    pub fn new() -> ScriptedDeltas {
        ScriptedDeltas::default()
    }

    pub fn set(&mut self, t: u64, id: impl Into<ElementId>, state: ElementState) -> &mut Self {
        self.per_step.entry(t).or_default().push((id.into(), state));
        self
    }

    fn ids(&self) -> impl Iterator<Item = &ElementId> {
        self.per_step.values().flatten().map(|(id, _)| id)
    }

    fn times(&self) -> impl Iterator<Item = u64> + '_ {
        self.per_step.keys().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimulationPolicy {
    /// Take every forward move as soon as it is legal; stay in Active for
    /// `dwell` states before completing (values below 1 behave like 1).
    Eager { dwell: u64 },
    /// Per element and step, choose uniformly between staying and taking
    /// the forward move, from a ChaCha8 stream seeded with `seed`.
    UniformRandom { seed: u64 },
    /// Apply exactly the listed state changes, nothing else.
    Scripted(ScriptedDeltas),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimulationError {
    #[error("script mentions unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("script entry at t={t} outside the simulated range 1..={steps}")]
    ScriptOutOfRange { t: u64, steps: u64 },
    #[error("step to t={t} is illegal: {}", join_violations(.violations))]
    IllegalStep {
        t: u64,
        violations: Vec<LegalityViolation>,
    },
}

fn join_violations(violations: &[LegalityViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Run `model` for `steps` steps under `policy`, applying `overlay` deltas
/// on top. Returns a trace with `steps + 1` states; fails if any produced
/// step would break a rule.
pub fn simulate(
    model: &ProcessModel,
    policy: &SimulationPolicy,
    steps: u64,
    overlay: Option<&ScriptedDeltas>,
) -> Result<Trace, SimulationError> {
    let idx = model.dep_index();

    let mut scripts: Vec<&ScriptedDeltas> = Vec::new();
    if let SimulationPolicy::Scripted(script) = policy {
        scripts.push(script);
    }
    if let Some(overlay) = overlay {
        scripts.push(overlay);
    }
    for script in &scripts {
        if let Some(id) = script.ids().find(|id| !model.contains(id)) {
            return Err(SimulationError::UnknownElement(id.clone()));
        }
        if let Some(t) = script.times().find(|&t| t == 0 || t > steps) {
            return Err(SimulationError::ScriptOutOfRange { t, steps });
        }
    }

    let mut rng = match policy {
        SimulationPolicy::UniformRandom { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };

    let mut states = vec![InstanceState::all_inactive()];
    // Consecutive states each element has spent in Active, for Eager dwell.
    let mut streak: Vec<u64> = vec![0; idx.ids.len()];

    for t in 1..=steps {
        let cur = states.last().expect("at least the initial state");
        let mut next = cur.clone();

        match policy {
            SimulationPolicy::Eager { dwell } => {
                let dwell = (*dwell).max(1);
                for (i, id) in idx.ids.iter().enumerate() {
                    match cur.get(id) {
                        ElementState::Inactive if enabled(&idx, cur, i) => {
                            next.set(id.clone(), ElementState::Active);
                        }
                        ElementState::Active if streak[i] >= dwell => {
                            next.set(id.clone(), ElementState::Done);
                        }
                        _ => {}
                    }
                }
            }
            SimulationPolicy::UniformRandom { .. } => {
                let rng = rng.as_mut().expect("rng exists for the random policy");
                for (i, id) in idx.ids.iter().enumerate() {
                    let target = match cur.get(id) {
                        ElementState::Inactive if enabled(&idx, cur, i) => ElementState::Active,
                        ElementState::Active => ElementState::Done,
                        _ => continue,
                    };
                    if rng.gen_bool(0.5) {
                        next.set(id.clone(), target);
                    }
                }
            }
            SimulationPolicy::Scripted(_) => {}
        }

        for script in &scripts {
            if let Some(deltas) = script.per_step.get(&t) {
                for (id, state) in deltas {
                    next.set(id.clone(), *state);
                }
            }
        }

        let violations = semantics::check_step_indexed(&idx, cur, &next);
        if !violations.is_empty() {
            return Err(SimulationError::IllegalStep { t, violations });
        }

        for (i, id) in idx.ids.iter().enumerate() {
            streak[i] = match next.get(id) {
                ElementState::Active => streak[i] + 1,
                _ => 0,
            };
        }
        states.push(next);
    }

    Ok(Trace::new(model.name.clone(), states))
}

/// Forward activation is enabled when every prerequisite has been started.
pub(crate) fn enabled(idx: &DepIndex, state: &InstanceState, i: usize) -> bool {
    idx.pre[i]
        .iter()
        .all(|&p| state.get(&idx.ids[p]).is_started())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformance::check_trace;
    use crate::model::{ActivityKind, ArtifactKind, Association, Element, Phase};
    use ElementState::{Active, Done, Inactive};

    /// build -> binary -> review -> report, levels 1..=4.
    fn chain() -> ProcessModel {
        let mut m = ProcessModel::new("chain");
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
            Element::activity("review", Phase::Development, ActivityKind::HumanTask),
            Element::artifact("report", Phase::Development, ArtifactKind::LogicalStatement),
        ];
        m.associations = vec![
            Association::produce("build", "binary"),
            Association::require("binary", "review"),
            Association::produce("review", "report"),
        ];
        m
    }

    fn eager() -> SimulationPolicy {
        SimulationPolicy::Eager { dwell: 1 }
    }

    #[test]
    fn eager_reaches_each_element_at_its_level() {
        let model = chain();
        let trace = simulate(&model, &eager(), 6, None).unwrap();
        let levels = model.topo_levels().unwrap();
        for (id, level) in &levels {
            assert_eq!(
                trace.first_time(id, Active),
                Some(*level),
                "first activation of `{id}`"
            );
            assert_eq!(
                trace.first_time(id, Done),
                Some(*level + 1),
                "completion of `{id}`"
            );
        }
    }

    #[test]
    fn eager_dwell_delays_completion_but_not_activation() {
        let model = chain();
        let trace = simulate(&model, &SimulationPolicy::Eager { dwell: 3 }, 8, None).unwrap();
        for (id, level) in &model.topo_levels().unwrap() {
            assert_eq!(trace.first_time(id, Active), Some(*level));
            assert_eq!(trace.first_time(id, Done), Some(*level + 3));
        }
    }

    #[test]
    fn eager_trace_conforms_and_settles_all_done() {
        let model = chain();
        let trace = simulate(&model, &eager(), 8, None).unwrap();
        assert_eq!(trace.len(), 9);
        let report = check_trace(&model, &trace).unwrap();
        assert!(report.is_conforming(), "{:?}", report.violations);
        let last = trace.last_state();
        for e in &model.elements {
            assert_eq!(last.get(&e.id), Done, "`{}` should have completed", e.id);
        }
        assert_eq!(trace.state(trace.len() - 2), last, "run has settled");
    }

    #[test]
    fn random_policy_is_deterministic_per_seed() {
        let model = chain();
        let policy = SimulationPolicy::UniformRandom { seed: 7 };
        let a = simulate(&model, &policy, 12, None).unwrap();
        let b = simulate(&model, &policy, 12, None).unwrap();
        assert_eq!(a, b);
        let c = simulate(
            &model,
            &SimulationPolicy::UniformRandom { seed: 8 },
            12,
            None,
        )
        .unwrap();
        assert_ne!(a, c, "different seeds should explore different runs");
    }

    #[test]
    fn random_traces_conform_and_never_move_backward() {
        let model = chain();
        for seed in 0..20 {
            let policy = SimulationPolicy::UniformRandom { seed };
            let trace = simulate(&model, &policy, 15, None).unwrap();
            let report = check_trace(&model, &trace).unwrap();
            assert!(
                report.is_conforming(),
                "seed {seed}: {:?}",
                report.violations
            );
            for pos in 1..trace.len() {
                for e in &model.elements {
                    assert!(
                        trace.state(pos - 1).get(&e.id) <= trace.state(pos).get(&e.id),
                        "seed {seed}: `{}` moved backward at t={pos}",
                        e.id
                    );
                }
            }
        }
    }

    #[test]
    fn scripted_policy_replays_exact_states() {
        let model = chain();
        let mut script = ScriptedDeltas::new();
        script.set(1, "build", Active);
        script.set(2, "binary", Active);
        script.set(3, "build", Done).set(3, "binary", Done);
        let trace = simulate(&model, &SimulationPolicy::Scripted(script), 4, None).unwrap();
        assert_eq!(trace.len(), 5);
        assert_eq!(trace.state(2).get(&ElementId::new("binary")), Active);
        assert_eq!(trace.state(3).get(&ElementId::new("build")), Done);
        // Step 4 had no entries: stutter.
        assert_eq!(trace.state(4), trace.state(3));
    }

    #[test]
    fn illegal_script_reports_the_step_and_rule() {
        let model = chain();
        let mut script = ScriptedDeltas::new();
        script.set(1, "binary", Active); // no producer started yet
        let err = simulate(&model, &SimulationPolicy::Scripted(script), 2, None).unwrap_err();
        match err {
            SimulationError::IllegalStep { t, violations } => {
                assert_eq!(t, 1);
                // The missing producer breaks both the activation rule
                // (pre-state) and the support invariant (post-state).
                let rules: Vec<_> = violations.iter().map(|v| v.rule).collect();
                assert_eq!(
                    rules,
                    vec![semantics::RuleCode::R2Act, semantics::RuleCode::R5Inv]
                );
                for v in &violations {
                    assert_eq!(v.elements[0], ElementId::new("binary"));
                }
            }
            other => panic!("expected IllegalStep, got {other:?}"),
        }
    }

    #[test]
    fn overlay_injects_rework_into_an_eager_run() {
        let model = chain();
        // By t=2 the eager run has build done and binary active. Rework the
        // build: push it back to active and clear everything downstream.
        let mut overlay = ScriptedDeltas::new();
        overlay.set(3, "build", Active);
        overlay.set(3, "binary", Inactive);
        overlay.set(3, "review", Inactive);
        let trace = simulate(&model, &eager(), 9, Some(&overlay)).unwrap();
        let report = check_trace(&model, &trace).unwrap();
        assert!(report.is_conforming(), "{:?}", report.violations);
        assert_eq!(trace.state(3).get(&ElementId::new("build")), Active);
        assert_eq!(trace.state(3).get(&ElementId::new("binary")), Inactive);
        // The run recovers and completes again.
        for e in &model.elements {
            assert_eq!(trace.last_state().get(&e.id), Done);
        }
        // binary is completed twice: once before the rework, once after.
        let done_again = trace
            .states()
            .iter()
            .skip(4)
            .position(|s| s.get(&ElementId::new("binary")) == Done);
        assert!(done_again.is_some());
    }

    #[test]
    fn overlay_that_breaks_a_rule_is_rejected() {
        let model = chain();
        let mut overlay = ScriptedDeltas::new();
        // Reset build while review completes off the stale binary.
        overlay.set(3, "build", Inactive);
        overlay.set(3, "binary", Inactive);
        let err = simulate(&model, &eager(), 9, Some(&overlay)).unwrap_err();
        match err {
            SimulationError::IllegalStep { t, violations } => {
                assert_eq!(t, 3);
                assert!(violations
                    .iter()
                    .any(|v| v.rule == semantics::RuleCode::R5Inv));
            }
            other => panic!("expected IllegalStep, got {other:?}"),
        }
    }

    #[test]
    fn scripts_reject_unknown_elements_and_out_of_range_steps() {
        let model = chain();
        let mut script = ScriptedDeltas::new();
        script.set(1, "ghost", Active);
        assert_eq!(
            simulate(&model, &SimulationPolicy::Scripted(script), 2, None),
            Err(SimulationError::UnknownElement(ElementId::new("ghost")))
        );

        let mut late = ScriptedDeltas::new();
        late.set(5, "build", Active);
        assert_eq!(
            simulate(&model, &eager(), 3, Some(&late)),
            Err(SimulationError::ScriptOutOfRange { t: 5, steps: 3 })
        );
    }

    #[test]
    fn zero_steps_yields_just_the_initial_state() {
        let trace = simulate(&chain(), &eager(), 0, None).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(trace.state(0).is_all_inactive());
    }
}
