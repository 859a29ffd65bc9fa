//! Small-step execution semantics for process instances.
//!
//! An instance assigns each element one of three states. Steps move any
//! number of elements at once; a step is legal when every per-element move
//! and every cross-element constraint holds:
//!
//! - R2_ACT: an element may switch Inactive -> Active only if every
//!   prerequisite was Active or Done in the pre-state.
//! - R3_DONE: an element may be Done only if it was Active or Done before;
//!   it must have spent at least one full step Active.
//! - R4_RESET: an element may move backwards (Active -> Inactive, or out of
//!   Done) only if every dependent ends the step Active or Inactive — a
//!   reset drags everything built on top of the old result out of Done in
//!   the same synchronized step.
//! - R5_INV: at no time may an element be Active while some prerequisite is
//!   Inactive (the support invariant).
//!
//! R1_INIT (traces start all-Inactive) and R6_TIME (well-formed time
//! indexes) are whole-trace rules, reported by [`crate::conformance`].

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::model::{DepIndex, ElementId, ProcessModel};

/// State of a single element at one point in time, ordered by progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementState {
    Inactive,
    Active,
    Done,
}

impl ElementState {
    pub const ALL: [ElementState; 3] = [
        ElementState::Inactive,
        ElementState::Active,
        ElementState::Done,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ElementState::Inactive => "inactive",
            ElementState::Active => "active",
            ElementState::Done => "done",
        }
    }

    pub fn from_keyword(word: &str) -> Option<ElementState> {
        ElementState::ALL.into_iter().find(|s| s.keyword() == word)
    }

    /// Active or Done.
    pub fn is_started(self) -> bool {
        self != ElementState::Inactive
    }
}

impl fmt::Display for ElementState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Total assignment of element states at one instant.
///
/// Stored sparsely: only non-Inactive elements are kept, every other id
/// reads as Inactive. This keeps equality, ordering and hashing canonical
/// without knowing the model's element set.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceState(BTreeMap<ElementId, ElementState>);

impl InstanceState {
    pub fn all_inactive() -> InstanceState {
        InstanceState::default()
    }

    pub fn get(&self, id: &ElementId) -> ElementState {
        self.0.get(id).copied().unwrap_or(ElementState::Inactive)
    }

    pub fn set(&mut self, id: ElementId, state: ElementState) {
        if state == ElementState::Inactive {
            self.0.remove(&id);
        } else {
            self.0.insert(id, state);
        }
    }

    pub fn with(mut self, id: impl Into<String>, state: ElementState) -> InstanceState {
        self.set(ElementId::new(id), state);
        self
    }

    pub fn is_all_inactive(&self) -> bool {
        self.0.is_empty()
    }

    /// Non-Inactive entries in id order.
    pub fn non_inactive(&self) -> impl Iterator<Item = (&ElementId, ElementState)> {
        self.0.iter().map(|(id, s)| (id, *s))
    }

    /// Ids this state mentions (i.e. holds in a non-Inactive state).
    pub fn mentioned_ids(&self) -> impl Iterator<Item = &ElementId> {
        self.0.keys()
    }
}

/// The six legality rule codes shared by step checking and trace checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleCode {
    R1Init,
    R2Act,
    R3Done,
    R4Reset,
    R5Inv,
    R6Time,
}

impl RuleCode {
    pub fn code(self) -> &'static str {
        match self {
            RuleCode::R1Init => "R1_INIT",
            RuleCode::R2Act => "R2_ACT",
            RuleCode::R3Done => "R3_DONE",
            RuleCode::R4Reset => "R4_RESET",
            RuleCode::R5Inv => "R5_INV",
            RuleCode::R6Time => "R6_TIME",
        }
    }
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LegalityViolation {
    pub rule: RuleCode,
    /// Involved element ids, primary offender first.
    pub elements: Vec<ElementId>,
    pub message: String,
}

impl fmt::Display for LegalityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.rule, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("state mentions element `{0}` which is not in the model")]
    UnknownElement(ElementId),
}

/// The state every instance starts in: all elements Inactive.
pub fn initial_state(_model: &ProcessModel) -> InstanceState {
    InstanceState::all_inactive()
}

fn is_backward(before: ElementState, after: ElementState) -> bool {
    after < before
}

fn check_known(model: &ProcessModel, state: &InstanceState) -> Result<(), SemanticsError> {
    for id in state.mentioned_ids() {
        if !model.contains(id) {
            return Err(SemanticsError::UnknownElement(id.clone()));
        }
    }
    Ok(())
}

/// Check one step `s -> s_next` against rules R2-R5.
///
/// Reports every violation, in element order with per-element rule order
/// R2, R3, R4, R5. An empty list means the step is legal; elements that do
/// not move are always fine (stuttering is legal).
pub fn check_step(
    model: &ProcessModel,
    s: &InstanceState,
    s_next: &InstanceState,
) -> Result<Vec<LegalityViolation>, SemanticsError> {
    check_known(model, s)?;
    check_known(model, s_next)?;
    let idx = model.dep_index();
    Ok(check_step_indexed(&idx, s, s_next))
}

/// Rule checking against a prebuilt index; used by the hot paths.
pub(crate) fn check_step_indexed(
    idx: &DepIndex,
    s: &InstanceState,
    s_next: &InstanceState,
) -> Vec<LegalityViolation> {
    let cur: Vec<ElementState> = idx.ids.iter().map(|id| s.get(id)).collect();
    let nxt: Vec<ElementState> = idx.ids.iter().map(|id| s_next.get(id)).collect();
    let mut violations = Vec::new();

    for (i, id) in idx.ids.iter().enumerate() {
        // R2_ACT: fresh activation needs every prerequisite started in s.
        if cur[i] == ElementState::Inactive && nxt[i] == ElementState::Active {
            let missing: Vec<&ElementId> = idx.pre[i]
                .iter()
                .filter(|&&p| !cur[p].is_started())
                .map(|&p| &idx.ids[p])
                .collect();
            if !missing.is_empty() {
                violations.push(LegalityViolation {
                    rule: RuleCode::R2Act,
                    elements: std::iter::once(id)
                        .chain(missing.iter().copied())
                        .cloned()
                        .collect(),
                    message: format!(
                        "`{id}` activates while prerequisite{} {} inactive",
                        if missing.len() > 1 { "s" } else { "" },
                        list(&missing, "are", "is"),
                    ),
                });
            }
        }

        // R3_DONE: Done needs a full step of being Active first.
        if nxt[i] == ElementState::Done && cur[i] == ElementState::Inactive {
            violations.push(LegalityViolation {
                rule: RuleCode::R3Done,
                elements: vec![id.clone()],
                message: format!("`{id}` jumps from inactive to done without being active"),
            });
        }

        // R4_RESET: moving backwards requires every dependent to end the
        // step out of Done.
        if is_backward(cur[i], nxt[i]) {
            let stuck: Vec<&ElementId> = idx.post[i]
                .iter()
                .filter(|&&q| nxt[q] == ElementState::Done)
                .map(|&q| &idx.ids[q])
                .collect();
            if !stuck.is_empty() {
                violations.push(LegalityViolation {
                    rule: RuleCode::R4Reset,
                    elements: std::iter::once(id)
                        .chain(stuck.iter().copied())
                        .cloned()
                        .collect(),
                    message: format!(
                        "`{id}` moves backwards while dependent{} {} still done",
                        if stuck.len() > 1 { "s" } else { "" },
                        list(&stuck, "are", "is"),
                    ),
                });
            }
        }

        // R5_INV: no element may be Active without full support.
        if nxt[i] == ElementState::Active {
            let unsupported: Vec<&ElementId> = idx.pre[i]
                .iter()
                .filter(|&&p| !nxt[p].is_started())
                .map(|&p| &idx.ids[p])
                .collect();
            if !unsupported.is_empty() {
                violations.push(LegalityViolation {
                    rule: RuleCode::R5Inv,
                    elements: std::iter::once(id)
                        .chain(unsupported.iter().copied())
                        .cloned()
                        .collect(),
                    message: format!(
                        "`{id}` is active while prerequisite{} {} inactive",
                        if unsupported.len() > 1 { "s" } else { "" },
                        list(&unsupported, "are", "is"),
                    ),
                });
            }
        }
    }
    violations
}

fn list(ids: &[&ElementId], plural: &str, singular: &str) -> String {
    let names = ids
        .iter()
        .map(|id| format!("`{id}`"))
        .collect::<Vec<_>>()
        .join(", ");
    if ids.len() > 1 {
        format!("{names} {plural}")
    } else {
        format!("{names} {singular}")
    }
}

/// All legal successor states of `s`, yielded lazily in canonical order:
/// elements vary in lexicographic id order, each through Inactive < Active
/// < Done. The stutter step (every element keeps its state) is always
/// among the successors.
pub fn successors(model: &ProcessModel, s: &InstanceState) -> Result<Successors, SemanticsError> {
    check_known(model, s)?;
    let idx = model.dep_index();
    Ok(Successors::new(idx, s, None))
}

/// Like [`successors`] but only elements flagged in `movable` may change
/// state; the rest are pinned to their current state. Used by searches
/// restricted to a goal's dependency cone.
pub(crate) fn successors_restricted(
    idx: DepIndex,
    s: &InstanceState,
    movable: Vec<bool>,
) -> Successors {
    Successors::new(idx, s, Some(movable))
}

pub struct Successors {
    idx: DepIndex,
    cur: Vec<ElementState>,
    /// Per-element candidate next-states, in Inactive < Active < Done order,
    /// pre-filtered by the purely local rules (R2 against `cur`, R3).
    options: Vec<Vec<ElementState>>,
    /// Current choice index per element; drives odometer-style backtracking.
    choice: Vec<usize>,
    /// How many elements currently have a committed choice.
    depth: usize,
    exhausted: bool,
}

impl Successors {
    fn new(idx: DepIndex, s: &InstanceState, movable: Option<Vec<bool>>) -> Successors {
        let n = idx.len();
        let cur: Vec<ElementState> = idx.ids.iter().map(|id| s.get(id)).collect();
        let options: Vec<Vec<ElementState>> = (0..n)
            .map(|i| {
                if movable.as_ref().is_some_and(|m| !m[i]) {
                    return vec![cur[i]];
                }
                match cur[i] {
                    ElementState::Inactive => {
                        let enabled = idx.pre[i].iter().all(|&p| cur[p].is_started());
                        if enabled {
                            vec![ElementState::Inactive, ElementState::Active]
                        } else {
                            vec![ElementState::Inactive]
                        }
                    }
                    ElementState::Active => ElementState::ALL.to_vec(),
                    ElementState::Done => ElementState::ALL.to_vec(),
                }
            })
            .collect();
        Successors {
            idx,
            cur,
            options,
            choice: vec![0; n],
            depth: 0,
            exhausted: false,
        }
    }

    /// Cross-element constraints for element `i` against already-chosen
    /// neighbors (indices < depth). Each R4/R5 edge instance is checked
    /// exactly once: when its lexicographically later endpoint is chosen.
    fn consistent(&self, i: usize, v: ElementState) -> bool {
        let backward_i = is_backward(self.cur[i], v);
        for &p in &self.idx.pre[i] {
            if p >= i {
                continue;
            }
            let vp = self.options[p][self.choice[p]];
            // R5: i active needs p started.
            if v == ElementState::Active && !vp.is_started() {
                return false;
            }
            // R4: p moving backwards needs i out of Done.
            if is_backward(self.cur[p], vp) && v == ElementState::Done {
                return false;
            }
        }
        for &q in &self.idx.post[i] {
            if q >= i {
                continue;
            }
            let vq = self.options[q][self.choice[q]];
            // R5: q active needs i started.
            if vq == ElementState::Active && !v.is_started() {
                return false;
            }
            // R4: i moving backwards needs q out of Done.
            if backward_i && vq == ElementState::Done {
                return false;
            }
        }
        true
    }

    fn capture(&self) -> InstanceState {
        let mut out = InstanceState::all_inactive();
        for i in 0..self.idx.len() {
            out.set(self.idx.ids[i].clone(), self.options[i][self.choice[i]]);
        }
        out
    }
}

impl Iterator for Successors {
    type Item = InstanceState;

    fn next(&mut self) -> Option<InstanceState> {
        if self.exhausted {
            return None;
        }
        let n = self.idx.len();
        // `advancing` is true when the element at `depth` must move past its
        // current choice (backtracking or after yielding a full assignment).
        let mut advancing = self.depth == n;
        if advancing {
            self.depth = n.saturating_sub(1);
        }
        loop {
            if self.depth == n {
                // Complete consistent assignment: every constraint was
                // checked when its later endpoint was chosen.
                self.exhausted = n == 0;
                return Some(self.capture());
            }
            let i = self.depth;
            let start = if advancing { self.choice[i] + 1 } else { 0 };
            advancing = false;
            let mut found = false;
            for c in start..self.options[i].len() {
                if self.consistent(i, self.options[i][c]) {
                    self.choice[i] = c;
                    found = true;
                    break;
                }
            }
            if found {
                self.depth += 1;
            } else if i == 0 {
                self.exhausted = true;
                return None;
            } else {
                self.depth -= 1;
                advancing = true;
            }
        }
    }
}
