//! Reachability and exhaustive enumeration over the legal-step graph.
//!
//! [`reach`] answers "can the process get into a state satisfying this
//! predicate within `depth` steps?" with a shortest witness trace.
//! [`enumerate`] streams every conforming trace of a fixed length — the
//! exhaustive oracle used to validate the rest of the engine on small
//! models.
//!
//! `reach` is deterministic and always returns a witness of minimal
//! length. Two complementary strategies keep it tractable:
//!
//! - Goals built purely from `done`/`started` atoms under `&&`/`||` are
//!   *monotone*: they survive raising any element's state (Inactive <
//!   Active < Done). The eager execution pointwise-dominates every state
//!   reachable at the same time index — it takes every forward move as
//!   early as the rules allow, and a legal step can raise an element only
//!   if its prerequisites were started, which the eager run has already
//!   achieved. Hence the first eager state satisfying a monotone goal is
//!   also the earliest any run can satisfy it, and the eager prefix is a
//!   shortest witness.
//! - Other goals run a breadth-first search in canonical successor order,
//!   restricted to the goal's dependency cone (elements outside it are
//!   pinned Inactive: dropping them from any witness keeps every rule
//!   satisfied and preserves the goal, so no length is lost), deduplicated
//!   on full states, and pruned with an admissible remaining-steps bound.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::conformance::Trace;
use crate::ltl::{self, Formula, Pred};
use crate::model::{DepIndex, ElementId, ProcessModel};
use crate::semantics::{successors_restricted, ElementState, InstanceState};
use crate::simulate::enabled;

/// Guard for [`enumerate`]: beyond this many elements the trace space
/// (3^|E| states per step) is too large to exhaust without `force`.
pub const ENUMERATE_LIMIT: usize = 8;

/// Effectively-infinite step bound (kept far from u64 overflow).
const INF: u64 = u64::MAX / 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("reach goals must be state predicates; this formula contains a temporal operator")]
    TemporalGoal,
    #[error("goal mentions unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("model has {elements} elements, above the enumeration guard of {limit}; pass force to override")]
    ModelTooLarge { elements: usize, limit: usize },
}

/// Shortest conforming trace (at most `depth` steps) whose final state
/// satisfies the non-temporal `goal`, or `None` if no such trace exists.
pub fn reach(
    model: &ProcessModel,
    goal: &Formula,
    depth: u64,
) -> Result<Option<Trace>, SearchError> {
    if goal.is_temporal() {
        return Err(SearchError::TemporalGoal);
    }
    let mut unknown = None;
    goal.for_each_atom(&mut |_, id| {
        if unknown.is_none() && !model.contains(id) {
            unknown = Some(id.clone());
        }
    });
    if let Some(id) = unknown {
        return Err(SearchError::UnknownElement(id));
    }

    let idx = model.dep_index();
    let init = InstanceState::all_inactive();
    if ltl::holds_now(goal, &init) {
        return Ok(Some(Trace::new(model.name.clone(), vec![init])));
    }
    if lower_bound(goal, &init, &idx) > depth {
        return Ok(None);
    }
    if is_monotone(goal) {
        Ok(eager_reach(model, &idx, goal, depth))
    } else {
        Ok(bfs_reach(model, &idx, goal, depth))
    }
}

/// Monotone goals: scan the eager run; its states dominate all reachable
/// states pointwise, so the first hit is the earliest possible.
fn eager_reach(model: &ProcessModel, idx: &DepIndex, goal: &Formula, depth: u64) -> Option<Trace> {
    let mut states = vec![InstanceState::all_inactive()];
    for _ in 1..=depth {
        let cur = states.last().expect("non-empty");
        let next = eager_step(idx, cur);
        if &next == cur {
            return None; // settled on the all-done fixpoint without a hit
        }
        let hit = ltl::holds_now(goal, &next);
        states.push(next);
        if hit {
            return Some(Trace::new(model.name.clone(), states));
        }
    }
    None
}

/// One eager step: activate everything enabled, complete everything active.
fn eager_step(idx: &DepIndex, cur: &InstanceState) -> InstanceState {
    let mut next = cur.clone();
    for (i, id) in idx.ids.iter().enumerate() {
        match cur.get(id) {
            ElementState::Inactive if enabled(idx, cur, i) => {
                next.set(id.clone(), ElementState::Active);
            }
            ElementState::Active => next.set(id.clone(), ElementState::Done),
            _ => {}
        }
    }
    next
}

fn bfs_reach(model: &ProcessModel, idx: &DepIndex, goal: &Formula, depth: u64) -> Option<Trace> {
    let movable = cone(idx, goal);
    let init = InstanceState::all_inactive();

    // Arena of (state, parent index, distance); parents reconstruct the path.
    let mut arena: Vec<(InstanceState, usize, u64)> = vec![(init, usize::MAX, 0)];
    let mut visited: HashSet<Vec<u8>> = HashSet::new();
    visited.insert(encode(idx, &arena[0].0));
    let mut queue: VecDeque<usize> = VecDeque::from([0]);

    while let Some(n) = queue.pop_front() {
        let g = arena[n].2;
        if g >= depth {
            continue;
        }
        let cur = arena[n].0.clone();
        for s in successors_restricted(idx.clone(), &cur, movable.clone()) {
            if !visited.insert(encode(idx, &s)) {
                continue;
            }
            if ltl::holds_now(goal, &s) {
                let mut rev = vec![s];
                let mut at = n;
                while at != usize::MAX {
                    rev.push(arena[at].0.clone());
                    at = arena[at].1;
                }
                rev.reverse();
                return Some(Trace::new(model.name.clone(), rev));
            }
            if g + 1 + lower_bound(goal, &s, idx) > depth {
                continue; // provably cannot satisfy the goal in time
            }
            arena.push((s, n, g + 1));
            queue.push_back(arena.len() - 1);
        }
    }
    None
}

/// True for goals whose truth survives raising element states, i.e. built
/// from `done`/`started` atoms under conjunction and disjunction only.
fn is_monotone(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False => true,
        Formula::Atom { pred, .. } => matches!(pred, Pred::Done | Pred::Started),
        Formula::And(a, b) | Formula::Or(a, b) => is_monotone(a) && is_monotone(b),
        _ => false,
    }
}

/// Elements the goal can depend on: its atoms plus all their ancestors.
/// Everything else is pinned in place during the search.
fn cone(idx: &DepIndex, goal: &Formula) -> Vec<bool> {
    let mut movable = vec![false; idx.len()];
    let mut work = Vec::new();
    goal.for_each_atom(&mut |_, id| {
        if let Some(&i) = idx.index_of.get(id) {
            if !movable[i] {
                movable[i] = true;
                work.push(i);
            }
        }
    });
    while let Some(i) = work.pop() {
        for &p in &idx.pre[i] {
            if !movable[p] {
                movable[p] = true;
                work.push(p);
            }
        }
    }
    movable
}

/// Dense encoding of a state for the visited set.
fn encode(idx: &DepIndex, s: &InstanceState) -> Vec<u8> {
    idx.ids.iter().map(|id| s.get(id) as u8).collect()
}

/// Admissible lower bound on the steps needed from `state` to satisfy
/// `goal`. Per atom it counts the activation cascade still outstanding;
/// conjunction takes the max, disjunction the min, negations claim nothing.
fn lower_bound(goal: &Formula, state: &InstanceState, idx: &DepIndex) -> u64 {
    let mut memo = vec![None; idx.len()];
    let mut onstack = vec![false; idx.len()];
    let act: Vec<u64> = (0..idx.len())
        .map(|i| act_bound(i, idx, state, &mut memo, &mut onstack))
        .collect();
    h_formula(goal, state, idx, &act)
}

/// Minimum steps before element `i` can be started: 0 if already started,
/// otherwise one more than its slowest prerequisite. Elements on a
/// dependency cycle can never start (no prerequisite can go first).
fn act_bound(
    i: usize,
    idx: &DepIndex,
    state: &InstanceState,
    memo: &mut [Option<u64>],
    onstack: &mut [bool],
) -> u64 {
    if state.get(&idx.ids[i]) != ElementState::Inactive {
        return 0;
    }
    if let Some(v) = memo[i] {
        return v;
    }
    if onstack[i] {
        return INF;
    }
    onstack[i] = true;
    let worst = idx.pre[i]
        .iter()
        .map(|&p| act_bound(p, idx, state, memo, onstack))
        .max()
        .unwrap_or(0);
    onstack[i] = false;
    let v = worst.saturating_add(1).min(INF);
    memo[i] = Some(v);
    v
}

fn h_formula(f: &Formula, state: &InstanceState, idx: &DepIndex, act: &[u64]) -> u64 {
    match f {
        Formula::True => 0,
        Formula::False => INF,
        Formula::Atom { pred, id } => {
            let i = idx.index_of[id];
            let v = state.get(id);
            match pred {
                Pred::Done => match v {
                    ElementState::Done => 0,
                    ElementState::Active => 1,
                    ElementState::Inactive => act[i].saturating_add(1).min(INF),
                },
                Pred::Active => match v {
                    ElementState::Active => 0,
                    ElementState::Done => 1, // one backward step
                    ElementState::Inactive => act[i],
                },
                Pred::Started => {
                    if v.is_started() {
                        0
                    } else {
                        act[i]
                    }
                }
                Pred::Inactive => {
                    if v == ElementState::Inactive {
                        0
                    } else {
                        1
                    }
                }
            }
        }
        Formula::And(a, b) => h_formula(a, state, idx, act).max(h_formula(b, state, idx, act)),
        Formula::Or(a, b) => h_formula(a, state, idx, act).min(h_formula(b, state, idx, act)),
        // Negative or mixed-polarity shapes claim nothing (bound 0).
        _ => 0,
    }
}

/// Stream of every conforming trace with exactly `depth + 1` states, in
/// canonical order (depth-first over the canonical successor order).
/// Guarded by [`ENUMERATE_LIMIT`] unless `force` is set.
pub fn enumerate(model: &ProcessModel, depth: u64, force: bool) -> Result<Enumerate, SearchError> {
    let elements = model.elements.len();
    if elements > ENUMERATE_LIMIT && !force {
        return Err(SearchError::ModelTooLarge {
            elements,
            limit: ENUMERATE_LIMIT,
        });
    }
    Ok(Enumerate {
        idx: model.dep_index(),
        name: model.name.clone(),
        depth: usize::try_from(depth).unwrap_or(usize::MAX),
        path: vec![InstanceState::all_inactive()],
        levels: Vec::new(),
        started: false,
        done: false,
    })
}

pub struct Enumerate {
    idx: DepIndex,
    name: String,
    depth: usize,
    path: Vec<InstanceState>,
    levels: Vec<crate::semantics::Successors>,
    started: bool,
    done: bool,
}

impl Enumerate {
    fn descend(&mut self) {
        let cur = self.path.last().expect("path never empties mid-descent");
        let all = vec![true; self.idx.len()];
        self.levels
            .push(successors_restricted(self.idx.clone(), cur, all));
    }
}

impl Iterator for Enumerate {
    type Item = Trace;

    fn next(&mut self) -> Option<Trace> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if self.depth == 0 {
                self.done = true;
                return Some(Trace::new(self.name.clone(), self.path.clone()));
            }
            self.descend();
        }
        loop {
            let Some(level) = self.levels.last_mut() else {
                self.done = true;
                return None;
            };
            match level.next() {
                Some(s) => {
                    self.path.push(s);
                    if self.path.len() == self.depth + 1 {
                        let trace = Trace::new(self.name.clone(), self.path.clone());
                        self.path.pop();
                        return Some(trace);
                    }
                    self.descend();
                }
                None => {
                    self.levels.pop();
                    self.path.pop();
                }
            }
        }
    }
}
