//! Recorded instance traces and conformance checking.
//!
//! A trace is a non-empty sequence of instance states indexed by time. The
//! checker replays it against a model and reports every step-rule violation
//! plus the two whole-trace rules: R1_INIT (execution starts all-Inactive)
//! and R6_TIME (time indexes must start at 0; blocks within a file must
//! already be consecutive to parse).
//!
//! The text format is delta-based: each `t <N>` block lists only the
//! elements whose state changed, everything else carries over (and t = 0
//! starts from all-Inactive):
//!
//! ```text
//! trace ml_dev
//! t 0
//! t 1
//! use_case_analysis active
//! ```

use std::fmt;

use thiserror::Error;

use crate::model::{ElementId, ProcessModel};
use crate::semantics::{self, ElementState, InstanceState, LegalityViolation, RuleCode};

/// A recorded execution: states indexed t = start, start+1, ...
///
/// `start` is 0 for every well-formed trace; it exists so that traces with
/// malformed indexing can be represented and then reported via R6_TIME
/// instead of being unrepresentable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub model_name: String,
    start: u64,
    states: Vec<InstanceState>,
}

impl Trace {
    /// A trace starting at t = 0. Panics if `states` is empty: a trace
    /// always contains at least the initial state.
    pub fn new(model_name: impl Into<String>, states: Vec<InstanceState>) -> Trace {
        Trace::with_start(model_name, 0, states)
    }

    pub fn with_start(
        model_name: impl Into<String>,
        start: u64,
        states: Vec<InstanceState>,
    ) -> Trace {
        assert!(!states.is_empty(), "a trace needs at least one state");
        Trace {
            model_name: model_name.into(),
            start,
            states,
        }
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// Number of states (one more than the number of steps).
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the final state.
    pub fn t_end(&self) -> u64 {
        self.start + self.states.len() as u64 - 1
    }

    pub fn states(&self) -> &[InstanceState] {
        &self.states
    }

    /// State at position `pos` (0-based into the sequence, i.e. time
    /// `start + pos`).
    pub fn state(&self, pos: usize) -> &InstanceState {
        &self.states[pos]
    }

    pub fn last_state(&self) -> &InstanceState {
        self.states.last().expect("traces are non-empty")
    }

    /// The first `len` states as a new trace.
    pub fn prefix(&self, len: usize) -> Trace {
        assert!(len >= 1 && len <= self.states.len());
        Trace {
            model_name: self.model_name.clone(),
            start: self.start,
            states: self.states[..len].to_vec(),
        }
    }

    /// First position whose state maps `id` to `state`, as a time index.
    pub fn first_time(&self, id: &ElementId, state: ElementState) -> Option<u64> {
        self.states
            .iter()
            .position(|s| s.get(id) == state)
            .map(|pos| self.start + pos as u64)
    }
}

/// One rule violation at one point in a trace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TimedViolation {
    pub t: u64,
    pub violation: LegalityViolation,
}

impl fmt::Display for TimedViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} {}", self.t, self.violation)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConformanceReport {
    pub violations: Vec<TimedViolation>,
}

impl ConformanceReport {
    pub fn is_conforming(&self) -> bool {
        self.violations.is_empty()
    }

    /// All distinct rule codes that fired.
    pub fn rules(&self) -> Vec<RuleCode> {
        let mut rules: Vec<RuleCode> = self.violations.iter().map(|v| v.violation.rule).collect();
        rules.sort();
        rules.dedup();
        rules
    }

    /// Earliest time at which `rule` fired.
    pub fn first_time_of(&self, rule: RuleCode) -> Option<u64> {
        self.violations
            .iter()
            .filter(|v| v.violation.rule == rule)
            .map(|v| v.t)
            .min()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("trace is for model `{found}`, not `{expected}`")]
    ModelNameMismatch { expected: String, found: String },
    #[error("trace state at t={t} mentions unknown element `{id}`")]
    UnknownElement { t: u64, id: ElementId },
}

/// Replay `trace` against `model` and report every violation. No early
/// exit: all findings are collected, ordered by time.
pub fn check_trace(model: &ProcessModel, trace: &Trace) -> Result<ConformanceReport, CheckError> {
    if model.name != trace.model_name {
        return Err(CheckError::ModelNameMismatch {
            expected: model.name.clone(),
            found: trace.model_name.clone(),
        });
    }
    for (pos, state) in trace.states.iter().enumerate() {
        for id in state.mentioned_ids() {
            if !model.contains(id) {
                return Err(CheckError::UnknownElement {
                    t: trace.start + pos as u64,
                    id: id.clone(),
                });
            }
        }
    }

    let mut violations = Vec::new();

    // R6_TIME: indexing must start at the beginning.
    if trace.start != 0 {
        violations.push(TimedViolation {
            t: trace.start,
            violation: LegalityViolation {
                rule: RuleCode::R6Time,
                elements: vec![],
                message: format!("trace starts at t={} instead of t=0", trace.start),
            },
        });
    } else {
        // R1_INIT: the state at t=0 is all-Inactive.
        let s0 = &trace.states[0];
        if !s0.is_all_inactive() {
            let started: Vec<ElementId> = s0.mentioned_ids().cloned().collect();
            violations.push(TimedViolation {
                t: 0,
                violation: LegalityViolation {
                    rule: RuleCode::R1Init,
                    elements: started.clone(),
                    message: format!(
                        "initial state is not all-inactive: {}",
                        started
                            .iter()
                            .map(|id| format!("`{id}`"))
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                },
            });
        }
    }

    let idx = model.dep_index();
    for pos in 1..trace.states.len() {
        let t = trace.start + pos as u64;
        for violation in
            semantics::check_step_indexed(&idx, &trace.states[pos - 1], &trace.states[pos])
        {
            violations.push(TimedViolation { t, violation });
        }
    }

    Ok(ConformanceReport { violations })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

fn parse_err(line: usize, message: impl Into<String>) -> TraceParseError {
    TraceParseError {
        line,
        message: message.into(),
    }
}

/// Parse the delta-based trace format. Comments (`#` to end of line) and
/// blank lines are ignored. Blocks must increment by exactly one; a first
/// block at t > 0 parses (and is later reported as R6_TIME by
/// [`check_trace`]).
///
/// Elements named `t` or `trace` do not collide with the structural
/// keywords: a two-token line whose second token is a state word is always
/// read as a delta line, so `t done` sets element `t` while `t 7` opens a
/// block.
pub fn parse_trace(text: &str) -> Result<Trace, TraceParseError> {
    let mut model_name: Option<String> = None;
    let mut start: u64 = 0;
    let mut states: Vec<InstanceState> = Vec::new();
    let mut current: Option<InstanceState> = None;
    let mut block_ids: Vec<ElementId> = Vec::new();
    let mut next_t: Option<u64> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let head = tokens[0];
        // Elements may legitimately be named `t` or `trace`. A two-token
        // line whose second token is a state word is always a delta line;
        // only other shapes are structural.
        let delta_like = tokens.len() == 2 && ElementState::from_keyword(tokens[1]).is_some();

        if head == "trace" && (model_name.is_none() || !delta_like) {
            if model_name.is_some() {
                return Err(parse_err(lineno, "duplicate `trace` header"));
            }
            let name = *tokens
                .get(1)
                .ok_or_else(|| parse_err(lineno, "expected `trace <model-name>`"))?;
            if tokens.len() > 2 {
                return Err(parse_err(lineno, "unexpected text after model name"));
            }
            if !ElementId::new(name).is_valid() {
                return Err(parse_err(
                    lineno,
                    format!("model name `{name}` does not match [a-z][a-z0-9_]*"),
                ));
            }
            model_name = Some(name.to_string());
        } else if head == "t" && !delta_like {
            if model_name.is_none() {
                return Err(parse_err(lineno, "`t` block before `trace` header"));
            }
            let num = *tokens
                .get(1)
                .ok_or_else(|| parse_err(lineno, "expected `t <index>`"))?;
            if tokens.len() > 2 {
                return Err(parse_err(lineno, "unexpected text after time index"));
            }
            let t: u64 = num
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid time index `{num}`")))?;
            match next_t {
                None => {
                    start = t;
                    current = Some(InstanceState::all_inactive());
                }
                Some(expected) => {
                    if t != expected {
                        return Err(parse_err(
                            lineno,
                            format!(
                                "non-consecutive time index: expected t {expected}, found t {t}"
                            ),
                        ));
                    }
                    let prev = current.take().expect("block in progress");
                    states.push(prev.clone());
                    current = Some(prev);
                }
            }
            next_t = Some(t + 1);
            block_ids.clear();
        } else {
            let state_word = *tokens
                .get(1)
                .ok_or_else(|| parse_err(lineno, "expected `<element-id> <state>`"))?;
            if tokens.len() > 2 {
                return Err(parse_err(lineno, "unexpected text after state"));
            }
            let Some(cur) = current.as_mut() else {
                return Err(parse_err(lineno, "element state outside of a `t` block"));
            };
            let id = ElementId::new(head);
            if !id.is_valid() {
                return Err(parse_err(
                    lineno,
                    format!("element id `{head}` does not match [a-z][a-z0-9_]*"),
                ));
            }
            let Some(state) = ElementState::from_keyword(state_word) else {
                return Err(parse_err(
                    lineno,
                    format!(
                        "unknown state word `{state_word}` (expected inactive, active or done)"
                    ),
                ));
            };
            if block_ids.contains(&id) {
                return Err(parse_err(
                    lineno,
                    format!("element `{id}` set twice in one block"),
                ));
            }
            block_ids.push(id.clone());
            cur.set(id, state);
        }
    }

    let Some(model_name) = model_name else {
        return Err(parse_err(1, "missing `trace <model-name>` header"));
    };
    match current {
        Some(last) => states.push(last),
        None => return Err(parse_err(1, "trace has no `t` blocks")),
    }
    Ok(Trace::with_start(model_name, start, states))
}

/// Canonical text form: one `t` block per state, listing only changed
/// elements, each block sorted by element id. `parse_trace` of the result
/// reproduces the trace exactly; parsing and re-serializing a canonical
/// file reproduces it byte for byte.
pub fn serialize_trace(trace: &Trace) -> String {
    let mut out = String::new();
    out.push_str(&format!("trace {}\n", trace.model_name));
    let mut prev = InstanceState::all_inactive();
    for (pos, state) in trace.states.iter().enumerate() {
        out.push_str(&format!("t {}\n", trace.start + pos as u64));
        // Elements mentioned by either side and differing: state changes,
        // including falls back to Inactive.
        let mut changed: Vec<&ElementId> = state
            .mentioned_ids()
            .chain(prev.mentioned_ids())
            .filter(|id| state.get(id) != prev.get(id))
            .collect();
        changed.sort();
        changed.dedup();
        for id in changed {
            out.push_str(&format!("{id} {}\n", state.get(id)));
        }
        prev = state.clone();
    }
    out
}
