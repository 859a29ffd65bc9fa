//! Linear temporal logic over finite traces.
//!
//! Formulas talk about element states through four predicates —
//! `inactive(id)`, `active(id)`, `done(id)` and `started(id)` (the last is
//! active-or-done) — combined with `!`, `&&`, `||`, `->` and the temporal
//! operators `X` (next), `F` (eventually), `G` (always), `U` (until) and
//! the bounded forms `F[<=k]` / `G[<=k]`.
//!
//! Evaluation is over the finite recorded trace with *strong* next: `X p`
//! is false at the final state because no next state exists. Two
//! independent evaluators are provided — direct recursive evaluation
//! ([`eval`]) and state-by-state formula progression
//! ([`eval_via_progression`]) — and they agree on every formula and trace.
//!
//! Operator precedence, tightest first: `!` and the unary temporals, then
//! `U`, `&&`, `||`, `->`. `U` and `->` associate to the right. Temporal
//! operator letters are words of their own: `X done(x)`, not `Xdone(x)`.

use std::fmt;

use thiserror::Error;

use crate::conformance::Trace;
use crate::model::{ElementId, ProcessModel};
use crate::semantics::{ElementState, InstanceState};

/// State predicate applied to one element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pred {
    Inactive,
    Active,
    Done,
    Started,
}

impl Pred {
    pub const ALL: [Pred; 4] = [Pred::Inactive, Pred::Active, Pred::Done, Pred::Started];

    pub fn keyword(self) -> &'static str {
        match self {
            Pred::Inactive => "inactive",
            Pred::Active => "active",
            Pred::Done => "done",
            Pred::Started => "started",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Pred> {
        Pred::ALL.into_iter().find(|p| p.keyword() == word)
    }

    pub fn holds_for(self, state: ElementState) -> bool {
        match self {
            Pred::Inactive => state == ElementState::Inactive,
            Pred::Active => state == ElementState::Active,
            Pred::Done => state == ElementState::Done,
            Pred::Started => state.is_started(),
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Atom { pred: Pred, id: ElementId },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    BoundedEventually(u64, Box<Formula>),
    BoundedAlways(u64, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: Pred, id: impl Into<ElementId>) -> Formula {
        Formula::Atom {
            pred,
            id: id.into(),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(a: Formula) -> Formula {
        Formula::Next(Box::new(a))
    }

    pub fn eventually(a: Formula) -> Formula {
        Formula::Eventually(Box::new(a))
    }

    pub fn always(a: Formula) -> Formula {
        Formula::Always(Box::new(a))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn bounded_eventually(k: u64, a: Formula) -> Formula {
        Formula::BoundedEventually(k, Box::new(a))
    }

    pub fn bounded_always(k: u64, a: Formula) -> Formula {
        Formula::BoundedAlways(k, Box::new(a))
    }

    /// Visit every atom in the formula.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(Pred, &'a ElementId)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { pred, id } => f(*pred, id),
            Formula::Not(a)
            | Formula::Next(a)
            | Formula::Eventually(a)
            | Formula::Always(a)
            | Formula::BoundedEventually(_, a)
            | Formula::BoundedAlways(_, a) => a.for_each_atom(f),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }

    /// True when the formula contains a temporal operator, i.e. talks about
    /// more than a single state.
    pub fn is_temporal(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } => false,
            Formula::Not(a) => a.is_temporal(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_temporal() || b.is_temporal()
            }
            Formula::Next(_)
            | Formula::Eventually(_)
            | Formula::Always(_)
            | Formula::Until(_, _)
            | Formula::BoundedEventually(_, _)
            | Formula::BoundedAlways(_, _) => true,
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Implies(_, _) => 1,
            Formula::Or(_, _) => 2,
            Formula::And(_, _) => 3,
            Formula::Until(_, _) => 4,
            Formula::Not(_)
            | Formula::Next(_)
            | Formula::Eventually(_)
            | Formula::Always(_)
            | Formula::BoundedEventually(_, _)
            | Formula::BoundedAlways(_, _) => 5,
            Formula::True | Formula::False | Formula::Atom { .. } => 6,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.prec() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Formula::True => f.write_str("true")?,
            Formula::False => f.write_str("false")?,
            Formula::Atom { pred, id } => write!(f, "{pred}({id})")?,
            Formula::Not(a) => {
                f.write_str("!")?;
                a.fmt_prec(f, 5)?;
            }
            Formula::Next(a) => {
                f.write_str("X ")?;
                a.fmt_prec(f, 5)?;
            }
            Formula::Eventually(a) => {
                f.write_str("F ")?;
                a.fmt_prec(f, 5)?;
            }
            Formula::Always(a) => {
                f.write_str("G ")?;
                a.fmt_prec(f, 5)?;
            }
            Formula::BoundedEventually(k, a) => {
                write!(f, "F[<={k}] ")?;
                a.fmt_prec(f, 5)?;
            }
            Formula::BoundedAlways(k, a) => {
                write!(f, "G[<={k}] ")?;
                a.fmt_prec(f, 5)?;
            }
            Formula::Until(a, b) => {
                a.fmt_prec(f, 5)?;
                f.write_str(" U ")?;
                b.fmt_prec(f, 4)?;
            }
            Formula::And(a, b) => {
                a.fmt_prec(f, 3)?;
                f.write_str(" && ")?;
                b.fmt_prec(f, 4)?;
            }
            Formula::Or(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" || ")?;
                b.fmt_prec(f, 3)?;
            }
            Formula::Implies(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" -> ")?;
                b.fmt_prec(f, 1)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("col {pos}: {message}")]
pub struct LtlParseError {
    /// 1-based character position in the formula text.
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtlError {
    #[error("formula mentions unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("trace is for model `{found}`, not `{expected}`")]
    ModelNameMismatch { expected: String, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Temporal(char),
    Num(u64),
    LPar,
    RPar,
    LBrk,
    RBrk,
    Le,
    Not,
    AndAnd,
    OrOr,
    Arrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Temporal(c) => write!(f, "`{c}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::LPar => f.write_str("`(`"),
            Tok::RPar => f.write_str("`)`"),
            Tok::LBrk => f.write_str("`[`"),
            Tok::RBrk => f.write_str("`]`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Not => f.write_str("`!`"),
            Tok::AndAnd => f.write_str("`&&`"),
            Tok::OrOr => f.write_str("`||`"),
            Tok::Arrow => f.write_str("`->`"),
        }
    }
}

struct Lexed {
    tok: Tok,
    pos: usize,
}

fn err(pos: usize, message: impl Into<String>) -> LtlParseError {
    LtlParseError {
        pos,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Lexed>, LtlParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let pos = i + 1;
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push(Lexed {
                    tok: Tok::LPar,
                    pos,
                });
                i += 1;
            }
            ')' => {
                out.push(Lexed {
                    tok: Tok::RPar,
                    pos,
                });
                i += 1;
            }
            '[' => {
                out.push(Lexed {
                    tok: Tok::LBrk,
                    pos,
                });
                i += 1;
            }
            ']' => {
                out.push(Lexed {
                    tok: Tok::RBrk,
                    pos,
                });
                i += 1;
            }
            '!' => {
                out.push(Lexed { tok: Tok::Not, pos });
                i += 1;
            }
            '<' if chars.get(i + 1) == Some(&'=') => {
                out.push(Lexed { tok: Tok::Le, pos });
                i += 2;
            }
            '&' if chars.get(i + 1) == Some(&'&') => {
                out.push(Lexed {
                    tok: Tok::AndAnd,
                    pos,
                });
                i += 2;
            }
            '|' if chars.get(i + 1) == Some(&'|') => {
                out.push(Lexed {
                    tok: Tok::OrOr,
                    pos,
                });
                i += 2;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Lexed {
                    tok: Tok::Arrow,
                    pos,
                });
                i += 2;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n: u64 = text
                    .parse()
                    .map_err(|_| err(pos, format!("number `{text}` is out of range")))?;
                out.push(Lexed {
                    tok: Tok::Num(n),
                    pos,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match word.as_str() {
                    "X" | "F" | "G" | "U" => out.push(Lexed {
                        tok: Tok::Temporal(word.chars().next().expect("one letter")),
                        pos,
                    }),
                    _ if word.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') => {
                        out.push(Lexed {
                            tok: Tok::Word(word),
                            pos,
                        })
                    }
                    _ => {
                        return Err(err(
                            pos,
                            format!("unknown token `{word}` (identifiers are lowercase; temporal operators are X, F, G, U)"),
                        ))
                    }
                }
            }
            other => return Err(err(pos, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|l| &l.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|l| l.pos).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|l| l.tok.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), LtlParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == *want => Ok(()),
            Some(t) => Err(err(pos, format!("expected {what}, found {t}"))),
            None => Err(err(pos, format!("expected {what}, found end of input"))),
        }
    }

    fn parse_implies(&mut self) -> Result<Formula, LtlParseError> {
        let a = self.parse_or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let b = self.parse_implies()?;
            return Ok(Formula::implies(a, b));
        }
        Ok(a)
    }

    fn parse_or(&mut self) -> Result<Formula, LtlParseError> {
        let mut a = self.parse_and()?;
        while self.peek() == Some(&Tok::OrOr) {
            self.bump();
            let b = self.parse_and()?;
            a = Formula::or(a, b);
        }
        Ok(a)
    }

    fn parse_and(&mut self) -> Result<Formula, LtlParseError> {
        let mut a = self.parse_until()?;
        while self.peek() == Some(&Tok::AndAnd) {
            self.bump();
            let b = self.parse_until()?;
            a = Formula::and(a, b);
        }
        Ok(a)
    }

    fn parse_until(&mut self) -> Result<Formula, LtlParseError> {
        let a = self.parse_unary()?;
        if self.peek() == Some(&Tok::Temporal('U')) {
            self.bump();
            let b = self.parse_until()?;
            return Ok(Formula::until(a, b));
        }
        Ok(a)
    }

    fn parse_unary(&mut self) -> Result<Formula, LtlParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Formula::not(self.parse_unary()?))
            }
            Some(Tok::Temporal('X')) => {
                self.bump();
                Ok(Formula::next(self.parse_unary()?))
            }
            Some(Tok::Temporal(c @ ('F' | 'G'))) => {
                let c = *c;
                self.bump();
                let bound = if self.peek() == Some(&Tok::LBrk) {
                    self.bump();
                    self.expect(&Tok::Le, "`<=`")?;
                    let pos = self.pos();
                    let k = match self.bump() {
                        Some(Tok::Num(k)) => k,
                        Some(t) => return Err(err(pos, format!("expected a bound, found {t}"))),
                        None => return Err(err(pos, "expected a bound, found end of input")),
                    };
                    self.expect(&Tok::RBrk, "`]`")?;
                    Some(k)
                } else {
                    None
                };
                let a = self.parse_unary()?;
                Ok(match (c, bound) {
                    ('F', None) => Formula::eventually(a),
                    ('F', Some(k)) => Formula::bounded_eventually(k, a),
                    ('G', None) => Formula::always(a),
                    (_, None) => unreachable!("only F and G reach here"),
                    (_, Some(k)) => Formula::bounded_always(k, a),
                })
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Formula, LtlParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::LPar) => {
                let a = self.parse_implies()?;
                self.expect(&Tok::RPar, "`)`")?;
                Ok(a)
            }
            Some(Tok::Word(w)) if w == "true" => Ok(Formula::True),
            Some(Tok::Word(w)) if w == "false" => Ok(Formula::False),
            Some(Tok::Word(w)) => {
                let Some(pred) = Pred::from_keyword(&w) else {
                    return Err(err(
                        pos,
                        format!(
                            "unknown predicate `{w}` (expected inactive, active, done or started)"
                        ),
                    ));
                };
                self.expect(&Tok::LPar, "`(`")?;
                let pos = self.pos();
                let id = match self.bump() {
                    Some(Tok::Word(id)) => ElementId::new(id),
                    Some(t) => return Err(err(pos, format!("expected an element id, found {t}"))),
                    None => return Err(err(pos, "expected an element id, found end of input")),
                };
                if !id.is_valid() {
                    return Err(err(
                        pos,
                        format!("element id `{id}` does not match [a-z][a-z0-9_]*"),
                    ));
                }
                self.expect(&Tok::RPar, "`)`")?;
                Ok(Formula::atom(pred, id))
            }
            Some(t) => Err(err(pos, format!("expected a formula, found {t}"))),
            None => Err(err(pos, "expected a formula, found end of input")),
        }
    }
}

/// Parse a formula from its text form.
pub fn parse_formula(text: &str) -> Result<Formula, LtlParseError> {
    let toks = lex(text)?;
    let end = text.chars().count() + 1;
    let mut parser = Parser { toks, at: 0, end };
    let formula = parser.parse_implies()?;
    if let Some(t) = parser.peek() {
        return Err(err(
            parser.pos(),
            format!("unexpected {t} after the formula"),
        ));
    }
    Ok(formula)
}

fn holds(states: &[InstanceState], i: usize, f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom { pred, id } => pred.holds_for(states[i].get(id)),
        Formula::Not(a) => !holds(states, i, a),
        Formula::And(a, b) => holds(states, i, a) && holds(states, i, b),
        Formula::Or(a, b) => holds(states, i, a) || holds(states, i, b),
        Formula::Implies(a, b) => !holds(states, i, a) || holds(states, i, b),
        Formula::Next(a) => i + 1 < states.len() && holds(states, i + 1, a),
        Formula::Eventually(a) => (i..states.len()).any(|j| holds(states, j, a)),
        Formula::Always(a) => (i..states.len()).all(|j| holds(states, j, a)),
        Formula::Until(a, b) => {
            (i..states.len()).any(|j| holds(states, j, b) && (i..j).all(|k| holds(states, k, a)))
        }
        Formula::BoundedEventually(k, a) => {
            let hi = bound_end(states.len(), i, *k);
            (i..=hi).any(|j| holds(states, j, a))
        }
        Formula::BoundedAlways(k, a) => {
            let hi = bound_end(states.len(), i, *k);
            (i..=hi).all(|j| holds(states, j, a))
        }
    }
}

fn bound_end(len: usize, i: usize, k: u64) -> usize {
    let span = usize::try_from(k).unwrap_or(usize::MAX);
    i.saturating_add(span).min(len - 1)
}

/// Evaluate a formula against a single state viewed as a one-state trace.
/// Exact state-predicate semantics for non-temporal formulas.
pub(crate) fn holds_now(f: &Formula, state: &InstanceState) -> bool {
    holds(std::slice::from_ref(state), 0, f)
}

fn validate(model: &ProcessModel, formula: &Formula, trace: &Trace) -> Result<(), LtlError> {
    if model.name != trace.model_name {
        return Err(LtlError::ModelNameMismatch {
            expected: model.name.clone(),
            found: trace.model_name.clone(),
        });
    }
    let mut unknown = None;
    formula.for_each_atom(&mut |_, id| {
        if unknown.is_none() && !model.contains(id) {
            unknown = Some(id.clone());
        }
    });
    match unknown {
        Some(id) => Err(LtlError::UnknownElement(id)),
        None => Ok(()),
    }
}

/// Evaluate `formula` at the start of `trace` by direct recursion.
pub fn eval(model: &ProcessModel, formula: &Formula, trace: &Trace) -> Result<bool, LtlError> {
    validate(model, formula, trace)?;
    Ok(holds(trace.states(), 0, formula))
}

fn pnot(a: Formula) -> Formula {
    match a {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        a => Formula::not(a),
    }
}

fn pand(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::False, _) | (_, Formula::False) => Formula::False,
        (Formula::True, b) => b,
        (a, Formula::True) => a,
        (a, b) => Formula::and(a, b),
    }
}

fn por(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::True, _) | (_, Formula::True) => Formula::True,
        (Formula::False, b) => b,
        (a, Formula::False) => a,
        (a, b) => Formula::or(a, b),
    }
}

fn pimplies(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::False, _) => Formula::True,
        (_, Formula::True) => Formula::True,
        (Formula::True, b) => b,
        (a, Formula::False) => pnot(a),
        (a, b) => Formula::implies(a, b),
    }
}

fn progress_with(f: &Formula, state: &InstanceState, last: bool) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom { pred, id } => {
            if pred.holds_for(state.get(id)) {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Not(a) => pnot(progress_with(a, state, last)),
        Formula::And(a, b) => pand(progress_with(a, state, last), progress_with(b, state, last)),
        Formula::Or(a, b) => por(progress_with(a, state, last), progress_with(b, state, last)),
        Formula::Implies(a, b) => {
            pimplies(progress_with(a, state, last), progress_with(b, state, last))
        }
        Formula::Next(a) => {
            if last {
                Formula::False
            } else {
                (**a).clone()
            }
        }
        Formula::Eventually(a) => {
            let now = progress_with(a, state, last);
            let later = if last { Formula::False } else { f.clone() };
            por(now, later)
        }
        Formula::Always(a) => {
            let now = progress_with(a, state, last);
            let later = if last { Formula::True } else { f.clone() };
            pand(now, later)
        }
        Formula::Until(a, b) => {
            let right = progress_with(b, state, last);
            let left = progress_with(a, state, last);
            let later = if last { Formula::False } else { f.clone() };
            por(right, pand(left, later))
        }
        Formula::BoundedEventually(k, a) => {
            let now = progress_with(a, state, last);
            let later = if last || *k == 0 {
                Formula::False
            } else {
                Formula::BoundedEventually(k - 1, a.clone())
            };
            por(now, later)
        }
        Formula::BoundedAlways(k, a) => {
            let now = progress_with(a, state, last);
            let later = if last || *k == 0 {
                Formula::True
            } else {
                Formula::BoundedAlways(k - 1, a.clone())
            };
            pand(now, later)
        }
    }
}

/// One progression step: the returned formula holds on a trace suffix
/// exactly when `f` holds on `state` followed by that suffix (for a
/// non-empty remainder; the end of the trace is handled by the evaluation
/// driver, which treats `X` strongly, or conservatively by [`finish`]).
pub fn progress(f: &Formula, state: &InstanceState) -> Formula {
    progress_with(f, state, false)
}

/// Resolve a residual formula once the trace has ended: outstanding
/// `F`/`U`/`X` obligations fail, `G` invariants are discharged.
pub fn finish(f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom { .. } => false,
        Formula::Not(a) => !finish(a),
        Formula::And(a, b) => finish(a) && finish(b),
        Formula::Or(a, b) => finish(a) || finish(b),
        Formula::Implies(a, b) => !finish(a) || finish(b),
        Formula::Next(_) => false,
        Formula::Eventually(_) | Formula::Until(_, _) | Formula::BoundedEventually(_, _) => false,
        Formula::Always(_) | Formula::BoundedAlways(_, _) => true,
    }
}

/// Evaluate by progressing the formula through the trace one state at a
/// time. Agrees with [`eval`] on every formula and trace.
pub fn eval_via_progression(
    model: &ProcessModel,
    formula: &Formula,
    trace: &Trace,
) -> Result<bool, LtlError> {
    validate(model, formula, trace)?;
    let states = trace.states();
    let mut f = formula.clone();
    for (i, state) in states.iter().enumerate() {
        f = progress_with(&f, state, i + 1 == states.len());
        if matches!(f, Formula::True | Formula::False) {
            break;
        }
    }
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        other => finish(&other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActivityKind, ArtifactKind, Association, Element, Phase};
    use crate::simulate::{simulate, SimulationPolicy};

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

    fn eager_trace(steps: u64) -> Trace {
        simulate(&chain(), &SimulationPolicy::Eager { dwell: 1 }, steps, None).unwrap()
    }

    fn p(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    #[test]
    fn parse_builds_the_expected_tree() {
        assert_eq!(p("done(report)"), Formula::atom(Pred::Done, "report"));
        assert_eq!(
            p("X F done(report)"),
            Formula::next(Formula::eventually(Formula::atom(Pred::Done, "report")))
        );
        assert_eq!(
            p("F[<=3] active(build)"),
            Formula::bounded_eventually(3, Formula::atom(Pred::Active, "build"))
        );
        assert_eq!(
            p("true && false"),
            Formula::and(Formula::True, Formula::False)
        );
    }

    #[test]
    fn precedence_binds_as_documented() {
        // ! binds tightest, then U, &&, ||, ->.
        let f = p("!done(build) && active(binary) || inactive(review) -> done(report)");
        let expected = Formula::implies(
            Formula::or(
                Formula::and(
                    Formula::not(Formula::atom(Pred::Done, "build")),
                    Formula::atom(Pred::Active, "binary"),
                ),
                Formula::atom(Pred::Inactive, "review"),
            ),
            Formula::atom(Pred::Done, "report"),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn until_and_implies_are_right_associative() {
        assert_eq!(
            p("active(build) U active(binary) U done(report)"),
            Formula::until(
                Formula::atom(Pred::Active, "build"),
                Formula::until(
                    Formula::atom(Pred::Active, "binary"),
                    Formula::atom(Pred::Done, "report"),
                ),
            )
        );
        assert_eq!(
            p("done(build) -> done(binary) -> done(report)"),
            Formula::implies(
                Formula::atom(Pred::Done, "build"),
                Formula::implies(
                    Formula::atom(Pred::Done, "binary"),
                    Formula::atom(Pred::Done, "report"),
                ),
            )
        );
    }

    #[test]
    fn display_round_trips_through_the_parser() {
        for text in [
            "done(report)",
            "!done(build) && active(binary) || inactive(review) -> done(report)",
            "X (active(build) U done(report))",
            "G (active(binary) -> started(build))",
            "F[<=3] active(build) && G[<=7] !done(report)",
            "active(build) U active(binary) U done(report)",
            "!(done(build) || done(binary))",
            "X X X done(report)",
        ] {
            let f = p(text);
            let printed = f.to_string();
            assert_eq!(p(&printed), f, "`{text}` -> `{printed}`");
        }
    }

    #[test]
    fn display_parenthesizes_only_where_needed() {
        assert_eq!(
            p("(done(build)) && (active(binary))").to_string(),
            "done(build) && active(binary)"
        );
        assert_eq!(
            p("done(build) && (active(binary) || done(report))").to_string(),
            "done(build) && (active(binary) || done(report))"
        );
        assert_eq!(
            p("X (active(build) U done(report))").to_string(),
            "X (active(build) U done(report))"
        );
    }

    #[test]
    fn parse_rejects_malformed_input() {
        for (text, fragment) in [
            ("", "expected a formula"),
            ("done", "expected `(`"),
            ("done(build", "expected `)`"),
            ("done(build) &&", "expected a formula"),
            ("pending(build)", "unknown predicate"),
            ("done(build) done(binary)", "after the formula"),
            ("F[<=] done(build)", "expected a bound"),
            ("F[3] done(build)", "expected `<=`"),
            ("Fdone(build)", "unknown token"),
            ("done(Build)", "unknown token"),
            ("U done(build)", "expected a formula"),
            ("done(build) | active(binary)", "unexpected character"),
        ] {
            let e = parse_formula(text).unwrap_err();
            assert!(
                e.message.contains(fragment),
                "`{text}`: expected `{fragment}` in `{e}`"
            );
        }
    }

    #[test]
    fn eval_on_an_eager_run() {
        let model = chain();
        let trace = eager_trace(6);
        // Hand-checked against the eager schedule: build active at t=1,
        // done at t=2; report done at t=5.
        for (text, expected) in [
            ("F done(report)", true),
            ("G !done(report)", false),
            ("X active(build)", true),
            ("X X done(build)", true),
            ("inactive(review) U active(binary)", true),
            ("G (active(binary) -> started(build))", true),
            ("G (done(report) -> done(build))", true),
            ("F (active(build) && active(binary))", false),
            ("F[<=1] active(build)", true),
            ("F[<=0] active(build)", false),
            ("G[<=1] !done(build)", true),
            ("G[<=2] !done(build)", false),
            ("true", true),
            ("false", false),
        ] {
            assert_eq!(eval(&model, &p(text), &trace), Ok(expected), "{text}");
        }
    }

    #[test]
    fn next_is_strong_at_the_end_of_the_trace() {
        let model = chain();
        let one_state = simulate(&model, &SimulationPolicy::Eager { dwell: 1 }, 0, None).unwrap();
        assert_eq!(eval(&model, &p("X true"), &one_state), Ok(false));
        assert_eq!(eval(&model, &p("!X true"), &one_state), Ok(true));
        assert_eq!(eval(&model, &p("G inactive(build)"), &one_state), Ok(true));
        assert_eq!(eval(&model, &p("F done(build)"), &one_state), Ok(false));
        // X (G p) at the last state is false, not vacuously true.
        assert_eq!(
            eval(&model, &p("X G inactive(build)"), &one_state),
            Ok(false)
        );
        assert_eq!(
            eval_via_progression(&model, &p("X G inactive(build)"), &one_state),
            Ok(false)
        );
    }

    #[test]
    fn progression_agrees_with_direct_evaluation() {
        let model = chain();
        let traces = [
            eager_trace(0),
            eager_trace(1),
            eager_trace(3),
            eager_trace(8),
            simulate(
                &model,
                &SimulationPolicy::UniformRandom { seed: 3 },
                10,
                None,
            )
            .unwrap(),
        ];
        let formulas = [
            "true",
            "false",
            "done(report)",
            "X active(build)",
            "X X X X X X X X X done(report)",
            "F done(report)",
            "G !active(report)",
            "inactive(review) U active(binary)",
            "active(build) U done(report)",
            "F (done(build) && X done(binary))",
            "G (active(binary) -> started(build))",
            "F[<=2] done(build)",
            "G[<=4] !done(report)",
            "!(F done(report)) || G (inactive(build) U done(build))",
            "F G done(report)",
            "G F done(report)",
            "X G inactive(build)",
        ];
        for trace in &traces {
            for text in formulas {
                let f = p(text);
                assert_eq!(
                    eval(&model, &f, trace),
                    eval_via_progression(&model, &f, trace),
                    "formula `{text}` on a trace of {} states",
                    trace.len()
                );
            }
        }
    }

    #[test]
    fn progress_matches_the_rewrite_table() {
        let s0 = InstanceState::all_inactive();
        let f = p("F done(build)");
        assert_eq!(progress(&f, &s0), f, "unsatisfied F keeps waiting");
        let g = p("G inactive(build)");
        assert_eq!(progress(&g, &s0), g, "satisfied G keeps watching");
        let x = p("X done(build)");
        assert_eq!(progress(&x, &s0), p("done(build)"), "X unwraps");
        let u = p("inactive(build) U done(build)");
        assert_eq!(progress(&u, &s0), u, "pending U persists");
        let done = InstanceState::all_inactive().with("build", ElementState::Done);
        assert_eq!(progress(&u, &done), Formula::True, "satisfied U resolves");
        assert_eq!(
            progress(&p("F[<=3] done(build)"), &s0),
            p("F[<=2] done(build)"),
            "bounds count down"
        );
        assert_eq!(progress(&p("F[<=0] done(build)"), &s0), Formula::False);
        assert_eq!(progress(&p("done(build)"), &done), Formula::True);
    }

    #[test]
    fn finish_discharges_invariants_and_fails_obligations() {
        assert!(finish(&p("G done(build)")));
        assert!(finish(&p("G[<=3] done(build)")));
        assert!(!finish(&p("F done(build)")));
        assert!(!finish(&p("X true")));
        assert!(!finish(&p("active(build) U done(build)")));
        assert!(!finish(&p("done(build)")));
        assert!(finish(&p("!F done(build)")));
        assert!(finish(&p("true || X true")));
    }

    #[test]
    fn eval_validates_atoms_and_trace_names() {
        let model = chain();
        let trace = eager_trace(2);
        assert_eq!(
            eval(&model, &p("done(ghost)"), &trace),
            Err(LtlError::UnknownElement(ElementId::new("ghost")))
        );
        let other = Trace::new("other", vec![InstanceState::all_inactive()]);
        assert_eq!(
            eval(&model, &p("true"), &other),
            Err(LtlError::ModelNameMismatch {
                expected: "chain".into(),
                found: "other".into(),
            })
        );
    }

    #[test]
    fn started_means_active_or_done() {
        let model = chain();
        let trace = eager_trace(6);
        assert_eq!(eval(&model, &p("started(build)"), &trace), Ok(false));
        assert_eq!(eval(&model, &p("X started(build)"), &trace), Ok(true));
        assert_eq!(eval(&model, &p("X X started(build)"), &trace), Ok(true));
        assert_eq!(
            eval(&model, &p("G (done(build) -> started(build))"), &trace),
            Ok(true)
        );
    }
}
