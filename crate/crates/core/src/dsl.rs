//! Text format for process models: a flat, diff-friendly statement-per-line
//! grammar plus a canonical printer.
//!
//! ```text
//! process <name>
//! activity <id> phase=<planning|development|deployment|operations> kind=<human|automated> [lane="<text>"] [name="<text>"]
//! artifact <id> phase=<...> kind=<data|logical|functional> [external] [lane=...] [name=...]
//! produce <activity_id> -> <artifact_id>
//! require <artifact_id> -> <activity_id>
//! feedback <artifact_id> -> <element_id> [label="<text>"]
//! ```
//!
//! `#` starts a comment (outside quotes); blank lines are ignored; the
//! `process` header comes first. Parsing builds the model without
//! validating it — well-formedness checks are a separate, explicit step so
//! deliberately broken models can be constructed for testing.
//!
//! [`print_model`] is canonical: activities, artifacts, produce, require
//! and feedback statements are each emitted in sorted order, so models
//! that are equal up to declaration order print byte-identically, and
//! `parse ∘ print` is the identity.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{
    ActivityKind, ArtifactKind, Association, AssociationKind, Element, ElementId, ElementKind,
    FeedbackAnnotation, Phase, ProcessModel,
};

/// Location of a token in the input, 1-based, columns inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

impl SourceSpan {
    fn new(line: usize, col_start: usize, col_end: usize) -> SourceSpan {
        SourceSpan {
            line,
            col_start,
            col_end: col_end.max(col_start),
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, columns {}-{}",
            self.line, self.col_start, self.col_end
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{span}: {message}")]
pub struct DslParseError {
    pub span: SourceSpan,
    pub message: String,
}

fn err(span: SourceSpan, message: impl Into<String>) -> DslParseError {
    DslParseError {
        span,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokKind {
    Word(String),
    Arrow,
    Attr { key: String, value: String },
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    span: SourceSpan,
}

/// Cut a line at the first `#` that is outside of quotes.
fn strip_comment(chars: &[char]) -> &[char] {
    let mut in_quotes = false;
    let mut escaped = false;
    for (i, &c) in chars.iter().enumerate() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_quotes => escaped = true,
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &chars[..i],
            _ => {}
        }
    }
    chars
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn tokenize_line(line_no: usize, raw: &str) -> Result<Vec<Tok>, DslParseError> {
    let chars: Vec<char> = raw.trim_end_matches('\r').chars().collect();
    let chars = strip_comment(&chars);
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i + 1;
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            toks.push(Tok {
                kind: TokKind::Arrow,
                span: SourceSpan::new(line_no, start, start + 1),
            });
            i += 2;
            continue;
        }
        if is_word_char(c) {
            let word_start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[word_start..i].iter().collect();
            if chars.get(i) != Some(&'=') {
                toks.push(Tok {
                    kind: TokKind::Word(word),
                    span: SourceSpan::new(line_no, start, i),
                });
                continue;
            }
            i += 1; // consume '='
            let value = if chars.get(i) == Some(&'"') {
                i += 1;
                let mut value = String::new();
                loop {
                    match chars.get(i) {
                        None => {
                            return Err(err(
                                SourceSpan::new(line_no, start, i),
                                "unterminated string value",
                            ))
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => match chars.get(i + 1) {
                            Some(c @ ('"' | '\\')) => {
                                value.push(*c);
                                i += 2;
                            }
                            _ => {
                                return Err(err(
                                    SourceSpan::new(line_no, i + 1, i + 2),
                                    "unknown escape (only \\\" and \\\\ are recognized)",
                                ))
                            }
                        },
                        Some(c) => {
                            value.push(*c);
                            i += 1;
                        }
                    }
                }
                value
            } else {
                let value_start = i;
                while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '"' {
                    i += 1;
                }
                if value_start == i {
                    return Err(err(
                        SourceSpan::new(line_no, start, i),
                        format!("attribute `{word}` has an empty value"),
                    ));
                }
                chars[value_start..i].iter().collect()
            };
            toks.push(Tok {
                kind: TokKind::Attr { key: word, value },
                span: SourceSpan::new(line_no, start, i),
            });
            continue;
        }
        return Err(err(
            SourceSpan::new(line_no, start, start),
            format!("unexpected character `{c}`"),
        ));
    }
    Ok(toks)
}

struct Stmt {
    toks: Vec<Tok>,
    at: usize,
    line: usize,
}

impl Stmt {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn end_span(&self) -> SourceSpan {
        self.toks
            .last()
            .map(|t| SourceSpan::new(self.line, t.span.col_end + 1, t.span.col_end + 1))
            .expect("statements are non-empty")
    }

    fn take_word(&mut self, what: &str) -> Result<(String, SourceSpan), DslParseError> {
        match self.toks.get(self.at) {
            Some(Tok {
                kind: TokKind::Word(w),
                span,
            }) => {
                let out = (w.clone(), *span);
                self.at += 1;
                Ok(out)
            }
            Some(t) => Err(err(t.span, format!("expected {what}"))),
            None => Err(err(self.end_span(), format!("expected {what}"))),
        }
    }

    fn take_arrow(&mut self) -> Result<(), DslParseError> {
        match self.toks.get(self.at) {
            Some(Tok {
                kind: TokKind::Arrow,
                ..
            }) => {
                self.at += 1;
                Ok(())
            }
            Some(t) => Err(err(t.span, "expected `->`")),
            None => Err(err(self.end_span(), "expected `->`")),
        }
    }

    fn expect_end(&self) -> Result<(), DslParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(err(t.span, "unexpected text after the statement")),
        }
    }

    fn take_id(&mut self, what: &str) -> Result<(ElementId, SourceSpan), DslParseError> {
        let (word, span) = self.take_word(what)?;
        let id = ElementId::new(word);
        if !id.is_valid() {
            return Err(err(
                span,
                format!("{what} `{id}` does not match [a-z][a-z0-9_]*"),
            ));
        }
        Ok((id, span))
    }
}

/// Attributes shared by element declarations.
#[derive(Default)]
struct ElementAttrs {
    phase: Option<Phase>,
    kind: Option<(String, SourceSpan)>,
    external: Option<SourceSpan>,
    lane: Option<String>,
    name: Option<String>,
}

fn parse_element_attrs(stmt: &mut Stmt) -> Result<ElementAttrs, DslParseError> {
    let mut attrs = ElementAttrs::default();
    while let Some(tok) = stmt.peek().cloned() {
        stmt.at += 1;
        match tok.kind {
            TokKind::Word(w) if w == "external" => {
                if attrs.external.is_some() {
                    return Err(err(tok.span, "duplicate `external`"));
                }
                attrs.external = Some(tok.span);
            }
            TokKind::Word(w) => {
                return Err(err(
                    tok.span,
                    format!("unexpected `{w}` (expected attributes)"),
                ));
            }
            TokKind::Arrow => return Err(err(tok.span, "unexpected `->` in a declaration")),
            TokKind::Attr { key, value } => match key.as_str() {
                "phase" => {
                    if attrs.phase.is_some() {
                        return Err(err(tok.span, "duplicate `phase` attribute"));
                    }
                    let Some(phase) = Phase::from_keyword(&value) else {
                        return Err(err(
                            tok.span,
                            format!("unknown phase `{value}` (expected planning, development, deployment or operations)"),
                        ));
                    };
                    attrs.phase = Some(phase);
                }
                "kind" => {
                    if attrs.kind.is_some() {
                        return Err(err(tok.span, "duplicate `kind` attribute"));
                    }
                    attrs.kind = Some((value, tok.span));
                }
                "lane" => {
                    if attrs.lane.is_some() {
                        return Err(err(tok.span, "duplicate `lane` attribute"));
                    }
                    attrs.lane = Some(value);
                }
                "name" => {
                    if attrs.name.is_some() {
                        return Err(err(tok.span, "duplicate `name` attribute"));
                    }
                    attrs.name = Some(value);
                }
                other => {
                    return Err(err(
                        tok.span,
                        format!("unknown attribute `{other}` (expected phase, kind, lane or name)"),
                    ));
                }
            },
        }
    }
    Ok(attrs)
}

/// Parse the model text format. The result is structurally complete but
/// not validated.
pub fn parse_model(text: &str) -> Result<ProcessModel, DslParseError> {
    let mut model: Option<ProcessModel> = None;
    let mut declared: BTreeSet<ElementId> = BTreeSet::new();

    for (line_idx, raw) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let toks = tokenize_line(line_no, raw)?;
        if toks.is_empty() {
            continue;
        }
        let mut stmt = Stmt {
            toks,
            at: 0,
            line: line_no,
        };
        let (keyword, kw_span) = match stmt.peek() {
            Some(Tok {
                kind: TokKind::Word(w),
                span,
            }) => (w.clone(), *span),
            Some(t) => return Err(err(t.span, "expected a keyword")),
            None => continue,
        };
        stmt.at += 1;

        if keyword != "process" && model.is_none() {
            return Err(err(kw_span, "expected the `process <name>` header first"));
        }

        match keyword.as_str() {
            "process" => {
                if model.is_some() {
                    return Err(err(kw_span, "duplicate `process` header"));
                }
                let (name, _) = stmt.take_id("process name")?;
                stmt.expect_end()?;
                model = Some(ProcessModel::new(name.as_str()));
            }
            "activity" | "artifact" => {
                let (id, id_span) = stmt.take_id("element id")?;
                if !declared.insert(id.clone()) {
                    return Err(err(id_span, format!("element `{id}` declared twice")));
                }
                let attrs = parse_element_attrs(&mut stmt)?;
                let Some(phase) = attrs.phase else {
                    return Err(err(
                        id_span,
                        format!("`{id}` is missing the `phase` attribute"),
                    ));
                };
                let Some((kind_word, kind_span)) = attrs.kind else {
                    return Err(err(
                        id_span,
                        format!("`{id}` is missing the `kind` attribute"),
                    ));
                };
                let mut element = if keyword == "activity" {
                    if let Some(span) = attrs.external {
                        return Err(err(span, "`external` applies to artifacts only"));
                    }
                    let Some(kind) = ActivityKind::from_keyword(&kind_word) else {
                        return Err(err(
                            kind_span,
                            format!(
                                "unknown activity kind `{kind_word}` (expected human or automated)"
                            ),
                        ));
                    };
                    Element::activity(id.as_str(), phase, kind)
                } else {
                    let Some(kind) = ArtifactKind::from_keyword(&kind_word) else {
                        return Err(err(
                            kind_span,
                            format!("unknown artifact kind `{kind_word}` (expected data, logical or functional)"),
                        ));
                    };
                    if attrs.external.is_some() {
                        Element::external_artifact(id.as_str(), phase, kind)
                    } else {
                        Element::artifact(id.as_str(), phase, kind)
                    }
                };
                if let Some(lane) = attrs.lane {
                    element = element.with_lane(lane);
                }
                if let Some(name) = attrs.name {
                    element = element.with_name(name);
                }
                model
                    .as_mut()
                    .expect("checked above")
                    .elements
                    .push(element);
            }
            "produce" | "require" => {
                let (from, _) = stmt.take_id("element id")?;
                stmt.take_arrow()?;
                let (to, _) = stmt.take_id("element id")?;
                stmt.expect_end()?;
                let assoc = if keyword == "produce" {
                    Association::produce(from.as_str(), to.as_str())
                } else {
                    Association::require(from.as_str(), to.as_str())
                };
                model
                    .as_mut()
                    .expect("checked above")
                    .associations
                    .push(assoc);
            }
            "feedback" => {
                let (source, _) = stmt.take_id("element id")?;
                stmt.take_arrow()?;
                let (target, _) = stmt.take_id("element id")?;
                let mut feedback = FeedbackAnnotation::new(source.as_str(), target.as_str());
                if let Some(tok) = stmt.peek().cloned() {
                    stmt.at += 1;
                    match tok.kind {
                        TokKind::Attr { key, value } if key == "label" => {
                            feedback = feedback.with_label(value);
                        }
                        _ => {
                            return Err(err(tok.span, "expected `label=\"...\"` or end of line"));
                        }
                    }
                }
                stmt.expect_end()?;
                model
                    .as_mut()
                    .expect("checked above")
                    .feedback
                    .push(feedback);
            }
            other => {
                return Err(err(
                    kw_span,
                    format!(
                        "unknown keyword `{other}` (expected process, activity, artifact, produce, require or feedback)"
                    ),
                ));
            }
        }
    }

    model.ok_or_else(|| err(SourceSpan::new(1, 1, 1), "missing `process <name>` header"))
}

fn quoted(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Canonical text form: header, then activities, artifacts, produce,
/// require and feedback statements, each section sorted and separated by a
/// blank line. `parse_model ∘ print_model` is the identity, and printing
/// is a one-pass fixpoint.
pub fn print_model(model: &ProcessModel) -> String {
    let mut out = format!("process {}\n", model.name);

    let mut activities: Vec<&Element> = model.activities().collect();
    activities.sort_by(|a, b| a.id.cmp(&b.id));
    let mut artifacts: Vec<&Element> = model.artifacts().collect();
    artifacts.sort_by(|a, b| a.id.cmp(&b.id));

    let element_line = |e: &Element| {
        let mut line = match e.kind {
            ElementKind::Activity(kind) => format!(
                "activity {} phase={} kind={}",
                e.id,
                e.phase.keyword(),
                kind.keyword()
            ),
            ElementKind::Artifact(kind) => format!(
                "artifact {} phase={} kind={}",
                e.id,
                e.phase.keyword(),
                kind.keyword()
            ),
        };
        if e.external {
            line.push_str(" external");
        }
        if !e.lane.is_empty() {
            line.push_str(&format!(" lane={}", quoted(&e.lane)));
        }
        if !e.display_name.is_empty() {
            line.push_str(&format!(" name={}", quoted(&e.display_name)));
        }
        line
    };

    for section in [activities, artifacts] {
        if !section.is_empty() {
            out.push('\n');
            for e in section {
                out.push_str(&element_line(e));
                out.push('\n');
            }
        }
    }

    for kind in [AssociationKind::Produce, AssociationKind::Require] {
        let mut edges: Vec<&Association> = model
            .associations
            .iter()
            .filter(|a| a.kind == kind)
            .collect();
        edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        if !edges.is_empty() {
            out.push('\n');
            let word = match kind {
                AssociationKind::Produce => "produce",
                AssociationKind::Require => "require",
            };
            for e in edges {
                out.push_str(&format!("{word} {} -> {}\n", e.from, e.to));
            }
        }
    }

    let mut feedback: Vec<&FeedbackAnnotation> = model.feedback.iter().collect();
    feedback
        .sort_by(|a, b| (&a.source, &a.target, &a.label).cmp(&(&b.source, &b.target, &b.label)));
    if !feedback.is_empty() {
        out.push('\n');
        for f in feedback {
            let mut line = format!("feedback {} -> {}", f.source, f.target);
            if !f.label.is_empty() {
                line.push_str(&format!(" label={}", quoted(&f.label)));
            }
            out.push_str(&line);
            out.push('\n');
        }
    }

    out
}
