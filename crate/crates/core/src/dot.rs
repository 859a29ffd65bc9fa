//! Graphviz export: renders a process model as a `dot` digraph with one
//! cluster per phase.
//!
//! The output is deterministic — nodes and edges are sorted — so it can be
//! diffed and golden-tested. Activities render as boxes, artifacts as
//! ellipses (doubled borders for external ones), associations as solid
//! edges and feedback annotations as dashed edges.

use crate::model::{ElementKind, Phase, ProcessModel};

fn dot_quoted(text: &str) -> String {
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

/// Render the model as Graphviz `dot` text.
///
/// Every phase appears as a cluster (empty clusters included, so layouts
/// stay comparable across models), every association as exactly one solid
/// edge, and every feedback annotation as one dashed edge.
pub fn export_dot(model: &ProcessModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("digraph {} {{\n", dot_quoted(&model.name)));
    out.push_str("  rankdir=LR;\n");

    for phase in Phase::ALL {
        out.push_str(&format!("  subgraph cluster_{} {{\n", phase.keyword()));
        out.push_str(&format!("    label={};\n", dot_quoted(phase.label())));
        let mut members: Vec<_> = model.elements.iter().filter(|e| e.phase == phase).collect();
        members.sort_by(|a, b| a.id.cmp(&b.id));
        for e in members {
            let shape = match e.kind {
                ElementKind::Activity(_) => "shape=box",
                ElementKind::Artifact(_) => "shape=ellipse",
            };
            let mut attrs = format!("{shape}, label={}", dot_quoted(e.label()));
            if e.external {
                attrs.push_str(", peripheries=2");
            }
            out.push_str(&format!("    {} [{attrs}];\n", dot_quoted(e.id.as_str())));
        }
        out.push_str("  }\n");
    }

    let mut assocs: Vec<_> = model.associations.iter().collect();
    assocs.sort();
    for a in assocs {
        out.push_str(&format!(
            "  {} -> {};\n",
            dot_quoted(a.from.as_str()),
            dot_quoted(a.to.as_str())
        ));
    }

    let mut feedback: Vec<_> = model.feedback.iter().collect();
    feedback.sort();
    for f in feedback {
        let mut attrs = String::from("style=dashed");
        if !f.label.is_empty() {
            attrs.push_str(&format!(", label={}", dot_quoted(&f.label)));
        }
        out.push_str(&format!(
            "  {} -> {} [{attrs}];\n",
            dot_quoted(f.source.as_str()),
            dot_quoted(f.target.as_str())
        ));
    }

    out.push_str("}\n");
    out
}
