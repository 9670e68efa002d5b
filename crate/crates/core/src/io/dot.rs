//! HOT-PIE diagrams in Graphviz DOT.
//!
//! Each object is a record node with six ports in fixed H, O, T, P, I, E
//! order, one per hexagon vertex. Each causal path is an edge from the
//! source object's factor port to the target object's factor port.

use std::fmt::Write;

use crate::model::{Classification, Project};
use crate::taxonomy::PrimaryFactor;

#[derive(Debug, Clone, Copy, Default)]
pub struct DotOptions {
    pub show_discharged: bool,
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' | '\r' => out.push(' '),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Escapes text for use inside a record label field.
fn record_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '{' | '}' | '|' | '<' | '>' | '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' | '\r' => out.push(' '),
            _ => out.push(c),
        }
    }
    out
}

fn style(c: Classification) -> &'static str {
    match c {
        Classification::Definite => "solid",
        Classification::Plausible => "dashed",
        Classification::Discharged => "dotted",
    }
}

pub fn export_dot(project: &Project, options: DotOptions) -> String {
    let mut out = String::new();
    let ports: Vec<String> = PrimaryFactor::ALL
        .iter()
        .map(|f| format!("<{0}>{0}", f.code()))
        .collect();
    let ports = ports.join("|");

    writeln!(out, "digraph {} {{", quote(project.id())).unwrap();
    writeln!(out, "  graph [rankdir=LR, label={}];", quote(project.name())).unwrap();
    writeln!(out, "  node [shape=record];").unwrap();
    for o in project.objects() {
        writeln!(
            out,
            "  {} [label=\"{}|{{{}}}\"];",
            quote(o.id.as_str()),
            record_text(&o.name),
            ports
        )
        .unwrap();
    }
    for p in project.paths() {
        if p.classification == Classification::Discharged && !options.show_discharged {
            continue;
        }
        let label = if p.keywords.is_empty() {
            p.id.to_string()
        } else {
            format!("{}: {}", p.id, p.keywords.join(", "))
        };
        writeln!(
            out,
            "  {}:{} -> {}:{} [id={}, label={}, style={}];",
            quote(p.source.object.as_str()),
            p.source.primary.code(),
            quote(p.target.object.as_str()),
            p.target.primary.code(),
            quote(p.id.as_str()),
            quote(&label),
            style(p.classification)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
