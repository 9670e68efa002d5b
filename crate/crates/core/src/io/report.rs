//! Markdown session reports.

use std::fmt::Write;

use crate::analysis::{
    factor_usage, gap_report, merge_coverage, stale_report, RepresentationLevel, ViewProfile,
};
use crate::model::{CausalPath, Classification, Project, UNKNOWN_AUTHOR};
use crate::stpa::{AugmentationFinding, Disposition};
use crate::taxonomy::PrimaryFactor;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportSection {
    pub title: String,
    pub body: String,
}

/// Report sections computed from one borrowed project snapshot.
#[derive(Debug, Clone)]
pub struct ReportBundle<'a> {
    pub project: &'a Project,
    pub sections: Vec<ReportSection>,
}

impl ReportBundle<'_> {
    pub fn to_markdown(&self) -> String {
        let mut out = format!("# Hazard analysis report: {}\n", cell(self.project.name()));
        for s in &self.sections {
            write!(out, "\n## {}\n\n{}", s.title, s.body).unwrap();
            if !s.body.ends_with('\n') {
                out.push('\n');
            }
        }
        out
    }
}

fn cell(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('|', "\\|")
        .replace(['\n', '\r'], " ")
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("| {} |\n", header.join(" | "));
    out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    for r in rows {
        out.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    out
}

fn endpoint(p: &CausalPath, source: bool) -> String {
    cell(&if source { &p.source } else { &p.target }.to_string())
}

fn keywords(p: &CausalPath) -> String {
    cell(&p.keywords.join(", "))
}

fn latest_evidence(p: &CausalPath) -> String {
    p.evidence
        .last()
        .map(|e| cell(&format!("{} ({}, {})", e.text, e.author, e.phase)))
        .unwrap_or_else(|| "-".into())
}

fn path_rows<'a>(paths: impl Iterator<Item = &'a CausalPath>) -> Vec<Vec<String>> {
    paths
        .map(|p| {
            vec![
                cell(p.id.as_str()),
                endpoint(p, true),
                endpoint(p, false),
                keywords(p),
                cell(&p.narrative),
            ]
        })
        .collect()
}

pub fn build_report<'a>(project: &'a Project, profiles: Option<&[ViewProfile]>) -> ReportBundle<'a> {
    let paths = project.paths();
    let count = |c: Classification| paths.iter().filter(|p| p.classification == c).count();
    let open = project.open_uncertainties(None);
    let stale = stale_report(project, project.current_phase());
    let mut sections = Vec::new();

    let summary = table(
        &["Measure", "Value"],
        &[
            vec!["Current phase".into(), project.current_phase().to_string()],
            vec!["Objects".into(), project.objects().len().to_string()],
            vec!["Causal paths".into(), paths.len().to_string()],
            vec!["Definite".into(), count(Classification::Definite).to_string()],
            vec!["Plausible".into(), count(Classification::Plausible).to_string()],
            vec!["Discharged".into(), count(Classification::Discharged).to_string()],
            vec!["Open uncertainties".into(), open.len().to_string()],
            vec!["Stale uncertainties".into(), stale.len().to_string()],
        ],
    );
    sections.push(ReportSection {
        title: "Summary".into(),
        body: summary,
    });

    sections.push(ReportSection {
        title: "Definite paths (hazard feed)".into(),
        body: table(
            &["Path", "Source", "Target", "Keywords", "Narrative"],
            &path_rows(paths.iter().filter(|p| p.classification == Classification::Definite)),
        ),
    });

    let open_rows: Vec<Vec<String>> = open
        .iter()
        .map(|p| {
            let is_stale = stale.iter().any(|s| s.id == p.id);
            vec![
                cell(p.id.as_str()),
                endpoint(p, true),
                endpoint(p, false),
                keywords(p),
                p.last_touched_phase().to_string(),
                if is_stale { "yes".into() } else { "no".into() },
            ]
        })
        .collect();
    sections.push(ReportSection {
        title: "Open uncertainties".into(),
        body: table(
            &["Path", "Source", "Target", "Keywords", "Last information", "Stale"],
            &open_rows,
        ),
    });

    let mut factor_header = vec!["Object"];
    factor_header.extend(PrimaryFactor::ALL.iter().map(|f| f.name()));
    let usage = factor_usage(project);
    let usage_rows: Vec<Vec<String>> = project
        .objects()
        .iter()
        .map(|o| {
            let counts = &usage[&o.id];
            let mut row = vec![cell(o.id.as_str())];
            row.extend(PrimaryFactor::ALL.iter().map(|f| counts[f].to_string()));
            row
        })
        .collect();
    sections.push(ReportSection {
        title: "Factor usage".into(),
        body: table(&factor_header, &usage_rows),
    });

    let mut review = Vec::new();
    for p in paths.iter().filter(|p| p.retired_from_definite()) {
        review.push(format!(
            "- {}: previously Definite, now Discharged; confirm removal from hazard analysis.\n",
            cell(p.id.as_str())
        ));
    }
    for p in paths {
        let anon = p.evidence.iter().filter(|e| e.author == UNKNOWN_AUTHOR).count();
        if anon > 0 {
            review.push(format!(
                "- {}: {anon} evidence entr{} recorded without an author.\n",
                cell(p.id.as_str()),
                if anon == 1 { "y" } else { "ies" }
            ));
        }
    }
    sections.push(ReportSection {
        title: "Flagged for review".into(),
        body: if review.is_empty() {
            "None.\n".into()
        } else {
            review.concat()
        },
    });

    if let Some(profiles) = profiles {
        let mut body = String::new();
        match merge_coverage(profiles) {
            Ok(matrix) => {
                let mut header = vec!["View"];
                header.extend(PrimaryFactor::ALL.iter().map(|f| f.name()));
                let mut rows: Vec<Vec<String>> = matrix
                    .rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![cell(&r.view_id)];
                        row.extend(r.levels.iter().map(|(_, l)| l.label().to_string()));
                        row
                    })
                    .collect();
                let mut merged = vec!["**MERGED**".to_string()];
                merged.extend(matrix.merged.iter().map(|(_, l)| l.label().to_string()));
                rows.push(merged);
                body.push_str(&table(&header, &rows));
            }
            Err(e) => writeln!(body, "Coverage unavailable: {e}").unwrap(),
        }
        sections.push(ReportSection {
            title: "View coverage".into(),
            body,
        });
        let gaps = gap_report(profiles, RepresentationLevel::Represented);
        sections.push(ReportSection {
            title: "Coverage gaps".into(),
            body: if gaps.is_empty() {
                "None.\n".into()
            } else {
                gaps.iter()
                    .map(|(f, l)| format!("- {f}: {l}\n"))
                    .collect()
            },
        });
    }

    let mut history = String::new();
    for p in paths.iter().filter(|p| !p.evidence.is_empty()) {
        writeln!(
            history,
            "### {} ({}; initially {})\n",
            cell(p.id.as_str()),
            p.classification,
            p.initial_classification
        )
        .unwrap();
        for e in &p.evidence {
            writeln!(
                history,
                "- {} [{}] {}: {} -> {}",
                e.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                e.phase,
                cell(&e.author),
                cell(&e.text),
                e.resulting_classification
            )
            .unwrap();
        }
        history.push('\n');
    }
    sections.push(ReportSection {
        title: "Path history".into(),
        body: if history.is_empty() {
            "No evidence recorded.\n".into()
        } else {
            history
        },
    });

    ReportBundle { project, sections }
}

/// Markdown session report; coverage sections appear when profiles are given.
pub fn render_report(project: &Project, profiles: Option<&[ViewProfile]>) -> String {
    build_report(project, profiles).to_markdown()
}

/// Findings table with path id, endpoints, keywords, disposition and latest evidence.
pub fn findings_markdown(project: &Project, findings: &[AugmentationFinding]) -> String {
    let rows: Vec<Vec<String>> = findings
        .iter()
        .filter_map(|f| project.path(f.path_id.as_str()).map(|p| (f, p)))
        .map(|(f, p)| {
            vec![
                cell(p.id.as_str()),
                format!("{} -> {}", endpoint(p, true), endpoint(p, false)),
                keywords(p),
                match f.disposition {
                    Disposition::FeedToSTPA => "FeedToSTPA".into(),
                    Disposition::TrackAsUncertain => "TrackAsUncertain".into(),
                },
                latest_evidence(p),
            ]
        })
        .collect();
    table(
        &["Path", "Endpoints", "Keywords", "Disposition", "Latest evidence"],
        &rows,
    )
}
