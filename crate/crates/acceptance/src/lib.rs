//! Reference data and a small runner for the acceptance gate.
//!
//! The tables here are transcribed by hand from the published tables,
//! independently of the bundled data files, so the gate compares two
//! transcriptions rather than one file with itself.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

/// Keyword count per secondary factor, counted once from the catalog table.
pub const CATALOG_MANIFEST: [(&str, usize); 15] = [
    ("H1", 18),
    ("H2", 29),
    ("H3", 26),
    ("O1", 13),
    ("O2", 10),
    ("O3", 13),
    ("T1", 25),
    ("T2", 32),
    ("T3", 6),
    ("P1", 16),
    ("P2", 19),
    ("I1", 22),
    ("I2", 12),
    ("E1", 16),
    ("E2", 17),
];

pub const FACTORS: [&str; 6] = ["Human", "Organisation", "Technology", "Process", "Information", "Environment"];

/// View rows as printed: id and the cell text for H, O, T, P, I, E.
pub const VIEW_TABLE: [(&str, [&str; 6]); 10] = [
    (
        "SV-1",
        [
            "Partially represented",
            "Represented",
            "Represented",
            "Partially represented (analysed together with SV-4)",
            "Represented",
            "Not represented",
        ],
    ),
    (
        "SV-2",
        [
            "Not represented",
            "Not represented",
            "Partially represented (only those related to communication)",
            "Not represented",
            "Represented",
            "Not represented",
        ],
    ),
    (
        "SV-11",
        [
            "Not represented",
            "Not represented",
            "Partially represented (only those related to communication)",
            "Not represented",
            "Represented",
            "Not represented",
        ],
    ),
    (
        "SV-4",
        [
            "Partially represented",
            "Not represented",
            "Represented",
            "Partially represented (analysed together with SV-1)",
            "Represented",
            "Not represented",
        ],
    ),
    (
        "SV-10",
        [
            "Partially represented",
            "Represented",
            "Represented",
            "Represented",
            "Represented",
            "Partially represented",
        ],
    ),
    (
        "OV-2",
        [
            "Partially represented",
            "Represented",
            "Represented",
            "Partially represented (analysed together with OV-5)",
            "Represented",
            "Not represented",
        ],
    ),
    (
        "OV-4",
        [
            "Partially represented",
            "Represented",
            "Not represented",
            "Partially represented",
            "Not represented",
            "Not represented",
        ],
    ),
    (
        "OV-7",
        [
            "Not represented",
            "Not represented",
            "Partially represented (only those related to info exchange)",
            "Not represented",
            "Represented",
            "Not represented",
        ],
    ),
    (
        "OV-5",
        [
            "Partially represented",
            "Not represented",
            "Represented",
            "Partially represented (analysed together with OV-2)",
            "Represented",
            "Not represented",
        ],
    ),
    (
        "OV-6",
        [
            "Partially represented",
            "Represented",
            "Represented",
            "Represented",
            "Represented",
            "Partially represented",
        ],
    ),
];

/// Rank of a printed cell: 0 not, 1 partially, 2 fully represented.
pub fn cell_rank(cell: &str) -> u8 {
    if cell.starts_with("Not represented") {
        0
    } else if cell.starts_with("Partially represented") {
        1
    } else if cell.starts_with("Represented") {
        2
    } else {
        panic!("unrecognised cell '{cell}'")
    }
}

pub fn view_ranks(view: &str) -> [u8; 6] {
    let (_, cells) = VIEW_TABLE
        .iter()
        .find(|(id, _)| *id == view)
        .unwrap_or_else(|| panic!("view {view} not in table"));
    cells.map(cell_rank)
}

/// Column-wise maximum over the named rows.
pub fn column_max(views: &[&str]) -> [u8; 6] {
    let mut out = [0u8; 6];
    for v in views {
        for (o, r) in out.iter_mut().zip(view_ranks(v)) {
            *o = (*o).max(r);
        }
    }
    out
}

/// Factor names whose rank is below `threshold`, with their rank.
pub fn gaps_below(ranks: [u8; 6], threshold: u8) -> Vec<(&'static str, u8)> {
    FACTORS
        .iter()
        .zip(ranks)
        .filter(|(_, r)| *r < threshold)
        .map(|(f, r)| (*f, r))
        .collect()
}

pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

/// Runs criteria one by one and prints a PASS/FAIL line for each.
#[derive(Default)]
pub struct Gate {
    outcomes: Vec<Outcome>,
}

impl Gate {
    pub fn new() -> Self {
        Gate::default()
    }

    /// Runs `check`; a returned `Err` or a panic counts as a failure.
    /// With `budget`, a run slower than the budget also fails.
    pub fn criterion(&mut self, name: &str, budget: Option<Duration>, check: impl FnOnce() -> Result<String, String>) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match result {
            Ok(Ok(d)) => (true, d),
            Ok(Err(e)) => (false, e),
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panicked".into());
                (false, format!("panic: {msg}"))
            }
        };
        if let Some(b) = budget {
            if passed && elapsed > b {
                passed = false;
                detail = format!("{detail}; exceeded {b:?}");
            }
        }
        println!(
            "{} {name}: {detail} [{:.3}s]",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        self.outcomes.push(Outcome {
            name: name.to_string(),
            passed,
            detail,
            elapsed,
        });
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn finish(self) -> ExitCode {
        let failed: Vec<&str> = self.outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
        println!(
            "\n{} of {} criteria passed",
            self.outcomes.len() - failed.len(),
            self.outcomes.len()
        );
        if failed.is_empty() {
            ExitCode::SUCCESS
        } else {
            println!("failed: {}", failed.join(", "));
            ExitCode::FAILURE
        }
    }
}
