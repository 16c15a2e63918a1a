//! Comparison tables and run summaries.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{percentage_point_decrease, relative_increase};

use super::preset::Sweep;
use super::runner::{run_scenario, Summary};

/// One row: a baseline run and a candidate run under the same workload.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub label: String,
    pub baseline: Summary,
    pub candidate: Summary,
}

impl ComparisonRow {
    /// Energy saving in percentage points of full-speed energy.
    pub fn energy_decrease_pp(&self) -> f64 {
        percentage_point_decrease(self.baseline.avg_energy, self.candidate.avg_energy)
    }

    /// Energy saving relative to the baseline, in percent.
    pub fn energy_decrease_rel(&self) -> f64 {
        -relative_increase(self.baseline.avg_energy, self.candidate.avg_energy)
    }

    pub fn cost_increase(&self) -> f64 {
        relative_increase(self.baseline.j_sum, self.candidate.j_sum)
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub name: String,
    pub label_header: String,
    pub rows: Vec<ComparisonRow>,
}

/// Runs every baseline and candidate, in parallel.
pub fn run_sweep(sweep: &Sweep) -> Result<SweepReport> {
    let rows = sweep
        .points
        .par_iter()
        .map(|p| {
            let (baseline, candidate) =
                rayon::join(|| run_scenario(&p.baseline), || run_scenario(&p.candidate));
            Ok(ComparisonRow {
                label: p.label.clone(),
                baseline: baseline?.summary,
                candidate: candidate?.summary,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        name: sweep.name.clone(),
        label_header: sweep.label_header.clone(),
        rows,
    })
}

pub const COLUMNS: [&str; 6] = [
    "E_AVG baseline (%)",
    "E_AVG candidate (%)",
    "Decrease (pp)",
    "J_SUM baseline",
    "J_SUM candidate",
    "Increase (%)",
];

impl SweepReport {
    /// The six numeric columns of each row, in [`COLUMNS`] order.
    pub fn table(&self) -> Vec<[f64; 6]> {
        self.rows
            .iter()
            .map(|r| {
                [
                    100.0 * r.baseline.avg_energy,
                    100.0 * r.candidate.avg_energy,
                    r.energy_decrease_pp(),
                    r.baseline.j_sum,
                    r.candidate.j_sum,
                    r.cost_increase(),
                ]
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let first = self.rows.first();
        let scheme = |f: fn(&ComparisonRow) -> &Summary| {
            first.map_or("-".to_string(), |r| f(r).scheme.to_string())
        };
        let _ = writeln!(out, "# {}", self.name);
        let _ = writeln!(
            out,
            "baseline: {}, candidate: {}\n",
            scheme(|r| &r.baseline),
            scheme(|r| &r.candidate)
        );
        let _ = writeln!(out, "| {} | {} |", self.label_header, COLUMNS.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(COLUMNS.len() + 1));
        for (row, v) in self.rows.iter().zip(self.table()) {
            let _ = writeln!(
                out,
                "| {} | {:.1} | {:.1} | {:.1} | {:.3} | {:.3} | {:.2} |",
                row.label, v[0], v[1], v[2], v[3], v[4], v[5]
            );
        }
        let _ = writeln!(out, "\nRelative energy decrease (% of baseline):");
        for row in &self.rows {
            let _ = writeln!(out, "  {}: {:.1}", row.label, row.energy_decrease_rel());
        }
        let _ = writeln!(out, "\nCandidate details:");
        for row in &self.rows {
            let c = &row.candidate;
            let _ = writeln!(
                out,
                "  {}: J_i = [{}], deadline misses {} (baseline {}), invocations {} timer + {} event",
                row.label,
                join(&c.per_loop_j),
                c.deadline_misses,
                row.baseline.deadline_misses,
                c.timer_invocations,
                c.event_invocations
            );
        }
        out
    }
}

pub fn render_summary(s: &Summary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", s.name);
    let _ = writeln!(out, "scheme: {}", s.scheme);
    let _ = writeln!(out, "duration (s): {}", s.duration);
    let _ = writeln!(out, "E_AVG (%): {:.3}", 100.0 * s.avg_energy);
    let _ = writeln!(out, "J_SUM: {:.4}", s.j_sum);
    let _ = writeln!(out, "J_i: [{}]", join(&s.per_loop_j));
    let _ = writeln!(out, "deadline misses: {}", s.deadline_misses);
    let _ = writeln!(
        out,
        "scheduler invocations: {} timer, {} event",
        s.timer_invocations, s.event_invocations
    );
    out
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.4}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn emit_report(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn emit_surface(path: &Path, points: &[(f64, f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["h1", "h2", "E"])?;
    for (h1, h2, e) in points {
        w.write_record([h1.to_string(), h2.to_string(), e.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
