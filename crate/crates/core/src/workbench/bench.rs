use std::fmt::Write as _;

use serde::Serialize;

use crate::reduce::{ReductionReport, ReductionStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    /// One row for the whole problem set.
    Set,
    /// Rows by baseline zone size bucket.
    Size,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    /// Mean of per-problem final/baseline ratios.
    Mean,
    /// Sum of final sizes over sum of baseline sizes.
    Pooled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub group: String,
    pub problems: usize,
    pub unsolved: usize,
    pub mean_baseline: f64,
    pub mean_final: f64,
    /// Percentage.
    pub reduction_rate: f64,
    pub mean_iterations: f64,
    pub mean_expansions: f64,
    pub mean_iteration_expansions: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSummary {
    pub group_by: GroupBy,
    pub rate_mode: RateMode,
    pub rows: Vec<BenchRow>,
}

pub const BUCKETS: [&str; 4] = ["≤20", "21-30", "31-40", ">40"];

pub fn bucket_of(size: usize) -> &'static str {
    match size {
        0..=20 => BUCKETS[0],
        21..=30 => BUCKETS[1],
        31..=40 => BUCKETS[2],
        _ => BUCKETS[3],
    }
}

/// `22.77 (85.95%)`: mean final size, then the reduction rate.
pub fn format_size_rate(mean_size: f64, rate_pct: f64) -> String {
    format!("{mean_size:.2} ({rate_pct:.2}%)")
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn row(group: &str, reports: &[&ReductionReport], rate: RateMode) -> BenchRow {
    let solved: Vec<&&ReductionReport> = reports
        .iter()
        .filter(|r| r.status != ReductionStatus::Unsolved)
        .collect();
    let base = |r: &&&ReductionReport| r.initial_size.unwrap_or(0) as f64;
    let fin = |r: &&&ReductionReport| r.final_size.unwrap_or(0) as f64;
    let reduction_rate = 100.0
        * match rate {
            RateMode::Mean => mean(solved.iter().map(|r| r.reduction_rate.unwrap_or(1.0))),
            RateMode::Pooled => {
                let b: f64 = solved.iter().map(base).sum();
                if b == 0.0 {
                    0.0
                } else {
                    solved.iter().map(fin).sum::<f64>() / b
                }
            }
        };
    let iters: Vec<_> = solved.iter().flat_map(|r| r.iterations.iter()).collect();
    BenchRow {
        group: group.to_string(),
        problems: reports.len(),
        unsolved: reports.len() - solved.len(),
        mean_baseline: mean(solved.iter().map(base)),
        mean_final: mean(solved.iter().map(fin)),
        reduction_rate,
        mean_iterations: mean(solved.iter().map(|r| r.iterations.len() as f64)),
        mean_expansions: mean(reports.iter().map(|r| {
            (r.init_expansions + r.iterations.iter().map(|i| i.expansions_used).sum::<u64>()) as f64
        })),
        mean_iteration_expansions: mean(iters.iter().map(|i| i.expansions_used as f64)),
    }
}

/// Aggregates reports into rows; with `GroupBy::Size`, unsolved problems
/// have no baseline and are left out.
pub fn summarize(set_name: &str, reports: &[ReductionReport], group_by: GroupBy, rate: RateMode) -> BenchSummary {
    let all: Vec<&ReductionReport> = reports.iter().collect();
    let rows = match group_by {
        GroupBy::Set => vec![row(set_name, &all, rate)],
        GroupBy::Size => BUCKETS
            .iter()
            .filter_map(|b| {
                let members: Vec<&ReductionReport> = all
                    .iter()
                    .copied()
                    .filter(|r| r.initial_size.is_some_and(|s| bucket_of(s) == *b))
                    .collect();
                (!members.is_empty()).then(|| row(b, &members, rate))
            })
            .collect(),
    };
    BenchSummary {
        group_by,
        rate_mode: rate,
        rows,
    }
}

impl BenchSummary {
    pub fn to_text(&self) -> String {
        let header = ["group", "problems", "unsolved", "baseline", "final (rate)", "iters", "exp/iter"];
        let cells: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.group.clone(),
                    r.problems.to_string(),
                    r.unsolved.to_string(),
                    format!("{:.2}", r.mean_baseline),
                    format_size_rate(r.mean_final, r.reduction_rate),
                    format!("{:.2}", r.mean_iterations),
                    format!("{:.1}", r.mean_iteration_expansions),
                ]
            })
            .collect();
        let mut widths = header.map(|h| h.chars().count());
        for c in &cells {
            for (w, s) in widths.iter_mut().zip(c) {
                *w = (*w).max(s.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, c: &[String]| {
            let parts: Vec<String> = c
                .iter()
                .zip(widths)
                .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &header.map(String::from));
        for c in &cells {
            line(&mut out, c);
        }
        out
    }
}
