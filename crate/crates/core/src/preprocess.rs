//! Difference series, daylight filtering, daily means and calendar-month pooling.
//!
//! Differences are always `ground - satellite`, so a positive value means the
//! satellite underestimates.

use std::collections::BTreeSet;

use chrono::NaiveDate;

use crate::timeseries::{AlignedRow, AlignedTable, Provenance, Timestamp};

/// Rows of one calendar month, pooled across every year present.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyDataset {
    month: u32,
    rows: Vec<AlignedRow>,
    years_present: BTreeSet<i32>,
}

impl MonthlyDataset {
    /// Collects the rows of `month` from `rows`, which must be time-ordered.
    pub fn new(month: u32, rows: Vec<AlignedRow>) -> Self {
        assert!((1..=12).contains(&month), "month {month} out of range");
        debug_assert!(rows.iter().all(|r| r.t.month() == month));
        debug_assert!(rows.windows(2).all(|w| w[0].t < w[1].t));
        let years_present = rows.iter().map(|r| r.t.year()).collect();
        MonthlyDataset {
            month,
            rows,
            years_present,
        }
    }

    pub fn month(&self) -> u32 {
        self.month
    }

    pub fn rows(&self) -> &[AlignedRow] {
        &self.rows
    }

    pub fn years_present(&self) -> &BTreeSet<i32> {
        &self.years_present
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyMeanDiff {
    pub date: NaiveDate,
    pub mean_diff: f64,
    pub n: usize,
}

pub fn difference_series(t: &AlignedTable) -> Vec<(Timestamp, f64)> {
    t.rows().iter().map(|r| (r.t, r.ground - r.satellite)).collect()
}

/// Keeps rows where both readings exceed `epsilon`.
pub fn filter_daylight(t: &AlignedTable, epsilon: f64) -> AlignedTable {
    let rows: Vec<AlignedRow> = t
        .rows()
        .iter()
        .filter(|r| r.ground > epsilon && r.satellite > epsilon)
        .copied()
        .collect();
    let provenance = Provenance {
        filtered_out: t.provenance.filtered_out + (t.len() - rows.len()),
        ..t.provenance
    };
    AlignedTable::from_sorted(rows, provenance)
}

/// One record per calendar day, averaging that day's `ground - satellite`.
pub fn daily_mean_difference(t: &AlignedTable) -> Vec<DailyMeanDiff> {
    let mut out: Vec<DailyMeanDiff> = Vec::new();
    let mut sum = 0.0;
    for r in t.rows() {
        let date = r.t.date();
        match out.last_mut() {
            Some(last) if last.date == date => {
                sum += r.ground - r.satellite;
                last.n += 1;
                last.mean_diff = sum / last.n as f64;
            }
            _ => {
                sum = r.ground - r.satellite;
                out.push(DailyMeanDiff {
                    date,
                    mean_diff: sum,
                    n: 1,
                });
            }
        }
    }
    out
}

/// Splits rows into twelve calendar-month datasets (index 0 is January).
pub fn group_by_month(t: &AlignedTable) -> Vec<MonthlyDataset> {
    let mut buckets: Vec<Vec<AlignedRow>> = vec![Vec::new(); 12];
    for r in t.rows() {
        buckets[r.t.month() as usize - 1].push(*r);
    }
    buckets
        .into_iter()
        .enumerate()
        .map(|(i, rows)| MonthlyDataset::new(i as u32 + 1, rows))
        .collect()
}

/// Row count per calendar month; index 0 is January.
pub fn monthly_counts(t: &AlignedTable) -> [usize; 12] {
    let mut counts = [0usize; 12];
    for r in t.rows() {
        counts[r.t.month() as usize - 1] += 1;
    }
    counts
}
