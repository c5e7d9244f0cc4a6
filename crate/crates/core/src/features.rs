//! Per-month design matrices: intercept, satellite GHI, and reference-coded
//! one-hot blocks for day of month and hour of day.
//!
//! Column order is `[intercept, sat_ghi, day=d.., hour=h..]` with days and hours
//! ascending and the first observed level of each block dropped.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::preprocess::MonthlyDataset;
use crate::timeseries::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryVocabulary {
    days: Vec<u32>,
    hours: Vec<u32>,
}

impl CategoryVocabulary {
    pub fn new(days: impl IntoIterator<Item = u32>, hours: impl IntoIterator<Item = u32>) -> Result<Self> {
        let days: Vec<u32> = days.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let hours: Vec<u32> = hours.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if days.is_empty() || hours.is_empty() {
            return Err(Error::EmptyMonth);
        }
        if days.iter().any(|d| !(1..=31).contains(d)) || hours.iter().any(|h| *h > 23) {
            return Err(Error::Dimension("day must be in 1..=31 and hour in 0..=23".into()));
        }
        Ok(CategoryVocabulary { days, hours })
    }

    pub fn days(&self) -> &[u32] {
        &self.days
    }

    pub fn hours(&self) -> &[u32] {
        &self.hours
    }

    pub fn reference_day(&self) -> u32 {
        self.days[0]
    }

    pub fn reference_hour(&self) -> u32 {
        self.hours[0]
    }

    /// `2 + (|days| - 1) + (|hours| - 1)`
    pub fn n_cols(&self) -> usize {
        self.days.len() + self.hours.len()
    }

    pub fn column_labels(&self) -> Vec<String> {
        let mut labels = vec!["intercept".to_string(), "sat_ghi".to_string()];
        labels.extend(self.days[1..].iter().map(|d| format!("day={d}")));
        labels.extend(self.hours[1..].iter().map(|h| format!("hour={h}")));
        labels
    }
}

pub fn build_vocabulary(m: &MonthlyDataset) -> Result<CategoryVocabulary> {
    if m.is_empty() {
        return Err(Error::EmptyMonth);
    }
    CategoryVocabulary::new(m.rows().iter().map(|r| r.t.day()), m.rows().iter().map(|r| r.t.hour()))
}

fn encode_into(out: &mut [f64], t: Timestamp, sat_ghi: f64, v: &CategoryVocabulary) {
    out.fill(0.0);
    out[0] = 1.0;
    out[1] = sat_ghi;
    let day_block = 2;
    let hour_block = day_block + v.days.len() - 1;
    // Reference levels and unseen values leave their block all zero.
    if let Ok(pos) = v.days.binary_search(&t.day()) {
        if pos > 0 {
            out[day_block + pos - 1] = 1.0;
        }
    }
    if let Ok(pos) = v.hours.binary_search(&t.hour()) {
        if pos > 0 {
            out[hour_block + pos - 1] = 1.0;
        }
    }
}

pub fn encode_row(t: Timestamp, sat_ghi: f64, v: &CategoryVocabulary) -> Vec<f64> {
    let mut out = vec![0.0; v.n_cols()];
    encode_into(&mut out, t, sat_ghi, v);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub x: Matrix,
    /// Ground GHI, W/m².
    pub y: Vec<f64>,
    pub columns: Vec<String>,
    pub vocab: CategoryVocabulary,
}

pub fn build_design_matrix(m: &MonthlyDataset) -> Result<DesignMatrix> {
    let vocab = build_vocabulary(m)?;
    let cols = vocab.n_cols();
    let mut data = vec![0.0; m.len() * cols];
    for (row, out) in m.rows().iter().zip(data.chunks_exact_mut(cols)) {
        encode_into(out, row.t, row.satellite, &vocab);
    }
    Ok(DesignMatrix {
        x: Matrix::from_row_major(m.len(), cols, data)?,
        y: m.rows().iter().map(|r| r.ground).collect(),
        columns: vocab.column_labels(),
        vocab,
    })
}
