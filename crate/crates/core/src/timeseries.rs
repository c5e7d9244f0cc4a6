//! Hourly irradiance series, unit handling, positional shifting and timestamp joins.
//!
//! Everything downstream of ingestion works in W/m² on an [`AlignedTable`]. The
//! satellite accumulation unit only exists between parsing and
//! [`convert_energy_to_power`].

use std::cmp::Ordering;
use std::fmt;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use crate::error::{Error, Result};

/// Length of one reanalysis accumulation window in seconds (3 h).
pub const ACCUMULATION_SECONDS: f64 = 3.0 * 3600.0;

/// A UTC instant at whole-hour resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(NaiveDateTime);

impl Timestamp {
    pub fn from_naive(instant: NaiveDateTime) -> Result<Self, String> {
        if instant.minute() != 0 || instant.second() != 0 || instant.nanosecond() != 0 {
            return Err(format!("timestamp {instant} is not on a whole hour"));
        }
        Ok(Timestamp(instant))
    }

    pub fn from_ymdh(year: i32, month: u32, day: u32, hour: u32) -> Result<Self, String> {
        NaiveDate::from_ymd_opt(year, month, day)
            .and_then(|d| d.and_hms_opt(hour, 0, 0))
            .map(Timestamp)
            .ok_or_else(|| format!("invalid calendar hour {year:04}-{month:02}-{day:02} {hour:02}h"))
    }

    /// Parses `YYYY-MM-DDTHH:MMZ`, `YYYY-MM-DDTHH:MM:SSZ` or the same with a
    /// `+00:00` suffix. Anything without an explicit UTC designator is rejected.
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let body = if let Some(b) = text.strip_suffix('Z').or_else(|| text.strip_suffix('z')) {
            b
        } else if let Some(b) = text.strip_suffix("+00:00") {
            b
        } else {
            return Err(format!("timestamp '{text}' lacks a UTC designator (Z or +00:00)"));
        };
        let naive = NaiveDateTime::parse_from_str(body, "%Y-%m-%dT%H:%M:%S")
            .or_else(|_| NaiveDateTime::parse_from_str(body, "%Y-%m-%dT%H:%M"))
            .map_err(|_| format!("malformed timestamp '{text}'"))?;
        Self::from_naive(naive)
    }

    pub fn naive(&self) -> NaiveDateTime {
        self.0
    }

    pub fn year(&self) -> i32 {
        self.0.year()
    }

    pub fn month(&self) -> u32 {
        self.0.month()
    }

    pub fn day(&self) -> u32 {
        self.0.day()
    }

    pub fn hour(&self) -> u32 {
        self.0.hour()
    }

    pub fn day_of_year(&self) -> u32 {
        self.0.ordinal()
    }

    pub fn date(&self) -> NaiveDate {
        self.0.date()
    }

    pub fn plus_hours(&self, hours: i64) -> Timestamp {
        Timestamp(self.0 + Duration::hours(hours))
    }

    /// Whole hours from `self` to `later` (negative when `later` is earlier).
    pub fn hours_until(&self, later: &Timestamp) -> i64 {
        (later.0 - self.0).num_hours()
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%dT%H:%MZ"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Ground,
    Satellite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    /// Mean power, W/m².
    WattsPerSqM,
    /// Energy accumulated over a 3 h window, J/m².
    JoulesPerSqMAccum,
}

impl Unit {
    pub fn name(&self) -> &'static str {
        match self {
            Unit::WattsPerSqM => "W_per_m2",
            Unit::JoulesPerSqMAccum => "J_per_m2_3h",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhiSample {
    pub t: Timestamp,
    pub value: f64,
}

impl GhiSample {
    pub fn new(t: Timestamp, value: f64) -> Self {
        GhiSample { t, value }
    }
}

/// Strictly time-ordered, single-unit irradiance series from one source.
#[derive(Debug, Clone, PartialEq)]
pub struct GhiSeries {
    source: Source,
    unit: Unit,
    samples: Vec<GhiSample>,
}

impl GhiSeries {
    pub fn new(source: Source, unit: Unit, samples: Vec<GhiSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !s.value.is_finite() {
                return Err(Error::InvalidSample {
                    position: i,
                    reason: "non-finite value".into(),
                });
            }
            if s.value < 0.0 {
                return Err(Error::InvalidSample {
                    position: i,
                    reason: format!("negative value {}", s.value),
                });
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[0].t >= w[1].t) {
            return Err(Error::NotIncreasing { position: i + 1 });
        }
        Ok(GhiSeries {
            source,
            unit,
            samples,
        })
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn samples(&self) -> &[GhiSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn span(&self) -> Option<(Timestamp, Timestamp)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }

    fn span_text(&self) -> String {
        match self.span() {
            Some((a, b)) => format!("{a}..{b}"),
            None => "(empty)".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedRow {
    pub t: Timestamp,
    pub ground: f64,
    pub satellite: f64,
}

/// Bookkeeping of what was discarded on the way to an [`AlignedTable`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Provenance {
    pub ground_unmatched: usize,
    pub satellite_unmatched: usize,
    pub filtered_out: usize,
}

/// Timestamp-joined ground/satellite pairs, both in W/m².
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlignedTable {
    rows: Vec<AlignedRow>,
    pub provenance: Provenance,
}

impl AlignedTable {
    pub fn new(rows: Vec<AlignedRow>, provenance: Provenance) -> Result<Self> {
        if let Some(i) = rows.windows(2).position(|w| w[0].t >= w[1].t) {
            return Err(Error::NotIncreasing { position: i + 1 });
        }
        Ok(AlignedTable { rows, provenance })
    }

    /// Builds a table from rows already known to be strictly increasing.
    pub(crate) fn from_sorted(rows: Vec<AlignedRow>, provenance: Provenance) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0].t < w[1].t));
        AlignedTable { rows, provenance }
    }

    pub fn rows(&self) -> &[AlignedRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Converts 3-hour accumulated energy (J/m²) to mean power (W/m²).
pub fn convert_energy_to_power(s: &GhiSeries) -> Result<GhiSeries> {
    if s.unit == Unit::WattsPerSqM {
        return Err(Error::AlreadyConverted);
    }
    let samples = s
        .samples
        .iter()
        .map(|x| GhiSample::new(x.t, x.value / ACCUMULATION_SECONDS))
        .collect();
    Ok(GhiSeries {
        source: s.source,
        unit: Unit::WattsPerSqM,
        samples,
    })
}

/// Positional shift. For `k > 0` the value at position `i + k` is relabelled
/// with the timestamp at position `i` (values move to earlier timestamps); for
/// `k < 0` the value at position `i` takes the timestamp at `i + |k|`. The `|k|`
/// samples left without a partner are dropped.
pub fn shift_series(s: &GhiSeries, k: i64) -> Result<GhiSeries> {
    let n = s.samples.len();
    let steps = k.unsigned_abs() as usize;
    if steps >= n {
        return Err(Error::ShiftTooLarge { steps: k, len: n });
    }
    let kept = n - steps;
    let samples = if k >= 0 {
        (0..kept)
            .map(|i| GhiSample::new(s.samples[i].t, s.samples[i + steps].value))
            .collect()
    } else {
        (0..kept)
            .map(|i| GhiSample::new(s.samples[i + steps].t, s.samples[i].value))
            .collect()
    };
    Ok(GhiSeries {
        source: s.source,
        unit: s.unit,
        samples,
    })
}

/// Joins two W/m² series on identical timestamps.
pub fn inner_join(ground: &GhiSeries, satellite: &GhiSeries) -> Result<AlignedTable> {
    for s in [ground, satellite] {
        if s.unit != Unit::WattsPerSqM {
            return Err(Error::UnitMismatch {
                expected: Unit::WattsPerSqM.name(),
                found: s.unit.name(),
            });
        }
    }
    let (g, s) = (&ground.samples, &satellite.samples);
    let mut rows = Vec::with_capacity(g.len().min(s.len()));
    let (mut i, mut j) = (0, 0);
    while i < g.len() && j < s.len() {
        match g[i].t.cmp(&s[j].t) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                rows.push(AlignedRow {
                    t: g[i].t,
                    ground: g[i].value,
                    satellite: s[j].value,
                });
                i += 1;
                j += 1;
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyJoin {
            ground: ground.span_text(),
            satellite: satellite.span_text(),
        });
    }
    let provenance = Provenance {
        ground_unmatched: g.len() - rows.len(),
        satellite_unmatched: s.len() - rows.len(),
        filtered_out: 0,
    };
    Ok(AlignedTable::from_sorted(rows, provenance))
}
