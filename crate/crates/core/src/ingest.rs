//! Ground-station and satellite CSV files.
//!
//! Both formats are a plain two-column CSV preceded by `# key=value` comment
//! lines. Ground files carry station metadata (`lat`, `lon`, `alt`, `tz`) and
//! the header `timestamp,ghi_w_m2`. Satellite files carry `unit=J_per_m2_3h` or
//! `unit=W_per_m2` and the header `timestamp,ssrd`. Timestamps are ISO-8601
//! with an explicit UTC designator.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::timeseries::{GhiSample, GhiSeries, Source, Timestamp, Unit};

pub const GROUND_HEADER: &str = "timestamp,ghi_w_m2";
pub const SATELLITE_HEADER: &str = "timestamp,ssrd";

#[derive(Debug, Clone, PartialEq)]
pub struct StationMetadata {
    pub latitude: f64,
    pub longitude: f64,
    pub altitude: f64,
    pub timezone: String,
}

impl StationMetadata {
    pub fn new(latitude: f64, longitude: f64, altitude: f64, timezone: impl Into<String>) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(Error::Metadata(format!("latitude {latitude} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(Error::Metadata(format!("longitude {longitude} outside [-180, 180]")));
        }
        if !altitude.is_finite() {
            return Err(Error::Metadata(format!("altitude {altitude} is not finite")));
        }
        Ok(StationMetadata {
            latitude,
            longitude,
            altitude,
            timezone: timezone.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationReport {
    pub row_count: usize,
    pub gap_count: usize,
    pub duplicate_count: usize,
    pub nonfinite_count: usize,
    pub span: Option<(Timestamp, Timestamp)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Ground,
    Satellite,
}

/// A lexed file: comment metadata plus raw rows with their line numbers.
struct RawFile {
    kind: FileKind,
    meta: Meta,
    rows: Vec<(usize, Timestamp, f64)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn lex(content: &str) -> Result<RawFile> {
    let mut meta = BTreeMap::new();
    let mut kind = None;
    let mut rows = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if kind.is_some() {
                continue;
            }
            for pair in comment.split(',') {
                let pair = pair.trim();
                if pair.is_empty() {
                    continue;
                }
                if let Some((k, v)) = pair.split_once('=') {
                    meta.insert(k.trim().to_ascii_lowercase(), (line_no, v.trim().to_string()));
                }
            }
            continue;
        }
        if kind.is_none() {
            let header: String = line.chars().filter(|c| !c.is_whitespace()).collect();
            kind = Some(match header.to_ascii_lowercase().as_str() {
                GROUND_HEADER => FileKind::Ground,
                SATELLITE_HEADER => FileKind::Satellite,
                _ => {
                    return Err(parse_err(
                        line_no,
                        format!("expected header '{GROUND_HEADER}' or '{SATELLITE_HEADER}', found '{line}'"),
                    ))
                }
            });
            continue;
        }
        let mut fields = line.split(',');
        let (Some(ts), Some(val), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(line_no, "expected exactly two columns"));
        };
        let t = Timestamp::parse(ts).map_err(|m| parse_err(line_no, m))?;
        let val = val.trim();
        let value: f64 = val
            .parse()
            .map_err(|_| parse_err(line_no, format!("malformed number '{val}'")))?;
        rows.push((line_no, t, value));
    }
    let kind = kind.ok_or_else(|| parse_err(content.lines().count().max(1), "missing column header"))?;
    Ok(RawFile { kind, meta, rows })
}

/// Turns lexed rows into a strictly increasing series, rejecting non-finite or
/// negative values and duplicated timestamps.
fn to_series(rows: &[(usize, Timestamp, f64)], source: Source, unit: Unit, what: &str) -> Result<GhiSeries> {
    if rows.is_empty() {
        return Err(Error::Format("no samples".into()));
    }
    for &(line, _, v) in rows {
        if !v.is_finite() {
            return Err(parse_err(line, "non-finite value"));
        }
        if v < 0.0 {
            return Err(parse_err(line, format!("negative {what}")));
        }
    }
    let mut sorted: Vec<&(usize, Timestamp, f64)> = rows.iter().collect();
    sorted.sort_by_key(|r| r.1);
    if let Some(w) = sorted.windows(2).find(|w| w[0].1 == w[1].1) {
        return Err(parse_err(
            w[1].0.max(w[0].0),
            format!("duplicate timestamp {} (also on line {})", w[0].1, w[1].0.min(w[0].0)),
        ));
    }
    let samples = sorted.into_iter().map(|&(_, t, v)| GhiSample::new(t, v)).collect();
    GhiSeries::new(source, unit, samples)
}

fn meta_number(meta: &Meta, key: &str) -> Result<f64> {
    let (line, text) = meta
        .get(key)
        .ok_or_else(|| Error::Metadata(format!("missing '{key}' in header comments")))?;
    text.parse()
        .map_err(|_| parse_err(*line, format!("malformed {key} '{text}'")))
}

type Meta = BTreeMap<String, (usize, String)>;

fn station(meta: &Meta) -> Result<StationMetadata> {
    StationMetadata::new(
        meta_number(meta, "lat")?,
        meta_number(meta, "lon")?,
        meta_number(meta, "alt")?,
        meta.get("tz").map(|(_, v)| v.clone()).unwrap_or_else(|| "UTC".into()),
    )
}

fn declared_unit(meta: &Meta) -> Result<Unit> {
    let (line, declared) = meta
        .get("unit")
        .ok_or_else(|| Error::Format("unit declaration required ('# unit=J_per_m2_3h' or '# unit=W_per_m2')".into()))?;
    match declared.as_str() {
        "J_per_m2_3h" => Ok(Unit::JoulesPerSqMAccum),
        "W_per_m2" => Ok(Unit::WattsPerSqM),
        other => Err(parse_err(*line, format!("unknown unit '{other}'"))),
    }
}

/// Parses a ground-station file into station metadata and a W/m² series.
pub fn parse_ground_csv(content: &str) -> Result<(StationMetadata, GhiSeries)> {
    let raw = lex(content)?;
    if raw.kind != FileKind::Ground {
        return Err(Error::Format(format!("not a ground file: header must be '{GROUND_HEADER}'")));
    }
    let metadata = station(&raw.meta)?;
    let series = to_series(&raw.rows, Source::Ground, Unit::WattsPerSqM, "GHI")?;
    Ok((metadata, series))
}

/// Parses a satellite file. The unit comes from the header declaration and no
/// conversion happens here.
pub fn parse_satellite_csv(content: &str) -> Result<GhiSeries> {
    let raw = lex(content)?;
    if raw.kind != FileKind::Satellite {
        return Err(Error::Format(format!(
            "not a satellite file: header must be '{SATELLITE_HEADER}'"
        )));
    }
    let unit = declared_unit(&raw.meta)?;
    to_series(&raw.rows, Source::Satellite, unit, "irradiance")
}

fn report_from(points: &[(Timestamp, f64)]) -> ValidationReport {
    let nonfinite_count = points.iter().filter(|p| !p.1.is_finite()).count();
    let mut seen = HashSet::with_capacity(points.len());
    let duplicate_count = points.iter().filter(|p| !seen.insert(p.0)).count();
    let span = points
        .iter()
        .map(|p| p.0)
        .min()
        .zip(points.iter().map(|p| p.0).max());
    let gap_count = match span {
        Some((first, last)) => (first.hours_until(&last) as usize + 1).saturating_sub(seen.len()),
        None => 0,
    };
    ValidationReport {
        row_count: points.len(),
        gap_count,
        duplicate_count,
        nonfinite_count,
        span,
    }
}

/// Reports row count, missing hours, duplicates and non-finite values.
pub fn validate_series(s: &GhiSeries) -> ValidationReport {
    let points: Vec<(Timestamp, f64)> = s.samples().iter().map(|x| (x.t, x.value)).collect();
    report_from(&points)
}

/// Like [`validate_series`] but works on raw file content, so duplicated
/// timestamps and non-finite values are counted rather than rejected. Fails
/// when the file cannot be lexed or its header metadata is unusable.
pub fn validate_csv(content: &str) -> Result<(FileKind, ValidationReport)> {
    let raw = lex(content)?;
    match raw.kind {
        FileKind::Ground => station(&raw.meta).map(drop)?,
        FileKind::Satellite => declared_unit(&raw.meta).map(drop)?,
    }
    let points: Vec<(Timestamp, f64)> = raw.rows.iter().map(|&(_, t, v)| (t, v)).collect();
    Ok((raw.kind, report_from(&points)))
}

fn write_rows(out: &mut String, s: &GhiSeries) {
    for x in s.samples() {
        let _ = writeln!(out, "{},{}", x.t, x.value);
    }
}

pub fn write_ground_csv(meta: &StationMetadata, s: &GhiSeries) -> String {
    let mut out = String::with_capacity(32 * s.len() + 64);
    let _ = writeln!(
        out,
        "# lat={},lon={},alt={},tz={}",
        meta.latitude, meta.longitude, meta.altitude, meta.timezone
    );
    out.push_str(GROUND_HEADER);
    out.push('\n');
    write_rows(&mut out, s);
    out
}

pub fn write_satellite_csv(s: &GhiSeries) -> String {
    let mut out = String::with_capacity(32 * s.len() + 64);
    let _ = writeln!(out, "# unit={}", s.unit().name());
    out.push_str(SATELLITE_HEADER);
    out.push('\n');
    write_rows(&mut out, s);
    out
}
