//! Diagnostics and the on-disk report.
//!
//! Output layout under the report directory:
//!
//! ```text
//! manifest.json                      artifact list with SHA-256 checksums
//! models/month_MM.json               one fitted model per month
//! stats/daily_diff.csv               daily mean ground − satellite
//! stats/boxplots_YYYY.csv            monthly boxplots of daily means, one file per year
//! stats/cross_year_month_MM.csv      one month's boxplots across years
//! stats/monthly_counts.csv           daylight rows per month
//! stats/r2_by_month.csv
//! figures/*.svg
//! ```

pub mod boxplot;
pub mod plot;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, Matrix};
use crate::preprocess::{DailyMeanDiff, MonthlyDataset};
use crate::regression::{FitResult, FitWarning, SplitIndices};
use crate::timeseries::{AlignedRow, AlignedTable};

pub use boxplot::{boxplot_stats, BoxplotStats};
pub use plot::{render_svg, Axis, PlotKind, PlotSpec, Series, SeriesData};

pub const OVERLAY_NOTE: &str = "Scatter figures overlay a univariate ground ~ satellite least-squares line fitted \
on the training rows. The monthly models also carry day and hour indicators and cannot be drawn as one line.";

/// Boxplots of one year's daily mean differences, keyed by month.
pub fn monthly_diff_boxplots(records: &[DailyMeanDiff], year: i32) -> BTreeMap<u32, BoxplotStats> {
    use chrono::Datelike;
    let mut by_month: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.date.year() == year) {
        by_month.entry(r.date.month()).or_default().push(r.mean_diff);
    }
    by_month
        .into_iter()
        .filter_map(|(m, v)| boxplot_stats(&v).ok().map(|s| (m, s)))
        .collect()
}

/// Boxplots of one calendar month's daily mean differences, keyed by year.
pub fn cross_year_month_boxplots(records: &[DailyMeanDiff], month: u32) -> Result<BTreeMap<i32, BoxplotStats>> {
    use chrono::Datelike;
    if !(1..=12).contains(&month) {
        return Err(Error::Config(format!("month {month} outside 1..=12")));
    }
    let mut by_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.date.month() == month) {
        by_year.entry(r.date.year()).or_default().push(r.mean_diff);
    }
    Ok(by_year
        .into_iter()
        .filter_map(|(y, v)| boxplot_stats(&v).ok().map(|s| (y, s)))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterFit {
    pub month: u32,
    /// Ground = intercept + slope · satellite, fitted on the training rows.
    pub slope: f64,
    pub intercept: f64,
    pub spec: PlotSpec,
}

/// Test-set (satellite, ground) scatter with a univariate overlay line.
pub fn scatter_fit_export(m: &MonthlyDataset, f: &FitResult, split: &SplitIndices) -> Result<ScatterFit> {
    if f.month != m.month() {
        return Err(Error::Dimension(format!(
            "fit is for month {} but data is month {}",
            f.month,
            m.month()
        )));
    }
    let rows = m.rows();
    if let Some(bad) = split.train.iter().chain(&split.test).find(|&&i| i >= rows.len()) {
        return Err(Error::Dimension(format!("split index {bad} beyond {} rows", rows.len())));
    }
    if split.test.is_empty() {
        return Err(Error::EmptyInput("scatter export (test set)"));
    }
    let design: Vec<Vec<f64>> = split.train.iter().map(|&i| vec![1.0, rows[i].satellite]).collect();
    let y: Vec<f64> = split.train.iter().map(|&i| rows[i].ground).collect();
    let line = least_squares(&Matrix::from_rows(&design)?, &y)?;
    let (intercept, slope) = (line.coefficients[0], line.coefficients[1]);

    let points: Vec<(f64, f64)> = split.test.iter().map(|&i| (rows[i].satellite, rows[i].ground)).collect();
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let spec = PlotSpec::new(
        PlotKind::ScatterWithLine,
        format!("Month {:02}: test set, ground vs satellite", m.month()),
        Axis::new("satellite GHI", "W/m²"),
        Axis::new("ground GHI", "W/m²"),
        vec![
            Series {
                label: "test rows".into(),
                data: SeriesData::Xy(points),
            },
            Series {
                label: format!("fit: ground = {intercept:.3} + {slope:.4} · satellite"),
                data: SeriesData::Xy(vec![(lo, intercept + slope * lo), (hi, intercept + slope * hi)]),
            },
        ],
    )?;
    Ok(ScatterFit {
        month: m.month(),
        slope,
        intercept,
        spec,
    })
}

/// Everything a report can contain. Absent or empty parts produce no files.
#[derive(Debug, Clone, Default)]
pub struct ReportInputs {
    pub fits: Vec<FitResult>,
    pub warnings: Vec<FitWarning>,
    /// Joined table before daylight filtering, for the time-series figures.
    pub aligned: Option<AlignedTable>,
    pub daily_diffs: Vec<DailyMeanDiff>,
    pub monthly_counts: Option<[usize; 12]>,
    /// Calendar month for the across-years boxplot.
    pub cross_year_month: u32,
    pub scatters: Vec<ScatterFit>,
    /// Free-form run metadata copied into the manifest.
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub generator: String,
    pub metadata: BTreeMap<String, String>,
    pub notes: Vec<String>,
    pub warnings: Vec<FitWarning>,
    pub artifacts: Vec<ArtifactEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Serialize)]
struct ModelFile<'a> {
    #[serde(flatten)]
    fit: &'a FitResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    overlay: Option<Overlay>,
}

#[derive(Serialize)]
struct Overlay {
    slope: f64,
    intercept: f64,
}

fn boxplot_csv(key_name: &str, rows: impl Iterator<Item = (String, BoxplotStats)>) -> String {
    let mut out = format!("{key_name},n,min,q1,median,q3,max,whisker_low,whisker_high,outliers\n");
    for (k, b) in rows {
        let outliers: Vec<String> = b.outliers.iter().map(|o| o.to_string()).collect();
        let _ = writeln!(
            out,
            "{k},{},{},{},{},{},{},{},{},{}",
            b.n,
            b.min,
            b.q1,
            b.median,
            b.q3,
            b.max,
            b.whisker_low,
            b.whisker_high,
            outliers.join(";")
        );
    }
    out
}

fn boxplot_figure(title: String, x: Axis, boxes: Vec<(String, BoxplotStats)>) -> Result<String> {
    let spec = PlotSpec::new(
        PlotKind::Box,
        title,
        x,
        Axis::new("daily mean ground − satellite", "W/m²"),
        vec![Series {
            label: "daily mean difference".into(),
            data: SeriesData::Boxes(boxes),
        }],
    )?;
    Ok(render_svg(&spec))
}

/// Renders every available artifact into `dir` and writes `manifest.json`.
pub fn write_reports(inputs: &ReportInputs, dir: &Path) -> Result<Manifest> {
    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let overlays: BTreeMap<u32, &ScatterFit> = inputs.scatters.iter().map(|s| (s.month, s)).collect();

    for fit in &inputs.fits {
        let file = ModelFile {
            fit,
            overlay: overlays.get(&fit.month).map(|s| Overlay {
                slope: s.slope,
                intercept: s.intercept,
            }),
        };
        let mut json = serde_json::to_vec_pretty(&file)?;
        json.push(b'\n');
        files.insert(format!("models/month_{:02}.json", fit.month), json);
    }
    if !inputs.fits.is_empty() {
        let mut csv = String::from("month,r2_train,r2_test,n_train,n_test\n");
        for f in &inputs.fits {
            let _ = writeln!(csv, "{},{},{},{},{}", f.month, f.r2_train, f.r2_test, f.n_train, f.n_test);
        }
        files.insert("stats/r2_by_month.csv".into(), csv.into_bytes());
        let bars = inputs.fits.iter().map(|f| (format!("{:02}", f.month), f.r2_test)).collect();
        let spec = PlotSpec::new(
            PlotKind::Bar,
            "Test-set R² per monthly model",
            Axis::new("month", "1-12"),
            Axis::new("R²", "dimensionless"),
            vec![Series {
                label: "r2_test".into(),
                data: SeriesData::Categories(bars),
            }],
        )?;
        files.insert("figures/r2_by_month.svg".into(), render_svg(&spec).into_bytes());
    }
    for s in &inputs.scatters {
        files.insert(
            format!("figures/scatter_month_{:02}.svg", s.month),
            render_svg(&s.spec).into_bytes(),
        );
    }

    if let Some(table) = inputs.aligned.as_ref().filter(|t| !t.is_empty()) {
        let start = table.rows()[0].t;
        let day = |t: &crate::timeseries::Timestamp| start.hours_until(t) as f64 / 24.0;
        type Panel = (&'static str, &'static str, &'static str, fn(&AlignedRow) -> f64);
        let panels: [Panel; 3] = [
            ("ghi_ground", "Ground-station GHI", "ground GHI", |r| r.ground),
            ("ghi_satellite", "Satellite GHI", "satellite GHI", |r| r.satellite),
            ("difference", "Ground − satellite GHI", "difference", |r| r.ground - r.satellite),
        ];
        for (name, title, y_label, value) in panels {
            let points = table.rows().iter().map(|r| (day(&r.t), value(r))).collect();
            let spec = PlotSpec::new(
                PlotKind::Line,
                format!("{title} from {start}"),
                Axis::new("days since start", "d"),
                Axis::new(y_label, "W/m²"),
                vec![Series {
                    label: name.into(),
                    data: SeriesData::Xy(points),
                }],
            )?;
            files.insert(format!("figures/{name}.svg"), render_svg(&spec).into_bytes());
        }
    }

    if !inputs.daily_diffs.is_empty() {
        use chrono::Datelike;
        let mut csv = String::from("date,year,month,mean_diff_w_m2,n\n");
        for r in &inputs.daily_diffs {
            let _ = writeln!(csv, "{},{},{},{},{}", r.date, r.date.year(), r.date.month(), r.mean_diff, r.n);
        }
        files.insert("stats/daily_diff.csv".into(), csv.into_bytes());

        let years: std::collections::BTreeSet<i32> = inputs.daily_diffs.iter().map(|r| r.date.year()).collect();
        for year in years {
            let stats = monthly_diff_boxplots(&inputs.daily_diffs, year);
            files.insert(
                format!("stats/boxplots_{year}.csv"),
                boxplot_csv("month", stats.iter().map(|(m, b)| (m.to_string(), b.clone()))).into_bytes(),
            );
            let boxes = stats.into_iter().map(|(m, b)| (format!("{m:02}"), b)).collect();
            let svg = boxplot_figure(
                format!("Daily mean difference by month, {year}"),
                Axis::new("month", "1-12"),
                boxes,
            )?;
            files.insert(format!("figures/boxplots_{year}.svg"), svg.into_bytes());
        }

        let month = inputs.cross_year_month;
        let by_year = cross_year_month_boxplots(&inputs.daily_diffs, month)?;
        if !by_year.is_empty() {
            files.insert(
                format!("stats/cross_year_month_{month:02}.csv"),
                boxplot_csv("year", by_year.iter().map(|(y, b)| (y.to_string(), b.clone()))).into_bytes(),
            );
            let boxes = by_year.into_iter().map(|(y, b)| (y.to_string(), b)).collect();
            let svg = boxplot_figure(
                format!("Daily mean difference in month {month:02} across years"),
                Axis::new("year", "calendar year"),
                boxes,
            )?;
            files.insert(format!("figures/cross_year_month_{month:02}.svg"), svg.into_bytes());
        }
    }

    if let Some(counts) = inputs.monthly_counts {
        let mut csv = String::from("month,count\n");
        for (i, c) in counts.iter().enumerate() {
            let _ = writeln!(csv, "{},{c}", i + 1);
        }
        files.insert("stats/monthly_counts.csv".into(), csv.into_bytes());
        let bars = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (format!("{:02}", i + 1), c as f64))
            .collect();
        let spec = PlotSpec::new(
            PlotKind::Bar,
            "Daylight data points per month",
            Axis::new("month", "1-12"),
            Axis::new("rows", "count"),
            vec![Series {
                label: "count".into(),
                data: SeriesData::Categories(bars),
            }],
        )?;
        files.insert("figures/monthly_counts.svg".into(), render_svg(&spec).into_bytes());
    }

    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut artifacts = Vec::with_capacity(files.len());
    for (rel, bytes) in &files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        artifacts.push(ArtifactEntry {
            path: rel.clone(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
    }

    let manifest = Manifest {
        generator: format!("ghical {}", env!("CARGO_PKG_VERSION")),
        metadata: inputs.metadata.clone(),
        notes: if inputs.scatters.is_empty() {
            Vec::new()
        } else {
            vec![OVERLAY_NOTE.to_string()]
        },
        warnings: inputs.warnings.clone(),
        artifacts,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    let path = dir.join("manifest.json");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn rec(y: i32, m: u32, d: u32, v: f64) -> DailyMeanDiff {
        DailyMeanDiff {
            date: NaiveDate::from_ymd_opt(y, m, d).unwrap(),
            mean_diff: v,
            n: 3,
        }
    }

    #[test]
    fn monthly_boxplots_by_year() {
        assert!(monthly_diff_boxplots(&[], 2020).is_empty());
        let one = monthly_diff_boxplots(&[rec(2020, 3, 4, 12.0)], 2020);
        assert_eq!(one.keys().copied().collect::<Vec<_>>(), vec![3]);
        assert_eq!(one[&3].median, 12.0);
        let mixed = [rec(2019, 5, 1, 1.0), rec(2020, 5, 1, 10.0), rec(2020, 5, 2, 20.0)];
        let s = monthly_diff_boxplots(&mixed, 2020);
        assert_eq!(s[&5].n, 2);
        assert_eq!(s[&5].median, 15.0);
    }

    #[test]
    fn cross_year_boxplots() {
        assert!(cross_year_month_boxplots(&[], 8).unwrap().is_empty());
        let recs = [rec(2014, 8, 1, 1.0), rec(2020, 8, 1, 3.0), rec(2020, 8, 2, 5.0), rec(2020, 7, 2, 50.0)];
        let s = cross_year_month_boxplots(&recs, 8).unwrap();
        assert_eq!(s.keys().copied().collect::<Vec<_>>(), vec![2014, 2020]);
        assert_eq!(s[&2020].median, 4.0);
        assert!(cross_year_month_boxplots(&recs, 13).is_err());
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn empty_report_has_only_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let mut inputs = ReportInputs {
            cross_year_month: 8,
            ..Default::default()
        };
        inputs.metadata.insert("config_hash".into(), "abc".into());
        let m = write_reports(&inputs, dir.path()).unwrap();
        assert!(m.artifacts.is_empty());
        assert_eq!(m.metadata["config_hash"], "abc");
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("occupied");
        std::fs::write(&file, b"x").unwrap();
        let inputs = ReportInputs {
            monthly_counts: Some([1; 12]),
            cross_year_month: 8,
            ..Default::default()
        };
        assert!(matches!(write_reports(&inputs, &file.join("out")), Err(Error::Io { .. })));
    }

    #[test]
    fn counts_and_daily_files() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = ReportInputs {
            monthly_counts: Some([3, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0]),
            daily_diffs: vec![rec(2020, 8, 1, 1.0), rec(2020, 8, 2, 2.0)],
            cross_year_month: 8,
            ..Default::default()
        };
        let m = write_reports(&inputs, dir.path()).unwrap();
        let paths: Vec<&str> = m.artifacts.iter().map(|a| a.path.as_str()).collect();
        assert_eq!(
            paths,
            [
                "figures/boxplots_2020.svg",
                "figures/cross_year_month_08.svg",
                "figures/monthly_counts.svg",
                "stats/boxplots_2020.csv",
                "stats/cross_year_month_08.csv",
                "stats/daily_diff.csv",
                "stats/monthly_counts.csv",
            ]
        );
        let counts = std::fs::read_to_string(dir.path().join("stats/monthly_counts.csv")).unwrap();
        assert!(counts.starts_with("month,count\n1,3\n2,0\n"));
        let again = write_reports(&inputs, dir.path()).unwrap();
        assert_eq!(again, m);
        for a in &m.artifacts {
            let bytes = std::fs::read(dir.path().join(&a.path)).unwrap();
            assert_eq!(sha256_hex(&bytes), a.sha256);
        }
    }
}
