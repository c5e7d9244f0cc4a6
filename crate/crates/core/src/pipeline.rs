//! End-to-end orchestration: files in, report directory out.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorClass, Result};
use crate::ingest::{
    parse_ground_csv, parse_satellite_csv, validate_csv, write_ground_csv, write_satellite_csv, FileKind,
    StationMetadata, ValidationReport,
};
use crate::preprocess::{daily_mean_difference, filter_daylight, group_by_month, monthly_counts, DailyMeanDiff, MonthlyDataset};
use crate::regression::{fit_monthly_models, MonthlyFits};
use crate::report::{scatter_fit_export, sha256_hex, write_reports, Manifest, ReportInputs, ScatterFit};
use crate::synth::{generate_ground_series, generate_satellite_series, satellite_file_series, SynthConfig};
use crate::timeseries::{convert_energy_to_power, inner_join, shift_series, AlignedTable, Unit};

/// Which way the satellite series moves relative to its own timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftDirection {
    /// Values move to earlier timestamps (positive shift).
    #[default]
    Advance,
    /// Values move to later timestamps (negative shift).
    Delay,
}

impl ShiftDirection {
    pub fn signed(self, steps: u32) -> i64 {
        match self {
            ShiftDirection::Advance => i64::from(steps),
            ShiftDirection::Delay => -i64::from(steps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub ground_path: PathBuf,
    pub satellite_path: PathBuf,
    pub shift_steps: u32,
    pub shift_direction: ShiftDirection,
    /// Daylight threshold in W/m²; rows need both readings above it.
    pub epsilon: f64,
    pub split_ratio: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Calendar month shown in the across-years boxplot.
    pub cross_year_month: u32,
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ground_path: PathBuf::new(),
            satellite_path: PathBuf::new(),
            shift_steps: 2,
            shift_direction: ShiftDirection::Advance,
            epsilon: 0.0,
            split_ratio: 0.8,
            seed: 42,
            output_dir: PathBuf::from("report"),
            cross_year_month: 8,
            parallel: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ground_path.as_os_str().is_empty() || self.satellite_path.as_os_str().is_empty() {
            return Err(Error::Config("ground and satellite paths are required".into()));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::Config("output directory is required".into()));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::InvalidRatio(self.split_ratio));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon {} must be finite and >= 0", self.epsilon)));
        }
        if !(1..=12).contains(&self.cross_year_month) {
            return Err(Error::Config(format!("cross_year_month {} outside 1..=12", self.cross_year_month)));
        }
        Ok(())
    }

    pub fn shift(&self) -> i64 {
        self.shift_direction.signed(self.shift_steps)
    }

    /// SHA-256 of the serialized configuration, recorded instead of wall time.
    /// The output directory and the parallel flag do not change results and
    /// are left out.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            output_dir: PathBuf::new(),
            parallel: true,
            ..self.clone()
        };
        sha256_hex(&serde_json::to_vec(&canonical).unwrap_or_default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    ReadInput,
    ParseGround,
    ParseSatellite,
    Convert,
    Shift,
    Join,
    Statistics,
    Report,
    Synth,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::ReadInput => "read input",
            Stage::ParseGround => "parse ground",
            Stage::ParseSatellite => "parse satellite",
            Stage::Convert => "unit conversion",
            Stage::Shift => "shift",
            Stage::Join => "join",
            Stage::Statistics => "statistics",
            Stage::Report => "report",
            Stage::Synth => "synth",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl PipelineError {
    pub fn class(&self) -> ErrorClass {
        self.source.class()
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, PipelineError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

/// In-memory results of one pipeline pass.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub station: StationMetadata,
    pub aligned: AlignedTable,
    pub daylight: AlignedTable,
    pub daily_diffs: Vec<DailyMeanDiff>,
    pub monthly_counts: [usize; 12],
    pub months: Vec<MonthlyDataset>,
    pub fits: MonthlyFits,
    pub scatters: Vec<ScatterFit>,
    pub metadata: BTreeMap<String, String>,
}

impl Analysis {
    pub fn report_inputs(&self, cross_year_month: u32) -> ReportInputs {
        ReportInputs {
            fits: self.fits.results.clone(),
            warnings: self.fits.warnings.clone(),
            aligned: Some(self.aligned.clone()),
            daily_diffs: self.daily_diffs.clone(),
            monthly_counts: Some(self.monthly_counts),
            cross_year_month,
            scatters: self.scatters.clone(),
            metadata: self.metadata.clone(),
        }
    }
}

/// Runs ingest → convert → shift → join → filter → statistics → fits on file
/// contents. The paths in `config` are only recorded, not read.
pub fn analyze(ground_csv: &str, satellite_csv: &str, config: &RunConfig) -> std::result::Result<Analysis, PipelineError> {
    config.validate().at(Stage::Config)?;
    let (station, ground) = parse_ground_csv(ground_csv).at(Stage::ParseGround)?;
    let raw_satellite = parse_satellite_csv(satellite_csv).at(Stage::ParseSatellite)?;
    let satellite = match raw_satellite.unit() {
        Unit::JoulesPerSqMAccum => convert_energy_to_power(&raw_satellite).at(Stage::Convert)?,
        Unit::WattsPerSqM => raw_satellite.clone(),
    };
    let shifted = shift_series(&satellite, config.shift()).at(Stage::Shift)?;
    let aligned = inner_join(&ground, &shifted).at(Stage::Join)?;
    let daylight = filter_daylight(&aligned, config.epsilon);
    let daily_diffs = daily_mean_difference(&daylight);
    let counts = monthly_counts(&daylight);
    let months = group_by_month(&daylight);
    let fits = fit_monthly_models(&months, config.split_ratio, config.seed, config.parallel);
    let scatters = fits
        .results
        .iter()
        .map(|f| scatter_fit_export(&months[f.month as usize - 1], f, &f.split))
        .collect::<Result<Vec<_>>>()
        .at(Stage::Statistics)?;

    let mut metadata = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        metadata.insert(k.to_string(), v);
    };
    put("config_hash", config.hash());
    put("ground_sha256", sha256_hex(ground_csv.as_bytes()));
    put("satellite_sha256", sha256_hex(satellite_csv.as_bytes()));
    put("satellite_unit", raw_satellite.unit().name().into());
    put("seed", config.seed.to_string());
    put("split_ratio", config.split_ratio.to_string());
    put("epsilon_w_m2", config.epsilon.to_string());
    put("shift_steps", config.shift().to_string());
    put("station", format!(
        "lat={},lon={},alt={},tz={}",
        station.latitude, station.longitude, station.altitude, station.timezone
    ));
    put("rows_ground", ground.len().to_string());
    put("rows_satellite", raw_satellite.len().to_string());
    put("rows_joined", aligned.len().to_string());
    put("rows_daylight", daylight.len().to_string());
    put("unmatched_ground", aligned.provenance.ground_unmatched.to_string());
    put("unmatched_satellite", aligned.provenance.satellite_unmatched.to_string());
    put("removed_by_daylight_filter", daylight.provenance.filtered_out.to_string());

    Ok(Analysis {
        station,
        aligned,
        daylight,
        daily_diffs,
        monthly_counts: counts,
        months,
        fits,
        scatters,
        metadata,
    })
}

fn read(path: &Path) -> std::result::Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e)).at(Stage::ReadInput)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub analysis: Analysis,
    pub manifest: Manifest,
}

/// Reads both inputs, analyses them and writes the report to `config.output_dir`.
pub fn run(config: &RunConfig) -> std::result::Result<RunOutcome, PipelineError> {
    config.validate().at(Stage::Config)?;
    let ground = read(&config.ground_path)?;
    let satellite = read(&config.satellite_path)?;
    let analysis = analyze(&ground, &satellite, config)?;
    let manifest = write_reports(&analysis.report_inputs(config.cross_year_month), &config.output_dir).at(Stage::Report)?;
    Ok(RunOutcome { analysis, manifest })
}

#[derive(Debug, Clone)]
pub struct SynthRequest {
    pub config: SynthConfig,
    /// Shift the pipeline will apply; the satellite file is written pre-shifted the other way.
    pub shift: i64,
    pub satellite_unit: Unit,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthFiles {
    pub ground_path: PathBuf,
    pub satellite_path: PathBuf,
    pub rows: usize,
}

pub const GROUND_FILE: &str = "ground.csv";
pub const SATELLITE_FILE: &str = "satellite.csv";

/// Renders the fixture pair as file contents: `(ground_csv, satellite_csv, rows)`.
pub fn synth_contents(req: &SynthRequest) -> Result<(String, String, usize)> {
    let c = &req.config;
    let ground = generate_ground_series(c)?;
    let satellite = generate_satellite_series(&ground, c)?;
    let file_sat = satellite_file_series(&satellite, req.shift, req.satellite_unit)?;
    let station = StationMetadata::new(c.latitude, c.longitude, c.altitude, "UTC")?;
    Ok((write_ground_csv(&station, &ground), write_satellite_csv(&file_sat), ground.len()))
}

pub fn write_synth_fixtures(req: &SynthRequest) -> std::result::Result<SynthFiles, PipelineError> {
    let (ground, satellite, rows) = synth_contents(req).at(Stage::Synth)?;
    let dir = &req.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)).at(Stage::Synth)?;
    let ground_path = dir.join(GROUND_FILE);
    let satellite_path = dir.join(SATELLITE_FILE);
    fs::write(&ground_path, ground).map_err(|e| Error::io(&ground_path, e)).at(Stage::Synth)?;
    fs::write(&satellite_path, satellite).map_err(|e| Error::io(&satellite_path, e)).at(Stage::Synth)?;
    Ok(SynthFiles {
        ground_path,
        satellite_path,
        rows,
    })
}

pub fn validate_file(path: &Path) -> std::result::Result<(FileKind, ValidationReport), PipelineError> {
    let text = read(path)?;
    validate_csv(&text).at(Stage::ParseGround)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(seed: u64, shift: i64) -> (String, String) {
        let req = SynthRequest {
            config: SynthConfig {
                years: vec![2020],
                seed,
                ..SynthConfig::default()
            },
            shift,
            satellite_unit: Unit::JoulesPerSqMAccum,
            output_dir: PathBuf::new(),
        };
        let (g, s, _) = synth_contents(&req).unwrap();
        (g, s)
    }

    fn config() -> RunConfig {
        RunConfig {
            ground_path: "g.csv".into(),
            satellite_path: "s.csv".into(),
            ..RunConfig::default()
        }
    }

    #[test]
    fn noiseless_fixture_is_recovered() {
        let (g, s) = fixture(1, 2);
        let a = analyze(&g, &s, &config()).unwrap();
        assert_eq!(a.fits.results.len(), 12);
        for f in &a.fits.results {
            assert!((f.r2_test - 1.0).abs() < 1e-9, "month {}: {}", f.month, f.r2_test);
        }
        assert_eq!(a.aligned.provenance.ground_unmatched, 2);
        assert_eq!(a.aligned.provenance.satellite_unmatched, 0);
    }

    #[test]
    fn delay_direction_round_trips() {
        let (g, s) = fixture(1, -2);
        let cfg = RunConfig {
            shift_direction: ShiftDirection::Delay,
            ..config()
        };
        let a = analyze(&g, &s, &cfg).unwrap();
        assert!(a.fits.results.iter().all(|f| (f.r2_test - 1.0).abs() < 1e-9));
    }

    #[test]
    fn wrong_shift_degrades_fit() {
        let (g, s) = fixture(1, 2);
        let cfg = RunConfig {
            shift_steps: 0,
            ..config()
        };
        let a = analyze(&g, &s, &cfg).unwrap();
        assert!(a.fits.results.iter().any(|f| f.r2_test < 0.999));
    }

    #[test]
    fn stage_names_in_errors() {
        let (g, s) = fixture(1, 2);
        let err = analyze("garbage", &s, &config()).unwrap_err();
        assert_eq!(err.stage, Stage::ParseGround);
        assert!(err.to_string().starts_with("parse ground stage failed"));
        let err = analyze(&g, &s, &RunConfig { split_ratio: 1.5, ..config() }).unwrap_err();
        assert_eq!((err.stage, err.class()), (Stage::Config, ErrorClass::Usage));
        let other_year = g.replace("2020-", "2016-");
        let err = analyze(&other_year, &s, &config()).unwrap_err();
        assert_eq!(err.stage, Stage::Join);
        let missing = RunConfig {
            ground_path: "/nonexistent/ground.csv".into(),
            ..config()
        };
        let err = run(&missing).unwrap_err();
        assert_eq!((err.stage, err.class()), (Stage::ReadInput, ErrorClass::Data));
        assert!(err.to_string().contains("/nonexistent/ground.csv"));
    }

    #[test]
    fn config_hash_tracks_content() {
        assert_eq!(config().hash(), config().hash());
        assert_ne!(config().hash(), RunConfig { seed: 7, ..config() }.hash());
        let elsewhere = RunConfig {
            output_dir: "other".into(),
            parallel: false,
            ..config()
        };
        assert_eq!(config().hash(), elsewhere.hash());
    }
}
