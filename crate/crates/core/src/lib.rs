//! Calibration of satellite-derived global horizontal irradiance (GHI)
//! against ground-station measurements.
//!
//! The pipeline converts reanalysis accumulations to W/m², shifts the
//! satellite series into alignment, joins it with the ground series, drops
//! night-time rows, pools rows by calendar month and fits one ordinary least
//! squares model per month on satellite GHI plus day-of-month and hour-of-day
//! indicators. Diagnostics (difference curves, daily-mean boxplots, monthly
//! counts, scatter plots and R² bars) are written as CSV, JSON and SVG.
//!
//! [`synth`] produces paired fixtures with a known linear bias so the whole
//! chain can be checked against ground truth.

pub mod error;
pub mod features;
pub mod ingest;
pub mod linalg;
pub mod pipeline;
pub mod preprocess;
pub mod regression;
pub mod report;
pub mod rng;
pub mod synth;
pub mod timeseries;

pub use error::{Error, ErrorClass, Result};
pub use timeseries::{AlignedRow, AlignedTable, GhiSample, GhiSeries, Source, Timestamp, Unit};
