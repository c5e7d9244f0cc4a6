//! Synthetic paired ground/satellite GHI with a known linear bias.
//!
//! Ground irradiance follows a half-sine between sunrise and sunset, centred on
//! 12:00 UTC, with the day length from the sunrise equation and a per-month
//! peak. The satellite reading is `max(0, a·ground + b + noise)` during
//! daylight and exactly zero at night.
//!
//! Random draws come from two [`XorShift64Star`] streams seeded with
//! `derive_seed(seed, 1)` (ground) and `derive_seed(seed, 2)` (satellite),
//! consumed in timestamp order:
//! * ground: one uniform per daylight hour, only when `clearness_spread > 0`;
//!   the clear-sky value is multiplied by `1 − spread·u`;
//! * satellite: one standard normal per hour with `ground > 0`, only when the
//!   month's sigma is positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, XorShift64Star};
use crate::timeseries::{GhiSample, GhiSeries, Source, Timestamp, Unit, ACCUMULATION_SECONDS};

/// Solar declination amplitude, degrees.
const OBLIQUITY_DEG: f64 = 23.44;
pub const MAX_LATITUDE: f64 = 66.5;

const GROUND_STREAM: u64 = 1;
const SATELLITE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub latitude: f64,
    pub longitude: f64,
    pub altitude: f64,
    pub years: Vec<i32>,
    /// Clear-sky solar-noon GHI per calendar month, W/m².
    pub peak_ghi_by_month: [f64; 12],
    pub bias_scale: f64,
    /// W/m², applied only in daylight.
    pub bias_offset: f64,
    /// Absolute satellite noise, W/m².
    pub noise_sigma: f64,
    /// Additional satellite noise as a fraction of the month's peak.
    pub noise_peak_fraction: f64,
    /// Hourly attenuation of the ground value, `1 − spread·U(0,1)`; 0 disables it.
    pub clearness_spread: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            latitude: 53.35,
            longitude: -6.26,
            altitude: 20.0,
            years: vec![2019, 2020],
            peak_ghi_by_month: [
                230.0, 350.0, 520.0, 680.0, 780.0, 820.0, 800.0, 700.0, 560.0, 400.0, 260.0, 200.0,
            ],
            bias_scale: 0.8,
            bias_offset: -15.0,
            noise_sigma: 0.0,
            noise_peak_fraction: 0.0,
            clearness_spread: 0.0,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.latitude.is_nan() || self.latitude.abs() >= MAX_LATITUDE {
            return Err(Error::PolarLatitude(self.latitude));
        }
        if self.peak_ghi_by_month.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Config("monthly peaks must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_peak_fraction >= 0.0) {
            return Err(Error::Config("noise must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.clearness_spread) {
            return Err(Error::Config("clearness_spread must lie in [0, 1)".into()));
        }
        if !(self.bias_scale.is_finite() && self.bias_offset.is_finite()) {
            return Err(Error::Config("bias terms must be finite".into()));
        }
        Ok(())
    }

    pub fn sigma_for_month(&self, month: u32) -> f64 {
        self.noise_sigma + self.noise_peak_fraction * self.peak_ghi_by_month[month as usize - 1]
    }
}

/// Solar declination in degrees for a (possibly fractional) day of year.
pub fn declination_deg(day_of_year: f64) -> f64 {
    OBLIQUITY_DEG * (std::f64::consts::TAU * (284.0 + day_of_year) / 365.0).sin()
}

/// Hours between sunrise and sunset: `(2/15)·acos(−tan φ · tan δ)` with the
/// hour angle in degrees.
pub fn day_length(latitude: f64, day_of_year: u32) -> Result<f64> {
    if latitude.is_nan() || latitude.abs() >= MAX_LATITUDE {
        return Err(Error::PolarLatitude(latitude));
    }
    if !(1..=366).contains(&day_of_year) {
        return Err(Error::Config(format!("day of year {day_of_year} outside 1..=366")));
    }
    Ok(day_length_unchecked(latitude, f64::from(day_of_year)))
}

fn day_length_unchecked(latitude: f64, day_of_year: f64) -> f64 {
    let phi = latitude.to_radians();
    let delta = declination_deg(day_of_year).to_radians();
    let cos_h = (-phi.tan() * delta.tan()).clamp(-1.0, 1.0);
    2.0 / 15.0 * cos_h.acos().to_degrees()
}

/// Clear-sky value at `t`: `peak·sin(π(h − sunrise)/H)` strictly between
/// sunrise and sunset, zero otherwise.
pub fn clear_sky_ghi(latitude: f64, t: Timestamp, peak: f64) -> f64 {
    let length = day_length_unchecked(latitude, f64::from(t.day_of_year()));
    let sunrise = 12.0 - length / 2.0;
    let since = f64::from(t.hour()) - sunrise;
    if since <= 0.0 || since >= length {
        return 0.0;
    }
    (peak * (std::f64::consts::PI * since / length).sin()).max(0.0)
}

fn hourly_span(years: &[i32]) -> Vec<Timestamp> {
    let mut years = years.to_vec();
    years.sort_unstable();
    years.dedup();
    let mut out = Vec::new();
    for y in years {
        let Ok(start) = Timestamp::from_ymdh(y, 1, 1, 0) else { continue };
        let Ok(next) = Timestamp::from_ymdh(y + 1, 1, 1, 0) else { continue };
        out.extend((0..start.hours_until(&next)).map(|h| start.plus_hours(h)));
    }
    out
}

pub fn generate_ground_series(c: &SynthConfig) -> Result<GhiSeries> {
    c.validate()?;
    let mut rng = XorShift64Star::new(derive_seed(c.seed, GROUND_STREAM));
    let samples = hourly_span(&c.years)
        .into_iter()
        .map(|t| {
            let clear = clear_sky_ghi(c.latitude, t, c.peak_ghi_by_month[t.month() as usize - 1]);
            let value = if clear > 0.0 && c.clearness_spread > 0.0 {
                clear * (1.0 - c.clearness_spread * rng.uniform())
            } else {
                clear
            };
            GhiSample::new(t, value)
        })
        .collect();
    GhiSeries::new(Source::Ground, Unit::WattsPerSqM, samples)
}

pub fn generate_satellite_series(ground: &GhiSeries, c: &SynthConfig) -> Result<GhiSeries> {
    c.validate()?;
    if ground.unit() != Unit::WattsPerSqM {
        return Err(Error::UnitMismatch {
            expected: Unit::WattsPerSqM.name(),
            found: ground.unit().name(),
        });
    }
    let mut rng = XorShift64Star::new(derive_seed(c.seed, SATELLITE_STREAM));
    let samples = ground
        .samples()
        .iter()
        .map(|g| {
            if g.value <= 0.0 {
                return GhiSample::new(g.t, 0.0);
            }
            let sigma = c.sigma_for_month(g.t.month());
            let noise = if sigma > 0.0 { sigma * rng.standard_normal() } else { 0.0 };
            GhiSample::new(g.t, (c.bias_scale * g.value + c.bias_offset + noise).max(0.0))
        })
        .collect();
    GhiSeries::new(Source::Satellite, Unit::WattsPerSqM, samples)
}

/// Prepares an aligned satellite series for writing so that a later
/// `shift_series(·, shift)` restores the alignment. Positions that receive no
/// value are filled with zero. With `unit` = accumulated energy the values are
/// multiplied by the 3 h window length.
pub fn satellite_file_series(aligned: &GhiSeries, shift: i64, unit: Unit) -> Result<GhiSeries> {
    if aligned.unit() != Unit::WattsPerSqM {
        return Err(Error::UnitMismatch {
            expected: Unit::WattsPerSqM.name(),
            found: aligned.unit().name(),
        });
    }
    let s = aligned.samples();
    let n = s.len();
    let steps = shift.unsigned_abs() as usize;
    let scale = match unit {
        Unit::WattsPerSqM => 1.0,
        Unit::JoulesPerSqMAccum => ACCUMULATION_SECONDS,
    };
    let samples = (0..n)
        .map(|j| {
            let src = if shift >= 0 {
                j.checked_sub(steps)
            } else {
                Some(j + steps).filter(|&k| k < n)
            };
            let value = src.map_or(0.0, |k| s[k].value * scale);
            GhiSample::new(s[j].t, value)
        })
        .collect();
    GhiSeries::new(Source::Satellite, unit, samples)
}
