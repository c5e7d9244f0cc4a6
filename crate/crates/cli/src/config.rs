use std::fs;
use std::path::Path;

use ghical::pipeline::RunConfig;
use ghical::synth::SynthConfig;
use ghical::{Error, Result};
use serde::Deserialize;

/// Declarative configuration file. Both tables are optional; command-line
/// flags override whatever the file sets.
///
/// ```toml
/// [run]
/// ground_path = "fixtures/ground.csv"
/// satellite_path = "fixtures/satellite.csv"
/// output_dir = "report"
/// shift_steps = 2
/// shift_direction = "advance"
/// epsilon = 0.0
/// split_ratio = 0.8
/// seed = 42
///
/// [synth]
/// latitude = 53.35
/// years = [2019, 2020]
/// noise_peak_fraction = 0.12
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub run: RunConfig,
    pub synth: SynthConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
