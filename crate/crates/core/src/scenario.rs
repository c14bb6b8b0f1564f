//! Versioned JSON scenario files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::AgeBins;
use crate::pertussis::PertussisParams;
use crate::population::DemographyConfig;
use crate::varicella::{EconParams, VaricellaParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    pub fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

/// Field validators shared by the parameter blocks.
pub mod check {
    use super::ConfigError;

    fn path(block: &str, name: &str) -> String {
        format!("{block}.{name}")
    }

    pub fn probability(block: &str, name: &str, v: f64) -> Result<(), ConfigError> {
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(ConfigError::invalid(
                &path(block, name),
                format!("{v} is not a probability in [0, 1]"),
            ))
        }
    }

    pub fn non_negative(block: &str, name: &str, v: f64) -> Result<(), ConfigError> {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(ConfigError::invalid(
                &path(block, name),
                format!("{v} must be finite and >= 0"),
            ))
        }
    }

    pub fn positive(block: &str, name: &str, v: f64) -> Result<(), ConfigError> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(ConfigError::invalid(
                &path(block, name),
                format!("{v} must be finite and > 0"),
            ))
        }
    }

    pub fn weights(block: &str, name: &str, w: &[f64]) -> Result<(), ConfigError> {
        if w.is_empty()
            || w.iter().any(|x| !(*x >= 0.0 && x.is_finite()))
            || w.iter().sum::<f64>() <= 0.0
        {
            return Err(ConfigError::invalid(
                &path(block, name),
                "weights must be non-negative with a positive sum",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelPack {
    Varicella,
    Pertussis,
}

impl ModelPack {
    pub fn name(self) -> &'static str {
        match self {
            ModelPack::Varicella => "varicella",
            ModelPack::Pertussis => "pertussis",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "varicella" | "vzv" => Some(ModelPack::Varicella),
            "pertussis" => Some(ModelPack::Pertussis),
            _ => None,
        }
    }
}

/// What the intervention arm changes relative to baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Intervention {
    /// Without an intervention only the baseline arm is run.
    pub enabled: bool,
    /// Years after burn-in end at which the intervention starts.
    pub start: f64,
    /// Chickenpox: one paired ensemble per boosting duration. Empty means
    /// the single value in the pack parameters.
    pub boosting_durations: Vec<f64>,
    /// Pertussis: share of pregnancies vaccinated in the third trimester.
    pub maternal_coverage: f64,
    pub blunting: bool,
    pub passive_protection: bool,
    /// Mean duration of maternal antibody protection; overrides the
    /// passive waning rate when set.
    pub maternal_antibody_duration: Option<f64>,
    /// `(lower age, probability)` rows replacing the ascertainment table.
    pub ascertainment: Option<Vec<[f64; 2]>>,
}

impl Default for Intervention {
    fn default() -> Self {
        Intervention {
            enabled: true,
            start: 0.0,
            boosting_durations: Vec::new(),
            maternal_coverage: 0.5,
            blunting: false,
            passive_protection: true,
            maternal_antibody_duration: None,
            ascertainment: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub age_bins: AgeBins,
    pub svg: bool,
    /// Write a population snapshot CSV at the end of realization 0.
    pub snapshot: bool,
    /// Agents whose protection is traced (pertussis).
    pub trajectory_sample: usize,
    /// People surveyed per year for the contact matrix (pertussis).
    pub contact_survey_size: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            age_bins: AgeBins::default(),
            svg: true,
            snapshot: false,
            trajectory_sample: 20,
            contact_survey_size: 300,
        }
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}
fn default_horizon() -> f64 {
    50.0
}
fn default_burn_in() -> f64 {
    20.0
}
fn default_realizations() -> usize {
    30
}
fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub model_pack: ModelPack,
    pub population: usize,
    /// Total simulated years, burn-in included.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub intervention: Intervention,
    #[serde(default)]
    pub demography: DemographyConfig,
    #[serde(default)]
    pub varicella: VaricellaParams,
    #[serde(default)]
    pub econ: EconParams,
    #[serde(default)]
    pub pertussis: PertussisParams,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    /// Defaults for `pack` at the given population size.
    pub fn new(pack: ModelPack, population: usize) -> Self {
        ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            model_pack: pack,
            population,
            horizon: default_horizon(),
            burn_in: default_burn_in(),
            realizations: default_realizations(),
            master_seed: default_seed(),
            intervention: Intervention::default(),
            demography: DemographyConfig::default(),
            varicella: VaricellaParams::default(),
            econ: EconParams::default(),
            pertussis: PertussisParams::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Simulation time at which the intervention starts.
    pub fn intervention_time(&self) -> f64 {
        self.burn_in + self.intervention.start
    }

    /// Boosting durations of the chickenpox sweep (at least one).
    pub fn boosting_sweep(&self) -> Vec<f64> {
        if self.intervention.boosting_durations.is_empty() {
            vec![self.varicella.boosting_duration]
        } else {
            self.intervention.boosting_durations.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        if self.population == 0 {
            return Err(ConfigError::invalid("population", "must be at least 1"));
        }
        if self.realizations == 0 {
            return Err(ConfigError::invalid("realizations", "must be at least 1"));
        }
        if !(self.burn_in >= 0.0 && self.burn_in.is_finite()) {
            return Err(ConfigError::invalid("burn_in", "must be finite and >= 0"));
        }
        if !(self.horizon > self.burn_in && self.horizon.is_finite()) {
            return Err(ConfigError::invalid("horizon", "must exceed burn_in"));
        }
        let iv = &self.intervention;
        if !(iv.start.is_finite() && self.burn_in + iv.start >= 0.0) {
            return Err(ConfigError::invalid(
                "intervention.start",
                "must not precede simulation start",
            ));
        }
        check::probability("intervention", "maternal_coverage", iv.maternal_coverage)?;
        for d in &iv.boosting_durations {
            check::non_negative("intervention", "boosting_durations", *d)?;
        }
        if let Some(d) = iv.maternal_antibody_duration {
            check::positive("intervention", "maternal_antibody_duration", d)?;
        }
        if let Some(rows) = &iv.ascertainment {
            crate::pertussis::validate_age_table("intervention.ascertainment", rows, true)?;
        }
        if !self.output.age_bins.is_valid() {
            return Err(ConfigError::invalid(
                "output.age_bins",
                "edges must start at 0 and increase",
            ));
        }
        self.demography
            .validate()
            .map_err(|e| ConfigError::invalid("demography", e.to_string()))?;
        match self.model_pack {
            ModelPack::Varicella => {
                self.varicella.validate()?;
                self.econ.validate()?;
            }
            ModelPack::Pertussis => self.pertussis.validate()?,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg =
            ScenarioConfig::from_json(r#"{"model_pack": "pertussis", "population": 500}"#).unwrap();
        assert_eq!(cfg.realizations, 30);
        assert_eq!(cfg.burn_in, 20.0);
        assert_eq!(cfg.horizon, 50.0);
        assert_eq!(cfg.intervention.maternal_coverage, 0.5);
        assert_eq!(cfg, ScenarioConfig::new(ModelPack::Pertussis, 500));
    }

    #[test]
    fn zero_realizations_rejected() {
        let err = ScenarioConfig::from_json(
            r#"{"model_pack": "varicella", "population": 10, "realizations": 0}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "realizations"));
    }

    #[test]
    fn unknown_keys_report_position() {
        let err = ScenarioConfig::from_json(
            "{\n  \"model_pack\": \"varicella\",\n  \"populaton\": 10\n}",
        )
        .unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn horizon_must_exceed_burn_in() {
        let err = ScenarioConfig::from_json(
            r#"{"model_pack": "varicella", "population": 10, "horizon": 10, "burn_in": 10}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "horizon"));
    }

    #[test]
    fn round_trip() {
        let cfg = ScenarioConfig::new(ModelPack::Varicella, 100);
        assert_eq!(ScenarioConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}
