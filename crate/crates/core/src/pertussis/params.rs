use serde::{Deserialize, Serialize};

use super::immunity::MemoryType;
use crate::scenario::{check, ConfigError};

/// Pertussis parameters. Durations in years, rates per year. None of the
/// numeric defaults is a published estimate; they are chosen to give
/// endemic transmission and the expected vaccine coverage at desk scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PertussisParams {
    /// Per-exposure infection probability when below threshold.
    pub p_infection: f64,
    /// `(lower age, threshold)` rows; protection below the threshold allows infection.
    pub protection_threshold: Vec<[f64; 2]>,
    /// Active protection right after each scheduled dose.
    pub dose_targets: Vec<f64>,
    /// Age at which each dose falls due.
    pub dose_ages: Vec<f64>,
    /// Shortest gap between two doses when catching up.
    pub min_dose_interval: f64,
    /// Overdue doses are only caught up before this age.
    pub catch_up_age_limit: f64,
    pub waning_natural: f64,
    pub waning_whole_cell: f64,
    pub waning_acellular: f64,
    /// Memory type induced by vaccine doses.
    pub vaccine_memory: MemoryType,
    /// Waning rate of maternally transferred protection.
    pub waning_passive: f64,
    /// Share of the mother's protection passed to the newborn.
    pub maternal_transfer: f64,
    /// Active protection of the mother after a third-trimester dose.
    pub maternal_dose_target: f64,
    /// Multiplier on early-dose targets when blunting applies.
    pub blunting_factor: f64,
    /// Doses up to this index (1-based) can be blunted.
    pub blunting_dose_cutoff: usize,
    /// Passive protection above this level blunts an early dose.
    pub blunting_passive_threshold: f64,
    /// Acceptance `u ~ Beta(a, b)`.
    pub acceptance_beta: [f64; 2],
    /// `h(u) = h0 (1 - u)^2`: onSchedule -> nonCompliant.
    pub noncompliance_hazard: f64,
    /// `g(u) = g0 u^2`: nonCompliant -> onSchedule.
    pub return_hazard: f64,
    /// Exposure rates of one infectious person, per layer.
    pub household_contact_rate: f64,
    pub school_contact_rate: f64,
    pub background_contact_rate: f64,
    pub background_radius: f64,
    /// Share of school contacts made with classmates rather than any schoolmate.
    pub classmate_share: f64,
    /// Largest birth-time difference between classmates.
    pub classmate_age_gap: f64,
    /// Daily contacts recorded per surveyed person outside the household.
    pub survey_school_contacts: f64,
    pub survey_background_contacts: f64,
    pub latent_period: f64,
    pub infectious_period: f64,
    /// `(lower age, probability)` rows of case reporting.
    pub ascertainment: Vec<[f64; 2]>,
    /// Infections imported from outside the region, per year.
    pub importation_rate: f64,
    pub initial_infectious: usize,
    /// Share of the initial population with prior natural immunity.
    pub initial_immune_share: f64,
    pub gestation_trimester: f64,
    pub postpartum_period: f64,
}

impl Default for PertussisParams {
    fn default() -> Self {
        PertussisParams {
            p_infection: 0.5,
            protection_threshold: vec![[0.0, 0.5]],
            dose_targets: vec![0.3, 0.5, 0.7, 0.8, 0.9, 0.9],
            dose_ages: vec![2.0 / 12.0, 4.0 / 12.0, 6.0 / 12.0, 1.5, 4.0, 14.0],
            min_dose_interval: 1.0 / 12.0,
            catch_up_age_limit: 18.0,
            waning_natural: 0.03,
            waning_whole_cell: 0.06,
            waning_acellular: 0.15,
            vaccine_memory: MemoryType::Acellular,
            waning_passive: 2.0,
            maternal_transfer: 0.9,
            maternal_dose_target: 0.9,
            blunting_factor: 0.6,
            blunting_dose_cutoff: 3,
            blunting_passive_threshold: 0.01,
            acceptance_beta: [4.0, 1.0],
            noncompliance_hazard: 4.0,
            return_hazard: 1.0,
            household_contact_rate: 150.0,
            school_contact_rate: 30.0,
            background_contact_rate: 15.0,
            background_radius: 3.0,
            classmate_share: 0.7,
            classmate_age_gap: 1.0,
            survey_school_contacts: 8.0,
            survey_background_contacts: 2.0,
            latent_period: 8.0 / 365.0,
            infectious_period: 21.0 / 365.0,
            ascertainment: vec![[0.0, 0.8], [1.0, 0.5], [5.0, 0.3], [15.0, 0.1]],
            importation_rate: 10.0,
            initial_infectious: 10,
            initial_immune_share: 0.7,
            gestation_trimester: 0.25,
            postpartum_period: 0.25,
        }
    }
}

/// Check an age-indexed table: starts at age 0, ages increase, values are
/// probabilities (or non-negative).
pub fn validate_age_table(
    field: &str,
    rows: &[[f64; 2]],
    probabilities: bool,
) -> Result<(), ConfigError> {
    if rows.is_empty() || rows[0][0] != 0.0 {
        return Err(ConfigError::invalid(field, "first row must start at age 0"));
    }
    if rows.windows(2).any(|w| !(w[1][0] > w[0][0])) {
        return Err(ConfigError::invalid(field, "ages must increase"));
    }
    for r in rows {
        let ok = if probabilities {
            (0.0..=1.0).contains(&r[1])
        } else {
            r[1] >= 0.0 && r[1].is_finite()
        };
        if !ok {
            return Err(ConfigError::invalid(field, format!("bad value {}", r[1])));
        }
    }
    Ok(())
}

/// Value of the row whose age band contains `age`.
pub fn age_table_lookup(rows: &[[f64; 2]], age: f64) -> f64 {
    let i = rows.partition_point(|r| r[0] <= age).saturating_sub(1);
    rows[i][1]
}

impl PertussisParams {
    pub fn waning(&self, m: MemoryType) -> f64 {
        match m {
            MemoryType::Naive => 0.0,
            MemoryType::Natural => self.waning_natural,
            MemoryType::WholeCell => self.waning_whole_cell,
            MemoryType::Acellular => self.waning_acellular,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let f = "pertussis";
        for (name, v) in [
            ("p_infection", self.p_infection),
            ("maternal_transfer", self.maternal_transfer),
            ("maternal_dose_target", self.maternal_dose_target),
            ("blunting_factor", self.blunting_factor),
            (
                "blunting_passive_threshold",
                self.blunting_passive_threshold,
            ),
            ("initial_immune_share", self.initial_immune_share),
            ("classmate_share", self.classmate_share),
        ] {
            check::probability(f, name, v)?;
        }
        for (name, v) in [
            ("waning_natural", self.waning_natural),
            ("waning_whole_cell", self.waning_whole_cell),
            ("waning_acellular", self.waning_acellular),
            ("waning_passive", self.waning_passive),
            ("noncompliance_hazard", self.noncompliance_hazard),
            ("return_hazard", self.return_hazard),
            ("household_contact_rate", self.household_contact_rate),
            ("school_contact_rate", self.school_contact_rate),
            ("background_contact_rate", self.background_contact_rate),
            ("survey_school_contacts", self.survey_school_contacts),
            (
                "survey_background_contacts",
                self.survey_background_contacts,
            ),
            ("importation_rate", self.importation_rate),
            ("min_dose_interval", self.min_dose_interval),
            ("catch_up_age_limit", self.catch_up_age_limit),
            ("classmate_age_gap", self.classmate_age_gap),
        ] {
            check::non_negative(f, name, v)?;
        }
        for (name, v) in [
            ("background_radius", self.background_radius),
            ("latent_period", self.latent_period),
            ("infectious_period", self.infectious_period),
            ("gestation_trimester", self.gestation_trimester),
            ("postpartum_period", self.postpartum_period),
            ("acceptance_beta", self.acceptance_beta[0]),
            ("acceptance_beta", self.acceptance_beta[1]),
        ] {
            check::positive(f, name, v)?;
        }
        if !(self.waning_natural <= self.waning_whole_cell
            && self.waning_whole_cell <= self.waning_acellular)
        {
            return Err(ConfigError::invalid(
                "pertussis.waning_natural",
                "waning rates must satisfy natural <= whole_cell <= acellular",
            ));
        }
        if self.dose_targets.len() != self.dose_ages.len() || self.dose_ages.is_empty() {
            return Err(ConfigError::invalid(
                "pertussis.dose_ages",
                "need one age per dose target",
            ));
        }
        for &b in &self.dose_targets {
            if !(b > 0.0 && b <= 1.0) {
                return Err(ConfigError::invalid(
                    "pertussis.dose_targets",
                    format!("{b} is outside (0, 1]"),
                ));
            }
        }
        if self.dose_ages.windows(2).any(|w| !(w[1] > w[0])) || self.dose_ages[0] < 0.0 {
            return Err(ConfigError::invalid(
                "pertussis.dose_ages",
                "ages must be non-negative and increasing",
            ));
        }
        if self.vaccine_memory == MemoryType::Naive || self.vaccine_memory == MemoryType::Natural {
            return Err(ConfigError::invalid(
                "pertussis.vaccine_memory",
                "must be whole_cell or acellular",
            ));
        }
        validate_age_table(
            "pertussis.protection_threshold",
            &self.protection_threshold,
            true,
        )?;
        validate_age_table("pertussis.ascertainment", &self.ascertainment, true)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_valid() {
        PertussisParams::default().validate().unwrap();
    }

    #[test]
    fn waning_order_enforced() {
        let p = PertussisParams {
            waning_natural: 0.5,
            ..PertussisParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn age_table() {
        let rows = PertussisParams::default().ascertainment;
        assert_eq!(age_table_lookup(&rows, 0.3), 0.8);
        assert_eq!(age_table_lookup(&rows, 1.0), 0.5);
        assert_eq!(age_table_lookup(&rows, 80.0), 0.1);
        assert!(validate_age_table("x", &[[1.0, 0.5]], true).is_err());
        assert!(validate_age_table("x", &[[0.0, 1.5]], true).is_err());
        assert!(validate_age_table("x", &[[0.0, 1.5]], false).is_ok());
    }
}
