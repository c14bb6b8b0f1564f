use serde::{Deserialize, Serialize};

use crate::population::AttitudeCategory;
use crate::scenario::{check, ConfigError};

/// Chickenpox/shingles parameters. Durations are in years, rates per year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VaricellaParams {
    /// CMI level at recovery is `max(floor, Normal(mean, sd))`.
    pub initial_cmi_mean: f64,
    pub initial_cmi_sd: f64,
    pub initial_cmi_floor: f64,
    /// Personal force of reactivation ~ Gamma(shape, scale) + shift.
    pub force_shape: f64,
    pub force_scale: f64,
    pub force_shift: f64,
    /// Multiplier turning the force of reactivation into a hazard.
    pub reactivation_multiplier: f64,
    /// `k` in `exp(-k * cmi)`.
    pub cmi_suppression: f64,
    pub waning_coefficient: f64,
    pub waning_rate: f64,
    /// CMI added by one boosting exposure.
    pub boost_amount: f64,
    /// Length of the post-exposure window without reactivation.
    pub boosting_duration: f64,
    /// Population-wide rate of exposures from outside the modelled region.
    pub exogenous_infection_rate: f64,
    pub p_infection_normal: f64,
    pub p_infection_breakthrough: f64,
    pub p_infection_shingles: f64,
    pub range_normal: f64,
    pub range_preferential: f64,
    pub shingles_range_modifier: f64,
    pub contact_rate_normal: f64,
    pub contact_rate_preferential: f64,
    /// `[lo, hi)` ages eligible for preferential mixing.
    pub preferential_ages: [f64; 2],
    /// Acceptor, hesitant, rejecter.
    pub attitude_shares: [f64; 3],
    pub catch_up_enabled: bool,
    pub catch_up_probability: f64,
    pub dose1_administration: [f64; 3],
    pub dose2_administration: [f64; 3],
    pub dose1_failure: f64,
    pub dose2_failure: f64,
    pub one_dose_waning: f64,
    pub two_dose_waning: f64,
    pub dose1_age: f64,
    pub dose2_age: f64,
    pub maternal_protection: f64,
    pub latent_period: f64,
    pub infectious_period: f64,
    pub symptomatic_period: f64,
    pub shingles_mild_duration: f64,
    pub shingles_phn_duration: f64,
    pub shingles_infectious_period: f64,
    pub phn_probability: f64,
    pub relapse_rate: f64,
    pub chickenpox_fatality: f64,
    /// Age-constant force of infection used to seed initial immunity.
    pub initial_force_of_infection: f64,
    pub initial_infectious: usize,
    /// Interval of the periodic update on the aging chart.
    pub update_interval: f64,
}

impl Default for VaricellaParams {
    fn default() -> Self {
        VaricellaParams {
            initial_cmi_mean: 0.05,
            initial_cmi_sd: 1.0,
            initial_cmi_floor: 0.001,
            force_shape: 2.0,
            force_scale: 0.1,
            force_shift: 0.0,
            reactivation_multiplier: 0.1,
            cmi_suppression: 2.0,
            waning_coefficient: 0.69,
            waning_rate: 0.4,
            boost_amount: 1.0,
            boosting_duration: 5.0,
            exogenous_infection_rate: 17.83,
            p_infection_normal: 0.78,
            p_infection_breakthrough: 0.234,
            p_infection_shingles: 0.234,
            range_normal: 8.958,
            range_preferential: 21.245,
            shingles_range_modifier: 0.124,
            contact_rate_normal: 30.124,
            contact_rate_preferential: 20.0,
            preferential_ages: [1.0, 10.0],
            attitude_shares: [0.65, 0.30, 0.05],
            catch_up_enabled: true,
            catch_up_probability: 0.55,
            dose1_administration: [0.97, 0.30, 0.05],
            dose2_administration: [0.98, 0.82, 0.33],
            dose1_failure: 0.20,
            dose2_failure: 0.105,
            one_dose_waning: 0.02,
            two_dose_waning: 0.0,
            dose1_age: 1.0,
            dose2_age: 4.0,
            maternal_protection: 0.5,
            latent_period: 14.0 / 365.0,
            infectious_period: 0.25,
            symptomatic_period: 5.0 / 365.0,
            shingles_mild_duration: 0.08,
            shingles_phn_duration: 0.5,
            shingles_infectious_period: 0.05,
            phn_probability: 0.1,
            relapse_rate: 0.005,
            chickenpox_fatality: 2e-5,
            initial_force_of_infection: 0.15,
            initial_infectious: 20,
            update_interval: 1.0,
        }
    }
}

pub const ATTITUDES: [AttitudeCategory; 3] = [
    AttitudeCategory::Acceptor,
    AttitudeCategory::Hesitant,
    AttitudeCategory::Rejecter,
];

pub fn attitude_index(c: AttitudeCategory) -> usize {
    match c {
        AttitudeCategory::Acceptor => 0,
        AttitudeCategory::Hesitant => 1,
        AttitudeCategory::Rejecter => 2,
    }
}

impl VaricellaParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let f = "varicella";
        for (name, v) in [
            ("p_infection_normal", self.p_infection_normal),
            ("p_infection_breakthrough", self.p_infection_breakthrough),
            ("p_infection_shingles", self.p_infection_shingles),
            ("catch_up_probability", self.catch_up_probability),
            ("dose1_failure", self.dose1_failure),
            ("dose2_failure", self.dose2_failure),
            ("phn_probability", self.phn_probability),
            ("chickenpox_fatality", self.chickenpox_fatality),
        ] {
            check::probability(f, name, v)?;
        }
        for (name, arr) in [
            ("dose1_administration", self.dose1_administration),
            ("dose2_administration", self.dose2_administration),
        ] {
            for v in arr {
                check::probability(f, name, v)?;
            }
        }
        check::weights(f, "attitude_shares", &self.attitude_shares)?;
        for (name, v) in [
            ("initial_cmi_sd", self.initial_cmi_sd),
            ("force_shift", self.force_shift),
            ("reactivation_multiplier", self.reactivation_multiplier),
            ("cmi_suppression", self.cmi_suppression),
            ("waning_coefficient", self.waning_coefficient),
            ("waning_rate", self.waning_rate),
            ("boost_amount", self.boost_amount),
            ("boosting_duration", self.boosting_duration),
            ("exogenous_infection_rate", self.exogenous_infection_rate),
            ("contact_rate_normal", self.contact_rate_normal),
            ("contact_rate_preferential", self.contact_rate_preferential),
            ("one_dose_waning", self.one_dose_waning),
            ("two_dose_waning", self.two_dose_waning),
            ("dose1_age", self.dose1_age),
            ("maternal_protection", self.maternal_protection),
            ("latent_period", self.latent_period),
            ("symptomatic_period", self.symptomatic_period),
            ("shingles_mild_duration", self.shingles_mild_duration),
            ("shingles_phn_duration", self.shingles_phn_duration),
            ("relapse_rate", self.relapse_rate),
            (
                "initial_force_of_infection",
                self.initial_force_of_infection,
            ),
        ] {
            check::non_negative(f, name, v)?;
        }
        for (name, v) in [
            ("initial_cmi_floor", self.initial_cmi_floor),
            ("force_shape", self.force_shape),
            ("force_scale", self.force_scale),
            ("range_normal", self.range_normal),
            ("range_preferential", self.range_preferential),
            ("shingles_range_modifier", self.shingles_range_modifier),
            ("infectious_period", self.infectious_period),
            (
                "shingles_infectious_period",
                self.shingles_infectious_period,
            ),
            ("update_interval", self.update_interval),
        ] {
            check::positive(f, name, v)?;
        }
        if self.dose2_age < self.dose1_age {
            return Err(ConfigError::invalid(
                "varicella.dose2_age",
                "second dose cannot precede the first",
            ));
        }
        if !(self.preferential_ages[1] > self.preferential_ages[0]) {
            return Err(ConfigError::invalid(
                "varicella.preferential_ages",
                "range is empty",
            ));
        }
        Ok(())
    }

    /// Largest radius queried by the contact process.
    pub fn max_range(&self) -> f64 {
        self.range_normal.max(self.range_preferential)
    }

    /// Expected share of agents administered dose 1, ignoring catch-up.
    pub fn expected_dose1_share(&self) -> f64 {
        let total: f64 = self.attitude_shares.iter().sum();
        self.attitude_shares
            .iter()
            .zip(self.dose1_administration)
            .map(|(s, p)| s / total * p)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        VaricellaParams::default().validate().unwrap();
    }

    #[test]
    fn shingles_range_product() {
        let p = VaricellaParams::default();
        let r = p.range_normal * p.shingles_range_modifier;
        assert!((r - 1.110_792).abs() < 1e-9);
    }

    #[test]
    fn dose1_expectation() {
        let e = VaricellaParams::default().expected_dose1_share();
        assert!((e - (0.65 * 0.97 + 0.30 * 0.30 + 0.05 * 0.05)).abs() < 1e-12);
        assert!((e - 0.723).abs() < 1e-3);
    }

    #[test]
    fn invalid_probability_rejected() {
        let p = VaricellaParams {
            p_infection_normal: 1.2,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
