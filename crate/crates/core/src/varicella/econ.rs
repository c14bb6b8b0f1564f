//! Cost and QALY ledgers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SimTime;
use crate::scenario::{check, ConfigError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EconError {
    #[error("negative episode duration {0}")]
    NegativeDuration(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CostCategory {
    VaccineDose,
    GpVisit,
    EdVisit,
    HospitalDay,
    PersonalExpense,
    ProductivityLoss,
}

impl CostCategory {
    pub const ALL: [CostCategory; 6] = [
        CostCategory::VaccineDose,
        CostCategory::GpVisit,
        CostCategory::EdVisit,
        CostCategory::HospitalDay,
        CostCategory::PersonalExpense,
        CostCategory::ProductivityLoss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CostCategory::VaccineDose => "vaccine_dose",
            CostCategory::GpVisit => "gp_visit",
            CostCategory::EdVisit => "ed_visit",
            CostCategory::HospitalDay => "hospital_day",
            CostCategory::PersonalExpense => "personal_expense",
            CostCategory::ProductivityLoss => "productivity_loss",
        }
    }

    fn idx(self) -> usize {
        self as usize
    }
}

/// Unit cost per category, in currency units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitCosts {
    pub vaccine_dose: f64,
    pub gp_visit: f64,
    pub ed_visit: f64,
    pub hospital_day: f64,
    pub personal_expense: f64,
    pub productivity_loss: f64,
}

impl Default for UnitCosts {
    fn default() -> Self {
        // illustrative values only
        UnitCosts {
            vaccine_dose: 80.0,
            gp_visit: 40.0,
            ed_visit: 250.0,
            hospital_day: 1200.0,
            personal_expense: 30.0,
            productivity_loss: 200.0,
        }
    }
}

impl UnitCosts {
    pub fn get(&self, c: CostCategory) -> f64 {
        match c {
            CostCategory::VaccineDose => self.vaccine_dose,
            CostCategory::GpVisit => self.gp_visit,
            CostCategory::EdVisit => self.ed_visit,
            CostCategory::HospitalDay => self.hospital_day,
            CostCategory::PersonalExpense => self.personal_expense,
            CostCategory::ProductivityLoss => self.productivity_loss,
        }
    }

    pub fn zero() -> Self {
        UnitCosts {
            vaccine_dose: 0.0,
            gp_visit: 0.0,
            ed_visit: 0.0,
            hospital_day: 0.0,
            personal_expense: 0.0,
            productivity_loss: 0.0,
        }
    }
}

/// Expected resource use of one disease episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeUse {
    pub gp_visits: f64,
    pub ed_visits: f64,
    pub hospital_days: f64,
    pub personal_expense: f64,
    pub productivity_loss: f64,
}

impl Default for EpisodeUse {
    fn default() -> Self {
        EpisodeUse {
            gp_visits: 1.0,
            ed_visits: 0.0,
            hospital_days: 0.0,
            personal_expense: 1.0,
            productivity_loss: 1.0,
        }
    }
}

impl EpisodeUse {
    fn counts(&self) -> [(CostCategory, f64); 5] {
        [
            (CostCategory::GpVisit, self.gp_visits),
            (CostCategory::EdVisit, self.ed_visits),
            (CostCategory::HospitalDay, self.hospital_days),
            (CostCategory::PersonalExpense, self.personal_expense),
            (CostCategory::ProductivityLoss, self.productivity_loss),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EconParams {
    /// Continuous discount rate per year.
    pub discount_rate: f64,
    pub unit_costs: UnitCosts,
    pub chickenpox: EpisodeUse,
    pub shingles_mild: EpisodeUse,
    pub shingles_phn: EpisodeUse,
    /// Utility weight by state accrual tag; untagged states weigh 1.
    pub utilities: BTreeMap<String, f64>,
}

impl Default for EconParams {
    fn default() -> Self {
        let utilities = [
            ("chickenpox", 0.8),
            ("shingles_mild", 0.7),
            ("shingles_phn", 0.6),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        EconParams {
            discount_rate: 0.015,
            unit_costs: UnitCosts::default(),
            chickenpox: EpisodeUse {
                gp_visits: 0.5,
                ed_visits: 0.02,
                hospital_days: 0.01,
                personal_expense: 1.0,
                productivity_loss: 0.5,
            },
            shingles_mild: EpisodeUse {
                gp_visits: 1.5,
                ed_visits: 0.05,
                hospital_days: 0.05,
                personal_expense: 2.0,
                productivity_loss: 1.0,
            },
            shingles_phn: EpisodeUse {
                gp_visits: 4.0,
                ed_visits: 0.2,
                hospital_days: 0.5,
                personal_expense: 6.0,
                productivity_loss: 4.0,
            },
            utilities,
        }
    }
}

impl EconParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check::non_negative("econ", "discount_rate", self.discount_rate)?;
        let u = &self.unit_costs;
        for c in CostCategory::ALL {
            check::non_negative("econ.unit_costs", c.name(), u.get(c))?;
        }
        for (name, e) in [
            ("chickenpox", &self.chickenpox),
            ("shingles_mild", &self.shingles_mild),
            ("shingles_phn", &self.shingles_phn),
        ] {
            for (c, n) in e.counts() {
                check::non_negative(&format!("econ.{name}"), c.name(), n)?;
            }
        }
        for (tag, w) in &self.utilities {
            check::probability("econ.utilities", tag, *w)?;
        }
        Ok(())
    }

    pub fn utility(&self, tag: Option<&str>) -> f64 {
        tag.and_then(|t| self.utilities.get(t).copied())
            .unwrap_or(1.0)
    }
}

/// Accounting window and continuous discounting to `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discounter {
    pub rate: f64,
    pub origin: SimTime,
    pub end: SimTime,
}

impl Discounter {
    pub fn factor(&self, t: SimTime) -> f64 {
        (-self.rate * (t - self.origin)).exp()
    }

    /// `∫ exp(-r (s - origin)) ds` over `[a, b]` clipped to the window.
    pub fn integral(&self, a: SimTime, b: SimTime) -> f64 {
        let (a, b) = (a.max(self.origin), b.min(self.end));
        if b <= a {
            return 0.0;
        }
        if self.rate == 0.0 {
            b - a
        } else {
            (self.factor(a) - self.factor(b)) / self.rate
        }
    }

    pub fn in_window(&self, t: SimTime) -> bool {
        t >= self.origin && t <= self.end
    }
}

/// One person's accumulated discounted costs and QALYs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HealthEconLedger {
    costs: [f64; 6],
    qalys: f64,
}

impl HealthEconLedger {
    pub fn cost(&self, c: CostCategory) -> f64 {
        self.costs[c.idx()]
    }

    pub fn total_cost(&self) -> f64 {
        self.costs.iter().sum()
    }

    pub fn qalys(&self) -> f64 {
        self.qalys
    }

    /// Debit `count` units of `c` at time `t`.
    pub fn charge(
        &mut self,
        c: CostCategory,
        count: f64,
        units: &UnitCosts,
        t: SimTime,
        d: &Discounter,
    ) {
        if d.in_window(t) {
            self.costs[c.idx()] += count * units.get(c) * d.factor(t);
        }
    }

    pub fn charge_episode(
        &mut self,
        e: &EpisodeUse,
        units: &UnitCosts,
        t: SimTime,
        d: &Discounter,
    ) {
        for (c, n) in e.counts() {
            self.charge(c, n, units, t, d);
        }
    }

    /// Accrue `utility` over a state episode `[from, to]`.
    pub fn accrue(
        &mut self,
        from: SimTime,
        to: SimTime,
        utility: f64,
        d: &Discounter,
    ) -> Result<(), EconError> {
        if to < from {
            return Err(EconError::NegativeDuration(to - from));
        }
        self.qalys += utility * d.integral(from, to);
        Ok(())
    }

    pub fn add(&mut self, other: &HealthEconLedger) {
        for (a, b) in self.costs.iter_mut().zip(other.costs) {
            *a += b;
        }
        self.qalys += other.qalys;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(rate: f64) -> Discounter {
        Discounter {
            rate,
            origin: 10.0,
            end: 30.0,
        }
    }

    #[test]
    fn zero_costs_give_zero_total() {
        let mut l = HealthEconLedger::default();
        let d = window(0.03);
        l.charge_episode(&EpisodeUse::default(), &UnitCosts::zero(), 12.0, &d);
        l.charge(CostCategory::VaccineDose, 1.0, &UnitCosts::zero(), 12.0, &d);
        assert_eq!(l.total_cost(), 0.0);
    }

    #[test]
    fn undiscounted_full_utility_counts_life_years() {
        let mut l = HealthEconLedger::default();
        let d = window(0.0);
        l.accrue(5.0, 12.5, 1.0, &d).unwrap();
        l.accrue(12.5, 40.0, 1.0, &d).unwrap();
        assert!((l.qalys() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn discounting_never_increases_totals() {
        for (a, b) in [(10.0, 11.0), (15.0, 29.0), (0.0, 50.0)] {
            let mut plain = HealthEconLedger::default();
            let mut disc = HealthEconLedger::default();
            plain.accrue(a, b, 0.9, &window(0.0)).unwrap();
            disc.accrue(a, b, 0.9, &window(0.05)).unwrap();
            assert!(disc.qalys() <= plain.qalys());
            let units = UnitCosts::default();
            plain.charge(
                CostCategory::GpVisit,
                1.0,
                &units,
                b.min(30.0),
                &window(0.0),
            );
            disc.charge(
                CostCategory::GpVisit,
                1.0,
                &units,
                b.min(30.0),
                &window(0.05),
            );
            assert!(disc.total_cost() <= plain.total_cost());
        }
    }

    #[test]
    fn negative_duration_faults() {
        let mut l = HealthEconLedger::default();
        assert!(l.accrue(3.0, 2.0, 1.0, &window(0.0)).is_err());
    }

    #[test]
    fn discount_integral_closed_form() {
        let d = window(0.05);
        let expect = (1.0 - (-0.05_f64 * 20.0).exp()) / 0.05;
        assert!((d.integral(0.0, 100.0) - expect).abs() < 1e-12);
    }
}
