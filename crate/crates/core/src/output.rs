//! Per-realization results handed from a model pack to the collector.

use crate::metrics::{AgeBinnedIncidence, Arm, ContactMatrix};
use crate::varicella::HealthEconLedger;

/// Protection level of one traced agent over time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub agent: u32,
    pub label: String,
    /// `(time relative to burn-in end, protection level)`.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationOutput {
    pub arm: Arm,
    pub realization: usize,
    /// Named outcomes; the first is the headline series.
    pub outcomes: Vec<(String, AgeBinnedIncidence)>,
    pub econ: Option<HealthEconLedger>,
    /// `(label, share)` rows such as dose coverage.
    pub coverage: Vec<(String, f64)>,
    pub contacts: Option<ContactMatrix>,
    pub trajectories: Vec<Trajectory>,
    pub events_processed: u64,
    pub initial_population: usize,
    pub final_population: usize,
    pub births: usize,
    pub deaths: usize,
    pub snapshot: Option<String>,
}

impl RealizationOutput {
    pub fn outcome(&self, name: &str) -> Option<&AgeBinnedIncidence> {
        self.outcomes
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, i)| i)
    }

    pub fn headline(&self) -> &AgeBinnedIncidence {
        &self.outcomes[0].1
    }

    pub fn accounting_holds(&self) -> bool {
        self.final_population + self.deaths == self.initial_population + self.births
    }
}
