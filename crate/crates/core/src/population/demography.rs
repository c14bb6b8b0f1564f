//! Age pyramid, life table and fertility schedule.

use serde::{Deserialize, Serialize};

use super::PopulationError;
use crate::engine::RngStream;

/// Histogram of ages: `(lo, hi, weight)` rows, sampled uniformly within a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgePyramid(pub Vec<[f64; 3]>);

impl Default for AgePyramid {
    fn default() -> Self {
        // Synthetic pyramid shaped like a mid-sized North American population.
        AgePyramid(vec![
            [0.0, 5.0, 5.6],
            [5.0, 10.0, 5.9],
            [10.0, 15.0, 5.8],
            [15.0, 20.0, 5.9],
            [20.0, 25.0, 6.6],
            [25.0, 30.0, 7.1],
            [30.0, 35.0, 7.2],
            [35.0, 40.0, 7.0],
            [40.0, 45.0, 6.6],
            [45.0, 50.0, 6.8],
            [50.0, 55.0, 7.2],
            [55.0, 60.0, 7.0],
            [60.0, 65.0, 6.0],
            [65.0, 70.0, 5.0],
            [70.0, 75.0, 3.8],
            [75.0, 80.0, 2.7],
            [80.0, 85.0, 1.9],
            [85.0, 95.0, 1.9],
        ])
    }
}

impl AgePyramid {
    pub fn validate(&self) -> Result<(), PopulationError> {
        if self.0.is_empty() {
            return Err(PopulationError::Distribution("age pyramid is empty".into()));
        }
        for r in &self.0 {
            if !(r[0] >= 0.0 && r[1] > r[0] && r[2] >= 0.0) {
                return Err(PopulationError::Distribution(format!(
                    "bad age pyramid row {r:?}"
                )));
            }
        }
        if self.0.iter().map(|r| r[2]).sum::<f64>() <= 0.0 {
            return Err(PopulationError::Distribution(
                "age pyramid weights sum to zero".into(),
            ));
        }
        Ok(())
    }

    /// Sample an age restricted to `[lo, hi)`. Falls back to uniform on the
    /// interval if the pyramid has no mass there.
    pub fn sample_in(&self, lo: f64, hi: f64, rng: &mut RngStream) -> f64 {
        let weights: Vec<f64> = self
            .0
            .iter()
            .map(|r| {
                let a = r[0].max(lo);
                let b = r[1].min(hi);
                if b > a {
                    r[2] * (b - a) / (r[1] - r[0])
                } else {
                    0.0
                }
            })
            .collect();
        match rng.categorical(&weights) {
            Ok(i) => {
                let r = self.0[i];
                rng.uniform_range(r[0].max(lo), r[1].min(hi))
            }
            Err(_) => rng.uniform_range(lo, hi),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.sample_in(0.0, f64::INFINITY, rng)
    }
}

/// Piecewise-constant mortality hazard: `(age_start, hazard per year)` rows
/// with ascending starts; the last row extends forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LifeTable(pub Vec<[f64; 2]>);

impl Default for LifeTable {
    fn default() -> Self {
        // Gompertz-Makeham shape with elevated infant mortality; life
        // expectancy at birth is about 78.6 years.
        let rows = (0..=110)
            .map(|a| {
                let a = a as f64;
                let background = if a < 1.0 { 0.004 } else { 0.0003 };
                [a, background + 0.00002 * (0.1 * (a + 0.5)).exp()]
            })
            .collect();
        LifeTable(rows)
    }
}

impl LifeTable {
    pub fn validate(&self) -> Result<(), PopulationError> {
        if self.0.is_empty() || self.0[0][0] != 0.0 {
            return Err(PopulationError::Distribution(
                "life table must start at age 0".into(),
            ));
        }
        for w in self.0.windows(2) {
            if !(w[1][0] > w[0][0]) {
                return Err(PopulationError::Distribution(
                    "life table ages must increase".into(),
                ));
            }
        }
        if self.0.iter().any(|r| !(r[1] >= 0.0 && r[1].is_finite())) {
            return Err(PopulationError::Distribution(
                "life table hazards must be non-negative".into(),
            ));
        }
        if !(self.0.last().map(|r| r[1]).unwrap_or(0.0) > 0.0) {
            return Err(PopulationError::Distribution(
                "last life table hazard must be positive".into(),
            ));
        }
        Ok(())
    }

    fn band(&self, age: f64) -> usize {
        self.0.iter().rposition(|r| r[0] <= age).unwrap_or_default()
    }

    pub fn hazard(&self, age: f64) -> f64 {
        self.0[self.band(age)][1]
    }

    /// Remaining lifetime of someone alive at `age`, by inversion of the
    /// cumulative hazard.
    pub fn sample_remaining(&self, age: f64, rng: &mut RngStream) -> f64 {
        let mut target = -rng.uniform_pos().ln();
        let mut i = self.band(age);
        let mut a = age;
        loop {
            let h = self.0[i][1];
            let end = self.0.get(i + 1).map(|r| r[0]).unwrap_or(f64::INFINITY);
            let span = end - a;
            if h > 0.0 && h * span >= target {
                return a + target / h - age;
            }
            if h > 0.0 {
                target -= h * span;
            }
            a = end;
            i += 1;
        }
    }

    /// Probability of surviving from birth to `age`.
    pub fn survival(&self, age: f64) -> f64 {
        let mut cum = 0.0;
        for (i, r) in self.0.iter().enumerate() {
            if r[0] >= age {
                break;
            }
            let end = self
                .0
                .get(i + 1)
                .map(|n| n[0])
                .unwrap_or(f64::INFINITY)
                .min(age);
            cum += r[1] * (end - r[0]);
        }
        (-cum).exp()
    }

    /// Life expectancy at birth, integrating survival band by band.
    pub fn life_expectancy(&self) -> f64 {
        let mut s = 1.0;
        let mut le = 0.0;
        for (i, r) in self.0.iter().enumerate() {
            let h = r[1];
            match self.0.get(i + 1) {
                Some(next) => {
                    let span = next[0] - r[0];
                    le += if h > 0.0 {
                        s * (1.0 - (-h * span).exp()) / h
                    } else {
                        s * span
                    };
                    s *= (-h * span).exp();
                }
                None => le += s / h,
            }
        }
        le
    }
}

/// Conception or birth hazard by age band with a multiplier per parity
/// (number of previous children, last entry applies to all higher parities).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FertilitySchedule {
    /// `(lo, hi, rate per woman-year)` rows.
    pub bands: Vec<[f64; 3]>,
    pub parity_multipliers: Vec<f64>,
}

impl Default for FertilitySchedule {
    fn default() -> Self {
        FertilitySchedule {
            bands: vec![
                [15.0, 20.0, 0.02],
                [20.0, 25.0, 0.08],
                [25.0, 30.0, 0.12],
                [30.0, 35.0, 0.12],
                [35.0, 40.0, 0.07],
                [40.0, 46.0, 0.0125],
            ],
            parity_multipliers: vec![1.0],
        }
    }
}

impl FertilitySchedule {
    pub fn validate(&self) -> Result<(), PopulationError> {
        if self
            .bands
            .iter()
            .any(|b| !(b[1] > b[0] && b[2] >= 0.0 && b[2].is_finite()))
        {
            return Err(PopulationError::Distribution("bad fertility band".into()));
        }
        if self.parity_multipliers.is_empty()
            || self.parity_multipliers.iter().any(|m| !(*m >= 0.0))
        {
            return Err(PopulationError::Distribution(
                "parity multipliers must be non-empty and non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn rate(&self, age: f64, parity: u32) -> f64 {
        let base = self
            .bands
            .iter()
            .find(|b| age >= b[0] && age < b[1])
            .map(|b| b[2])
            .unwrap_or(0.0);
        let idx = (parity as usize).min(self.parity_multipliers.len() - 1);
        base * self.parity_multipliers[idx]
    }

    /// Expected births per woman surviving the whole schedule at parity-free rates.
    pub fn total_rate(&self) -> f64 {
        self.bands.iter().map(|b| (b[1] - b[0]) * b[2]).sum()
    }

    /// Age at which the schedule's rate next changes after `age`.
    pub fn next_change(&self, age: f64) -> Option<f64> {
        self.bands
            .iter()
            .flat_map(|b| [b[0], b[1]])
            .filter(|&edge| edge > age + 1e-12)
            .min_by(|a, b| a.total_cmp(b))
    }
}
