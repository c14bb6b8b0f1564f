//! Continuous active and passive protection with exponential waning.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SimTime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImmunityError {
    #[error("evaluated at {t} before last update {last}")]
    BeforeUpdate { t: SimTime, last: SimTime },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryType {
    Naive,
    Natural,
    WholeCell,
    Acellular,
}

impl MemoryType {
    pub fn label(self) -> &'static str {
        match self {
            MemoryType::Naive => "naive",
            MemoryType::Natural => "natural",
            MemoryType::WholeCell => "whole_cell",
            MemoryType::Acellular => "acellular",
        }
    }
}

/// Protection levels as of `last_update`; both decay exponentially after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImmunityState {
    pub p_active: f64,
    pub p_passive: f64,
    pub memory: MemoryType,
    pub w_active: f64,
    pub w_passive: f64,
    pub last_update: SimTime,
}

impl ImmunityState {
    pub fn naive(t: SimTime, w_passive: f64) -> Self {
        ImmunityState {
            p_active: 0.0,
            p_passive: 0.0,
            memory: MemoryType::Naive,
            w_active: 0.0,
            w_passive,
            last_update: t,
        }
    }

    fn check(&self, t: SimTime) -> Result<f64, ImmunityError> {
        if t < self.last_update {
            Err(ImmunityError::BeforeUpdate {
                t,
                last: self.last_update,
            })
        } else {
            Ok(t - self.last_update)
        }
    }

    pub fn active_at(&self, t: SimTime) -> Result<f64, ImmunityError> {
        let dt = self.check(t)?;
        Ok(self.p_active * (-self.w_active * dt).exp())
    }

    pub fn passive_at(&self, t: SimTime) -> Result<f64, ImmunityError> {
        let dt = self.check(t)?;
        Ok(self.p_passive * (-self.w_passive * dt).exp())
    }

    /// `min(active + passive, 1)` at time `t`.
    pub fn protection_level(&self, t: SimTime) -> Result<f64, ImmunityError> {
        Ok((self.active_at(t)? + self.passive_at(t)?).min(1.0))
    }

    /// Fold the decay up to `t` into the stored levels.
    pub fn advance(&mut self, t: SimTime) -> Result<(), ImmunityError> {
        self.p_active = self.active_at(t)?;
        self.p_passive = self.passive_at(t)?;
        self.last_update = t;
        Ok(())
    }

    /// Whether an early dose given now would be blunted.
    pub fn blunts(&self, t: SimTime, threshold: f64) -> Result<bool, ImmunityError> {
        Ok(self.passive_at(t)? > threshold)
    }

    /// Raise active protection to `target` (never lowering it) and switch
    /// to vaccine-induced memory.
    pub fn apply_dose(
        &mut self,
        t: SimTime,
        target: f64,
        memory: MemoryType,
        w_active: f64,
    ) -> Result<(), ImmunityError> {
        self.advance(t)?;
        self.p_active = self.p_active.max(target.clamp(0.0, 1.0));
        self.memory = memory;
        self.w_active = w_active;
        Ok(())
    }

    /// Active protection boosted to the maximum after infection.
    pub fn recover(&mut self, t: SimTime, w_natural: f64) -> Result<(), ImmunityError> {
        self.advance(t)?;
        self.p_active = 1.0;
        self.memory = MemoryType::Natural;
        self.w_active = w_natural;
        Ok(())
    }

    /// Newborn state: passive protection is `m` times the mother's level.
    pub fn newborn(mother_protection: f64, m: f64, w_passive: f64, t: SimTime) -> Self {
        ImmunityState {
            p_passive: (m * mother_protection).clamp(0.0, 1.0),
            ..ImmunityState::naive(t, w_passive)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(pa: f64, pp: f64) -> ImmunityState {
        ImmunityState {
            p_active: pa,
            p_passive: pp,
            memory: MemoryType::Acellular,
            w_active: 0.2,
            w_passive: 4.0,
            last_update: 0.0,
        }
    }

    #[test]
    fn cap_and_sum() {
        assert_eq!(state(0.7, 0.5).protection_level(0.0).unwrap(), 1.0);
        assert_eq!(state(0.3, 0.2).protection_level(0.0).unwrap(), 0.5);
    }

    #[test]
    fn one_year_of_waning() {
        let s = state(1.0, 0.0);
        assert!((s.protection_level(1.0).unwrap() - 0.818_730_753_077_981_9).abs() < 1e-12);
    }

    #[test]
    fn evaluation_before_update_faults() {
        let mut s = state(0.5, 0.0);
        s.advance(2.0).unwrap();
        assert!(s.protection_level(1.0).is_err());
    }

    #[test]
    fn dose_saw_tooth() {
        let mut s = ImmunityState::naive(0.0, 4.0);
        s.apply_dose(0.5, 0.3, MemoryType::Acellular, 0.15).unwrap();
        assert_eq!(s.active_at(0.5).unwrap(), 0.3);
        let before_next = s.active_at(1.0).unwrap();
        assert!((before_next - 0.3 * (-0.15_f64 * 0.5).exp()).abs() < 1e-12);
        s.apply_dose(1.0, 0.5, MemoryType::Acellular, 0.15).unwrap();
        assert_eq!(s.active_at(1.0).unwrap(), 0.5);
    }

    #[test]
    fn transfer() {
        assert_eq!(ImmunityState::newborn(0.0, 0.9, 4.0, 1.0).p_passive, 0.0);
        assert_eq!(ImmunityState::newborn(0.8, 1.0, 4.0, 1.0).p_passive, 0.8);
    }

    #[test]
    fn recovery_maxes_active() {
        let mut s = state(0.1, 0.0);
        s.recover(3.0, 0.03).unwrap();
        assert_eq!(s.p_active, 1.0);
        assert_eq!(s.memory, MemoryType::Natural);
    }
}
