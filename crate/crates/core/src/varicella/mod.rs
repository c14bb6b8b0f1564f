//! Chickenpox and shingles with exogenous boosting and vaccination.

pub mod charts;
pub mod econ;
pub mod model;
pub mod params;

pub use econ::{
    CostCategory, Discounter, EconError, EconParams, EpisodeUse, HealthEconLedger, UnitCosts,
};
pub use model::{Source, VzvEvent, VzvModel, VzvSettings};
pub use params::{attitude_index, VaricellaParams, ATTITUDES};
