//! Pertussis with continuous immunity, maternal immunization and layered contacts.

pub mod charts;
pub mod immunity;
pub mod model;
pub mod params;

pub use immunity::{ImmunityError, ImmunityState, MemoryType};
pub use model::{ExposureSource, Layer, PertussisEvent, PertussisModel, PertussisSettings};
pub use params::{age_table_lookup, validate_age_table, PertussisParams};
