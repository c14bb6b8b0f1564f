//! Continuous-time, statechart-driven agent-based epidemic simulation.
//!
//! Two model packs share the engine, population and metrics layers:
//! [`varicella`] (chickenpox and shingles with exogenous boosting) and
//! [`pertussis`] (continuous immunity with maternal immunization).

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod metrics;
pub mod output;
pub mod pertussis;
pub mod population;
pub mod runner;
pub mod scenario;
pub mod statechart;
pub mod varicella;
