//! Co-simulation of digital control loops sharing one DVS-capable processor
//! under EDF, with an energy-aware feedback scheduler that stretches sampling
//! periods of loops in steady state and lowers the processor speed to match.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod plant;
pub mod scenario;
pub mod scheduler;

pub use error::{Error, Result};
pub use scenario::{run_scenario, RunOutput, ScenarioConfig, Scheme, Summary};
pub use scheduler::{Beta, FsConfig, Mode};
