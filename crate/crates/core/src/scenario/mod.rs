//! Scenario description, execution and output.

pub mod config;
pub mod preset;
pub mod report;
pub mod runner;
pub mod trace;

pub use config::{LoopConfig, PerturbationSchedule, ScenarioConfig, Scheme};
pub use preset::{preset, sweep, Preset, SurfaceGrid, Sweep, SweepPoint};
pub use report::{run_sweep, ComparisonRow, SweepReport};
pub use runner::{run_scenario, FsLogEntry, RunOutput, Simulation, SpeedUpdate, Summary};
pub use trace::{LoopSample, TraceRecord};
