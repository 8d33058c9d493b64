//! Experiment harness for `rcds-core`: configuration files, seeded
//! multi-trial runs and sweeps, CSV tables, SVG charts, and the text formats
//! for topologies, constraint systems, storage outcomes and event traces.

pub mod chart;
pub mod config;
pub mod error;
pub mod formats;
pub mod harness;
pub mod table;

pub use config::ExperimentConfig;
pub use error::{SimError, SimResult};
pub use harness::{run_experiment, sweep, SweepParam};
pub use table::{Row, Table};
