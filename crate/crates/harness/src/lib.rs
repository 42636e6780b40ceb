//! Experiment harness for meta-learned channel prediction: TOML configs,
//! seeded offline and online experiments, CSV/SVG output and an oracle
//! self-test.

pub mod config;
pub mod error;
pub mod experiment;
pub mod frames;
pub mod oracles;
pub mod output;
pub mod selftest;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiment::{run_genie_check, run_offline_experiment, run_online_experiment, MetricRecord};
pub use output::emit_outputs;
