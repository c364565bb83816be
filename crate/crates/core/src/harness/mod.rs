//! Experiment harness: configuration, seeded worker-count-invariant
//! parallel execution, stopping rules, and CSV emission. This is the layer
//! the `occsim` CLI drives.

pub mod config;
pub mod run;

pub use config::{
    BoundsConfig, CapacityConfig, HarnessError, Overrides, RankConfig, RawConfig, SimulateConfig,
};
pub use run::{run_bounds, run_capacity, run_rank_experiment, run_simulate};
