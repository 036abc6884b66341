//! Dataset directories, train/test protocol and the commands built on them.

pub mod commands;
pub mod dataset;
pub mod experiment;

pub use commands::{
    cmd_authenticate, cmd_estimate, cmd_evaluate, cmd_simulate, cmd_train, AuthenticateConfig,
    EvaluateConfig, EvaluationOutput, SplitConfig,
};
pub use dataset::{split, Dataset, Manifest, Preset, SimulateConfig};
pub use experiment::{cell, run_table, ExperimentConfig, ShotMode, TableRow};
