//! Batch runner for the oofdm simulator: config loading, scenario
//! execution, CSV output and plot-script generation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{
    load_config, parse_config, validate_config, Diagnostic, Scenario, ScenarioConfig,
};
pub use run::{run_scenario, RunError, RunSummary};
