//! Scenario catalog, configuration, reports and the end-to-end runner.

pub mod catalog;
pub mod config;
pub mod report;
pub mod run;

pub use catalog::{list_catalog, scenario, ship_suite};
pub use config::{ScenarioConfig, Tolerances};
pub use report::{Record, Report, Status};
pub use run::{run_scenario, RunOptions};
