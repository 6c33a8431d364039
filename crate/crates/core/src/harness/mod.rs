//! Scenario configs, the runner, reports and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod report;
pub mod scenario;

pub use config::ScenarioConfig;
pub use report::{emit_report, DecayReport};
pub use scenario::run_scenario;
