//! Config-driven experiment runs and their CSV output.

pub mod config;
pub mod fixtures;
pub mod identities;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind};
pub use fixtures::{make_fixture, make_fixture_at_tau, Fixture, FIXTURES};
pub use runner::{run, selftest, RunReport, SummaryLine, Table};
