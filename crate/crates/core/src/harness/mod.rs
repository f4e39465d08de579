//! Scenario-driven verification runs and their reports.

pub mod checks;
mod report;
mod scenario;

pub use checks::{run, RunError};
pub use report::{
    emit, render, to_csv, to_json, CheckRecord, Format, LevelRecord, PointRecord, Report, Series,
    Verdict, CSV_HEADER, REPORT_SCHEMA,
};
pub use scenario::{
    CheckKind, FrobeniusExpectation, FrobeniusParams, MeshLevel, MonteCarloParams,
    RefinementParams, Scenario, ScenarioError, Tolerances, SCENARIO_VERSION,
};
