//! Bundled dataset, scripted scenarios, published test cases, context sweeps
//! and the ontology feature ranking.

pub mod cases;
mod nrc;
pub mod ranking;
mod scenario;
pub mod sweep;

pub use cases::{published_cases, run_case, run_test_cases, CaseOutcome, PublishedCase};
pub use nrc::{builtin_nrc, builtin_scenario, NRC_DOCUMENT};
pub use ranking::{rank_all, rank_ontology, table2, Feature, FeatureMatrix};
pub use scenario::{Scenario, ScenarioOracle};
pub use sweep::{
    budget_table, grid, level_exception_counts, sweep, BudgetRow, SweepCell, SweepResult,
};
