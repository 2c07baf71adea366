//! Post-hoc analysis: consensus metrics, grouped Shapley attribution,
//! input-value distributions and rank statistics.

mod inputs;
mod metrics;
mod shapley;
mod stats;

pub use inputs::{input_distribution, InputDistribution, Level};
pub use metrics::{
    aggregate, consensus_time, exit_probability, BenchmarkReport, ConditionSummary, Outcome,
    RunSummary,
};
pub use shapley::{
    attribution_report, decision_groups, row_inputs, shapley_grouped, AttributionConfig,
    AttributionReport, InputGroup, DECISION_GROUPS,
};
pub use stats::{
    mann_whitney_u, mann_whitney_u_exact, mann_whitney_u_normal, two_proportion_test, MwuResult,
    EXACT_PRODUCT_LIMIT,
};
