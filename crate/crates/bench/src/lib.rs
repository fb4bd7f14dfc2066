//! Benchmark helpers: scenario presets sized for criterion runs.

use twinmesh_core::Scenario;

/// A short-lifecycle scenario variant that keeps bench iterations fast.
pub fn short_scenario() -> Scenario {
    Scenario::builtin_with_usage_years(6)
}
