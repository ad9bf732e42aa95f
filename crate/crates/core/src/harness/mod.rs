//! Scenarios, the closed-loop runner, metrics and output files.

pub mod config;
pub mod log;
pub mod metrics;
pub mod output;
pub mod scenario;
pub mod sim;
pub mod svg;

pub use config::{FloorConfig, ScenarioConfig, ScenarioKind, SimConfig};
pub use log::{RunLog, Tick};
pub use metrics::{compute_errors, metrics_from_log, RunMetrics, SegmentMetrics};
pub use output::{emit_outputs, write_plots, write_trajectories};
pub use scenario::{build_circle_waypoints, parse_waypoints, scenario_waypoints, waypoints_csv};
pub use sim::{plan_scenario, run_scenario, simulate, track_reference, RunOutcome};
