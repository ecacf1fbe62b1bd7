//! Scenario runs, parameter sweeps and card-sorting runs over the knowledge core.

mod config;
mod run;
mod sweep;
mod wcst;

pub use config::{PresentationOrder, ScenarioConfig, ScenarioKind, DEFAULT_MAX_STEPS, DEFAULT_WCST_CAP};
pub use run::{presentation_sequence, run_example, save_event_log, write_event_log, RunResult, ScenarioRun};
pub use sweep::{default_delta_aw_grid, default_theta_mc_grid, linspace, sweep, SweepCell, SweepResult};
pub use wcst::{run_wcst, wcst_default_parameters, RuleChange, WcstConfig, WcstRun, WcstStats};
