//! Scenario execution.

use std::time::Instant;

use crate::config::{Scenario, ScenarioConfig};
use crate::error::Result;
use crate::grid::{appendix_momentum_checks, run_grid_case};
use crate::qubit::run_qubit_case;
use crate::report::ScenarioReport;

pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioReport> {
    match scenario {
        Scenario::Qubit(sc) => run_qubit_case(sc),
        Scenario::Grid { scenario, appendix } => {
            let mut report = run_grid_case(scenario)?;
            if *appendix {
                report.checks.extend(appendix_momentum_checks(scenario)?);
            }
            Ok(report)
        }
    }
}

/// Validate and run a config. Nothing is returned unless the whole
/// scenario completes.
pub fn run(config: &ScenarioConfig) -> Result<ScenarioReport> {
    let scenario = config.validate()?;
    let start = Instant::now();
    let mut report = run_scenario(&scenario)?;
    if let Some(id) = &config.scenario_id {
        report.scenario_id = id.clone();
    }
    if config.output.wall_time {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}
