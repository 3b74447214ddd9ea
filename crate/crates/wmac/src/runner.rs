//! Runs scenarios and assembles their reports.

use wmac_core::metrics::{self, Window};
use wmac_core::scenario::{ControllerKind, ScenarioSpec};
use wmac_core::simulation::{run_scenario, RunOutput, SimConfig};

use crate::error::{CliError, Result};
use crate::summary::{RunReport, SummaryDocument};

/// Row label for a controller, e.g. `MANN soft (N = 10)`.
pub fn label(spec: &ScenarioSpec) -> String {
    let name = match spec.controller.kind {
        ControllerKind::Nn => "NN",
        ControllerKind::MannSoft => "MANN soft",
        ControllerKind::MannHard => "MANN hard",
        ControllerKind::MannProposed => "MANN proposed",
    };
    format!("{name} (N = {})", spec.controller.hidden)
}

/// Validates the inputs, then integrates.
pub fn run(spec: &ScenarioSpec, sim: &SimConfig) -> Result<RunOutput> {
    spec.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    sim.validate().map_err(|e| CliError::BadFlag(e.to_string()))?;
    run_scenario(spec, sim).map_err(CliError::Run)
}

pub struct Comparison {
    pub runs: Vec<(ScenarioSpec, RunOutput)>,
    pub document: SummaryDocument,
}

/// Runs all four controllers on `spec` and tabulates soft (I) against
/// proposed (II) over both SRMSE windows.
pub fn compare(spec: &ScenarioSpec, sim: &SimConfig) -> Result<Comparison> {
    let specs: Vec<ScenarioSpec> = ControllerKind::ALL
        .iter()
        .map(|k| spec.clone().with_controller(*k))
        .collect();
    for s in &specs {
        s.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    }
    sim.validate().map_err(|e| CliError::BadFlag(e.to_string()))?;
    let outputs: Vec<Result<RunOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs.iter().map(|s| scope.spawn(move || run(s, sim))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    });
    let mut runs = Vec::with_capacity(specs.len());
    for (s, out) in specs.into_iter().zip(outputs) {
        runs.push((s, out?));
    }
    let reports: Vec<RunReport> = runs.iter().map(|(s, r)| RunReport::new(label(s), s, sim, r)).collect();
    let labelled: Vec<(String, metrics::RunSummary)> =
        reports.iter().map(|r| (r.label.clone(), r.summary.clone())).collect();
    let find = |kind: ControllerKind| label(&spec.clone().with_controller(kind));
    let (one, two) = (find(ControllerKind::MannSoft), find(ControllerKind::MannProposed));
    let tables = [Window::Whole, Window::AfterCut]
        .into_iter()
        .map(|w| metrics::comparison_table(&labelled, &one, &two, w).map_err(|e| CliError::Format(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        runs,
        document: SummaryDocument { runs: reports, tables },
    })
}
