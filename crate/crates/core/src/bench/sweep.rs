use std::cmp::Ordering;

use super::spec::{MethodSpec, SweepSpec, TruthSource};
use super::stats::{summarize, CellStats};
use super::trial::{fitted_wiener_weights, run_method, trial_seed, trial_stack, MethodTrial};
use crate::error::Result;
use crate::estimators::{Method, ShiftSet, SpectralStack};
use crate::par::{map_indexed, Execution};
use crate::spectral::PixelGrid;

/// One `(truth, SNR, K, method)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub truth: String,
    pub snr_db: f64,
    pub k: usize,
    pub method: MethodSpec,
    pub stats: CellStats,
    /// Estimator time summed over trials; zero unless timing is enabled.
    pub wall_s: f64,
}

impl CellResult {
    /// Row order: truth, numeric SNR, K, then method columns.
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.truth
            .cmp(&other.truth)
            .then(self.snr_db.total_cmp(&other.snr_db))
            .then(self.k.cmp(&other.k))
            .then(self.method.columns().cmp(&other.method.columns()))
    }
}

/// A cell or truth that could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub truth: String,
    pub snr_db: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<CellResult>,
    pub failures: Vec<SweepFailure>,
}

impl SweepResult {
    pub fn find(&self, truth: &str, snr_db: f64, k: usize, method: &MethodSpec) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.truth == truth && c.snr_db == snr_db && c.k == k && c.method == *method)
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// All methods at every `K` on one trial stack, `[k_index][method_index]`.
type TrialOutcome = Result<Vec<Vec<MethodTrial>>>;

fn run_job(spec: &SweepSpec, truth: &PixelGrid, label: &str, snr_db: f64, trial: usize) -> TrialOutcome {
    let stack_seed = trial_seed(spec.base_seed, label, snr_db, trial);
    let full = trial_stack(truth, snr_db, spec.max_k(), &spec.trajectory, stack_seed)?;
    let needs_wiener = spec
        .methods
        .iter()
        .any(|m| !matches!(m, MethodSpec::Iterative { method: Method::Mle, .. }));
    spec.k_values
        .iter()
        .map(|&k| {
            let spectral = SpectralStack::from_grids(&full.frames[..=k])?;
            let truth_shifts = ShiftSet::new(full.true_shifts[..=k].to_vec())?;
            let wiener = needs_wiener
                .then(|| fitted_wiener_weights(&spectral, full.sigma2))
                .transpose()?;
            spec.methods
                .iter()
                .map(|m| run_method(&spectral, wiener.as_ref(), &truth_shifts, m, &spec.estimator, stack_seed))
                .collect()
        })
        .collect()
}

/// Runs every cell of `spec`. Trials of each `(truth, SNR)` group are
/// dispatched per `execution`; `on_cell` sees each cell as it completes.
/// Output does not depend on the execution mode.
pub fn run_sweep_with(spec: &SweepSpec, execution: Execution, mut on_cell: impl FnMut(&CellResult)) -> Result<SweepResult> {
    spec.validate()?;
    let mut result = SweepResult::default();
    for source in &spec.truths {
        let label = source.label();
        let truth = match source.load() {
            Ok(t) => t,
            Err(e) => {
                log::error!("truth {label}: {e}");
                result.failures.push(SweepFailure {
                    truth: label,
                    snr_db: None,
                    message: e.to_string(),
                });
                continue;
            }
        };
        for &snr_db in &spec.snr_db {
            let outcomes = map_indexed(spec.trials, execution, |trial| run_job(spec, &truth, &label, snr_db, trial));
            match collect_cells(spec, &label, snr_db, outcomes) {
                Ok(cells) => {
                    for c in &cells {
                        on_cell(c);
                    }
                    result.cells.extend(cells);
                }
                Err(e) => {
                    log::error!("truth {label} at {snr_db} dB: {e}");
                    result.failures.push(SweepFailure {
                        truth: label.clone(),
                        snr_db: Some(snr_db),
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    result.cells.sort_by(CellResult::cmp_key);
    Ok(result)
}

pub fn run_sweep(spec: &SweepSpec, execution: Execution) -> Result<SweepResult> {
    run_sweep_with(spec, execution, |_| {})
}

fn collect_cells(spec: &SweepSpec, label: &str, snr_db: f64, outcomes: Vec<TrialOutcome>) -> Result<Vec<CellResult>> {
    let outcomes: Vec<Vec<Vec<MethodTrial>>> = outcomes.into_iter().collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for (ki, &k) in spec.k_values.iter().enumerate() {
        for (mi, method) in spec.methods.iter().enumerate() {
            let trials: Vec<MethodTrial> = outcomes.iter().map(|o| o[ki][mi].clone()).collect();
            let wall_s = if spec.timing { trials.iter().map(|t| t.seconds).sum() } else { 0.0 };
            cells.push(CellResult {
                truth: label.to_string(),
                snr_db,
                k,
                method: *method,
                stats: summarize(&trials)?,
                wall_s,
            });
        }
    }
    Ok(cells)
}

/// Truth labels in a spec, in spec order.
pub fn truth_labels(spec: &SweepSpec) -> Vec<String> {
    spec.truths.iter().map(TruthSource::label).collect()
}
