//! Monte-Carlo harness: SNR × K × method sweeps over synthetic stacks with
//! per-cell MSE, 95% confidence intervals and a bias/variance split.

mod analysis;
mod csv_out;
mod spec;
mod stats;
mod sweep;
mod trial;

pub use analysis::{curve, gnuplot_script, knee, mutually_within_ci, BREAKDOWN_MSE};
pub use csv_out::{read_csv, read_csv_from, rows, write_csv, write_csv_to, CsvRow, CSV_HEADER};
pub use spec::{snr_range, MethodSpec, SweepSpec, TruthSource};
pub use stats::{summarize, t_interval, CellStats};
pub use sweep::{run_sweep, run_sweep_with, truth_labels, CellResult, SweepFailure, SweepResult};
pub use trial::{fitted_wiener_weights, run_trial, sigma2_for, trial_seed, trial_stack, MethodTrial};
