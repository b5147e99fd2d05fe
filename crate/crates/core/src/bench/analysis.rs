use std::fmt::Write;

use super::spec::MethodSpec;
use super::sweep::{CellResult, SweepResult};

/// MSE above which an alignment counts as failed, px².
pub const BREAKDOWN_MSE: f64 = 1.0;

/// Cells of one curve, sorted by SNR.
pub fn curve<'a>(result: &'a SweepResult, truth: &str, k: usize, method: &MethodSpec) -> Vec<&'a CellResult> {
    let mut out: Vec<&CellResult> = result
        .cells
        .iter()
        .filter(|c| c.truth == truth && c.k == k && c.method == *method)
        .collect();
    out.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    out
}

/// Breakdown knee: the highest SNR whose `mse_mean` exceeds
/// [`BREAKDOWN_MSE`]. `None` if the curve never breaks down.
pub fn knee(result: &SweepResult, truth: &str, k: usize, method: &MethodSpec) -> Option<f64> {
    curve(result, truth, k, method)
        .into_iter()
        .filter(|c| c.stats.mse_mean > BREAKDOWN_MSE)
        .map(|c| c.snr_db)
        .reduce(f64::max)
}

/// Whether two cells' means each lie inside the other's 95% interval.
pub fn mutually_within_ci(a: &CellResult, b: &CellResult) -> bool {
    let inside = |x: &CellResult, m: f64| x.stats.ci_lo <= m && m <= x.stats.ci_hi;
    inside(a, b.stats.mse_mean) && inside(b, a.stats.mse_mean)
}

/// Gnuplot script drawing MSE vs SNR (log scale, error bars from the CI),
/// one panel per `(truth, K)` and one curve per method.
pub fn gnuplot_script(result: &SweepResult, csv_name: &str) -> String {
    let mut panels: Vec<(String, usize)> = result.cells.iter().map(|c| (c.truth.clone(), c.k)).collect();
    panels.dedup();
    panels.sort();
    panels.dedup();
    let mut methods: Vec<MethodSpec> = result.cells.iter().map(|c| c.method).collect();
    methods.sort_by_key(|m| m.columns());
    methods.dedup();

    let mut s = String::new();
    let _ = writeln!(s, "# MSE vs SNR; columns: 2=snr_db 7=mse_mean 8=ci_lo 9=ci_hi");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size {},{}", 640, 480 * panels.len().max(1));
    let _ = writeln!(s, "set output '{csv_name}.png'");
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(s, "set xlabel 'SNR (dB)'");
    let _ = writeln!(s, "set ylabel 'MSE (px^2)'");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set multiplot layout {},1", panels.len().max(1));
    for (truth, k) in &panels {
        let _ = writeln!(s, "set title '{truth}, K = {k}' noenhanced");
        let curves: Vec<String> = methods
            .iter()
            .map(|m| {
                let (a, b, c) = m.columns();
                format!(
                    "'{csv_name}' skip 1 using 2:(stringcolumn(1) eq '{truth}' && $3 == {k} && stringcolumn(4) eq '{a}' && stringcolumn(5) eq '{b}' && stringcolumn(6) eq '{c}' ? $7 : 1/0):8:9 with yerrorlines title '{m}' noenhanced"
                )
            })
            .collect();
        let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    }
    let _ = writeln!(s, "unset multiplot");
    s
}
