use statrs::distribution::{ContinuousCDF, StudentsT};

use super::trial::MethodTrial;
use crate::error::{Error, Result};

/// Summary of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub mse_mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bias_sq: f64,
    pub variance: f64,
    pub converged_frac: f64,
}

/// Mean and two-sided 95% Student-t interval.
pub fn t_interval(values: &[f64]) -> Result<(f64, f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid("a confidence interval needs at least two values"));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let t = StudentsT::new(0.0, 1.0, nf - 1.0)
        .map_err(|e| Error::Numerical(e.to_string()))?
        .inverse_cdf(0.975);
    let half = t * (var / nf).sqrt();
    Ok((mean, mean - half, mean + half))
}

/// Cell statistics from per-trial results.
///
/// Squared bias per component uses the unbiased estimate
/// `mean² − s²/n` (the plain `mean²` carries an `s²/n` offset), summed over
/// components, divided by `K` and floored at zero. The variance is the
/// remainder, so `bias_sq + variance = mse_mean` holds by construction.
pub fn summarize(trials: &[MethodTrial]) -> Result<CellStats> {
    let n = trials.len();
    let per_trial: Vec<f64> = trials.iter().map(|t| t.squared_error).collect();
    let (mse_mean, ci_lo, ci_hi) = t_interval(&per_trial)?;

    let comps = trials[0].component_errors.len();
    if comps == 0 || comps % 2 != 0 || trials.iter().any(|t| t.component_errors.len() != comps) {
        return Err(Error::invalid("inconsistent component errors across trials"));
    }
    let k = (comps / 2) as f64;
    let nf = n as f64;
    let mut bias = 0.0;
    for j in 0..comps {
        let mean = trials.iter().map(|t| t.component_errors[j]).sum::<f64>() / nf;
        let s2 = trials.iter().map(|t| (t.component_errors[j] - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        bias += mean * mean - s2 / nf;
    }
    let bias_sq = (bias / k).max(0.0).min(mse_mean);
    Ok(CellStats {
        mse_mean,
        ci_lo,
        ci_hi,
        bias_sq,
        variance: mse_mean - bias_sq,
        converged_frac: trials.iter().filter(|t| t.converged).count() as f64 / nf,
    })
}
