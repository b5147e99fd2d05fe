use std::time::Instant;

use super::spec::MethodSpec;
use crate::error::Result;
use crate::estimators::{estimate_constrained, estimate_with_weights, CostWeights, EstimatorConfig, Method, ShiftSet, SpectralStack};
use crate::seed;
use crate::spectral::{fit_prior_amplitude, PixelGrid, PriorSpectrum};
use crate::synth::{draw_shifts, make_stack, sigma2_for_snr_db, SyntheticStack, TrajectoryModel};

/// Outcome of one estimator on one stack.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodTrial {
    /// `Σ_i ‖τ̂_i − τ_i‖² / K` with wrapped differences.
    pub squared_error: f64,
    /// `τ̂_i − τ_i` per component, `[x_1, y_1, …, x_K, y_K]`.
    pub component_errors: Vec<f64>,
    pub converged: bool,
    pub seconds: f64,
}

/// Stack seed for one trial. Method and `K` are deliberately left out, so
/// every method and every `K` in a sweep sees the same realization (the
/// smaller stacks are prefixes of the largest).
pub fn trial_seed(base_seed: u64, truth_label: &str, snr_db: f64, trial: usize) -> u64 {
    seed::mix(base_seed, &[seed::hash_str(truth_label), snr_db.to_bits(), trial as u64])
}

/// Noise variance for a target SNR; `+∞` means noiseless.
pub fn sigma2_for(truth: &PixelGrid, snr_db: f64) -> Result<f64> {
    if snr_db == f64::INFINITY {
        Ok(0.0)
    } else {
        sigma2_for_snr_db(truth, snr_db)
    }
}

/// Draws the shifts and frames of one trial.
pub fn trial_stack(truth: &PixelGrid, snr_db: f64, k: usize, trajectory: &TrajectoryModel, stack_seed: u64) -> Result<SyntheticStack> {
    let shifts = draw_shifts(trajectory, k, seed::mix(stack_seed, &[1]))?;
    make_stack(truth, &shifts, sigma2_for(truth, snr_db)?, seed::mix(stack_seed, &[2]))
}

/// Wiener weights for `stack` with the prior amplitude fitted to the stack
/// itself at known `sigma2`. Noiseless stacks get the flat limit `1/(K+1)`.
pub fn fitted_wiener_weights(stack: &SpectralStack, sigma2: f64) -> Result<CostWeights> {
    if sigma2 == 0.0 {
        return CostWeights::custom(vec![1.0 / stack.len() as f64; stack.bins()]);
    }
    let (h, w) = stack.dims();
    let fit = fit_prior_amplitude(stack.frames(), sigma2)?;
    CostWeights::wiener(&PriorSpectrum::natural(h, w, fit.amplitude, sigma2)?, stack.len())
}

/// Runs `method` on the first `K + 1` frames of `stack`.
pub(crate) fn run_method(
    spectral: &SpectralStack,
    wiener: Option<&CostWeights>,
    truth_shifts: &ShiftSet,
    method: &MethodSpec,
    template: &EstimatorConfig,
    stack_seed: u64,
) -> Result<MethodTrial> {
    let (h, w) = spectral.dims();
    let start = Instant::now();
    let identity;
    let wiener = || wiener.ok_or_else(|| crate::Error::invalid("Wiener weights required"));
    let (estimate, converged) = match *method {
        MethodSpec::Constrained => (estimate_constrained(spectral, wiener()?, template.newton_iters)?, true),
        MethodSpec::Iterative { method: m, optimizer, init } => {
            let weights = match m {
                Method::Mle => {
                    identity = CostWeights::identity(spectral.bins());
                    &identity
                }
                Method::Map => wiener()?,
            };
            let cfg = EstimatorConfig {
                method: m,
                optimizer,
                init,
                seed: seed::mix(stack_seed, &[seed::hash_str(&method.to_string())]),
                ..*template
            };
            let out = estimate_with_weights(spectral, &cfg, weights)?;
            (out.shifts, out.converged)
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let component_errors: Vec<f64> = estimate
        .iter()
        .zip(truth_shifts.iter())
        .skip(1)
        .flat_map(|(e, t)| {
            let d = (*e - *t).canonical(h, w);
            [d.tx, d.ty]
        })
        .collect();
    Ok(MethodTrial {
        squared_error: estimate.mse_against(truth_shifts, h, w)?,
        component_errors,
        converged,
        seconds,
    })
}

/// One trial of one method at one `(SNR, K)`, generated exactly as a sweep
/// would generate it.
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    truth: &PixelGrid,
    truth_label: &str,
    snr_db: f64,
    k: usize,
    method: &MethodSpec,
    trajectory: &TrajectoryModel,
    template: &EstimatorConfig,
    base_seed: u64,
    trial: usize,
) -> Result<MethodTrial> {
    let stack_seed = trial_seed(base_seed, truth_label, snr_db, trial);
    let stack = trial_stack(truth, snr_db, k, trajectory, stack_seed)?;
    let spectral = SpectralStack::from_grids(&stack.frames)?;
    let wiener = match method {
        MethodSpec::Iterative { method: Method::Mle, .. } => None,
        _ => Some(fitted_wiener_weights(&spectral, stack.sigma2)?),
    };
    run_method(&spectral, wiener.as_ref(), &stack.true_shifts, method, template, stack_seed)
}
