//! Shift estimators under the common cost `E(τ) = Σ_ω w(ω)·|Σ_i z̃_i(ω) e^{iω·τ_i}|²`
//! with `w = 1` (MLE) or the Wiener filter (MAP and BMLE, which share the
//! cost), plus constrained alignment and latent-image reconstruction.

mod ccd;
mod config;
mod constrained;
mod cost;
mod latent;
mod noise;
mod pairwise;
mod peak;
mod shiftset;
mod stack;
mod vp;

pub use config::{EstimateOutcome, EstimatorConfig, Init, Method, Optimizer};
pub use constrained::{estimate_constrained, pair_count, solve_adjacent_system, PairwiseMeasurement};
pub use cost::{common_cost, cost_gradient};
pub use latent::reconstruct_latent;
pub use noise::{estimate_noise_variance, estimate_noise_variance_stack};
pub use pairwise::{pairwise_align, relative_shift, PairwiseAlignment};
pub use shiftset::{random_init, ShiftSet};
pub use stack::{CostWeights, SpectralStack, WeightKind};

use crate::error::{Error, Result};
use crate::spectral::PriorSpectrum;

/// MLE by cyclic coordinate descent (uniform weights).
pub fn estimate_mle_ccd(stack: &SpectralStack, cfg: &EstimatorConfig) -> Result<EstimateOutcome> {
    let w = CostWeights::identity(stack.bins());
    run(stack, &EstimatorConfig { optimizer: Optimizer::Ccd, ..*cfg }, &w)
}

/// MLE by variable projections (joint Newton ascent, uniform weights).
pub fn estimate_mle_vp(stack: &SpectralStack, cfg: &EstimatorConfig) -> Result<EstimateOutcome> {
    let w = CostWeights::identity(stack.bins());
    run(stack, &EstimatorConfig { optimizer: Optimizer::Vp, ..*cfg }, &w)
}

/// MAP / BMLE: the same optimizers as the MLE, with Wiener weights built
/// from `prior` for `K + 1` frames. `cfg.optimizer` selects CCD or VP.
pub fn estimate_map(stack: &SpectralStack, cfg: &EstimatorConfig, prior: &PriorSpectrum) -> Result<EstimateOutcome> {
    if prior.dims() != stack.dims() {
        return Err(Error::DimensionMismatch {
            expected: stack.dims(),
            found: prior.dims(),
        });
    }
    let w = CostWeights::wiener(prior, stack.len())?;
    run(stack, cfg, &w)
}

/// Dispatches on `cfg.method`; MAP requires a prior.
pub fn estimate(stack: &SpectralStack, cfg: &EstimatorConfig, prior: Option<&PriorSpectrum>) -> Result<EstimateOutcome> {
    match cfg.method {
        Method::Mle => run(stack, cfg, &CostWeights::identity(stack.bins())),
        Method::Map => {
            let prior = prior.ok_or_else(|| Error::invalid("MAP estimation needs a prior spectrum"))?;
            estimate_map(stack, cfg, prior)
        }
    }
}

/// Runs `cfg.optimizer` on the cost with arbitrary weights.
pub fn estimate_with_weights(stack: &SpectralStack, cfg: &EstimatorConfig, weights: &CostWeights) -> Result<EstimateOutcome> {
    run(stack, cfg, weights)
}

fn run(stack: &SpectralStack, cfg: &EstimatorConfig, w: &CostWeights) -> Result<EstimateOutcome> {
    cfg.validate()?;
    stack.check_weights(w)?;
    if stack.k() == 0 {
        return Err(Error::invalid("alignment needs at least two frames"));
    }
    let init = match cfg.init {
        Init::Pairwise => pairwise_align(stack, w, cfg.newton_iters)?.shifts,
        Init::Random => random_init(stack.k(), cfg.random_init_half_range, cfg.seed)?,
    };
    let outcome = match cfg.optimizer {
        Optimizer::Ccd => ccd::run(stack, w, init, cfg),
        Optimizer::Vp => vp::run(stack, w, init, cfg),
    }?;
    let (h, wd) = stack.dims();
    Ok(EstimateOutcome {
        shifts: outcome.shifts.canonical(h, wd),
        ..outcome
    })
}
