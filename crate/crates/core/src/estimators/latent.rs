use super::cost::{aligned_sum, check_shifts};
use super::{CostWeights, ShiftSet, SpectralStack, WeightKind};
use crate::error::Result;
use crate::spectral::{PixelGrid, Spectrum};

/// Latent image from aligned frames: the plain mean for identity weights,
/// otherwise `IDFT(w(ω)·Σ_i z̃_i(ω) e^{iω·τ_i})`, which is the mean again in
/// the flat-prior limit `w → 1/(K+1)`.
pub fn reconstruct_latent(stack: &SpectralStack, shifts: &ShiftSet, w: &CostWeights) -> Result<PixelGrid> {
    check_shifts(stack, shifts)?;
    stack.check_weights(w)?;
    let mut sum = aligned_sum(stack, shifts);
    match w.kind() {
        WeightKind::Identity => {
            let scale = 1.0 / stack.len() as f64;
            sum.iter_mut().for_each(|m| *m *= scale);
        }
        _ => sum.iter_mut().zip(w.values()).for_each(|(m, wv)| *m *= *wv),
    }
    let (h, wd) = stack.dims();
    Ok(Spectrum::from_parts_unchecked(h, wd, sum).to_real_grid())
}
