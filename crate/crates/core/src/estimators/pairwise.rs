use super::peak::correlation_peak;
use super::{CostWeights, ShiftSet, SpectralStack};
use crate::error::{Error, Result};
use crate::spectral::{Complex64, Shift2D, Spectrum};

/// Every frame aligned independently to frame 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseAlignment {
    pub shifts: ShiftSet,
    /// Frames with no energy; their shift is reported as zero.
    pub degenerate_frames: Vec<usize>,
}

/// Shift of `moving` relative to `reference`: the maximizer of the weighted
/// cross-correlation `Re Σ_ω w(ω)·moving(ω)·conj(reference(ω))·e^{iω·t}`.
pub fn relative_shift(moving: &Spectrum, reference: &Spectrum, w: &CostWeights, newton_iters: usize) -> Result<Shift2D> {
    if moving.dims() != reference.dims() {
        return Err(Error::DimensionMismatch {
            expected: reference.dims(),
            found: moving.dims(),
        });
    }
    if w.values().len() != moving.len() {
        return Err(Error::invalid("weights do not match spectrum size"));
    }
    let cross: Vec<Complex64> = moving
        .coeffs()
        .iter()
        .zip(reference.coeffs())
        .zip(w.values())
        .map(|((a, b), wv)| a * b.conj() * *wv)
        .collect();
    Ok(correlation_peak(&cross, &moving.frequencies(), newton_iters).shift)
}

fn has_energy(s: &Spectrum) -> bool {
    s.coeffs().iter().skip(1).any(|c| c.norm_sqr() > 0.0)
}

/// Aligns each frame `i >= 1` to frame 0 by weighted cross-correlation.
pub fn pairwise_align(stack: &SpectralStack, w: &CostWeights, newton_iters: usize) -> Result<PairwiseAlignment> {
    stack.check_weights(w)?;
    if stack.k() == 0 {
        return Err(Error::invalid("pairwise alignment needs at least two frames"));
    }
    let reference = &stack.frames()[0];
    let reference_ok = has_energy(reference);
    let mut degenerate_frames = Vec::new();
    if !reference_ok {
        degenerate_frames.push(0);
    }
    let mut shifts = vec![Shift2D::ZERO];
    for (i, frame) in stack.frames().iter().enumerate().skip(1) {
        if !reference_ok || !has_energy(frame) {
            if reference_ok {
                degenerate_frames.push(i);
            }
            log::warn!("frame {i} has no usable energy for pairwise alignment; using zero shift");
            shifts.push(Shift2D::ZERO);
            continue;
        }
        shifts.push(relative_shift(frame, reference, w, newton_iters)?);
    }
    Ok(PairwiseAlignment {
        shifts: ShiftSet::new(shifts)?,
        degenerate_frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PixelGrid;
    use crate::synth::{dead_leaves, make_stack, prepare_truth};

    fn truth() -> PixelGrid {
        prepare_truth(&dead_leaves(32, 32, 8).unwrap()).unwrap()
    }

    /// Dense 1/64-px grid search of the weighted correlation followed by the
    /// same Newton polish, evaluated independently of the FFT peak finder.
    fn grid_search(moving: &Spectrum, reference: &Spectrum, center: Shift2D) -> Shift2D {
        let freq = moving.frequencies();
        let eval = |t: Shift2D| -> f64 {
            let mut acc = 0.0;
            for (idx, (a, b)) in moving.coeffs().iter().zip(reference.coeffs()).enumerate() {
                let (r, c) = (idx / freq.width(), idx % freq.width());
                let ph = freq.omega_x[c] * t.tx + freq.omega_y[r] * t.ty;
                acc += (a * b.conj() * Complex64::from_polar(1.0, ph)).re;
            }
            acc
        };
        let mut best = (center, f64::NEG_INFINITY);
        for iy in -64..=64 {
            for ix in -64..=64 {
                let t = Shift2D::new(center.tx + ix as f64 / 64.0, center.ty + iy as f64 / 64.0);
                let v = eval(t);
                if v > best.1 {
                    best = (t, v);
                }
            }
        }
        best.0
    }

    #[test]
    fn noiseless_pair_recovers_fractional_shift() {
        let t = truth();
        let true_shift = Shift2D::new(2.5, -1.25);
        let shifts = ShiftSet::new(vec![Shift2D::ZERO, true_shift]).unwrap();
        let s = make_stack(&t, &shifts, 0.0, 0).unwrap();
        let stack = SpectralStack::from_grids(&s.frames).unwrap();
        let w = CostWeights::identity(stack.bins());
        let est = pairwise_align(&stack, &w, 10).unwrap();
        assert!((est.shifts[1] - true_shift).max_abs() < 1e-6, "{:?}", est.shifts[1]);
        let coarse = grid_search(&stack.frames()[1], &stack.frames()[0], Shift2D::new(2.0, -1.0));
        assert!((coarse - true_shift).max_abs() <= 1.0 / 64.0);
    }

    #[test]
    fn identical_frame_is_zero() {
        let t = truth();
        let stack = SpectralStack::from_grids(&[t.clone(), t]).unwrap();
        let est = pairwise_align(&stack, &CostWeights::identity(stack.bins()), 10).unwrap();
        assert_eq!(est.shifts[1], Shift2D::ZERO);
    }

    #[test]
    fn consistency_as_noise_vanishes() {
        let t = truth();
        let shifts = ShiftSet::zeros(1);
        let mut last = f64::INFINITY;
        for (j, sigma2) in [1e-2, 1e-4, 1e-6, 1e-8].into_iter().enumerate() {
            let mse: f64 = (0..10)
                .map(|trial| {
                    let s = make_stack(&t, &shifts, sigma2, 100 * j as u64 + trial).unwrap();
                    let stack = SpectralStack::from_grids(&s.frames).unwrap();
                    let est = pairwise_align(&stack, &CostWeights::identity(stack.bins()), 10).unwrap();
                    est.shifts[1].norm_sqr()
                })
                .sum::<f64>()
                / 10.0;
            // σ² drops 100× per step; the MSE must follow at least 10×
            assert!(mse < 0.1 * last, "sigma2 {sigma2}: {mse} vs {last}");
            last = mse;
        }
        assert!(last < 1e-6, "{last}");
    }

    #[test]
    fn zero_frame_is_flagged() {
        let t = truth();
        let stack = SpectralStack::from_grids(&[t, PixelGrid::zeros(32, 32).unwrap()]).unwrap();
        let est = pairwise_align(&stack, &CostWeights::identity(stack.bins()), 10).unwrap();
        assert_eq!(est.shifts[1], Shift2D::ZERO);
        assert_eq!(est.degenerate_frames, vec![1]);
    }
}
