use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::snr::measure_snr_db;
use crate::error::{Error, Result};
use crate::estimators::ShiftSet;
use crate::seed;
use crate::spectral::{apply_shift, forward_transform, PixelGrid, Shift2D};

/// Frames generated from a known truth and known shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStack {
    pub truth: PixelGrid,
    /// `K + 1` frames; frame 0 is the unshifted truth plus noise.
    pub frames: Vec<PixelGrid>,
    pub true_shifts: ShiftSet,
    pub sigma2: f64,
    /// Gradient-energy SNR of the truth at `sigma2`; `+∞` when noiseless.
    pub snr_db: f64,
}

impl SyntheticStack {
    pub fn k(&self) -> usize {
        self.frames.len() - 1
    }
}

/// Warps `truth` by every shift and adds i.i.d. `Normal(0, sigma2)` noise.
///
/// Frame `i` draws its noise from its own stream derived from `(seed, i)`, so
/// a stack with fewer frames is a prefix of one with more.
pub fn make_stack(truth: &PixelGrid, shifts: &ShiftSet, sigma2: f64, seed: u64) -> Result<SyntheticStack> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("sigma2 must be >= 0, got {sigma2}")));
    }
    if let Some(bad) = shifts.iter().find(|t| !t.is_finite()) {
        return Err(Error::invalid(format!("non-finite shift {bad:?}")));
    }
    let (h, w) = truth.dims();
    let spectrum = forward_transform(truth);
    let noise = (sigma2 > 0.0)
        .then(|| Normal::new(0.0, sigma2.sqrt()))
        .transpose()
        .map_err(|e| Error::invalid(e.to_string()))?;

    let frames = shifts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let warped = match integer_shift(t) {
                Some((dx, dy)) => roll(truth, dx, dy),
                None => apply_shift(&spectrum, t).to_real_grid(),
            };
            match &noise {
                None => warped,
                Some(dist) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed, &[i as u64]));
                    let samples = warped
                        .samples()
                        .iter()
                        .map(|v| v + dist.sample(&mut rng))
                        .collect();
                    PixelGrid::from_parts_unchecked(h, w, samples)
                }
            }
        })
        .collect();

    let snr_db = if sigma2 > 0.0 {
        measure_snr_db(truth, sigma2)?
    } else {
        f64::INFINITY
    };
    Ok(SyntheticStack {
        truth: truth.clone(),
        frames,
        true_shifts: shifts.clone(),
        sigma2,
        snr_db,
    })
}

fn integer_shift(t: Shift2D) -> Option<(isize, isize)> {
    (t.tx.fract() == 0.0 && t.ty.fract() == 0.0 && t.max_abs() < 1e9).then(|| (t.tx as isize, t.ty as isize))
}

/// Exact circular roll: output(r, c) = input(r − dy, c − dx).
fn roll(grid: &PixelGrid, dx: isize, dy: isize) -> PixelGrid {
    let (h, w) = grid.dims();
    let mut samples = Vec::with_capacity(h * w);
    for r in 0..h as isize {
        for c in 0..w as isize {
            samples.push(grid.get_wrapped(r - dy, c - dx));
        }
    }
    PixelGrid::from_parts_unchecked(h, w, samples)
}
