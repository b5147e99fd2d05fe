use super::{CostWeights, ShiftSet, SpectralStack};
use crate::error::{Error, Result};
use crate::spectral::shift::phase_tables;
use crate::spectral::{Complex64, Shift2D, Spectrum};

pub(crate) fn check_shifts(stack: &SpectralStack, shifts: &ShiftSet) -> Result<()> {
    if shifts.len() != stack.len() {
        return Err(Error::invalid(format!(
            "{} shifts for {} frames",
            shifts.len(),
            stack.len()
        )));
    }
    Ok(())
}

/// `z̃_i(ω)·e^{iω·τ}` accumulated into `acc` with factor `scale`.
pub(crate) fn accumulate_unshifted(acc: &mut [Complex64], frame: &Spectrum, stack: &SpectralStack, t: Shift2D, scale: f64) {
    let (px, py) = phase_tables(stack.freq(), t, 1.0);
    let width = px.len();
    for ((row, out), src) in acc
        .chunks_mut(width)
        .enumerate()
        .zip(frame.coeffs().chunks(width))
    {
        let ry = py[row] * scale;
        for ((o, &z), &cx) in out.iter_mut().zip(src).zip(&px) {
            *o += z * cx * ry;
        }
    }
}

/// `m̃(ω) = Σ_i z̃_i(ω) e^{iω·τ_i}`: the sum of the re-aligned frames.
pub(crate) fn aligned_sum(stack: &SpectralStack, shifts: &[Shift2D]) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); stack.bins()];
    for (frame, &t) in stack.frames().iter().zip(shifts) {
        accumulate_unshifted(&mut acc, frame, stack, t, 1.0);
    }
    acc
}

pub(crate) fn weighted_energy(sum: &[Complex64], w: &CostWeights) -> f64 {
    sum.iter().zip(w.values()).map(|(m, wv)| wv * m.norm_sqr()).sum()
}

/// `E(τ) = Σ_ω w(ω)·|Σ_i z̃_i(ω) e^{iω·τ_i}|²`.
pub fn common_cost(stack: &SpectralStack, shifts: &ShiftSet, w: &CostWeights) -> Result<f64> {
    check_shifts(stack, shifts)?;
    stack.check_weights(w)?;
    Ok(weighted_energy(&aligned_sum(stack, shifts), w))
}

/// `∂E/∂τ_i = 2·Re Σ_ω w(ω)·(iω)·z̃_i(ω) e^{iω·τ_i}·conj(m̃(ω))` for every
/// frame, entry 0 included.
pub fn cost_gradient(stack: &SpectralStack, shifts: &ShiftSet, w: &CostWeights) -> Result<Vec<Shift2D>> {
    check_shifts(stack, shifts)?;
    stack.check_weights(w)?;
    Ok(gradient_with_sum(stack, shifts, w, &aligned_sum(stack, shifts)))
}

pub(crate) fn gradient_with_sum(stack: &SpectralStack, shifts: &[Shift2D], w: &CostWeights, sum: &[Complex64]) -> Vec<Shift2D> {
    let freq = stack.freq();
    let width = freq.width();
    stack
        .frames()
        .iter()
        .zip(shifts)
        .map(|(frame, &t)| {
            let (px, py) = phase_tables(freq, t, 1.0);
            let (mut gx, mut gy) = (0.0, 0.0);
            for (idx, ((z, m), wv)) in frame.coeffs().iter().zip(sum).zip(w.values()).enumerate() {
                let (row, col) = (idx / width, idx % width);
                // Re(iω·a) = −ω·Im(a)
                let a = z * px[col] * py[row] * m.conj();
                let im = wv * a.im;
                gx -= freq.omega_x[col] * im;
                gy -= freq.omega_y[row] * im;
            }
            Shift2D::new(2.0 * gx, 2.0 * gy)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{apply_shift, forward_transform, PixelGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_grid(h: usize, w: usize, rng: &mut ChaCha8Rng) -> PixelGrid {
        PixelGrid::from_fn(h, w, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn coherent_identical_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_grid(8, 8, &mut rng);
        let k = 4;
        let stack = SpectralStack::from_grids(&vec![g.clone(); k + 1]).unwrap();
        let w = CostWeights::identity(64);
        let e = common_cost(&stack, &ShiftSet::zeros(k), &w).unwrap();
        let expected = ((k + 1) * (k + 1)) as f64 * g.energy();
        assert!((e - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn single_frame_cost_ignores_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let stack = SpectralStack::from_grids(&[random_grid(8, 8, &mut rng)]).unwrap();
        let w = CostWeights::custom((0..64).map(|i| i as f64 * 0.1).collect()).unwrap();
        let a = common_cost(&stack, &ShiftSet::zeros(0), &w).unwrap();
        // only frame 0, pinned; the cost is Σ w|z̃_0|² regardless
        let direct: f64 = stack.frames()[0].coeffs().iter().zip(w.values()).map(|(c, wv)| wv * c.norm_sqr()).sum();
        assert!((a - direct).abs() < 1e-12 * direct);
    }

    /// Spatial oracle: unshift each frame with an explicitly summed periodic
    /// sinc kernel (O(N²), no FFT), add, and take the squared norm.
    #[test]
    fn matches_spatial_oracle() {
        let (h, w) = (8, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frames = [random_grid(h, w, &mut rng), random_grid(h, w, &mut rng)];
        let t1 = Shift2D::new(0.63, -1.27);
        let stack = SpectralStack::from_grids(&frames).unwrap();
        let shifts = ShiftSet::new(vec![Shift2D::ZERO, t1]).unwrap();
        let e = common_cost(&stack, &shifts, &CostWeights::identity(h * w)).unwrap();

        // kernel value D(dy, dx) = (1/N) Σ_k e^{i ω_k·(d)}, frequencies in DFT ordering
        let freqs = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|k| if 2 * k < n { 2.0 * PI * k as f64 / n as f64 } else { 2.0 * PI * (k as f64 - n as f64) / n as f64 })
                .collect()
        };
        let (fy, fx) = (freqs(h), freqs(w));
        let kernel = |dy: f64, dx: f64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for &wy in &fy {
                for &wx in &fx {
                    acc += Complex64::from_polar(1.0, wy * dy + wx * dx);
                }
            }
            acc / (h * w) as f64
        };
        let mut total = vec![Complex64::new(0.0, 0.0); h * w];
        for (frame, t) in frames.iter().zip([Shift2D::ZERO, t1]) {
            for y in 0..h {
                for x in 0..w {
                    let mut v = Complex64::new(0.0, 0.0);
                    for sy in 0..h {
                        for sx in 0..w {
                            // unshift: value at x is z(x + τ)
                            v += frame.get(sy, sx) * kernel(y as f64 + t.ty - sy as f64, x as f64 + t.tx - sx as f64);
                        }
                    }
                    total[y * w + x] += v;
                }
            }
        }
        let oracle: f64 = total.iter().map(|c| c.norm_sqr()).sum();
        assert!((e - oracle).abs() < 1e-10 * oracle, "{e} vs {oracle}");
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (h, w, k) = (16, 16, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base = forward_transform(&random_grid(h, w, &mut rng));
        let frames: Vec<_> = (0..=k)
            .map(|i| apply_shift(&base, Shift2D::new(0.4 * i as f64, -0.3 * i as f64)))
            .collect();
        let stack = SpectralStack::from_spectra(frames).unwrap();
        let shifts = ShiftSet::new(vec![
            Shift2D::ZERO,
            Shift2D::new(0.2, 0.1),
            Shift2D::new(1.1, -0.2),
            Shift2D::new(0.9, -1.3),
        ])
        .unwrap();
        let wts = CostWeights::custom((0..h * w).map(|i| 1.0 / (1.0 + (i % 7) as f64)).collect()).unwrap();
        let grad = cost_gradient(&stack, &shifts, &wts).unwrap();
        let step = 1e-5;
        for i in 1..=k {
            for axis in 0..2 {
                let bump = |d: f64| {
                    let t = shifts[i];
                    let moved = if axis == 0 { Shift2D::new(t.tx + d, t.ty) } else { Shift2D::new(t.tx, t.ty + d) };
                    common_cost(&stack, &shifts.with(i, moved), &wts).unwrap()
                };
                let fd = (bump(step) - bump(-step)) / (2.0 * step);
                let an = if axis == 0 { grad[i].tx } else { grad[i].ty };
                assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3 * grad.iter().map(|g| g.norm()).fold(0.0, f64::max)), "frame {i} axis {axis}: {an} vs {fd}");
            }
        }
    }
}
