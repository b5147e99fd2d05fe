use super::transform::{FrequencyGrid, Spectrum};
use crate::error::{Error, Result};

/// Stationary Gaussian natural-image prior, `S_u(ω) = amplitude / ‖ω‖²`,
/// together with the observation noise variance.
///
/// The DC power diverges and is never stored: `power[0]` holds `0.0` and is
/// never read. Consumers go through [`PriorSpectrum::power_at`].
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpectrum {
    height: usize,
    width: usize,
    power: Vec<f64>,
    noise_variance: f64,
    amplitude: f64,
}

impl PriorSpectrum {
    pub fn natural(height: usize, width: usize, amplitude: f64, noise_variance: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::invalid(format!("prior amplitude must be > 0, got {amplitude}")));
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::invalid(format!(
                "noise variance must be > 0, got {noise_variance}"
            )));
        }
        let mut power: Vec<f64> = FrequencyGrid::new(height, width)
            .squared_norms()
            .into_iter()
            .map(|w2| if w2 > 0.0 { amplitude / w2 } else { 0.0 })
            .collect();
        power[0] = 0.0;
        Ok(Self {
            height,
            width,
            power,
            noise_variance,
            amplitude,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Power at row-major bin `index`; `None` at DC.
    pub fn power_at(&self, index: usize) -> Option<f64> {
        (index != 0).then(|| self.power[index])
    }
}

/// Scalar Wiener weight `S / (frames·S + σ²)`.
pub fn wiener_weight(power: f64, noise_variance: f64, frames: usize) -> f64 {
    power / (frames as f64 * power + noise_variance)
}

/// Per-bin Wiener filter for `frames = K + 1` observations. The DC bin takes
/// the `S → ∞` limit `1 / frames`.
pub fn wiener_filter(prior: &PriorSpectrum, frames: usize) -> Result<Vec<f64>> {
    if frames == 0 {
        return Err(Error::invalid("Wiener filter needs at least one frame"));
    }
    if !(prior.noise_variance > 0.0) {
        return Err(Error::invalid("noise variance must be > 0"));
    }
    let dc = 1.0 / frames as f64;
    Ok((0..prior.power.len())
        .map(|i| match prior.power_at(i) {
            Some(s) => wiener_weight(s, prior.noise_variance, frames),
            None => dc,
        })
        .collect())
}

/// Outcome of [`fit_prior_amplitude`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorFit {
    pub amplitude: f64,
    /// Set when the fit fell back to the lower clamp (degenerate or
    /// signal-free input).
    pub clamped: bool,
}

/// Least-squares fit of the prior scale α to the mean observed power:
/// minimizes `Σ_ω (mean|z̃(ω)|² − σ² − α/‖ω‖²)²` over non-DC bins.
///
/// The estimate is clamped to `α_min = 1e-8 × mean observed power` when it
/// falls below three standard errors of the pure-noise fit, so a stack with no
/// detectable signal lands on the clamp instead of a noise-driven value.
pub fn fit_prior_amplitude(stack: &[Spectrum], sigma2: f64) -> Result<PriorFit> {
    let first = stack
        .first()
        .ok_or_else(|| Error::invalid("prior fit needs at least one frame"))?;
    let dims = first.dims();
    if let Some(bad) = stack.iter().find(|s| s.dims() != dims) {
        return Err(Error::DimensionMismatch {
            expected: dims,
            found: bad.dims(),
        });
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("sigma2 must be >= 0, got {sigma2}")));
    }

    let frames = stack.len() as f64;
    let norms = first.frequencies().squared_norms();
    let mut sum_pg = 0.0;
    let mut sum_gg = 0.0;
    let mut sum_p = 0.0;
    for (i, &w2) in norms.iter().enumerate().skip(1) {
        let p = stack.iter().map(|s| s.coeffs()[i].norm_sqr()).sum::<f64>() / frames;
        let g = 1.0 / w2;
        sum_pg += (p - sigma2) * g;
        sum_gg += g * g;
        sum_p += p;
    }
    let mean_power = sum_p / (norms.len() - 1) as f64;
    let alpha_min = (1e-8 * mean_power).max(f64::MIN_POSITIVE);
    if mean_power <= 0.0 {
        return Ok(PriorFit {
            amplitude: alpha_min,
            clamped: true,
        });
    }

    let alpha = sum_pg / sum_gg;
    // Hermitian pairs are duplicates, hence the factor 2.
    let std_err = sigma2 * (2.0 / (frames * sum_gg)).sqrt();
    if alpha < alpha_min || alpha < 3.0 * std_err {
        Ok(PriorFit {
            amplitude: alpha_min,
            clamped: true,
        })
    } else {
        Ok(PriorFit {
            amplitude: alpha,
            clamped: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::transform::{forward_transform, Complex64};
    use super::super::PixelGrid;
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    #[test]
    fn dc_limit_and_equal_power() {
        let prior = PriorSpectrum::natural(6, 6, 1.0, 0.01).unwrap();
        let w = wiener_filter(&prior, 6).unwrap();
        assert!((w[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((wiener_weight(0.3, 0.3, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nyquist_value_matches_hand_arithmetic() {
        // bin (0, 3) of a 6-wide grid sits at ω = (−π, 0)
        let prior = PriorSpectrum::natural(6, 6, 1.0, 0.01).unwrap();
        let w = wiener_filter(&prior, 6).unwrap();
        let expected = (1.0 / (PI * PI)) / (6.0 / (PI * PI) + 0.01);
        assert!((w[3] - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_noise() {
        assert!(PriorSpectrum::natural(4, 4, 1.0, 0.0).is_err());
        assert!(PriorSpectrum::natural(4, 4, 1.0, -1.0).is_err());
        assert!(PriorSpectrum::natural(4, 4, 0.0, 1.0).is_err());
        let prior = PriorSpectrum::natural(4, 4, 1.0, 1.0).unwrap();
        assert!(wiener_filter(&prior, 0).is_err());
    }

    /// Spectrum with |ũ(ω)|² = c/‖ω‖² exactly and Hermitian-symmetric phases.
    fn power_law_spectrum(h: usize, w: usize, c: f64, seed: u64) -> Spectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let white = PixelGrid::from_fn(h, w, |_, _| noise.sample(&mut rng)).unwrap();
        let mut s = forward_transform(&white);
        let norms = s.frequencies().squared_norms();
        for (v, &w2) in s.coeffs_mut().iter_mut().zip(&norms) {
            if w2 == 0.0 {
                *v = Complex64::new(0.0, 0.0);
            } else if v.norm() > 0.0 {
                *v = *v / v.norm() * (c / w2).sqrt();
            }
        }
        s
    }

    #[test]
    fn recovers_known_amplitude_noiseless() {
        let s = power_law_spectrum(32, 32, 3.5, 1);
        let fit = fit_prior_amplitude(std::slice::from_ref(&s), 0.0).unwrap();
        assert!(!fit.clamped);
        assert!((fit.amplitude - 3.5).abs() / 3.5 < 0.01);
    }

    #[test]
    fn doubling_intensity_quadruples_amplitude() {
        let s = power_law_spectrum(32, 32, 1.0, 2);
        let mut doubled = s.clone();
        for c in doubled.coeffs_mut() {
            *c *= 2.0;
        }
        let a = fit_prior_amplitude(&[s], 0.0).unwrap().amplitude;
        let b = fit_prior_amplitude(&[doubled], 0.0).unwrap().amplitude;
        assert!((b / a - 4.0).abs() / 4.0 < 0.01);
    }

    #[test]
    fn pure_noise_clamps() {
        let sigma2: f64 = 0.5;
        let normal = Normal::new(0.0, sigma2.sqrt()).unwrap();
        let mut clamped = 0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let stack: Vec<_> = (0..6)
                .map(|_| forward_transform(&PixelGrid::from_fn(32, 32, |_, _| normal.sample(&mut rng)).unwrap()))
                .collect();
            let fit = fit_prior_amplitude(&stack, sigma2).unwrap();
            if fit.clamped {
                clamped += 1;
            }
        }
        assert!(clamped >= 19, "only {clamped}/20 pure-noise fits clamped");
    }

    #[test]
    fn all_zero_clamps() {
        let z = Spectrum::zeros(8, 8);
        let fit = fit_prior_amplitude(&[z], 1.0).unwrap();
        assert!(fit.clamped && fit.amplitude > 0.0);
    }

    proptest! {
        #[test]
        fn wiener_bounds_and_monotonicity(amp in 1e-6..1e6f64, sigma2 in 1e-6..1e3f64, frames in 1usize..20) {
            let prior = PriorSpectrum::natural(12, 10, amp, sigma2).unwrap();
            let w = wiener_filter(&prior, frames).unwrap();
            let cap = 1.0 / frames as f64;
            for &v in &w {
                prop_assert!(v > 0.0 && v <= cap * (1.0 + 1e-15));
            }
            // along the positive ωx ray of row 0
            for kx in 1..5 {
                prop_assert!(w[kx + 1] <= w[kx]);
            }
        }
    }
}
