use crate::error::{Error, Result};
use crate::spectral::{forward_transform, PixelGrid};

/// `Σ_ω ‖ω‖² |ũ(ω)|²`, the total energy of the image gradient.
pub fn gradient_energy(truth: &PixelGrid) -> f64 {
    let spectrum = forward_transform(truth);
    let norms = spectrum.frequencies().squared_norms();
    let g: f64 = spectrum
        .coeffs()
        .iter()
        .zip(&norms)
        .map(|(c, w2)| w2 * c.norm_sqr())
        .sum();
    // Round-off leaves ~1e-32·N relative energy outside DC for a constant grid.
    if g <= 1e-20 * truth.energy() {
        0.0
    } else {
        g
    }
}

/// Gradient-energy SNR in dB: `10·log10(Σ‖ω‖²|ũ|² / (N·σ²))`.
/// A constant image yields `−∞`.
pub fn measure_snr_db(truth: &PixelGrid, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("sigma2 must be > 0, got {sigma2}")));
    }
    let g = gradient_energy(truth);
    if g == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (g / (truth.len() as f64 * sigma2)).log10())
}

/// Noise variance that puts `truth` at `target_db`.
pub fn sigma2_for_snr_db(truth: &PixelGrid, target_db: f64) -> Result<f64> {
    if !target_db.is_finite() {
        return Err(Error::invalid(format!("target SNR must be finite, got {target_db}")));
    }
    let g = gradient_energy(truth);
    if g == 0.0 {
        return Err(Error::NoSolution("constant image has zero gradient energy".into()));
    }
    Ok(g / (truth.len() as f64 * 10f64.powf(target_db / 10.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ramp_like() -> PixelGrid {
        PixelGrid::from_fn(16, 16, |r, c| ((r * 3 + c * 7) % 11) as f64).unwrap()
    }

    #[test]
    fn constant_image_is_minus_infinity() {
        let g = PixelGrid::new(8, 8, vec![3.0; 64]).unwrap();
        assert_eq!(measure_snr_db(&g, 1.0).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(sigma2_for_snr_db(&g, 0.0), Err(Error::NoSolution(_))));
    }

    #[test]
    fn tenfold_noise_is_ten_db() {
        let g = ramp_like();
        let a = measure_snr_db(&g, 0.1).unwrap();
        let b = measure_snr_db(&g, 1.0).unwrap();
        assert!((a - b - 10.0).abs() < 1e-12);
        assert!(measure_snr_db(&g, 0.0).is_err());
    }

    #[test]
    fn sinusoid_gradient_energy_matches_finite_differences() {
        let (h, w) = (32, 64);
        let wx = 2.0 * PI / w as f64;
        let g = PixelGrid::from_fn(h, w, |_, c| (wx * c as f64).sin()).unwrap();
        let fourier = gradient_energy(&g);
        assert!((fourier - wx * wx * (h * w) as f64 / 2.0).abs() / fourier < 1e-10);
        // central differences on the periodic grid
        let mut spatial = 0.0;
        for r in 0..h as isize {
            for c in 0..w as isize {
                let dx = (g.get_wrapped(r, c + 1) - g.get_wrapped(r, c - 1)) / 2.0;
                let dy = (g.get_wrapped(r + 1, c) - g.get_wrapped(r - 1, c)) / 2.0;
                spatial += dx * dx + dy * dy;
            }
        }
        assert!((spatial - fourier).abs() / fourier < 0.02);
    }

    #[test]
    fn inverse_round_trips() {
        let g = ramp_like();
        for db in [-20.0, -10.0, 0.0, 30.0] {
            let s2 = sigma2_for_snr_db(&g, db).unwrap();
            assert!((measure_snr_db(&g, s2).unwrap() - db).abs() < 1e-9);
        }
        let a = sigma2_for_snr_db(&g, -10.0).unwrap().sqrt();
        let b = sigma2_for_snr_db(&g, -20.0).unwrap().sqrt();
        assert!((b / a - 10f64.sqrt()).abs() < 1e-9);
        let s30 = sigma2_for_snr_db(&g, 30.0).unwrap();
        assert!((s30 - gradient_energy(&g) / (g.len() as f64 * 1e3)).abs() <= 1e-15 * s30);
    }

    #[test]
    fn snr_strictly_decreasing_in_noise() {
        let g = ramp_like();
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let v = measure_snr_db(&g, 0.05 * k as f64).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
