use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{forward_transform, Complex64, PixelGrid, Spectrum};

/// Fraction of the Nyquist radius kept by [`band_limit`].
pub const BAND_LIMIT_FRACTION: f64 = 0.9;

/// Periodic part of the periodic-plus-smooth decomposition: subtracts the
/// smooth image whose Laplacian matches the border discontinuities, which
/// removes the wrap-around edges a raw photograph has under periodic
/// extension.
pub fn periodic_component(grid: &PixelGrid) -> Result<PixelGrid> {
    let (h, w) = grid.dims();
    let mut boundary = vec![0.0; h * w];
    for c in 0..w {
        let d = grid.get(h - 1, c) - grid.get(0, c);
        boundary[c] += d;
        boundary[(h - 1) * w + c] -= d;
    }
    for r in 0..h {
        let d = grid.get(r, w - 1) - grid.get(r, 0);
        boundary[r * w] += d;
        boundary[r * w + w - 1] -= d;
    }
    let mut smooth = forward_transform(&PixelGrid::new(h, w, boundary)?);
    for (idx, c) in smooth.coeffs_mut().iter_mut().enumerate() {
        let (q, r) = (idx / w, idx % w);
        let denom = 2.0 * (2.0 * PI * q as f64 / h as f64).cos() + 2.0 * (2.0 * PI * r as f64 / w as f64).cos() - 4.0;
        *c = if idx == 0 { Complex64::new(0.0, 0.0) } else { *c / denom };
    }
    let smooth = smooth.to_real_grid();
    PixelGrid::new(
        h,
        w,
        grid.samples().iter().zip(smooth.samples()).map(|(u, s)| u - s).collect(),
    )
}

/// Zeroes every bin with `‖ω‖ > fraction·π`, Nyquist rows and columns included.
pub fn band_limit(spectrum: &mut Spectrum, fraction: f64) {
    let cutoff = (fraction * PI).powi(2);
    let norms = spectrum.frequencies().squared_norms();
    for (c, w2) in spectrum.coeffs_mut().iter_mut().zip(norms) {
        if w2 > cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Turns an arbitrary image into a truth for which the periodic Shannon
/// shift model holds exactly: periodic component, top 10% of radial
/// frequencies removed, zero mean.
pub fn prepare_truth(grid: &PixelGrid) -> Result<PixelGrid> {
    let periodic = periodic_component(grid)?;
    let mut spectrum = forward_transform(&periodic);
    band_limit(&mut spectrum, BAND_LIMIT_FRACTION);
    spectrum.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    let prepared = spectrum.to_real_grid();
    if prepared.max_abs() == 0.0 {
        return Err(Error::invalid("prepared truth is identically zero"));
    }
    Ok(prepared)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The removed smooth part must satisfy `Δ_per s = v`, with `v` the
    /// border-jump image, checked with an explicit 5-point stencil.
    #[test]
    fn smooth_part_solves_boundary_poisson_problem() {
        let (h, w) = (12, 10);
        let g = PixelGrid::from_fn(h, w, |r, c| ((r * 7 + c * 3) % 5) as f64 + 0.1 * (r * c) as f64).unwrap();
        let p = periodic_component(&g).unwrap();
        let s = |r: isize, c: isize| g.get_wrapped(r, c) - p.get_wrapped(r, c);
        for r in 0..h as isize {
            for c in 0..w as isize {
                let lap = s(r - 1, c) + s(r + 1, c) + s(r, c - 1) + s(r, c + 1) - 4.0 * s(r, c);
                let mut v = 0.0;
                let (ru, cu) = (r as usize, c as usize);
                if ru == 0 {
                    v += g.get(h - 1, cu) - g.get(0, cu);
                }
                if ru == h - 1 {
                    v -= g.get(h - 1, cu) - g.get(0, cu);
                }
                if cu == 0 {
                    v += g.get(ru, w - 1) - g.get(ru, 0);
                }
                if cu == w - 1 {
                    v -= g.get(ru, w - 1) - g.get(ru, 0);
                }
                assert!((lap - v).abs() < 1e-10, "({r}, {c}): {lap} vs {v}");
            }
        }
    }

    #[test]
    fn constant_image_is_unchanged() {
        let g = PixelGrid::from_fn(9, 11, |_, _| 2.5).unwrap();
        assert!(periodic_component(&g).unwrap().max_abs_diff(&g) < 1e-12);
    }

    #[test]
    fn ramp_loses_its_wraparound_jump() {
        let g = PixelGrid::from_fn(16, 16, |_, c| c as f64).unwrap();
        let p = periodic_component(&g).unwrap();
        let jump_before = (g.get(5, 15) - g.get(5, 0)).abs();
        let jump_after = (p.get(5, 15) - p.get(5, 0)).abs();
        assert!(jump_after < 0.2 * jump_before, "{jump_after} vs {jump_before}");
    }

    #[test]
    fn prepared_truth_is_band_limited_and_zero_mean() {
        let g = PixelGrid::from_fn(20, 20, |r, c| ((r * 7 + c * 13) % 5) as f64).unwrap();
        let p = prepare_truth(&g).unwrap();
        assert!(p.mean().abs() < 1e-12);
        let s = forward_transform(&p);
        let norms = s.frequencies().squared_norms();
        for (c, w2) in s.coeffs().iter().zip(norms) {
            if w2 > (BAND_LIMIT_FRACTION * PI).powi(2) {
                assert!(c.norm() < 1e-12);
            }
        }
    }
}
