use std::ops::{Add, Neg, Sub};

use super::grid::PixelGrid;
use super::transform::{forward_transform, Complex64, FrequencyGrid, Spectrum};
use crate::error::{Error, Result};

/// A 2D translation in pixels: `tx` along columns, `ty` along rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Shift2D {
    pub tx: f64,
    pub ty: f64,
}

impl Shift2D {
    pub const ZERO: Shift2D = Shift2D { tx: 0.0, ty: 0.0 };

    pub const fn new(tx: f64, ty: f64) -> Self {
        Self { tx, ty }
    }

    pub fn checked(tx: f64, ty: f64) -> Result<Self> {
        if tx.is_finite() && ty.is_finite() {
            Ok(Self { tx, ty })
        } else {
            Err(Error::invalid(format!("non-finite shift ({tx}, {ty})")))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tx.is_finite() && self.ty.is_finite()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.tx * self.tx + self.ty * self.ty
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.tx.abs().max(self.ty.abs())
    }

    /// Canonical representative of the periodic equivalence class:
    /// `tx ∈ (−W/2, W/2]`, `ty ∈ (−H/2, H/2]`.
    pub fn canonical(&self, height: usize, width: usize) -> Self {
        Self {
            tx: wrap_half_open(self.tx, width as f64),
            ty: wrap_half_open(self.ty, height as f64),
        }
    }
}

fn wrap_half_open(v: f64, period: f64) -> f64 {
    let r = v.rem_euclid(period);
    if r > period / 2.0 {
        r - period
    } else {
        r
    }
}

impl Add for Shift2D {
    type Output = Shift2D;
    fn add(self, rhs: Shift2D) -> Shift2D {
        Shift2D::new(self.tx + rhs.tx, self.ty + rhs.ty)
    }
}

impl Sub for Shift2D {
    type Output = Shift2D;
    fn sub(self, rhs: Shift2D) -> Shift2D {
        Shift2D::new(self.tx - rhs.tx, self.ty - rhs.ty)
    }
}

impl Neg for Shift2D {
    type Output = Shift2D;
    fn neg(self) -> Shift2D {
        Shift2D::new(-self.tx, -self.ty)
    }
}

/// Separable phase tables `e^{sign·i ωx tx}` (per column bin) and
/// `e^{sign·i ωy ty}` (per row bin).
pub(crate) fn phase_tables(freq: &FrequencyGrid, t: Shift2D, sign: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let px = freq
        .omega_x
        .iter()
        .map(|&w| Complex64::from_polar(1.0, sign * w * t.tx))
        .collect();
    let py = freq
        .omega_y
        .iter()
        .map(|&w| Complex64::from_polar(1.0, sign * w * t.ty))
        .collect();
    (px, py)
}

/// Multiplies `coeffs` in place by `e^{sign·i ω·t}`.
pub(crate) fn modulate_in_place(coeffs: &mut [Complex64], freq: &FrequencyGrid, t: Shift2D, sign: f64) {
    let (px, py) = phase_tables(freq, t, sign);
    let width = px.len();
    for (row, chunk) in coeffs.chunks_mut(width).enumerate() {
        let ry = py[row];
        for (c, &cx) in chunk.iter_mut().zip(&px) {
            *c *= cx * ry;
        }
    }
}

/// Exact band-limited translation: `coeff(ω) · e^{−i ω·t}`. A spectrum of
/// `u(x)` becomes the spectrum of `u(x − t)`.
///
/// The phase has unit modulus at every bin, Nyquist included, so the
/// operator is unitary and forms a group. For real images the Nyquist bins
/// pick up an imaginary residue under fractional shifts; [`Spectrum::to_real_grid`]
/// projects it away, which is the same as using `cos(ω t)` there.
pub fn apply_shift(spectrum: &Spectrum, t: Shift2D) -> Spectrum {
    let mut out = spectrum.clone();
    modulate_in_place(out.coeffs_mut(), &spectrum.frequencies(), t, -1.0);
    out
}

/// Adjoint of [`apply_shift`], i.e. the shift by `−t`.
pub fn adjoint_unshift(spectrum: &Spectrum, t: Shift2D) -> Spectrum {
    apply_shift(spectrum, -t)
}

/// Shifts a real grid by `t` with the periodic Shannon interpolator.
pub fn shift_grid(grid: &PixelGrid, t: Shift2D) -> PixelGrid {
    apply_shift(&forward_transform(grid), t).to_real_grid()
}

#[cfg(test)]
mod tests {
    use super::super::transform::inverse_transform;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spectrum(h: usize, w: usize, seed: u64) -> Spectrum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..h * w)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Spectrum::new(h, w, coeffs).unwrap()
    }

    #[test]
    fn zero_shift_is_identity() {
        let s = random_spectrum(8, 8, 1);
        assert_eq!(apply_shift(&s, Shift2D::ZERO), s);
        assert_eq!(adjoint_unshift(&s, Shift2D::ZERO), s);
    }

    #[test]
    fn integer_shift_rolls_impulse() {
        let mut samples = vec![0.0; 16];
        samples[0] = 1.0;
        let g = PixelGrid::new(4, 4, samples).unwrap();
        let moved = shift_grid(&g, Shift2D::new(1.0, 0.0));
        for r in 0..4 {
            for c in 0..4 {
                let want = if (r, c) == (0, 1) { 1.0 } else { 0.0 };
                assert!((moved.get(r, c) - want).abs() < 1e-12, "({r},{c})");
            }
        }
        let wrapped = shift_grid(&g, Shift2D::new(0.0, -1.0));
        assert!((wrapped.get(3, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fractional_shift_and_inverse_cancel() {
        let s = random_spectrum(8, 8, 2);
        let t = Shift2D::new(0.37, -1.12);
        let back = apply_shift(&apply_shift(&s, t), Shift2D::new(-0.37, 1.12));
        assert!(back.max_abs_diff(&s) < 1e-12);
        let back2 = apply_shift(&adjoint_unshift(&s, t), t);
        assert!(back2.max_abs_diff(&s) < 1e-12);
    }

    #[test]
    fn adjoint_identity() {
        for seed in 0..10 {
            let a = random_spectrum(8, 8, 100 + seed);
            let b = random_spectrum(8, 8, 200 + seed);
            let t = Shift2D::new(0.3 * seed as f64 - 1.1, 0.77 - 0.2 * seed as f64);
            let lhs = apply_shift(&a, t).inner(&b);
            let rhs = a.inner(&adjoint_unshift(&b, t));
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn real_grid_stays_real_under_fractional_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = PixelGrid::from_fn(8, 6, |_, _| rng.random_range(-1.0..1.0)).unwrap();
        let shifted = apply_shift(&forward_transform(&g), Shift2D::new(0.5, 0.25));
        // Only the Nyquist bins contribute an imaginary part.
        let mut hermitian = shifted.clone();
        let freq = shifted.frequencies();
        for (row, wy) in freq.omega_y.iter().enumerate() {
            for (col, wx) in freq.omega_x.iter().enumerate() {
                if (wx + std::f64::consts::PI).abs() < 1e-12 || (wy + std::f64::consts::PI).abs() < 1e-12 {
                    hermitian.coeffs_mut()[row * 6 + col] = Complex64::new(0.0, 0.0);
                }
            }
        }
        let spatial = inverse_transform(&hermitian);
        let imag = spatial.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        assert!(imag < 1e-12);
    }

    #[test]
    fn canonical_wraps_into_half_open_range() {
        let c = Shift2D::new(26.0, -25.0).canonical(50, 50);
        assert_eq!(c, Shift2D::new(-24.0, 25.0));
        let c = Shift2D::new(25.0, 24.5).canonical(50, 50);
        assert_eq!(c, Shift2D::new(25.0, 24.5));
        let c = Shift2D::new(-0.25, 49.75).canonical(50, 50);
        assert!((c.tx + 0.25).abs() < 1e-12 && (c.ty + 0.25).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn group_law_and_parseval(ax in -5.0..5.0f64, ay in -5.0..5.0f64, bx in -5.0..5.0f64, by in -5.0..5.0f64, seed in 0u64..1000) {
            let s = random_spectrum(8, 8, seed);
            let a = Shift2D::new(ax, ay);
            let b = Shift2D::new(bx, by);
            let two_step = apply_shift(&apply_shift(&s, a), b);
            let one_step = apply_shift(&s, a + b);
            prop_assert!(two_step.max_abs_diff(&one_step) < 1e-12);
            let e0 = s.energy();
            prop_assert!(((apply_shift(&s, a).energy() - e0) / e0).abs() < 1e-12);
        }
    }
}
