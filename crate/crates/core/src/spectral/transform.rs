use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::FftPlanner;
pub use rustfft::num_complex::Complex64;

use super::grid::PixelGrid;
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Angular frequency (radians/pixel) of DFT bin `k` on an axis of length `n`,
/// in standard ordering; the Nyquist bin of an even axis maps to −π.
pub fn bin_frequency(k: usize, n: usize) -> f64 {
    if 2 * k < n {
        2.0 * PI * k as f64 / n as f64
    } else {
        2.0 * PI * (k as f64 - n as f64) / n as f64
    }
}

/// Per-axis frequency tables for an `height × width` spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    /// ωx for every column bin.
    pub omega_x: Vec<f64>,
    /// ωy for every row bin.
    pub omega_y: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            omega_x: (0..width).map(|k| bin_frequency(k, width)).collect(),
            omega_y: (0..height).map(|k| bin_frequency(k, height)).collect(),
        }
    }

    pub fn height(&self) -> usize {
        self.omega_y.len()
    }

    pub fn width(&self) -> usize {
        self.omega_x.len()
    }

    /// ‖ω‖² for every bin, row-major.
    pub fn squared_norms(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.height() * self.width());
        for &wy in &self.omega_y {
            for &wx in &self.omega_x {
                out.push(wx * wx + wy * wy);
            }
        }
        out
    }
}

/// Complex Fourier coefficients of a grid under the unitary DFT,
/// `X[k] = N^{-1/2} Σ_n x[n] e^{-i ω_k·n}`, row-major in frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(height: usize, width: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if height < 2 || width < 2 || coeffs.len() != height * width {
            return Err(Error::invalid(format!(
                "spectrum {height}x{width} with {} coefficients",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("non-finite spectral coefficient"));
        }
        Ok(Self {
            height,
            width,
            coeffs,
        })
    }

    pub(crate) fn from_parts_unchecked(height: usize, width: usize, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), height * width);
        Self {
            height,
            width,
            coeffs,
        }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::from_parts_unchecked(height, width, vec![Complex64::new(0.0, 0.0); height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, row_bin: usize, col_bin: usize) -> Complex64 {
        self.coeffs[row_bin * self.width + col_bin]
    }

    pub fn frequencies(&self) -> FrequencyGrid {
        FrequencyGrid::new(self.height, self.width)
    }

    /// Σ|coeff|².
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// ⟨self, other⟩ = Σ self·conj(other).
    pub fn inner(&self, other: &Spectrum) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Spectrum) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// Inverse transform keeping the real part, i.e. the Hermitian projection
    /// of this spectrum. Exact for spectra of real grids.
    pub fn to_real_grid(&self) -> PixelGrid {
        let spatial = inverse_transform(self);
        PixelGrid::from_parts_unchecked(
            self.height,
            self.width,
            spatial.coeffs.iter().map(|c| c.re).collect(),
        )
    }
}

/// Unitary 2D DFT of a real grid.
pub fn forward_transform(grid: &PixelGrid) -> Spectrum {
    let (h, w) = grid.dims();
    let mut data: Vec<Complex64> = grid.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut data, h, w, false);
    Spectrum::from_parts_unchecked(h, w, data)
}

/// Unitary inverse 2D DFT. The output is laid out as a `Spectrum` because it
/// is complex in general; its entries are spatial samples.
pub fn inverse_transform(spectrum: &Spectrum) -> Spectrum {
    let (h, w) = spectrum.dims();
    let mut data = spectrum.coeffs.clone();
    fft2(&mut data, h, w, true);
    Spectrum::from_parts_unchecked(h, w, data)
}

/// In-place unitary 2D FFT by rows then columns.
pub(crate) fn fft2(data: &mut [Complex64], height: usize, width: usize, inverse: bool) {
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let (row_fft, col_fft) = if inverse {
            (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
        } else {
            (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
        };
        drop(planner);

        row_fft.process(data);

        let mut transposed = vec![Complex64::new(0.0, 0.0); data.len()];
        transpose(data, &mut transposed, height, width);
        col_fft.process(&mut transposed);
        transpose(&transposed, data, width, height);
    });

    let scale = 1.0 / ((height * width) as f64).sqrt();
    for c in data.iter_mut() {
        *c *= scale;
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}
