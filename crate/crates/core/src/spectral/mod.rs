//! Fourier machinery shared by every estimator: real pixel grids, their
//! unitary spectra, the exact band-limited shift operator and the
//! natural-image prior with its Wiener filter.

mod grid;
mod prior;
pub(crate) mod shift;
pub(crate) mod transform;

pub use grid::PixelGrid;
pub use prior::{fit_prior_amplitude, wiener_filter, wiener_weight, PriorFit, PriorSpectrum};
pub use shift::{adjoint_unshift, apply_shift, shift_grid, Shift2D};
pub use transform::{forward_transform, inverse_transform, Complex64, FrequencyGrid, Spectrum};
