use crate::error::{Error, Result};
use crate::spectral::PixelGrid;

const MAD_TO_SIGMA: f64 = 1.482_6;

fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

fn diagonal_differences(grid: &PixelGrid, out: &mut Vec<f64>) {
    let (h, w) = grid.dims();
    for r in 0..h - 1 {
        for c in 0..w - 1 {
            out.push(grid.get(r + 1, c + 1) - grid.get(r, c));
        }
    }
}

fn sigma2_from_differences(mut d: Vec<f64>) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::invalid("noise estimate needs at least one frame"));
    }
    let center = median(&mut d);
    let mut dev: Vec<f64> = d.iter().map(|v| (v - center).abs()).collect();
    let sigma = MAD_TO_SIGMA * median(&mut dev) / std::f64::consts::SQRT_2;
    Ok(sigma * sigma)
}

/// Noise variance from the median absolute deviation of the finest diagonal
/// differences `g(r+1, c+1) − g(r, c)`.
pub fn estimate_noise_variance(grid: &PixelGrid) -> Result<f64> {
    let mut d = Vec::with_capacity(grid.len());
    diagonal_differences(grid, &mut d);
    sigma2_from_differences(d)
}

/// As [`estimate_noise_variance`], pooling the differences of every frame.
pub fn estimate_noise_variance_stack(frames: &[PixelGrid]) -> Result<f64> {
    let mut d = Vec::with_capacity(frames.iter().map(PixelGrid::len).sum());
    for f in frames {
        diagonal_differences(f, &mut d);
    }
    sigma2_from_differences(d)
}
