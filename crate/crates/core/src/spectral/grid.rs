use crate::error::{Error, Result};

/// Real-valued `height × width` samples, row-major, with periodic-extension
/// semantics: column `width` wraps to column 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGrid {
    height: usize,
    width: usize,
    samples: Vec<f64>,
}

impl PixelGrid {
    pub fn new(height: usize, width: usize, samples: Vec<f64>) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::invalid(format!(
                "grid must be at least 2x2, got {height}x{width}"
            )));
        }
        if samples.len() != height * width {
            return Err(Error::invalid(format!(
                "expected {} samples for a {height}x{width} grid, got {}",
                height * width,
                samples.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite sample at row {}, col {}",
                pos / width,
                pos % width
            )));
        }
        Ok(Self {
            height,
            width,
            samples,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![0.0; height * width])
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut samples = Vec::with_capacity(height * width);
        for row in 0..height {
            for col in 0..width {
                samples.push(f(row, col));
            }
        }
        Self::new(height, width, samples)
    }

    /// Built without re-validating; callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(height: usize, width: usize, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), height * width);
        Self {
            height,
            width,
            samples,
        }
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
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.width + col]
    }

    /// Sample at a possibly out-of-range position, wrapped periodically.
    pub fn get_wrapped(&self, row: isize, col: isize) -> f64 {
        let r = row.rem_euclid(self.height as isize) as usize;
        let c = col.rem_euclid(self.width as isize) as usize;
        self.get(r, c)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    /// Element-wise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.height, self.width, self.samples.iter().map(|&v| f(v)).collect())
    }

    /// Rectangular crop with top-left corner at (`row`, `col`).
    pub fn crop(&self, row: usize, col: usize, height: usize, width: usize) -> Result<Self> {
        if row + height > self.height || col + width > self.width {
            return Err(Error::invalid(format!(
                "crop {height}x{width} at ({row}, {col}) exceeds {}x{} grid",
                self.height, self.width
            )));
        }
        Self::from_fn(height, width, |r, c| self.get(row + r, col + c))
    }

    pub fn max_abs_diff(&self, other: &PixelGrid) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn mean_squared_diff(&self, other: &PixelGrid) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / self.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(PixelGrid::new(1, 4, vec![0.0; 4]).is_err());
        assert!(PixelGrid::new(2, 2, vec![0.0; 3]).is_err());
        assert!(PixelGrid::new(2, 2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(PixelGrid::new(2, 2, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn wrapped_access_is_periodic() {
        let g = PixelGrid::from_fn(3, 4, |r, c| (r * 10 + c) as f64).unwrap();
        assert_eq!(g.get_wrapped(-1, -1), g.get(2, 3));
        assert_eq!(g.get_wrapped(3, 4), g.get(0, 0));
    }

    #[test]
    fn crop_bounds() {
        let g = PixelGrid::from_fn(4, 4, |r, c| (r * 4 + c) as f64).unwrap();
        let c = g.crop(1, 2, 2, 2).unwrap();
        assert_eq!(c.samples(), &[6.0, 7.0, 10.0, 11.0]);
        assert!(g.crop(3, 3, 2, 2).is_err());
    }
}
