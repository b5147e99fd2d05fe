use crate::error::{Error, Result};
use crate::spectral::{forward_transform, wiener_filter, FrequencyGrid, PixelGrid, PriorSpectrum, Spectrum};

/// Spectra of `K + 1` equally sized frames; frame 0 is the reference.
#[derive(Debug, Clone)]
pub struct SpectralStack {
    frames: Vec<Spectrum>,
    freq: FrequencyGrid,
}

impl SpectralStack {
    pub fn from_spectra(frames: Vec<Spectrum>) -> Result<Self> {
        let first = frames.first().ok_or_else(|| Error::invalid("empty stack"))?;
        let dims = first.dims();
        if let Some(bad) = frames.iter().find(|s| s.dims() != dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: bad.dims(),
            });
        }
        let freq = FrequencyGrid::new(dims.0, dims.1);
        Ok(Self { frames, freq })
    }

    pub fn from_grids(grids: &[PixelGrid]) -> Result<Self> {
        if let Some(first) = grids.first() {
            if let Some(bad) = grids.iter().find(|g| g.dims() != first.dims()) {
                return Err(Error::DimensionMismatch {
                    expected: first.dims(),
                    found: bad.dims(),
                });
            }
        }
        Self::from_spectra(grids.iter().map(forward_transform).collect())
    }

    pub fn frames(&self) -> &[Spectrum] {
        &self.frames
    }

    /// Total number of frames, `K + 1`.
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn k(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    /// Frequency bins per frame.
    pub fn bins(&self) -> usize {
        self.frames[0].len()
    }

    pub fn freq(&self) -> &FrequencyGrid {
        &self.freq
    }

    pub(crate) fn check_weights(&self, w: &CostWeights) -> Result<()> {
        if w.values.len() != self.bins() {
            return Err(Error::invalid(format!(
                "weights cover {} bins, stack has {}",
                w.values.len(),
                self.bins()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// All ones: the MLE cost.
    Identity,
    /// Wiener filter of a prior: the MAP / BMLE cost.
    Wiener,
    Custom,
}

/// Per-frequency weights of the common cost. Nonnegative and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CostWeights {
    kind: WeightKind,
    values: Vec<f64>,
}

impl CostWeights {
    pub fn identity(bins: usize) -> Self {
        Self {
            kind: WeightKind::Identity,
            values: vec![1.0; bins],
        }
    }

    pub fn wiener(prior: &PriorSpectrum, frames: usize) -> Result<Self> {
        Ok(Self {
            kind: WeightKind::Wiener,
            values: wiener_filter(prior, frames)?,
        })
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("cost weight {bad} is not finite and nonnegative")));
        }
        Ok(Self {
            kind: WeightKind::Custom,
            values,
        })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
