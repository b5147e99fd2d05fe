use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::Shift2D;

/// `K + 1` translations with the gauge `shifts[0] = (0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSet(Vec<Shift2D>);

impl ShiftSet {
    pub fn new(shifts: Vec<Shift2D>) -> Result<Self> {
        match shifts.first() {
            None => return Err(Error::invalid("a shift set needs at least one entry")),
            Some(first) if *first != Shift2D::ZERO => {
                return Err(Error::invalid(format!("gauge violated: shifts[0] = {first:?}")))
            }
            _ => {}
        }
        if let Some(bad) = shifts.iter().find(|t| !t.is_finite()) {
            return Err(Error::invalid(format!("non-finite shift {bad:?}")));
        }
        Ok(Self(shifts))
    }

    /// Re-expresses arbitrary positions relative to the first one.
    pub fn relative_to_first(shifts: &[Shift2D]) -> Result<Self> {
        let origin = *shifts
            .first()
            .ok_or_else(|| Error::invalid("a shift set needs at least one entry"))?;
        let mut out: Vec<Shift2D> = shifts.iter().map(|&t| t - origin).collect();
        out[0] = Shift2D::ZERO;
        Self::new(out)
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![Shift2D::ZERO; k + 1])
    }

    /// Number of non-reference frames.
    pub fn k(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[Shift2D] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Shift2D> {
        self.0
    }

    pub fn canonical(&self, height: usize, width: usize) -> Self {
        let mut out: Vec<Shift2D> = self.0.iter().map(|t| t.canonical(height, width)).collect();
        out[0] = Shift2D::ZERO;
        Self(out)
    }

    /// Replaces entry `i >= 1`.
    #[cfg(test)]
    pub(crate) fn with(&self, i: usize, t: Shift2D) -> Self {
        debug_assert!(i >= 1);
        let mut out = self.0.clone();
        out[i] = t;
        Self(out)
    }

    /// Mean over frames 1..=K of the squared per-frame error, after mapping
    /// each difference to its canonical periodic representative.
    pub fn mse_against(&self, truth: &ShiftSet, height: usize, width: usize) -> Result<f64> {
        if truth.len() != self.len() {
            return Err(Error::invalid(format!(
                "shift sets differ in length: {} vs {}",
                self.len(),
                truth.len()
            )));
        }
        if self.k() == 0 {
            return Ok(0.0);
        }
        let total: f64 = self
            .0
            .iter()
            .zip(truth.iter())
            .skip(1)
            .map(|(&a, &b)| (a - b).canonical(height, width).norm_sqr())
            .sum();
        Ok(total / self.k() as f64)
    }
}

impl Deref for ShiftSet {
    type Target = [Shift2D];
    fn deref(&self) -> &[Shift2D] {
        &self.0
    }
}

/// Uniform random shifts in `[−half_range, half_range]²` with entry 0 pinned.
pub fn random_init(k: usize, half_range: f64, seed: u64) -> Result<ShiftSet> {
    if !(half_range >= 0.0 && half_range.is_finite()) {
        return Err(Error::invalid(format!("half_range must be >= 0, got {half_range}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shifts = vec![Shift2D::ZERO];
    for _ in 0..k {
        let (tx, ty) = if half_range == 0.0 {
            (0.0, 0.0)
        } else {
            (
                rng.random_range(-half_range..=half_range),
                rng.random_range(-half_range..=half_range),
            )
        };
        shifts.push(Shift2D::new(tx, ty));
    }
    ShiftSet::new(shifts)
}
