use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::estimators::ShiftSet;
use crate::spectral::Shift2D;

/// Motion model for frames 1..=K; frame 0 is always at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryModel {
    /// Each component i.i.d. uniform on `[−half_range, half_range]`.
    IidUniform { half_range: f64 },
    /// Random walk: each frame moves from the previous position with a
    /// Normal speed (truncated at 0) along a heading that diffuses by
    /// `Normal(0, angle_std²)` per frame.
    Drift {
        speed_mean: f64,
        speed_std: f64,
        angle_std: f64,
        /// Initial heading; drawn uniformly from `[0, 2π)` when `None`.
        initial_angle: Option<f64>,
    },
}

impl TrajectoryModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TrajectoryModel::IidUniform { half_range } => {
                if !(half_range > 0.0 && half_range.is_finite()) {
                    return Err(Error::invalid(format!("half_range must be > 0, got {half_range}")));
                }
            }
            TrajectoryModel::Drift {
                speed_mean,
                speed_std,
                angle_std,
                initial_angle,
            } => {
                let ok = speed_mean >= 0.0
                    && speed_std >= 0.0
                    && angle_std >= 0.0
                    && speed_mean.is_finite()
                    && speed_std.is_finite()
                    && angle_std.is_finite()
                    && initial_angle.is_none_or(f64::is_finite);
                if !ok {
                    return Err(Error::invalid(format!("invalid drift parameters: {self:?}")));
                }
            }
        }
        Ok(())
    }
}

/// Draws `k + 1` shifts with entry 0 pinned to the origin. Frames are drawn
/// in order from a single stream, so the first `k` shifts for a given seed do
/// not depend on how many more frames follow.
pub fn draw_shifts(model: &TrajectoryModel, k: usize, seed: u64) -> Result<ShiftSet> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shifts = Vec::with_capacity(k + 1);
    shifts.push(Shift2D::ZERO);

    match *model {
        TrajectoryModel::IidUniform { half_range } => {
            for _ in 0..k {
                let tx = rng.random_range(-half_range..=half_range);
                let ty = rng.random_range(-half_range..=half_range);
                shifts.push(Shift2D::new(tx, ty));
            }
        }
        TrajectoryModel::Drift {
            speed_mean,
            speed_std,
            angle_std,
            initial_angle,
        } => {
            let mut heading = match initial_angle {
                Some(a) => a,
                None => rng.random_range(0.0..TAU),
            };
            let speed = Normal::new(speed_mean, speed_std).map_err(|e| Error::invalid(e.to_string()))?;
            let turn = Normal::new(0.0, angle_std).map_err(|e| Error::invalid(e.to_string()))?;
            let mut pos = Shift2D::ZERO;
            for _ in 0..k {
                heading += turn.sample(&mut rng);
                let v = truncated_at_zero(&speed, &mut rng);
                pos = pos + Shift2D::new(v * heading.cos(), v * heading.sin());
                shifts.push(pos);
            }
        }
    }
    ShiftSet::new(shifts)
}

fn truncated_at_zero(dist: &Normal<f64>, rng: &mut ChaCha8Rng) -> f64 {
    for _ in 0..64 {
        let v = dist.sample(rng);
        if v >= 0.0 {
            return v;
        }
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_and_length() {
        let iid = TrajectoryModel::IidUniform { half_range: 2.0 };
        let s = draw_shifts(&iid, 1, 5).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0], Shift2D::ZERO);
    }

    #[test]
    fn uniform_component_variance() {
        let iid = TrajectoryModel::IidUniform { half_range: 2.0 };
        let s = draw_shifts(&iid, 50_000, 42).unwrap();
        let comps: Vec<f64> = s.iter().skip(1).flat_map(|t| [t.tx, t.ty]).collect();
        let n = comps.len() as f64;
        let mean = comps.iter().sum::<f64>() / n;
        let var = comps.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 4.0 / 3.0).abs() / (4.0 / 3.0) < 0.05, "var = {var}");
        assert!(comps.iter().all(|v| v.abs() <= 2.0));
    }

    #[test]
    fn degenerate_drift_is_a_line() {
        let drift = TrajectoryModel::Drift {
            speed_mean: 1.0,
            speed_std: 0.0,
            angle_std: 0.0,
            initial_angle: Some(0.0),
        };
        let s = draw_shifts(&drift, 6, 1).unwrap();
        for (i, t) in s.iter().enumerate() {
            assert_eq!(*t, Shift2D::new(i as f64, 0.0));
        }
    }

    #[test]
    fn prefix_stable_and_deterministic() {
        let drift = TrajectoryModel::Drift {
            speed_mean: 0.5,
            speed_std: 0.2,
            angle_std: 0.3,
            initial_angle: None,
        };
        let a = draw_shifts(&drift, 5, 9).unwrap();
        let b = draw_shifts(&drift, 10, 9).unwrap();
        assert_eq!(a.as_slice(), &b.as_slice()[..6]);
        assert_eq!(a, draw_shifts(&drift, 5, 9).unwrap());
    }

    #[test]
    fn rejects_bad_models() {
        assert!(draw_shifts(&TrajectoryModel::IidUniform { half_range: 0.0 }, 2, 0).is_err());
        let bad = TrajectoryModel::Drift {
            speed_mean: -1.0,
            speed_std: 0.0,
            angle_std: 0.0,
            initial_angle: None,
        };
        assert!(draw_shifts(&bad, 2, 0).is_err());
    }
}
