use std::fmt;
use std::str::FromStr;

use super::ShiftSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Mle,
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Optimizer {
    /// Cyclic coordinate descent: average, then re-align each frame.
    Ccd,
    /// Variable projections: joint ascent over all shifts.
    Vp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Init {
    Random,
    Pairwise,
}

macro_rules! impl_keyword {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self { $(Self::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name => Ok(Self::$variant),)+
                    other => Err(Error::invalid(format!(
                        concat!("unknown ", stringify!($ty), " '{}' (expected one of: ", $($name, " ",)+ ")"),
                        other
                    ))),
                }
            }
        }
    };
}

impl_keyword!(Method { Mle => "mle", Map => "map" });
impl_keyword!(Optimizer { Ccd => "ccd", Vp => "vp" });
impl_keyword!(Init { Random => "random", Pairwise => "pairwise" });

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub method: Method,
    pub optimizer: Optimizer,
    pub init: Init,
    pub max_outer_iters: usize,
    /// Stop once no shift moves by more than this (pixels) in an iteration.
    pub shift_tol: f64,
    /// Newton steps used to refine each correlation peak.
    pub newton_iters: usize,
    pub random_init_half_range: f64,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            method: Method::Mle,
            optimizer: Optimizer::Ccd,
            init: Init::Pairwise,
            max_outer_iters: 50,
            shift_tol: 1e-4,
            newton_iters: 10,
            random_init_half_range: 2.0,
            seed: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn new(method: Method, optimizer: Optimizer, init: Init) -> Self {
        Self {
            method,
            optimizer,
            init,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shift_tol > 0.0 && self.shift_tol.is_finite()) {
            return Err(Error::invalid(format!("shift_tol must be > 0, got {}", self.shift_tol)));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::invalid("max_outer_iters must be >= 1"));
        }
        if !(self.random_init_half_range >= 0.0 && self.random_init_half_range.is_finite()) {
            return Err(Error::invalid("random_init_half_range must be >= 0"));
        }
        Ok(())
    }
}

/// Result of an iterative estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOutcome {
    /// Canonical representatives, entry 0 at the origin.
    pub shifts: ShiftSet,
    pub iterations: usize,
    pub final_cost: f64,
    /// False when the iteration cap was hit or the line search stalled
    /// away from a stationary point; `shifts` is then the best iterate.
    pub converged: bool,
    /// Cost at the initialization followed by every accepted iteration.
    pub cost_history: Vec<f64>,
}

impl EstimateOutcome {
    /// True when the recorded costs never decrease.
    pub fn is_monotone(&self) -> bool {
        self.cost_history.windows(2).all(|w| w[1] >= w[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keywords_round_trip() {
        for m in [Method::Mle, Method::Map] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert_eq!("VP".parse::<Optimizer>().unwrap(), Optimizer::Vp);
        assert!("newton".parse::<Optimizer>().is_err());
        assert_eq!(Init::Pairwise.to_string(), "pairwise");
    }

    #[test]
    fn validation() {
        assert!(EstimatorConfig::default().validate().is_ok());
        let bad = EstimatorConfig {
            shift_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = EstimatorConfig {
            max_outer_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
