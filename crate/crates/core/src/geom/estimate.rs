//! Measure values with an honest error bound and a method tag.

use crate::num::{q_to_f64, Q};

/// How a measure value was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Method {
    /// Coordinate-compression sweep; error is 0 apart from Cantor-axis
    /// truncation, which is carried in the bound.
    ExactSweep,
    /// Dense-grid bracketing (used by oracles).
    GridOracle,
    /// Seeded counter-based Monte Carlo.
    MonteCarlo { seed: u64, samples: u64 },
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::ExactSweep => "exact-sweep",
            Method::GridOracle => "grid-oracle",
            Method::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

/// A measure in `[0,1]` with an absolute error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureEstimate {
    pub value: f64,
    pub error: f64,
    pub method: Method,
}

impl MeasureEstimate {
    pub fn exact(value: &Q, error: &Q) -> Self {
        MeasureEstimate {
            value: q_to_f64(value),
            // one ulp of slack for the rational-to-double conversion
            error: q_to_f64(error) + f64::EPSILON,
            method: Method::ExactSweep,
        }
    }

    pub fn monte_carlo(value: f64, error: f64, seed: u64, samples: u64) -> Self {
        MeasureEstimate {
            value,
            error,
            method: Method::MonteCarlo { seed, samples },
        }
    }

    /// Interval view `[value - error, value + error]` clamped to `[0,1]`.
    pub fn bracket(&self) -> (f64, f64) {
        (
            (self.value - self.error).max(0.0),
            (self.value + self.error).min(1.0),
        )
    }
}
