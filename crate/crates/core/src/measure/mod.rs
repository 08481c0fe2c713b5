//! Exact and statistical measure computation for unions of rectangles.

pub mod cantor;
pub mod cover;
pub mod mc;
pub mod region;
pub mod slab;
pub mod sweep;

use alloc::string::String;
use core::fmt;

use crate::geom::GeomError;

/// Failures of the measure layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureError {
    /// Total dimension exceeds the exact-sweep cutoff; use Monte Carlo.
    UseStatistical { dim: usize, cutoff: usize },
    /// Cell grid or enumeration would exceed the configured cap.
    SizeCap { needed: u64, cap: u64 },
    /// Invalid geometric input.
    Geometry(GeomError),
    /// Covering input violated the same-size precondition.
    NonUniformSizes,
    /// A fit or probe was degenerate (e.g. a single data point).
    Degenerate(String),
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::UseStatistical { dim, cutoff } => write!(
                f,
                "dimension {dim} above exact cutoff {cutoff}: use the statistical path"
            ),
            MeasureError::SizeCap { needed, cap } => {
                write!(f, "size cap exceeded: needed {needed}, cap {cap}")
            }
            MeasureError::Geometry(e) => write!(f, "{e}"),
            MeasureError::NonUniformSizes => write!(f, "rectangles are not all the same size"),
            MeasureError::Degenerate(s) => write!(f, "degenerate input: {s}"),
        }
    }
}

impl core::error::Error for MeasureError {}

impl From<GeomError> for MeasureError {
    fn from(e: GeomError) -> Self {
        MeasureError::Geometry(e)
    }
}

/// Caps and knobs shared by the exact paths.
#[derive(Clone, Debug)]
pub struct MeasurePolicy {
    /// Exact sweeps refuse above this total dimension.
    pub exact_dim_cutoff: usize,
    /// Cap on compressed grid cells.
    pub max_cells: u64,
    /// Truncation depth for Cantor-axis cell measures.
    pub cantor_depth: u32,
    /// Default sample count for statistical fallbacks.
    pub mc_samples: u64,
    /// Seed for statistical fallbacks.
    pub mc_seed: u64,
}

impl Default for MeasurePolicy {
    fn default() -> Self {
        MeasurePolicy {
            exact_dim_cutoff: 4,
            max_cells: 20_000_000,
            cantor_depth: 40,
            mc_samples: 100_000,
            mc_seed: 0,
        }
    }
}
