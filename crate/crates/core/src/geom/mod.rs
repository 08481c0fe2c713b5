//! Domain geometry: rectangles in the unit cube, product spaces, estimates.

pub mod estimate;
pub mod rect;
pub mod space;

use alloc::string::String;
use core::fmt;

/// Validation failures for geometric inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeomError {
    /// An interval with `lo > hi`, or an endpoint outside `[0,1]`.
    MalformedInterval { axis: usize, detail: String },
    /// Mismatch between a rectangle and the ambient space dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// Bad Cantor specification (base, digit set).
    BadCantorSpec(String),
    /// Bad factor-space parameters (delta, kappa, dimension).
    BadFactor(String),
    /// Degenerate input where a positive quantity was required.
    NotPositive(String),
}

impl fmt::Display for GeomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeomError::MalformedInterval { axis, detail } => {
                write!(f, "malformed interval on axis {axis}: {detail}")
            }
            GeomError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            GeomError::BadCantorSpec(s) => write!(f, "bad cantor spec: {s}"),
            GeomError::BadFactor(s) => write!(f, "bad factor space: {s}"),
            GeomError::NotPositive(s) => write!(f, "must be positive: {s}"),
        }
    }
}

impl core::error::Error for GeomError {}
