//! The three concrete resonant systems and their rate machinery.
//!
//! - simultaneous approximation by rational points `(p_1/q, ..., p_d/q)`,
//! - systems of linear forms with resonant hyperplanes `{A_i : A_i q = p_i}`,
//! - b-adic shrinking targets on digit-restricted Cantor products.
//!
//! Each family enumerates its indexed items per weight window, attaches
//! per-factor resonant geometry, and exposes exact membership tests for the
//! approximating neighborhoods.

pub mod farey;
pub mod linear;
pub mod minkowski;
pub mod rate;
pub mod rates;
pub mod rational;
pub mod sanitize;
pub mod scheme;
pub mod shrinking;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geom::space::AmbientSpace;
use crate::geom::GeomError;
use crate::measure::region::FactorGeometry;
use crate::measure::MeasureError;
use crate::num::Q;
use scheme::LevelScheme;

pub use linear::LinearForms;
pub use rational::Rational;
pub use shrinking::Shrinking;

/// One indexed member of a resonant family: its integer index tuple, its
/// weight, and the per-factor geometry realizing the resonant set.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonantItem {
    pub index: Vec<i64>,
    pub beta: u64,
    pub geometry: Vec<FactorGeometry>,
}

/// Errors of the system layer.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemError {
    /// Enumeration would produce more items than the cap allows.
    SizeCap {
        count: u128,
        cap: u64,
    },
    /// Invalid family parameters or rate inputs.
    BadParams(String),
    /// A rate postcondition failed (`psi <= rho` names the level).
    RateViolation {
        level: u64,
        detail: String,
    },
    Geometry(GeomError),
    Measure(MeasureError),
}

impl fmt::Display for SystemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemError::SizeCap { count, cap } => {
                write!(f, "enumeration of {count} items exceeds cap {cap}")
            }
            SystemError::BadParams(s) => write!(f, "bad parameters: {s}"),
            SystemError::RateViolation { level, detail } => {
                write!(f, "rate violation at level {level}: {detail}")
            }
            SystemError::Geometry(e) => write!(f, "{e}"),
            SystemError::Measure(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SystemError {}

impl From<GeomError> for SystemError {
    fn from(e: GeomError) -> Self {
        SystemError::Geometry(e)
    }
}

impl From<MeasureError> for SystemError {
    fn from(e: MeasureError) -> Self {
        SystemError::Measure(e)
    }
}

/// A concrete resonant system.
#[derive(Clone, Debug)]
pub enum Family {
    Rational(Rational),
    LinearForms(LinearForms),
    Shrinking(Shrinking),
}

impl Family {
    pub fn space(&self) -> Result<AmbientSpace, SystemError> {
        match self {
            Family::Rational(f) => f.space(),
            Family::LinearForms(f) => f.space(),
            Family::Shrinking(f) => f.space(),
        }
    }

    /// Number of factors `d`.
    pub fn factor_count(&self) -> usize {
        match self {
            Family::Rational(f) => f.d,
            Family::LinearForms(f) => f.d,
            Family::Shrinking(f) => f.specs.len(),
        }
    }

    /// All items with `l_n <= beta <= u_n`, in lexicographic index order.
    pub fn enumerate_level(
        &self,
        scheme: &LevelScheme,
        n: u32,
        cap: u64,
    ) -> Result<Vec<ResonantItem>, SystemError> {
        match self {
            Family::Rational(f) => f.enumerate_level(scheme, n, cap),
            Family::LinearForms(f) => f.enumerate_level(scheme, n, cap),
            Family::Shrinking(f) => f.enumerate_level(scheme, n, cap),
        }
    }

    /// Weight of an index tuple (definitionally consistent with
    /// `enumerate_level`).
    pub fn beta(&self, index: &[i64]) -> Result<u64, SystemError> {
        match self {
            Family::Rational(f) => f.beta(index),
            Family::LinearForms(f) => f.beta(index),
            Family::Shrinking(f) => f.beta(index),
        }
    }

    /// Exact membership of `point` in the union of `psi`-neighborhoods over
    /// the level window: the per-level hit bit of the limsup surrogate.
    pub fn hits_level(
        &self,
        point: &[Q],
        psi_radii: &[Q],
        scheme: &LevelScheme,
        n: u32,
        cap: u64,
    ) -> Result<bool, SystemError> {
        match self {
            Family::Rational(f) => f.hits_level(point, psi_radii, scheme, n, cap),
            Family::LinearForms(f) => f.hits_level(point, psi_radii, scheme, n, cap),
            Family::Shrinking(f) => f.hits_level(point, psi_radii, scheme, n),
        }
    }
}
