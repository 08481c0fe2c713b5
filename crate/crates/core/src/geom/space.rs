//! Factor spaces and their products.
//!
//! A factor is a coordinate block carrying a measure (Lebesgue on the unit
//! cube or a digit-restricted Cantor measure), an Ahlfors exponent `delta`,
//! a scaling exponent `kappa`, and a torus flag. The ambient space is an
//! ordered product of factors under the sup metric.

use alloc::format;
use alloc::vec::Vec;

use super::GeomError;

/// Base-`b` Cantor set with an allowed digit set; the natural self-similar
/// measure gives each depth-`n` cylinder mass `(#digits)^-n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CantorSpec {
    base: u32,
    digits: Vec<u32>,
}

impl CantorSpec {
    pub fn new(base: u32, mut digits: Vec<u32>) -> Result<Self, GeomError> {
        if base < 2 {
            return Err(GeomError::BadCantorSpec(format!("base {base} < 2")));
        }
        digits.sort_unstable();
        let before = digits.len();
        digits.dedup();
        if digits.len() != before {
            return Err(GeomError::BadCantorSpec("repeated digits".into()));
        }
        if digits.len() < 2 {
            return Err(GeomError::BadCantorSpec("need at least 2 digits".into()));
        }
        if digits.iter().any(|&d| d >= base) {
            return Err(GeomError::BadCantorSpec(format!(
                "digit out of range for base {base}"
            )));
        }
        Ok(CantorSpec { base, digits })
    }

    /// The full digit set; the Cantor measure degenerates to Lebesgue.
    pub fn full(base: u32) -> Result<Self, GeomError> {
        CantorSpec::new(base, (0..base).collect())
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Ahlfors exponent `log(#digits) / log(base)`, in `(0, 1]`.
    pub fn exponent(&self) -> f64 {
        libm::log(self.digits.len() as f64) / libm::log(self.base as f64)
    }
}

/// The measure carried by one factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    Lebesgue,
    Cantor(CantorSpec),
}

/// One factor of the product space.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorSpace {
    dim: usize,
    delta: f64,
    kappa: f64,
    kind: MeasureKind,
    torus: bool,
}

impl FactorSpace {
    /// Lebesgue factor on `[0,1]^dim`; `delta` equals the dimension.
    pub fn lebesgue(dim: usize, kappa: f64, torus: bool) -> Result<Self, GeomError> {
        if dim == 0 {
            return Err(GeomError::BadFactor("dimension 0".into()));
        }
        if !(0.0..1.0).contains(&kappa) {
            return Err(GeomError::BadFactor(format!("kappa {kappa} not in [0,1)")));
        }
        Ok(FactorSpace {
            dim,
            delta: dim as f64,
            kappa,
            kind: MeasureKind::Lebesgue,
            torus,
        })
    }

    /// One-dimensional Cantor factor; `delta` comes from the digit set,
    /// resonant sets are points so `kappa = 0`.
    pub fn cantor(spec: CantorSpec) -> Self {
        let delta = spec.exponent();
        FactorSpace {
            dim: 1,
            delta,
            kappa: 0.0,
            kind: MeasureKind::Cantor(spec),
            torus: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn torus(&self) -> bool {
        self.torus
    }
}

/// Ordered product of factors; coordinates are the concatenation of the
/// factor blocks and distances are the max over axes.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientSpace {
    factors: Vec<FactorSpace>,
    axis_offsets: Vec<usize>,
    total_dim: usize,
}

impl AmbientSpace {
    pub fn new(factors: Vec<FactorSpace>) -> Result<Self, GeomError> {
        if factors.is_empty() {
            return Err(GeomError::BadFactor("no factors".into()));
        }
        let mut axis_offsets = Vec::with_capacity(factors.len() + 1);
        let mut total = 0usize;
        axis_offsets.push(0);
        for factor in &factors {
            total += factor.dim();
            axis_offsets.push(total);
        }
        Ok(AmbientSpace {
            factors,
            axis_offsets,
            total_dim: total,
        })
    }

    /// `d` one-dimensional Lebesgue torus factors with point resonant sets.
    pub fn unit_torus(d: usize) -> Result<Self, GeomError> {
        let mut factors = Vec::with_capacity(d);
        for _ in 0..d {
            factors.push(FactorSpace::lebesgue(1, 0.0, true)?);
        }
        AmbientSpace::new(factors)
    }

    pub fn factors(&self) -> &[FactorSpace] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// First axis index of factor `i`.
    pub fn axis_offset(&self, i: usize) -> usize {
        self.axis_offsets[i]
    }

    /// Factor owning a given axis.
    pub fn factor_of_axis(&self, axis: usize) -> &FactorSpace {
        let i = self
            .axis_offsets
            .iter()
            .rposition(|&o| o <= axis)
            .expect("axis in range");
        &self.factors[i.min(self.factors.len() - 1)]
    }

    /// Per-axis torus flags (a factor's flag repeats across its block).
    pub fn axis_torus_flags(&self) -> Vec<bool> {
        let mut flags = Vec::with_capacity(self.total_dim);
        for factor in &self.factors {
            for _ in 0..factor.dim() {
                flags.push(factor.torus());
            }
        }
        flags
    }

    /// Per-axis measure kinds.
    pub fn axis_kinds(&self) -> Vec<&MeasureKind> {
        let mut kinds = Vec::with_capacity(self.total_dim);
        for factor in &self.factors {
            for _ in 0..factor.dim() {
                kinds.push(factor.kind());
            }
        }
        kinds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_spec_validation() {
        assert!(CantorSpec::new(3, vec![0, 2]).is_ok());
        assert!(CantorSpec::new(3, vec![0, 5]).is_err());
        assert!(CantorSpec::new(3, vec![2]).is_err());
        assert!(CantorSpec::new(1, vec![0]).is_err());
        assert!(CantorSpec::new(3, vec![0, 0, 2]).is_err());
    }

    #[test]
    fn exponents() {
        let spec = CantorSpec::new(3, vec![0, 2]).unwrap();
        assert!((spec.exponent() - 0.6309297535714574).abs() < 1e-12);
        let full = CantorSpec::full(2).unwrap();
        assert!((full.exponent() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn space_axes() {
        let space = AmbientSpace::new(vec![
            FactorSpace::lebesgue(2, 0.5, false).unwrap(),
            FactorSpace::lebesgue(1, 0.0, true).unwrap(),
        ])
        .unwrap();
        assert_eq!(space.total_dim(), 3);
        assert_eq!(space.axis_offset(1), 2);
        assert_eq!(space.axis_torus_flags(), vec![false, false, true]);
    }
}
