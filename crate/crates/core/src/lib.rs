//! Measure laboratory for limsup sets defined by rectangles.
//!
//! The crate computes exact and statistical measures of unions of
//! axis-aligned rectangles under product measures (Lebesgue on the cube,
//! digit-restricted Cantor), builds the resonant systems of simultaneous
//! approximation, linear forms and b-adic shrinking targets together with
//! their rate functions, and runs the empirical checks behind the
//! zero-one dichotomies: ubiquity ratios, kappa-scaling probes,
//! convergence/divergence series diagnostics, packed level-set
//! constructions and Chung-Erdos lower bounds.
//!
//! Everything here is pure computation over immutable inputs: exact
//! rational arithmetic wherever the inputs are rational, and seeded
//! counter-based Monte Carlo everywhere else. The crate is `no_std`
//! (with `alloc`); IO, configuration and report files live in the
//! companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dichotomy;
pub mod geom;
pub mod measure;
pub mod num;
pub mod rng;
pub mod systems;
pub mod ubiquity;

pub use geom::estimate::{MeasureEstimate, Method};
pub use geom::rect::{CenteredRect, Rect};
pub use geom::space::{AmbientSpace, CantorSpec, FactorSpace, MeasureKind};
pub use num::Q;
