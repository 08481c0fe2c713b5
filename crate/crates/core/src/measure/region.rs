//! Product regions: per-factor neighborhoods of resonant geometry, and the
//! measure of their unions.
//!
//! A region is a product over factors of either a finite box union (points,
//! Cantor preimages, 1D slabs) or a genuine affine slab. Unions of pure box
//! products go through the exact sweep. Unions of 2D slabs over a single
//! factor go through the exact strip decomposition. Everything else falls
//! back to seeded Monte Carlo, reported as such.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Signed;

use super::slab::{slab_union_area_in_rect, Slab};
use super::sweep::union_measure_exact;
use super::{MeasureError, MeasurePolicy};
use crate::geom::estimate::MeasureEstimate;
use crate::geom::rect::{axis_pieces, Rect};
use crate::geom::space::{AmbientSpace, FactorSpace};
use crate::geom::GeomError;
use crate::num::{q_int, Q};

/// Resonant geometry within one factor.
#[derive(Clone, Debug, PartialEq)]
pub enum FactorGeometry {
    /// A point with one coordinate per factor axis.
    Point(Vec<Q>),
    /// The affine set `{ A : A . q = p }` in a Lebesgue factor.
    Affine { normal: Vec<i64>, offset: i64 },
    /// A b-adic preimage of the target: a point with its digit word kept.
    CantorPreimage { word: Vec<u32>, center: Q },
}

impl FactorGeometry {
    pub fn point_coords(&self) -> Option<Vec<Q>> {
        match self {
            FactorGeometry::Point(c) => Some(c.clone()),
            FactorGeometry::CantorPreimage { center, .. } => Some(vec![center.clone()]),
            FactorGeometry::Affine { .. } => None,
        }
    }
}

/// The neighborhood of one factor's geometry, ready for measure calls.
#[derive(Clone, Debug, PartialEq)]
pub enum FactorRegion {
    /// Union of factor-local boxes (wrap pieces of a point neighborhood).
    Boxes(Vec<Rect>),
    /// An affine slab `{ |A . q - p| < r }`.
    Slab(Slab),
}

impl FactorRegion {
    pub fn contains_f64(&self, y: &[f64]) -> bool {
        match self {
            FactorRegion::Boxes(boxes) => boxes.iter().any(|b| b.contains_point_f64(y)),
            FactorRegion::Slab(s) => s.contains_f64(y),
        }
    }

    pub fn contains_q(&self, y: &[Q]) -> bool {
        match self {
            FactorRegion::Boxes(boxes) => boxes.iter().any(|b| b.contains_point(y)),
            FactorRegion::Slab(s) => s.contains_q(y),
        }
    }
}

/// `radius`-neighborhood of a factor geometry inside its factor space.
///
/// Point geometry wraps on torus factors into at most two pieces per axis;
/// affine geometry becomes a slab (1D slabs are returned as boxes so the
/// sweep can stay exact).
pub fn neighborhood(
    geometry: &FactorGeometry,
    radius: &Q,
    factor: &FactorSpace,
) -> Result<FactorRegion, GeomError> {
    if !radius.is_positive() {
        return Err(GeomError::NotPositive("neighborhood radius".into()));
    }
    match geometry {
        FactorGeometry::Point(_) | FactorGeometry::CantorPreimage { .. } => {
            let coords = geometry.point_coords().expect("point-like geometry");
            if coords.len() != factor.dim() {
                return Err(GeomError::DimensionMismatch {
                    expected: factor.dim(),
                    got: coords.len(),
                });
            }
            let mut per_axis: Vec<Vec<(Q, Q)>> = Vec::with_capacity(coords.len());
            for c in &coords {
                per_axis.push(axis_pieces(c, radius, factor.torus()));
            }
            let mut rects = vec![Vec::new()];
            for opts in per_axis {
                let mut next = Vec::with_capacity(rects.len() * opts.len());
                for r in &rects {
                    for o in &opts {
                        let mut iv: Vec<(Q, Q)> = r.clone();
                        iv.push(o.clone());
                        next.push(iv);
                    }
                }
                rects = next;
            }
            let boxes = rects
                .into_iter()
                .map(Rect::new)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(FactorRegion::Boxes(boxes))
        }
        FactorGeometry::Affine { normal, offset } => {
            if normal.len() != factor.dim() {
                return Err(GeomError::DimensionMismatch {
                    expected: factor.dim(),
                    got: normal.len(),
                });
            }
            let slab = Slab::new(normal.clone(), *offset, radius.clone())?;
            if factor.dim() == 1 {
                let (lo, hi) = slab.to_interval().expect("1d slab");
                let lo = if lo < q_int(0) { q_int(0) } else { lo };
                let hi = if hi > q_int(1) { q_int(1) } else { hi };
                if lo >= hi {
                    return Ok(FactorRegion::Boxes(Vec::new()));
                }
                return Ok(FactorRegion::Boxes(vec![Rect::new(vec![(lo, hi)])?]));
            }
            Ok(FactorRegion::Slab(slab))
        }
    }
}

/// A rectangle-like subset of the ambient space: one region per factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductRegion {
    pub factors: Vec<FactorRegion>,
}

impl ProductRegion {
    pub fn contains_f64(&self, space: &AmbientSpace, point: &[f64]) -> bool {
        let mut offset = 0;
        for (i, region) in self.factors.iter().enumerate() {
            let d = space.factors()[i].dim();
            if !region.contains_f64(&point[offset..offset + d]) {
                return false;
            }
            offset += d;
        }
        true
    }

    pub fn contains_q(&self, space: &AmbientSpace, point: &[Q]) -> bool {
        let mut offset = 0;
        for (i, region) in self.factors.iter().enumerate() {
            let d = space.factors()[i].dim();
            if !region.contains_q(&point[offset..offset + d]) {
                return false;
            }
            offset += d;
        }
        true
    }

    /// Full-dimension boxes when every factor is a box union.
    pub fn expand_boxes(&self) -> Option<Vec<Rect>> {
        let mut rects: Vec<Vec<(Q, Q)>> = vec![Vec::new()];
        for region in &self.factors {
            let boxes = match region {
                FactorRegion::Boxes(b) => b,
                FactorRegion::Slab(_) => return None,
            };
            let mut next = Vec::with_capacity(rects.len() * boxes.len());
            for r in &rects {
                for b in boxes {
                    let mut iv = r.clone();
                    iv.extend(b.intervals().iter().cloned());
                    next.push(iv);
                }
            }
            rects = next;
        }
        Some(
            rects
                .into_iter()
                .map(|iv| Rect::new(iv).expect("pieces already validated"))
                .collect(),
        )
    }
}

/// Measure of `ball ∩ (region_1 ∪ ... ∪ region_k)`.
///
/// Exact when all regions expand to boxes, or when the space is a single
/// 2D Lebesgue factor and all regions are slabs; otherwise Monte Carlo
/// under the policy's seed and sample count.
pub fn region_union_measure(
    regions: &[ProductRegion],
    ball: &Rect,
    space: &AmbientSpace,
    policy: &MeasurePolicy,
) -> Result<MeasureEstimate, MeasureError> {
    // pure box path
    let mut boxes: Vec<Rect> = Vec::new();
    let mut all_boxes = true;
    'regions: for region in regions {
        match region.expand_boxes() {
            Some(expanded) => {
                for r in expanded {
                    if let Some(clipped) = r.intersect(ball) {
                        if clipped.is_solid() {
                            boxes.push(clipped);
                        }
                    }
                }
            }
            None => {
                all_boxes = false;
                break 'regions;
            }
        }
    }
    if all_boxes {
        match union_measure_exact(&boxes, space, policy) {
            Ok((v, e)) => return Ok(MeasureEstimate::exact(&v, &e)),
            Err(MeasureError::UseStatistical { .. }) | Err(MeasureError::SizeCap { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    // exact 2D slab union over a single factor
    if space.factors().len() == 1 && space.factors()[0].dim() == 2 && ball.dim() == 2 {
        let mut slabs: Vec<Slab> = Vec::with_capacity(regions.len());
        let mut all_slabs = true;
        for region in regions {
            match &region.factors[0] {
                FactorRegion::Slab(s) => slabs.push(s.clone()),
                FactorRegion::Boxes(_) => {
                    all_slabs = false;
                    break;
                }
            }
        }
        if all_slabs {
            let area = slab_union_area_in_rect(&slabs, ball);
            return Ok(MeasureEstimate::exact(&area, &q_int(0)));
        }
    }

    // statistical fallback
    let est = super::mc::mc_measure(
        |p| ball.contains_point_f64(p) && regions.iter().any(|r| r.contains_f64(space, p)),
        space,
        policy.mc_samples,
        policy.mc_seed,
    )
    .map_err(MeasureError::Geometry)?;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::space::FactorSpace;
    use crate::num::q_ratio;

    fn q(n: i64, d: i64) -> Q {
        q_ratio(n, d)
    }

    #[test]
    fn point_neighborhood_wraps() {
        let factor = FactorSpace::lebesgue(1, 0.0, true).unwrap();
        let region =
            neighborhood(&FactorGeometry::Point(vec![q(0, 1)]), &q(1, 10), &factor).unwrap();
        match region {
            FactorRegion::Boxes(b) => assert_eq!(b.len(), 2),
            _ => panic!("expected boxes"),
        }
    }

    #[test]
    fn affine_1d_becomes_interval() {
        let factor = FactorSpace::lebesgue(1, 0.0, false).unwrap();
        let region = neighborhood(
            &FactorGeometry::Affine {
                normal: vec![2],
                offset: 1,
            },
            &q(1, 10),
            &factor,
        )
        .unwrap();
        match region {
            FactorRegion::Boxes(b) => {
                assert_eq!(b.len(), 1);
                assert_eq!(b[0].interval(0), &(q(9, 20), q(11, 20)));
            }
            _ => panic!("expected interval"),
        }
    }

    #[test]
    fn affine_2d_is_slab() {
        let factor = FactorSpace::lebesgue(2, 0.5, false).unwrap();
        let region = neighborhood(
            &FactorGeometry::Affine {
                normal: vec![1, 0],
                offset: 0,
            },
            &q(1, 10),
            &factor,
        )
        .unwrap();
        assert!(matches!(region, FactorRegion::Slab(_)));
        let zero_q = neighborhood(
            &FactorGeometry::Affine {
                normal: vec![0, 0],
                offset: 0,
            },
            &q(1, 10),
            &factor,
        );
        assert!(zero_q.is_err());
    }

    #[test]
    fn slab_union_measure_is_exact_in_2d() {
        let factor = FactorSpace::lebesgue(2, 0.5, false).unwrap();
        let space = AmbientSpace::new(vec![factor]).unwrap();
        let slab = Slab::new(vec![1, 0], 0, q(1, 10)).unwrap();
        let region = ProductRegion {
            factors: vec![FactorRegion::Slab(slab)],
        };
        let est = region_union_measure(
            &[region],
            &Rect::unit_cube(2),
            &space,
            &MeasurePolicy::default(),
        )
        .unwrap();
        assert!((est.value - 0.1).abs() < 1e-12);
        assert!(matches!(
            est.method,
            crate::geom::estimate::Method::ExactSweep
        ));
    }
}
