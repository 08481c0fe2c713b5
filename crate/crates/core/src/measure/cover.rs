//! Greedy disjoint subfamily selection for same-size rectangles.
//!
//! For a family of aligned rectangles with identical per-axis half-widths,
//! select a subfamily whose `scale`-enlargements are pairwise disjoint, in
//! deterministic lexicographic center order. Every input rectangle is then
//! contained in the `5 * scale`-enlargement of some kept rectangle (a
//! rejected center lies within `2 * scale * h` of a kept one per axis, so
//! its rectangle sits inside the `(2 * scale + 1) <= 5 * scale` blow-up).

use alloc::vec::Vec;

use crate::geom::rect::{axis_dist, CenteredRect};
use crate::measure::MeasureError;
use crate::num::Q;

/// Indices of the kept subfamily, in the order they were kept.
///
/// `torus` gives the per-axis wrap flags; center distances respect them.
/// All input rectangles must share one half-width vector exactly.
pub fn five_r_cover(
    family: &[CenteredRect],
    scale: &Q,
    torus: &[bool],
) -> Result<Vec<usize>, MeasureError> {
    if family.is_empty() {
        return Ok(Vec::new());
    }
    let half = &family[0].half;
    let dim = family[0].dim();
    for r in family {
        if r.dim() != dim || &r.half != half {
            return Err(MeasureError::NonUniformSizes);
        }
    }
    if torus.len() != dim {
        return Err(MeasureError::Geometry(
            crate::geom::GeomError::DimensionMismatch {
                expected: dim,
                got: torus.len(),
            },
        ));
    }

    // required center gap per axis for scale-enlargements to be disjoint
    let gaps: Vec<Q> = half
        .iter()
        .map(|h| h * scale * Q::from_integer(2.into()))
        .collect();

    let mut order: Vec<usize> = (0..family.len()).collect();
    order.sort_by(|&a, &b| family[a].center.cmp(&family[b].center));

    let mut kept: Vec<usize> = Vec::new();
    'candidates: for &i in &order {
        for &k in &kept {
            if !centers_separated(&family[i].center, &family[k].center, &gaps, torus) {
                continue 'candidates;
            }
        }
        kept.push(i);
    }
    Ok(kept)
}

/// Some axis separates the two scale-enlargements strictly.
fn centers_separated(a: &[Q], b: &[Q], gaps: &[Q], torus: &[bool]) -> bool {
    for axis in 0..a.len() {
        if axis_dist(&a[axis], &b[axis], torus[axis]) > gaps[axis] {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::rect::Rect;
    use crate::geom::space::AmbientSpace;
    use crate::measure::sweep::union_measure_exact;
    use crate::measure::MeasurePolicy;
    use crate::num::{q_ratio, q_zero};

    fn q(n: i64, d: i64) -> Q {
        q_ratio(n, d)
    }

    fn cr(center: &[(i64, i64)], half: (i64, i64)) -> CenteredRect {
        CenteredRect::new(
            center.iter().map(|&(n, d)| q(n, d)).collect(),
            alloc::vec![q(half.0, half.1); center.len()],
        )
        .unwrap()
    }

    #[test]
    fn single_rectangle_is_kept() {
        let family = [cr(&[(1, 2)], (1, 10))];
        let kept = five_r_cover(&family, &q(5, 1), &[false]).unwrap();
        assert_eq!(kept, alloc::vec![0]);
    }

    #[test]
    fn duplicates_collapse() {
        let family = [
            cr(&[(1, 2), (1, 2)], (1, 10)),
            cr(&[(1, 2), (1, 2)], (1, 10)),
        ];
        let kept = five_r_cover(&family, &q(5, 1), &[false, false]).unwrap();
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn non_uniform_sizes_rejected() {
        let family = [cr(&[(1, 2)], (1, 10)), cr(&[(1, 4)], (1, 20))];
        let err = five_r_cover(&family, &q(5, 1), &[false]).unwrap_err();
        assert!(matches!(err, MeasureError::NonUniformSizes));
    }

    #[test]
    fn kept_family_is_disjoint_and_covers() {
        // jittered grid of same-size squares in the unit square
        let mut family = Vec::new();
        for i in 0..10i64 {
            for j in 0..10i64 {
                family.push(cr(
                    &[
                        (2 * i + 1 + (i * j % 2), 40),
                        (2 * j + 1 + ((i + j) % 2), 40),
                    ],
                    (1, 40),
                ));
            }
        }
        let scale = q(5, 1);
        let torus = [false, false];
        let kept = five_r_cover(&family, &scale, &torus).unwrap();
        assert!(!kept.is_empty() && kept.len() < family.len());

        // pairwise disjoint at scale 5, exact
        let gaps: Vec<Q> = family[0]
            .half
            .iter()
            .map(|h| h * &scale * Q::from_integer(2.into()))
            .collect();
        for (a, &i) in kept.iter().enumerate() {
            for &j in kept.iter().skip(a + 1) {
                assert!(centers_separated(
                    &family[i].center,
                    &family[j].center,
                    &gaps,
                    &torus
                ));
            }
        }

        // residual coverage: union(inputs) minus union(25x kept) is null
        let space = AmbientSpace::new(alloc::vec![crate::geom::space::FactorSpace::lebesgue(
            2, 0.0, false
        )
        .unwrap()])
        .unwrap();
        let policy = MeasurePolicy::default();
        let inputs: Vec<Rect> = family.iter().flat_map(|r| r.pieces(&torus)).collect();
        let enlarge = &scale * q(5, 1);
        let mut both: Vec<Rect> = kept
            .iter()
            .flat_map(|&i| family[i].scaled(&enlarge).pieces(&torus))
            .collect();
        let (enlarged_only, _) = union_measure_exact(&both, &space, &policy).unwrap();
        both.extend(inputs);
        let (with_inputs, _) = union_measure_exact(&both, &space, &policy).unwrap();
        assert_eq!(with_inputs - enlarged_only, q_zero());
    }
}
