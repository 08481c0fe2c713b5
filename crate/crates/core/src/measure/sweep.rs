//! Exact union measure by coordinate compression.
//!
//! Collect all endpoints per axis, form the cell grid, mark the cells
//! covered by some rectangle, and sum cell masses. Lebesgue axes weight a
//! cell by its length; Cantor axes by the truncated self-similar measure,
//! whose unresolved remainder accumulates into the error bound. Cell sums
//! run over a per-axis common denominator so the hot loop is integer only.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::cantor::cantor_box_measure;
use super::{MeasureError, MeasurePolicy};
use crate::geom::estimate::MeasureEstimate;
use crate::geom::rect::Rect;
use crate::geom::space::{AmbientSpace, MeasureKind};
use crate::num::{q_big, q_zero, Q};

/// Exact measure of a union of rectangles: `(value, error)` with the truth
/// in `[value, value + error]`. The error is zero unless a Cantor axis left
/// cylinders unresolved at the truncation depth.
pub fn union_measure_exact(
    rects: &[Rect],
    space: &AmbientSpace,
    policy: &MeasurePolicy,
) -> Result<(Q, Q), MeasureError> {
    let dim = space.total_dim();
    if dim > policy.exact_dim_cutoff {
        return Err(MeasureError::UseStatistical {
            dim,
            cutoff: policy.exact_dim_cutoff,
        });
    }
    for r in rects {
        if r.dim() != dim {
            return Err(MeasureError::Geometry(
                crate::geom::GeomError::DimensionMismatch {
                    expected: dim,
                    got: r.dim(),
                },
            ));
        }
    }
    let solid: Vec<&Rect> = rects.iter().filter(|r| r.is_solid()).collect();
    if solid.is_empty() {
        return Ok((q_zero(), q_zero()));
    }

    // per-axis sorted distinct cuts
    let mut cuts: Vec<Vec<Q>> = vec![Vec::new(); dim];
    for r in &solid {
        for (axis, (lo, hi)) in r.intervals().iter().enumerate() {
            cuts[axis].push(lo.clone());
            cuts[axis].push(hi.clone());
        }
    }
    for axis_cuts in &mut cuts {
        axis_cuts.sort();
        axis_cuts.dedup();
    }
    let cell_counts: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
    let mut total_cells: u64 = 1;
    for &n in &cell_counts {
        total_cells = total_cells.saturating_mul(n as u64);
    }
    if total_cells > policy.max_cells {
        return Err(MeasureError::SizeCap {
            needed: total_cells,
            cap: policy.max_cells,
        });
    }

    // per-axis cell masses as integers over a common axis denominator
    let kinds = space.axis_kinds();
    let mut axis_value: Vec<Vec<BigInt>> = Vec::with_capacity(dim);
    let mut axis_upper: Vec<Vec<BigInt>> = Vec::with_capacity(dim); // value + error
    let mut axis_den: Vec<BigInt> = Vec::with_capacity(dim);
    let mut any_error = false;
    for axis in 0..dim {
        let mut masses: Vec<(Q, Q)> = Vec::with_capacity(cell_counts[axis]);
        for t in 0..cell_counts[axis] {
            let lo = &cuts[axis][t];
            let hi = &cuts[axis][t + 1];
            match kinds[axis] {
                MeasureKind::Lebesgue => masses.push((hi - lo, q_zero())),
                MeasureKind::Cantor(spec) => {
                    let (v, e) = cantor_box_measure(lo, hi, spec, policy.cantor_depth)?;
                    if !e.is_zero() {
                        any_error = true;
                    }
                    masses.push((v, e));
                }
            }
        }
        let mut den = BigInt::one();
        for (v, e) in &masses {
            den = den.lcm(v.denom());
            den = den.lcm(e.denom());
        }
        let values = masses
            .iter()
            .map(|(v, _)| v.numer() * (&den / v.denom()))
            .collect::<Vec<_>>();
        let uppers = masses
            .iter()
            .map(|(v, e)| {
                let u = v + e;
                u.numer() * (&den / u.denom())
            })
            .collect::<Vec<_>>();
        axis_value.push(values);
        axis_upper.push(uppers);
        axis_den.push(den);
    }

    // prefix sums along the innermost axis so covered runs sum in O(1)
    let inner = dim - 1;
    let inner_n = cell_counts[inner];
    let prefix_value = prefix_sums(&axis_value[inner]);
    let prefix_upper = prefix_sums(&axis_upper[inner]);

    // mark covered cells
    let mut covered = vec![false; total_cells as usize];
    let mut strides = vec![1usize; dim];
    for axis in (0..dim.saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * cell_counts[axis + 1];
    }
    for r in &solid {
        let ranges: Vec<(usize, usize)> = (0..dim)
            .map(|axis| {
                let (lo, hi) = r.interval(axis);
                let a = cuts[axis].binary_search(lo).expect("cut present");
                let b = cuts[axis].binary_search(hi).expect("cut present");
                (a, b)
            })
            .collect();
        mark_box(&mut covered, &strides, &ranges, 0, 0);
    }

    // accumulate over rows of the innermost axis
    let rows = (total_cells as usize) / inner_n.max(1);
    let mut total_value = BigInt::zero();
    let mut total_upper = BigInt::zero();
    let mut row_index = vec![0usize; dim.saturating_sub(1)];
    for row in 0..rows {
        let base = row * inner_n;
        // prefix product of the outer-axis masses for this row
        let mut row_value = BigInt::one();
        let mut row_upper = BigInt::one();
        for (axis, &ti) in row_index.iter().enumerate() {
            row_value *= &axis_value[axis][ti];
            if any_error {
                row_upper *= &axis_upper[axis][ti];
            }
        }
        if !row_value.is_zero() || any_error {
            let mut t = 0usize;
            while t < inner_n {
                if covered[base + t] {
                    let start = t;
                    while t < inner_n && covered[base + t] {
                        t += 1;
                    }
                    total_value += &row_value * (&prefix_value[t] - &prefix_value[start]);
                    if any_error {
                        total_upper += &row_upper * (&prefix_upper[t] - &prefix_upper[start]);
                    }
                } else {
                    t += 1;
                }
            }
        }
        // odometer over the outer axes
        if row + 1 < rows {
            for axis in (0..row_index.len()).rev() {
                row_index[axis] += 1;
                if row_index[axis] < cell_counts[axis] {
                    break;
                }
                row_index[axis] = 0;
            }
        }
    }

    let mut den = BigInt::one();
    for d in &axis_den {
        den *= d;
    }
    let value = q_big(total_value, den.clone());
    let error = if any_error {
        q_big(total_upper, den) - &value
    } else {
        q_zero()
    };
    Ok((value, error))
}

/// [`union_measure_exact`] wrapped as a reportable estimate.
pub fn union_measure(
    rects: &[Rect],
    space: &AmbientSpace,
    policy: &MeasurePolicy,
) -> Result<MeasureEstimate, MeasureError> {
    let (v, e) = union_measure_exact(rects, space, policy)?;
    Ok(MeasureEstimate::exact(&v, &e))
}

/// All pairwise intersections of two unions; the union of the result is the
/// intersection of the two input unions.
pub fn pairwise_intersections(a: &[Rect], b: &[Rect]) -> Vec<Rect> {
    let mut out = Vec::new();
    for ra in a {
        for rb in b {
            if let Some(r) = ra.intersect(rb) {
                if r.is_solid() {
                    out.push(r);
                }
            }
        }
    }
    out
}

fn prefix_sums(values: &[BigInt]) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(BigInt::zero());
    for v in values {
        let last = out.last().unwrap().clone();
        out.push(last + v);
    }
    out
}

fn mark_box(
    covered: &mut [bool],
    strides: &[usize],
    ranges: &[(usize, usize)],
    axis: usize,
    offset: usize,
) {
    if axis == ranges.len() - 1 {
        let (a, b) = ranges[axis];
        covered[offset + a..offset + b].fill(true);
        return;
    }
    let (a, b) = ranges[axis];
    for t in a..b {
        mark_box(
            covered,
            strides,
            ranges,
            axis + 1,
            offset + t * strides[axis],
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::space::FactorSpace;
    use crate::num::{q_one, q_ratio};

    fn q(n: i64, d: i64) -> Q {
        q_ratio(n, d)
    }

    fn cube_space(d: usize) -> AmbientSpace {
        AmbientSpace::new(vec![FactorSpace::lebesgue(d, 0.0, false).unwrap()]).unwrap()
    }

    #[test]
    fn single_box() {
        // [0, 0.5]^2 has measure 1/4
        let space = cube_space(2);
        let r = Rect::new(vec![(q(0, 1), q(1, 2)), (q(0, 1), q(1, 2))]).unwrap();
        let (v, e) = union_measure_exact(&[r], &space, &MeasurePolicy::default()).unwrap();
        assert_eq!(v, q(1, 4));
        assert_eq!(e, q_zero());
    }

    #[test]
    fn overlapping_pair_inclusion_exclusion() {
        // [0,.5]^2 union [.25,.75]^2 = 1/4 + 1/4 - 1/16 = 7/16
        let space = cube_space(2);
        let a = Rect::new(vec![(q(0, 1), q(1, 2)), (q(0, 1), q(1, 2))]).unwrap();
        let b = Rect::new(vec![(q(1, 4), q(3, 4)), (q(1, 4), q(3, 4))]).unwrap();
        let (v, e) = union_measure_exact(&[a, b], &space, &MeasurePolicy::default()).unwrap();
        assert_eq!(v, q(7, 16));
        assert_eq!(e, q_zero());
    }

    #[test]
    fn empty_and_degenerate() {
        let space = cube_space(2);
        let (v, _) = union_measure_exact(&[], &space, &MeasurePolicy::default()).unwrap();
        assert_eq!(v, q_zero());
        let flat = Rect::new(vec![(q(1, 2), q(1, 2)), (q(0, 1), q_one())]).unwrap();
        let (v, _) = union_measure_exact(&[flat], &space, &MeasurePolicy::default()).unwrap();
        assert_eq!(v, q_zero());
    }

    #[test]
    fn dimension_cutoff() {
        let space = cube_space(5);
        let r = Rect::unit_cube(5);
        let err = union_measure_exact(&[r], &space, &MeasurePolicy::default()).unwrap_err();
        assert!(matches!(
            err,
            MeasureError::UseStatistical { dim: 5, cutoff: 4 }
        ));
    }

    #[test]
    fn cantor_axis_cell_weighting() {
        // product of middle-thirds Cantor measure and Lebesgue on [0,1]
        let spec = crate::geom::space::CantorSpec::new(3, vec![0, 2]).unwrap();
        let space = AmbientSpace::new(vec![
            FactorSpace::cantor(spec),
            FactorSpace::lebesgue(1, 0.0, false).unwrap(),
        ])
        .unwrap();
        // [0,1/3] x [0,1/2]: 1/2 * 1/2 = 1/4, exact
        let r = Rect::new(vec![(q(0, 1), q(1, 3)), (q(0, 1), q(1, 2))]).unwrap();
        let (v, e) = union_measure_exact(&[r], &space, &MeasurePolicy::default()).unwrap();
        assert_eq!(v, q(1, 4));
        assert_eq!(e, q_zero());
    }

    #[test]
    fn union_is_monotone_and_permutation_invariant() {
        let space = cube_space(2);
        let a = Rect::new(vec![(q(0, 1), q(1, 3)), (q(0, 1), q(2, 3))]).unwrap();
        let b = Rect::new(vec![(q(1, 4), q(1, 2)), (q(1, 2), q(1, 1))]).unwrap();
        let c = Rect::new(vec![(q(2, 3), q(5, 6)), (q(0, 1), q(1, 6))]).unwrap();
        let p = MeasurePolicy::default();
        let (two, _) = union_measure_exact(&[a.clone(), b.clone()], &space, &p).unwrap();
        let (three, _) =
            union_measure_exact(&[a.clone(), b.clone(), c.clone()], &space, &p).unwrap();
        assert!(three >= two);
        let (perm, _) = union_measure_exact(&[c, b, a], &space, &p).unwrap();
        assert_eq!(three, perm);
    }
}
