//! Axis-aligned rectangles in the unit cube, with torus-aware helpers.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Signed;

use super::GeomError;
use crate::num::{q_one, q_zero, Q};

/// An axis-aligned closed box `prod [lo_j, hi_j]` with `0 <= lo <= hi <= 1`
/// on every axis. Endpoints are exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect {
    intervals: Vec<(Q, Q)>,
}

impl Rect {
    pub fn new(intervals: Vec<(Q, Q)>) -> Result<Self, GeomError> {
        for (axis, (lo, hi)) in intervals.iter().enumerate() {
            if lo > hi {
                return Err(GeomError::MalformedInterval {
                    axis,
                    detail: "lo > hi".into(),
                });
            }
            if lo.is_negative() || *hi > q_one() {
                return Err(GeomError::MalformedInterval {
                    axis,
                    detail: "endpoints outside [0,1]".into(),
                });
            }
        }
        Ok(Rect { intervals })
    }

    /// The full unit cube of the given dimension.
    pub fn unit_cube(dim: usize) -> Rect {
        Rect {
            intervals: vec![(q_zero(), q_one()); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn interval(&self, axis: usize) -> &(Q, Q) {
        &self.intervals[axis]
    }

    pub fn intervals(&self) -> &[(Q, Q)] {
        &self.intervals
    }

    pub fn side(&self, axis: usize) -> Q {
        &self.intervals[axis].1 - &self.intervals[axis].0
    }

    /// Euclidean-product volume (ignores Cantor weighting).
    pub fn volume(&self) -> Q {
        let mut v = q_one();
        for (lo, hi) in &self.intervals {
            v *= hi - lo;
        }
        v
    }

    pub fn center(&self) -> Vec<Q> {
        self.intervals
            .iter()
            .map(|(lo, hi)| (lo + hi) / Q::from_integer(2.into()))
            .collect()
    }

    /// Closed intersection; `None` when empty.
    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut intervals = Vec::with_capacity(self.dim());
        for ((alo, ahi), (blo, bhi)) in self.intervals.iter().zip(other.intervals.iter()) {
            let lo = if alo > blo { alo.clone() } else { blo.clone() };
            let hi = if ahi < bhi { ahi.clone() } else { bhi.clone() };
            if lo > hi {
                return None;
            }
            intervals.push((lo, hi));
        }
        Some(Rect { intervals })
    }

    /// Strictly positive volume on every axis.
    pub fn is_solid(&self) -> bool {
        self.intervals.iter().all(|(lo, hi)| lo < hi)
    }

    pub fn contains_point(&self, point: &[Q]) -> bool {
        debug_assert_eq!(self.dim(), point.len());
        self.intervals
            .iter()
            .zip(point.iter())
            .all(|((lo, hi), x)| lo <= x && x <= hi)
    }

    pub fn contains_point_f64(&self, point: &[f64]) -> bool {
        self.intervals
            .iter()
            .zip(point.iter())
            .all(|((lo, hi), x)| {
                let lo = crate::num::q_to_f64(lo);
                let hi = crate::num::q_to_f64(hi);
                lo <= *x && *x <= hi
            })
    }

    /// `self` is contained in `other`.
    pub fn contained_in(&self, other: &Rect) -> bool {
        self.intervals
            .iter()
            .zip(other.intervals.iter())
            .all(|((alo, ahi), (blo, bhi))| blo <= alo && ahi <= bhi)
    }

    /// Per-axis shrink toward the center by the factor `num/den` (e.g. 1/2).
    pub fn scaled_about_center(&self, num: i64, den: i64) -> Rect {
        let k = crate::num::q_ratio(num, den);
        let two = Q::from_integer(2.into());
        let intervals = self
            .intervals
            .iter()
            .map(|(lo, hi)| {
                let c = (lo + hi) / &two;
                let h = (hi - lo) / &two * &k;
                (&c - &h, c + h)
            })
            .collect();
        Rect { intervals }
    }
}

/// A rectangle described by center and per-axis half-widths, before torus
/// wrapping and clipping. This is the working currency of the covering
/// machinery: same-size families share one `half` vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenteredRect {
    pub center: Vec<Q>,
    pub half: Vec<Q>,
}

impl CenteredRect {
    pub fn new(center: Vec<Q>, half: Vec<Q>) -> Result<Self, GeomError> {
        if center.len() != half.len() {
            return Err(GeomError::DimensionMismatch {
                expected: center.len(),
                got: half.len(),
            });
        }
        if half.iter().any(|h| !h.is_positive()) {
            return Err(GeomError::NotPositive("half-width".into()));
        }
        Ok(CenteredRect { center, half })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Same center, half-widths multiplied by `k`.
    pub fn scaled(&self, k: &Q) -> CenteredRect {
        CenteredRect {
            center: self.center.clone(),
            half: self.half.iter().map(|h| h * k).collect(),
        }
    }

    /// Concrete boxes in the unit cube: on torus axes the interval wraps
    /// into at most two pieces, on plain axes it is clipped to `[0,1]`.
    pub fn pieces(&self, torus: &[bool]) -> Vec<Rect> {
        debug_assert_eq!(torus.len(), self.dim());
        let mut per_axis: Vec<Vec<(Q, Q)>> = Vec::with_capacity(self.dim());
        for (axis, (c, h)) in self.center.iter().zip(self.half.iter()).enumerate() {
            per_axis.push(axis_pieces(c, h, torus[axis]));
        }
        let mut rects: Vec<Rect> = vec![Rect {
            intervals: Vec::new(),
        }];
        for axis_opts in per_axis {
            let mut next = Vec::with_capacity(rects.len() * axis_opts.len());
            for r in &rects {
                for opt in &axis_opts {
                    let mut iv = r.intervals.clone();
                    iv.push(opt.clone());
                    next.push(Rect { intervals: iv });
                }
            }
            rects = next;
        }
        rects.retain(|r| r.intervals.iter().all(|(lo, hi)| lo <= hi));
        rects
    }
}

/// Interval pieces of `[c-h, c+h]` within `[0,1]`, wrapping on torus axes.
pub fn axis_pieces(c: &Q, h: &Q, torus: bool) -> Vec<(Q, Q)> {
    let lo = c - h;
    let hi = c + h;
    let zero = q_zero();
    let one = q_one();
    if !torus {
        let lo = if lo < zero { zero } else { lo };
        let hi = if hi > one { one } else { hi };
        return vec![(lo, hi)];
    }
    // full wrap: covers the whole circle
    if h + h >= one {
        return vec![(zero, one)];
    }
    if lo < zero {
        vec![(zero, hi), (lo + &one, one)]
    } else if hi > one {
        vec![(lo, one.clone()), (zero, hi - one)]
    } else {
        vec![(lo, hi)]
    }
}

/// Distance between two points on one axis, torus-aware.
pub fn axis_dist(a: &Q, b: &Q, torus: bool) -> Q {
    let d = (a - b).abs();
    if torus {
        let wrap = q_one() - &d;
        if wrap < d {
            return wrap;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q_ratio;

    fn q(n: i64, d: i64) -> Q {
        q_ratio(n, d)
    }

    #[test]
    fn rect_validation() {
        assert!(Rect::new(vec![(q(1, 4), q(3, 4))]).is_ok());
        assert!(Rect::new(vec![(q(3, 4), q(1, 4))]).is_err());
        assert!(Rect::new(vec![(q(-1, 4), q(1, 4))]).is_err());
        assert!(Rect::new(vec![(q(1, 4), q(5, 4))]).is_err());
    }

    #[test]
    fn intersection() {
        let a = Rect::new(vec![(q(0, 1), q(1, 2)), (q(0, 1), q(1, 2))]).unwrap();
        let b = Rect::new(vec![(q(1, 4), q(3, 4)), (q(1, 4), q(3, 4))]).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!(c.interval(0), &(q(1, 4), q(1, 2)));
        let d = Rect::new(vec![(q(3, 4), q(1, 1)), (q(0, 1), q(1, 1))]).unwrap();
        assert!(a.intersect(&d).is_none());
    }

    #[test]
    fn torus_wrap_pieces() {
        // point 0.0, r = 0.1 on the torus wraps into two pieces
        let cr = CenteredRect::new(vec![q(0, 1)], vec![q(1, 10)]).unwrap();
        let pieces = cr.pieces(&[true]);
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].interval(0), &(q(0, 1), q(1, 10)));
        assert_eq!(pieces[1].interval(0), &(q(9, 10), q(1, 1)));
        // point 0.5, r = 0.1 stays one piece
        let cr = CenteredRect::new(vec![q(1, 2)], vec![q(1, 10)]).unwrap();
        let pieces = cr.pieces(&[true]);
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].interval(0), &(q(2, 5), q(3, 5)));
        // huge radius covers the circle
        let cr = CenteredRect::new(vec![q(1, 2)], vec![q(3, 4)]).unwrap();
        let pieces = cr.pieces(&[true]);
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].interval(0), &(q(0, 1), q(1, 1)));
    }

    #[test]
    fn torus_distance() {
        assert_eq!(axis_dist(&q(1, 10), &q(9, 10), true), q(1, 5));
        assert_eq!(axis_dist(&q(1, 10), &q(9, 10), false), q(4, 5));
    }
}
