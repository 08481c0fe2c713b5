//! Affine slabs `{ y : |q . y - p| < r }` and their exact areas in 2D.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::geom::rect::Rect;
use crate::geom::GeomError;
use crate::num::{q_int, q_zero, Q};

/// The `r`-neighborhood of the affine set `{ y in [0,1]^h : q . y = p }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Slab {
    normal: Vec<i64>,
    offset: i64,
    radius: Q,
}

impl Slab {
    pub fn new(normal: Vec<i64>, offset: i64, radius: Q) -> Result<Self, GeomError> {
        if normal.iter().all(|&c| c == 0) {
            return Err(GeomError::NotPositive("slab normal vector".into()));
        }
        if !radius.is_positive() {
            return Err(GeomError::NotPositive("slab radius".into()));
        }
        Ok(Slab {
            normal,
            offset,
            radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn normal(&self) -> &[i64] {
        &self.normal
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn radius(&self) -> &Q {
        &self.radius
    }

    pub fn contains_q(&self, y: &[Q]) -> bool {
        let mut dot = q_zero();
        for (c, v) in self.normal.iter().zip(y.iter()) {
            dot += q_int(*c) * v;
        }
        (dot - q_int(self.offset)).abs() < self.radius
    }

    pub fn contains_f64(&self, y: &[f64]) -> bool {
        let mut dot = 0.0;
        for (c, v) in self.normal.iter().zip(y.iter()) {
            dot += *c as f64 * v;
        }
        libm::fabs(dot - self.offset as f64) < crate::num::q_to_f64(&self.radius)
    }

    /// One-dimensional slabs are intervals: `q y in (p - r, p + r)`.
    pub fn to_interval(&self) -> Option<(Q, Q)> {
        if self.dim() != 1 {
            return None;
        }
        let a = q_int(self.normal[0]);
        let lo = (q_int(self.offset) - &self.radius) / &a;
        let hi = (q_int(self.offset) + &self.radius) / &a;
        Some(if lo <= hi { (lo, hi) } else { (hi, lo) })
    }
}

/// Exact area of `rect ∩ { q . y <= c }` for a 2D rectangle.
pub fn halfplane_area_in_rect(rect: &Rect, a: i64, b: i64, c: &Q) -> Q {
    debug_assert_eq!(rect.dim(), 2);
    let (xlo, xhi) = rect.interval(0);
    let (ylo, yhi) = rect.interval(1);
    let corners = [
        (xlo.clone(), ylo.clone()),
        (xhi.clone(), ylo.clone()),
        (xhi.clone(), yhi.clone()),
        (xlo.clone(), yhi.clone()),
    ];
    // Sutherland-Hodgman clip of the rectangle against a x + b y <= c
    let inside = |p: &(Q, Q)| -> bool { &(q_int(a) * &p.0 + q_int(b) * &p.1) <= c };
    let mut poly: Vec<(Q, Q)> = corners.to_vec();
    let mut out: Vec<(Q, Q)> = Vec::with_capacity(6);
    for i in 0..poly.len() {
        let cur = poly[i].clone();
        let next = poly[(i + 1) % poly.len()].clone();
        let cur_in = inside(&cur);
        let next_in = inside(&next);
        if cur_in {
            out.push(cur.clone());
        }
        if cur_in != next_in {
            // intersection of segment cur->next with a x + b y = c
            let fa = q_int(a) * &cur.0 + q_int(b) * &cur.1;
            let fb = q_int(a) * &next.0 + q_int(b) * &next.1;
            let t = (c - &fa) / (&fb - &fa);
            let x = &cur.0 + (&next.0 - &cur.0) * &t;
            let y = &cur.1 + (&next.1 - &cur.1) * &t;
            out.push((x, y));
        }
    }
    poly = core::mem::take(&mut out);
    // shoelace
    let mut twice = q_zero();
    for i in 0..poly.len() {
        let (x1, y1) = &poly[i];
        let (x2, y2) = &poly[(i + 1) % poly.len()];
        twice += x1 * y2 - x2 * y1;
    }
    twice.abs() / q_int(2)
}

/// Exact area of `rect ∩ slab` for a 2D rectangle.
pub fn slab_area_in_rect(slab: &Slab, rect: &Rect) -> Q {
    debug_assert_eq!(slab.dim(), 2);
    let a = slab.normal[0];
    let b = slab.normal[1];
    let hi = q_int(slab.offset) + &slab.radius;
    let lo = q_int(slab.offset) - &slab.radius;
    halfplane_area_in_rect(rect, a, b, &hi) - halfplane_area_in_rect(rect, a, b, &lo)
}

/// Exact area of `rect ∩ (slab_1 ∪ ... ∪ slab_k)` for 2D slabs.
///
/// Vertical strip decomposition: cut at every boundary-line crossing and at
/// every crossing of a boundary line with the rectangle's y-edges. Between
/// consecutive cuts the union's y-length is linear in x, so the strip area
/// equals width times the union length at the strip midpoint, evaluated
/// exactly in rationals.
pub fn slab_union_area_in_rect(slabs: &[Slab], rect: &Rect) -> Q {
    debug_assert_eq!(rect.dim(), 2);
    if slabs.is_empty() {
        return q_zero();
    }
    let (xlo, xhi) = rect.interval(0);
    let (ylo, yhi) = rect.interval(1);
    if xlo >= xhi || ylo >= yhi {
        return q_zero();
    }

    // boundary lines a x + b y = c for each slab side
    let mut lines: Vec<(i64, i64, Q)> = Vec::with_capacity(2 * slabs.len());
    for s in slabs {
        debug_assert_eq!(s.dim(), 2);
        let a = s.normal[0];
        let b = s.normal[1];
        lines.push((a, b, q_int(s.offset) - &s.radius));
        lines.push((a, b, q_int(s.offset) + &s.radius));
    }

    let mut events: Vec<Q> = vec![xlo.clone(), xhi.clone()];
    for (i, (a1, b1, c1)) in lines.iter().enumerate() {
        // crossings with the horizontal edges y = ylo, y = yhi
        if *a1 != 0 && *b1 != 0 {
            for yedge in [ylo, yhi] {
                let x = (c1 - q_int(*b1) * yedge) / q_int(*a1);
                if &x > xlo && &x < xhi {
                    events.push(x);
                }
            }
        }
        if *b1 == 0 {
            // vertical boundary: a x = c
            let x = c1 / q_int(*a1);
            if &x > xlo && &x < xhi {
                events.push(x);
            }
        }
        // pairwise crossings
        for (a2, b2, c2) in lines.iter().skip(i + 1) {
            let det = q_int(*a1) * q_int(*b2) - q_int(*a2) * q_int(*b1);
            if det.is_zero() {
                continue;
            }
            let x = (c1 * q_int(*b2) - c2 * q_int(*b1)) / det;
            if &x > xlo && &x < xhi {
                events.push(x);
            }
        }
    }
    events.sort();
    events.dedup();

    let two = q_int(2);
    let mut area = q_zero();
    for w in events.windows(2) {
        let (x0, x1) = (&w[0], &w[1]);
        if x0 >= x1 {
            continue;
        }
        let xm = (x0 + x1) / &two;
        // y-intervals of each slab at the strip midpoint, clipped to the band
        let mut intervals: Vec<(Q, Q)> = Vec::with_capacity(slabs.len());
        for s in slabs {
            let a = s.normal[0];
            let b = s.normal[1];
            if b == 0 {
                let dot = q_int(a) * &xm;
                if (dot - q_int(s.offset)).abs() < s.radius {
                    intervals.push((ylo.clone(), yhi.clone()));
                }
                continue;
            }
            let t1 = (q_int(s.offset) - &s.radius - q_int(a) * &xm) / q_int(b);
            let t2 = (q_int(s.offset) + &s.radius - q_int(a) * &xm) / q_int(b);
            let (mut lo, mut hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            if &lo < ylo {
                lo = ylo.clone();
            }
            if &hi > yhi {
                hi = yhi.clone();
            }
            if lo < hi {
                intervals.push((lo, hi));
            }
        }
        let len = interval_union_length(&mut intervals);
        area += (x1 - x0) * len;
    }
    area
}

/// Total length of a union of intervals (sorts the scratch in place).
pub fn interval_union_length(intervals: &mut [(Q, Q)]) -> Q {
    if intervals.is_empty() {
        return q_zero();
    }
    intervals.sort_by(|a, b| a.0.cmp(&b.0));
    let mut total = q_zero();
    let mut cur = intervals[0].clone();
    for (lo, hi) in intervals.iter().skip(1) {
        if lo <= &cur.1 {
            if hi > &cur.1 {
                cur.1 = hi.clone();
            }
        } else {
            total += &cur.1 - &cur.0;
            cur = (lo.clone(), hi.clone());
        }
    }
    total += &cur.1 - &cur.0;
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q_ratio;

    fn q(n: i64, d: i64) -> Q {
        q_ratio(n, d)
    }

    fn unit_square() -> Rect {
        Rect::unit_cube(2)
    }

    #[test]
    fn axis_aligned_slab_is_a_strip() {
        // q=(1,0), p=0, r=0.1 in the unit square: {y1 < 0.1}, area 1/10
        let slab = Slab::new(vec![1, 0], 0, q(1, 10)).unwrap();
        assert_eq!(slab_area_in_rect(&slab, &unit_square()), q(1, 10));
    }

    #[test]
    fn diagonal_slab_area() {
        // |y1 + y2 - 1| < 1/4 in the unit square: 1 - 2*(3/4)^2/2 = 7/16
        let slab = Slab::new(vec![1, 1], 1, q(1, 4)).unwrap();
        assert_eq!(slab_area_in_rect(&slab, &unit_square()), q(7, 16));
    }

    #[test]
    fn union_handles_overlap_exactly() {
        let s1 = Slab::new(vec![1, 0], 0, q(3, 10)).unwrap(); // y1 < 0.3
        let s2 = Slab::new(vec![1, 0], 1, q(4, 10)).unwrap(); // 0.6 < y1 < 1.4
        let s3 = Slab::new(vec![1, 1], 1, q(1, 10)).unwrap(); // diagonal band
        let sq = unit_square();
        let a12 = slab_union_area_in_rect(&[s1.clone(), s2.clone()], &sq);
        assert_eq!(a12, q(7, 10));
        let a_all = slab_union_area_in_rect(&[s1.clone(), s2.clone(), s3.clone()], &sq);
        // diagonal band area 0.19; its parts below 0.3-line and above 0.6-line overlap
        let d = slab_area_in_rect(&s3, &sq);
        assert!(a_all < &a12 + &d);
        assert!(a_all > a12.clone());
        // self-union is idempotent
        let twice = slab_union_area_in_rect(&[s1.clone(), s1.clone()], &sq);
        assert_eq!(twice, q(3, 10));
    }

    #[test]
    fn union_matches_inclusion_exclusion_for_two_slabs() {
        let s1 = Slab::new(vec![2, 1], 1, q(1, 5)).unwrap();
        let s2 = Slab::new(vec![1, -1], 0, q(1, 7)).unwrap();
        let sq = unit_square();
        let a1 = slab_area_in_rect(&s1, &sq);
        let a2 = slab_area_in_rect(&s2, &sq);
        let union = slab_union_area_in_rect(&[s1.clone(), s2.clone()], &sq);
        // intersection via a fine Monte Carlo would be inexact; use the
        // identity area(A) + area(B) - area(A u B) and check it is a
        // plausible parallelogram-ish positive area
        let inter = &a1 + &a2 - &union;
        assert!(inter > q_zero());
        assert!(inter < a1 && inter < a2);
    }
}
