//! Stern-Brocot / continued-fraction utilities for rational approximation.
//!
//! The workhorse is `simplest_in_open`: the minimal-denominator fraction in
//! an open interval, found by the classic walk down the continued-fraction
//! tree. On top of it sits the window decision "does the interval contain a
//! fraction p/q whose denominator has a multiple in [l, u]?", which is the
//! exact membership test for the simultaneous-approximation neighborhoods.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::measure::MeasureError;
use crate::num::{q_big, q_int, Q};

/// Continued-fraction digits of a nonnegative rational `x = [a0; a1, ...]`.
pub fn continued_fraction(x: &Q) -> Vec<BigInt> {
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    let mut digits = Vec::new();
    while !den.is_zero() {
        let a = num.clone() / den.clone();
        digits.push(a.clone());
        let rem = num - &a * &den;
        num = den;
        den = rem;
    }
    digits
}

/// Convergents `p_k / q_k` of a continued fraction.
pub fn convergents(digits: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::with_capacity(digits.len());
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (digits.first().cloned().unwrap_or_default(), BigInt::one());
    out.push((p1.clone(), q1.clone()));
    for a in digits.iter().skip(1) {
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        out.push((p2.clone(), q2.clone()));
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    out
}

/// The fraction with the smallest denominator in the open interval
/// `(lo, hi)`, `0 <= lo < hi`. Ties on the denominator return the smallest
/// numerator.
pub fn simplest_in_open(lo: &Q, hi: &Q) -> (BigInt, BigInt) {
    debug_assert!(lo < hi);
    debug_assert!(!lo.is_negative());
    simplest_rec(lo, Some(hi))
}

/// Simplest fraction in `(lo, hi)` where `hi = None` means `+infinity`.
fn simplest_rec(lo: &Q, hi: Option<&Q>) -> (BigInt, BigInt) {
    let floor_lo = lo.floor().to_integer();
    let n: BigInt = &floor_lo + 1; // smallest integer strictly above lo
    let n_q = q_big(n.clone(), BigInt::one());
    match hi {
        None => (n, BigInt::one()),
        Some(h) => {
            if &n_q < h {
                return (n, BigInt::one());
            }
            // both endpoints inside [floor_lo, floor_lo + 1]: recurse on
            // the reciprocal of the fractional parts
            let fl = q_big(floor_lo.clone(), BigInt::one());
            let a = h - &fl;
            let inv_lo = a.recip();
            let frac_lo = lo - &fl;
            let (py, qy) = if frac_lo.is_zero() {
                simplest_rec(&inv_lo, None)
            } else {
                let inv_hi = frac_lo.recip();
                simplest_rec(&inv_lo, Some(&inv_hi))
            };
            (&floor_lo * &py + qy, py)
        }
    }
}

/// `simplest_in_open` on `i128` fractions, for the hot paths. Inputs are
/// positive fractions `lo = (a, b) < hi = (c, d)`; the result is exact.
/// Returns `None` when an intermediate product would overflow (callers then
/// take the arbitrary-precision path).
pub fn simplest_in_open_i128(lo: (i128, i128), hi: (i128, i128)) -> Option<(i128, i128)> {
    let (a, b) = lo;
    let (c, d) = hi;
    debug_assert!(b > 0 && d > 0 && a >= 0);
    let q = a / b;
    let n = q + 1;
    // integer strictly inside?
    let inside = match n.checked_mul(d) {
        Some(nd) => nd < c,
        None => false,
    };
    if inside {
        return Some((n, 1));
    }
    let frac_lo = a - q * b;
    let hi_minus_q = c.checked_sub(q.checked_mul(d)?)?;
    if hi_minus_q <= 0 {
        // interval empty after floor shift; cannot happen for lo < hi
        return None;
    }
    if frac_lo == 0 {
        // y in (d / (c - q d), infinity): smallest integer strictly above
        let yq = d / hi_minus_q + 1;
        return Some((q.checked_mul(yq)?.checked_add(1)?, yq));
    }
    let (py, qy) = simplest_in_open_i128((d, hi_minus_q), (b, frac_lo))?;
    Some((q.checked_mul(py)?.checked_add(qy)?, py))
}

fn q_to_i128_frac(x: &Q) -> Option<(i128, i128)> {
    use num_traits::ToPrimitive;
    let num = x.numer().to_i128()?;
    let den = x.denom().to_i128()?;
    // headroom for the cross products inside the walk
    if num.unsigned_abs() >= (1u128 << 110) || den.unsigned_abs() >= (1u128 << 110) {
        return None;
    }
    Some((num, den))
}

/// Does the open interval `(lo, hi)` contain a point `p/q` with a (not
/// necessarily reduced) denominator `q` in `[l, u]`? Equivalently: a reduced
/// fraction whose denominator divides some integer in the window.
pub fn has_denominator_in_window(lo: &Q, hi: &Q, l: u64, u: u64) -> Result<bool, MeasureError> {
    fn multiple_in(q: &BigInt, l: u64, u: u64) -> bool {
        let u_big = BigInt::from(u);
        if q > &u_big {
            return false;
        }
        let m = &u_big / q;
        m * q >= BigInt::from(l)
    }
    fn multiple_in_i128(q: i128, l: u64, u: u64) -> bool {
        if q <= 0 || q > u as i128 {
            return false;
        }
        (u as i128 / q) * q >= l as i128
    }
    fn rec(lo: &Q, hi: &Q, l: u64, u: u64, depth: u32) -> Result<bool, MeasureError> {
        if lo >= hi {
            return Ok(false);
        }
        if depth > 200 {
            return Err(MeasureError::SizeCap {
                needed: depth as u64,
                cap: 200,
            });
        }
        let (p, q) = simplest_in_open(lo, hi);
        if q > BigInt::from(u) {
            return Ok(false);
        }
        if multiple_in(&q, l, u) {
            return Ok(true);
        }
        let split = q_big(p, q);
        Ok(rec(lo, &split, l, u, depth + 1)? || rec(&split, hi, l, u, depth + 1)?)
    }
    fn rec_i128(
        lo: (i128, i128),
        hi: (i128, i128),
        l: u64,
        u: u64,
        depth: u32,
    ) -> Option<Result<bool, MeasureError>> {
        if depth > 200 {
            return Some(Err(MeasureError::SizeCap {
                needed: depth as u64,
                cap: 200,
            }));
        }
        let (p, q) = simplest_in_open_i128(lo, hi)?;
        if q > u as i128 {
            return Some(Ok(false));
        }
        if multiple_in_i128(q, l, u) {
            return Some(Ok(true));
        }
        let left = rec_i128(lo, (p, q), l, u, depth + 1)?;
        if matches!(left, Ok(true)) || left.is_err() {
            return Some(left);
        }
        rec_i128((p, q), hi, l, u, depth + 1)
    }
    if lo >= hi {
        return Ok(false);
    }
    if let (Some(lo_f), Some(hi_f)) = (q_to_i128_frac(lo), q_to_i128_frac(hi)) {
        if lo_f.0 >= 0 {
            if let Some(result) = rec_i128(lo_f, hi_f, l, u, 0) {
                return result;
            }
        }
    }
    rec(lo, hi, l, u, 0)
}

/// Exact torus membership test for the simultaneous system with point
/// resonant sets: is `x` within `radius` of some `p/q` (`0 <= p <= q`,
/// `q` having a multiple in `[l, u]`)?
pub fn near_fraction_on_torus(x: &Q, radius: &Q, l: u64, u: u64) -> Result<bool, MeasureError> {
    if l > u {
        return Ok(false);
    }
    let lo = x - radius;
    let hi = x + radius;
    // a wrapping interval is within radius of 0 (= 0/q = q/q for every q)
    if lo.is_negative() || hi > q_int(1) {
        return Ok(true);
    }
    has_denominator_in_window(&lo, &hi, l, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q_ratio;

    fn q(n: i64, d: i64) -> Q {
        q_ratio(n, d)
    }

    /// brute-force minimal denominator in the open interval
    fn brute_min_den(lo: &Q, hi: &Q, max_q: i64) -> Option<(i64, i64)> {
        for den in 1..=max_q {
            let mut num = 0i64;
            loop {
                let f = q(num, den);
                if &f >= hi {
                    break;
                }
                if &f > lo {
                    return Some((num, den));
                }
                num += 1;
            }
        }
        None
    }

    #[test]
    fn matches_brute_force() {
        let cases = [
            (q(1, 3), q(1, 2)),
            (q(3, 10), q(4, 10)),
            (q(0, 1), q(1, 100)),
            (q(7, 16), q(9, 16)),
            (q(17, 64), q(18, 64)),
            (q(99, 100), q(199, 200)),
        ];
        for (lo, hi) in cases {
            let (p, qd) = simplest_in_open(&lo, &hi);
            let (bp, bq) = brute_min_den(&lo, &hi, 4000).unwrap();
            assert_eq!(qd, BigInt::from(bq), "interval ({lo}, {hi})");
            assert_eq!(p, BigInt::from(bp));
        }
    }

    #[test]
    fn open_endpoints_are_excluded() {
        // (1/2, 3/4): 1/2 itself must not be returned
        let (p, qd) = simplest_in_open(&q(1, 2), &q(3, 4));
        assert_eq!((p, qd), (BigInt::from(2), BigInt::from(3)));
    }

    #[test]
    fn golden_ratio_convergents_are_fibonacci() {
        // CF of 6180339887/10^10 starts [0; 1, 1, 1, ...]
        let x = q(6180339887, 10_000_000_000);
        let digits = continued_fraction(&x);
        assert!(digits[1..9].iter().all(|a| a == &BigInt::one()));
        let conv = convergents(&digits);
        let dens: Vec<i64> = conv
            .iter()
            .take(8)
            .map(|(_, d)| {
                use num_traits::ToPrimitive;
                d.to_i64().unwrap()
            })
            .collect();
        assert_eq!(&dens[..8], &[1, 1, 2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn window_decision() {
        // (0.30, 0.35) contains 1/3; denominators with multiples in [2, 4]:
        // 3 itself is in the window
        assert!(has_denominator_in_window(&q(30, 100), &q(35, 100), 2, 4).unwrap());
        // window [4, 4]: no p/4 lies in (0.3, 0.35)
        assert!(!has_denominator_in_window(&q(30, 100), &q(35, 100), 4, 4).unwrap());
        // [2, 1000]: certainly
        assert!(has_denominator_in_window(&q(30, 100), &q(35, 100), 2, 1000).unwrap());
    }

    #[test]
    fn torus_membership() {
        // x = 0.02, radius 0.03: wraps to contain 0 = 0/q for every q
        assert!(near_fraction_on_torus(&q(2, 100), &q(3, 100), 5, 10).unwrap());
        // x = 0.49 radius 1/100: (0.48, 0.50) with window [2,2]: 1/2 excluded (open)
        assert!(!near_fraction_on_torus(&q(49, 100), &q(1, 100), 2, 2).unwrap());
        // same point, radius 2/100: contains 1/2
        assert!(near_fraction_on_torus(&q(49, 100), &q(2, 100), 2, 2).unwrap());
    }
}
