//! Self-similar Cantor measure of intervals by digit subdivision.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::geom::space::CantorSpec;
use crate::geom::GeomError;
use crate::num::{q_big, q_one, q_zero, Q};

/// Cantor measure of the closed interval `[lo, hi]` inside `[0,1]`,
/// truncated at `depth` subdivision levels.
///
/// Returns `(value, error)` with the true measure in `[value, value + error]`:
/// `value` collects the mass of cylinders fully inside the interval, and
/// cylinders still straddling an endpoint at `depth` contribute their whole
/// mass to `error`. Intervals aligned to cylinder endpoints come out exact.
pub fn cantor_box_measure(
    lo: &Q,
    hi: &Q,
    spec: &CantorSpec,
    depth: u32,
) -> Result<(Q, Q), GeomError> {
    if lo > hi || lo < &q_zero() || hi > &q_one() {
        return Err(GeomError::MalformedInterval {
            axis: 0,
            detail: "cantor interval outside [0,1] or reversed".into(),
        });
    }
    if depth == 0 {
        return Err(GeomError::NotPositive("depth".into()));
    }
    let b = BigInt::from(spec.base());
    let s = spec.digits().len() as u64;
    let mut value = q_zero();
    let mut error = q_zero();
    // stack of (cylinder lo numerator, level, mass): cylinder = [num/b^level, (num+1)/b^level]
    let mut stack: Vec<(BigInt, u32, Q)> = alloc::vec![(BigInt::zero(), 0, q_one())];
    while let Some((num, level, mass)) = stack.pop() {
        let den = b.pow(level);
        let cyl_lo = q_big(num.clone(), den.clone());
        let cyl_hi = q_big(&num + 1, den);
        // skip when the overlap has empty interior (Cantor measure is atomless)
        if &cyl_hi <= lo || &cyl_lo >= hi {
            continue;
        }
        if lo <= &cyl_lo && &cyl_hi <= hi {
            value += mass;
            continue;
        }
        if level == depth {
            error += mass;
            continue;
        }
        let child_mass = mass / Q::from_integer(BigInt::from(s));
        for &digit in spec.digits() {
            let child_num = &num * spec.base() + digit;
            stack.push((child_num, level + 1, child_mass.clone()));
        }
    }
    Ok((value, error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{q_ratio, q_to_f64};

    #[test]
    fn full_support_is_one() {
        let spec = CantorSpec::new(3, vec![0, 2]).unwrap();
        let (v, e) = cantor_box_measure(&q_zero(), &q_one(), &spec, 5).unwrap();
        assert_eq!(v, q_one());
        assert_eq!(e, q_zero());
    }

    #[test]
    fn first_cylinder_half() {
        // b=3, digits {0,2}: [0, 1/3] is the first depth-1 cylinder
        let spec = CantorSpec::new(3, vec![0, 2]).unwrap();
        let (v, e) = cantor_box_measure(&q_zero(), &q_ratio(1, 3), &spec, 5).unwrap();
        assert_eq!(v, q_ratio(1, 2));
        assert_eq!(e, q_zero());
    }

    #[test]
    fn gap_has_measure_zero() {
        let spec = CantorSpec::new(3, vec![0, 2]).unwrap();
        let (v, e) = cantor_box_measure(&q_ratio(1, 3), &q_ratio(2, 3), &spec, 10).unwrap();
        assert_eq!(v, q_zero());
        assert_eq!(e, q_zero());
    }

    #[test]
    fn depth_cylinder_additivity() {
        let spec = CantorSpec::new(3, vec![0, 2]).unwrap();
        // depth-2 cylinders have mass 1/4 and the four of them sum to 1
        let mut total = q_zero();
        for (lo, hi) in [(0, 1), (2, 3), (6, 7), (8, 9)] {
            let (v, e) = cantor_box_measure(&q_ratio(lo, 9), &q_ratio(hi, 9), &spec, 4).unwrap();
            assert_eq!(e, q_zero());
            assert_eq!(v, q_ratio(1, 4));
            total += v;
        }
        assert_eq!(total, q_one());
    }

    #[test]
    fn truncation_brackets() {
        let spec = CantorSpec::new(3, vec![0, 2]).unwrap();
        let (v, e) = cantor_box_measure(&q_ratio(1, 10), &q_ratio(1, 2), &spec, 12).unwrap();
        // straddles two endpoints: at most two unresolved cylinders of mass 2^-12
        assert!(e <= q_ratio(2, 4096));
        let mid = q_to_f64(&v) + q_to_f64(&e) / 2.0;
        assert!(mid > 0.0 && mid < 1.0);
    }
}
