//! Exact rational scalar type and small numeric helpers.

use alloc::string::String;
use alloc::string::ToString;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The exact scalar used for all geometry: arbitrary-precision rationals.
pub type Q = num_rational::BigRational;

/// Rational from an integer.
pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational `num/den`. Panics on zero denominator.
pub fn q_ratio(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Rational `num/den` from big integers.
pub fn q_big(num: BigInt, den: BigInt) -> Q {
    Q::new(num, den)
}

pub fn q_zero() -> Q {
    Q::zero()
}

pub fn q_one() -> Q {
    Q::one()
}

/// Exact value of a finite `f64` (every finite double is a dyadic rational).
pub fn q_from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

/// Nearest-double view of a rational; fine for reporting, never for decisions.
pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `x^k` for integer `k` (negative allowed, `x != 0`).
pub fn q_powi(x: &Q, k: i64) -> Q {
    if k == 0 {
        return q_one();
    }
    let mut base = if k > 0 { x.clone() } else { x.recip() };
    let mut e = k.unsigned_abs();
    let mut acc = q_one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Integer `r`-th root when exact: returns `m` with `m^r == n`.
pub fn exact_int_root(n: &BigInt, r: u32) -> Option<BigInt> {
    if r == 0 {
        return None;
    }
    if n.sign() == Sign::Minus {
        if r.is_multiple_of(2) {
            return None;
        }
        return exact_int_root(&(-n), r).map(|m| -m);
    }
    if n.is_zero() || n.is_one() || r == 1 {
        return Some(n.clone());
    }
    let m = n.nth_root(r);
    if m.pow(r) == *n {
        Some(m)
    } else {
        None
    }
}

/// `x^(num/den)` when the result is exactly rational, else `None`.
pub fn q_pow_rational(x: &Q, num: i64, den: i64) -> Option<Q> {
    debug_assert!(den > 0);
    if x.is_zero() {
        return if num > 0 { Some(q_zero()) } else { None };
    }
    if x.is_negative() {
        return None;
    }
    let root = if den == 1 {
        x.clone()
    } else {
        let rn = exact_int_root(x.numer(), den as u32)?;
        let rd = exact_int_root(x.denom(), den as u32)?;
        Q::new(rn, rd)
    };
    Some(q_powi(&root, num))
}

/// Nearest integer to a rational (ties round half away from zero).
pub fn q_round(x: &Q) -> BigInt {
    if x.is_negative() {
        return -q_round(&(-x));
    }
    let two = BigInt::from(2);
    let num2 = x.numer() * &two;
    let den = x.denom();
    // floor((2*num + den) / (2*den)) rounds nonnegative halves up
    (num2 + den).div_floor(&(den * two))
}

/// Natural log via `libm` on the nearest double.
pub fn q_ln(x: &Q) -> f64 {
    libm::log(q_to_f64(x))
}

/// Format with the given number of significant digits (shortest-ish, stable).
pub fn format_sig(x: f64, sig: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let s = alloc::format!("{:.*e}", sig.saturating_sub(1), x);
    let expv: i32 = s
        .find('e')
        .and_then(|epos| s[epos + 1..].parse().ok())
        .unwrap_or(0);
    if (-4..=8).contains(&expv) {
        // plain decimal for small exponents, scientific otherwise
        return alloc::format!("{:.*}", (sig as i32 - 1 - expv).max(0) as usize, x);
    }
    s
}
