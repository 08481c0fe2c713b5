//! Rate functions: the symbolic family `c * u^a * log(u)^b * s^u`, tables,
//! and pointwise maxima.
//!
//! The symbolic family is closed under the products, quotients and rational
//! powers that build ubiquity functions out of approximation rates; the
//! geometric factor `s^u` carries the b-adic shrinking rates. Exponents are
//! rational so `u^(-3/2)`-style functions evaluate exactly whenever `u` is
//! a perfect power.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::num::{q_from_f64, q_int, q_pow_rational, q_powi, q_to_f64, Q};

/// `coeff * u^u_exp * ln(u)^log_exp * geo^u`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowRate {
    pub coeff: Q,
    pub u_exp: Rational64,
    pub log_exp: Rational64,
    pub geo: Option<Q>,
}

/// Values tabulated on consecutive integers `start_u ..`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    pub start_u: u64,
    pub values: Vec<f64>,
}

/// A positive rate function of one positive variable.
#[derive(Clone, Debug, PartialEq)]
pub enum Rate {
    Pow(PowRate),
    Table(RateTable),
    Max(Box<Rate>, Box<Rate>),
}

impl Rate {
    /// `c * u^a` with integer exponent.
    pub fn power(coeff: Q, u_exp: i64) -> Rate {
        Rate::Pow(PowRate {
            coeff,
            u_exp: Rational64::from_integer(u_exp),
            log_exp: Rational64::zero(),
            geo: None,
        })
    }

    /// `c * u^(num/den)`.
    pub fn power_rational(coeff: Q, num: i64, den: i64) -> Rate {
        Rate::Pow(PowRate {
            coeff,
            u_exp: Rational64::new(num, den),
            log_exp: Rational64::zero(),
            geo: None,
        })
    }

    /// `c * u^a * ln(u)^b`.
    pub fn power_log(coeff: Q, u_exp: Rational64, log_exp: Rational64) -> Rate {
        Rate::Pow(PowRate {
            coeff,
            u_exp,
            log_exp,
            geo: None,
        })
    }

    /// `s^u` (geometric), e.g. `b^-u` with `s = 1/b`.
    pub fn geometric(base: Q) -> Rate {
        Rate::Pow(PowRate {
            coeff: q_int(1),
            u_exp: Rational64::zero(),
            log_exp: Rational64::zero(),
            geo: Some(base),
        })
    }

    pub fn constant(c: Q) -> Rate {
        Rate::power(c, 0)
    }

    pub fn table(start_u: u64, values: Vec<f64>) -> Rate {
        Rate::Table(RateTable { start_u, values })
    }

    pub fn max(a: Rate, b: Rate) -> Rate {
        Rate::Max(Box::new(a), Box::new(b))
    }

    /// Evaluate at a positive real argument.
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Rate::Pow(p) => {
                let mut v = q_to_f64(&p.coeff) * libm::pow(u, rat_f64(p.u_exp));
                if !p.log_exp.is_zero() {
                    v *= libm::pow(libm::log(u), rat_f64(p.log_exp));
                }
                if let Some(geo) = &p.geo {
                    v *= libm::pow(q_to_f64(geo), u);
                }
                v
            }
            Rate::Table(t) => {
                let idx = (libm::round(u) as i64 - t.start_u as i64).max(0) as usize;
                t.values[idx.min(t.values.len().saturating_sub(1))]
            }
            Rate::Max(a, b) => {
                let va = a.eval(u);
                let vb = b.eval(u);
                if va >= vb {
                    va
                } else {
                    vb
                }
            }
        }
    }

    /// Exact rational value at integer `u >= 1`, when one exists.
    pub fn eval_exact(&self, u: u64) -> Option<Q> {
        match self {
            Rate::Pow(p) => {
                if u == 0 {
                    return None;
                }
                let mut v = p.coeff.clone();
                if !p.u_exp.is_zero() {
                    let base = q_int(u as i64);
                    v *= q_pow_rational(&base, *p.u_exp.numer(), *p.u_exp.denom())?;
                }
                if !p.log_exp.is_zero() {
                    if u == 1 && p.log_exp.is_positive() {
                        return Some(q_int(0) * v);
                    }
                    return None;
                }
                if let Some(geo) = &p.geo {
                    if u > (i32::MAX as u64) {
                        return None;
                    }
                    v *= q_powi(geo, u as i64);
                }
                Some(v)
            }
            Rate::Table(_) => None,
            Rate::Max(a, b) => {
                let va = a.eval_exact(u)?;
                let vb = b.eval_exact(u)?;
                Some(if va >= vb { va } else { vb })
            }
        }
    }

    /// Exact value with a double fallback.
    pub fn eval_q(&self, u: u64) -> Q {
        self.eval_exact(u)
            .unwrap_or_else(|| q_from_f64(self.eval(u as f64)))
    }

    /// Pointwise product of two symbolic rates (`None` if either is not
    /// symbolic).
    pub fn symbolic_mul(&self, other: &Rate) -> Option<Rate> {
        let (a, b) = match (self, other) {
            (Rate::Pow(a), Rate::Pow(b)) => (a, b),
            _ => return None,
        };
        let geo = match (&a.geo, &b.geo) {
            (None, None) => None,
            (Some(g), None) | (None, Some(g)) => Some(g.clone()),
            (Some(g1), Some(g2)) => Some(g1 * g2),
        };
        Some(Rate::Pow(PowRate {
            coeff: &a.coeff * &b.coeff,
            u_exp: a.u_exp + b.u_exp,
            log_exp: a.log_exp + b.log_exp,
            geo,
        }))
    }

    /// Symbolic power by a rational exponent. Requires the coefficient (and
    /// geometric base) to stay rational, i.e. they must have exact roots.
    pub fn symbolic_pow(&self, num: i64, den: i64) -> Option<Rate> {
        let p = match self {
            Rate::Pow(p) => p,
            _ => return None,
        };
        let e = Rational64::new(num, den);
        let coeff = q_pow_rational(&p.coeff, num, den)?;
        let geo = match &p.geo {
            None => None,
            Some(g) => Some(q_pow_rational(g, num, den)?),
        };
        Some(Rate::Pow(PowRate {
            coeff,
            u_exp: p.u_exp * e,
            log_exp: p.log_exp * e,
            geo,
        }))
    }

    /// The symbolic core, if any.
    pub fn as_pow(&self) -> Option<&PowRate> {
        match self {
            Rate::Pow(p) => Some(p),
            _ => None,
        }
    }

    /// Nonincreasing on `[from, to]`, sampled on integers (symbolic rates
    /// without logs are decided from the exponent sign when possible).
    pub fn is_nonincreasing_on(&self, from: u64, to: u64) -> bool {
        if let Rate::Pow(p) = self {
            if p.log_exp.is_zero() {
                let geo_le_one = p.geo.as_ref().map(|g| g <= &q_int(1)).unwrap_or(true);
                if !p.u_exp.is_positive() && geo_le_one {
                    return true;
                }
            }
        }
        let mut prev = self.eval(from.max(1) as f64);
        for u in from.max(1) + 1..=to {
            let v = self.eval(u as f64);
            if v > prev + prev.abs() * 1e-12 {
                return false;
            }
            prev = v;
        }
        true
    }

    /// Render in the `c*u^a*log(u)^b` config syntax.
    pub fn describe(&self) -> String {
        match self {
            Rate::Pow(p) => {
                let mut s = format!("{}", q_to_f64(&p.coeff));
                if !p.u_exp.is_zero() {
                    s += &format!("*u^{}", rat_str(p.u_exp));
                }
                if !p.log_exp.is_zero() {
                    s += &format!("*log(u)^{}", rat_str(p.log_exp));
                }
                if let Some(g) = &p.geo {
                    s += &format!("*{}^u", q_to_f64(g));
                }
                s
            }
            Rate::Table(t) => format!(
                "table[{}..{}]",
                t.start_u,
                t.start_u + t.values.len() as u64
            ),
            Rate::Max(a, b) => format!("max({}, {})", a.describe(), b.describe()),
        }
    }
}

/// `phi(u_{n+1}) <= lambda * phi(u_n)` along the given level values, for all
/// tested n.
pub fn is_lambda_regular(rate: &Rate, levels: &[f64], lambda: f64) -> bool {
    if levels.len() < 2 {
        return true;
    }
    for w in levels.windows(2) {
        let a = rate.eval(w[0]);
        let b = rate.eval(w[1]);
        if b > lambda * a * (1.0 + 1e-12) {
            return false;
        }
    }
    true
}

fn rat_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn rat_str(r: Rational64) -> String {
    if r.denom() == &1 {
        format!("{}", r.numer())
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q_ratio;

    #[test]
    fn symbolic_eval_exact() {
        // u^-2 at u=3 is 1/9, exactly
        let r = Rate::power(q_int(1), -2);
        assert_eq!(r.eval_exact(3), Some(q_ratio(1, 9)));
        // u^-3/2 at u=4 is 1/8, exactly; at u=3 it is irrational
        let r = Rate::power_rational(q_int(1), -3, 2);
        assert_eq!(r.eval_exact(4), Some(q_ratio(1, 8)));
        assert_eq!(r.eval_exact(3), None);
        assert!((r.eval(3.0) - libm::pow(3.0, -1.5)).abs() < 1e-15);
    }

    #[test]
    fn geometric_factor() {
        // 2^-u at u=5 is 1/32
        let r = Rate::geometric(q_ratio(1, 2));
        assert_eq!(r.eval_exact(5), Some(q_ratio(1, 32)));
        assert!((r.eval(5.0) - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn algebra_closure() {
        // (u^-1 * u^-1 * u)^(-1/2) = u^(1/2)
        let phi = Rate::power(q_int(1), -1);
        let prod = phi.symbolic_mul(&phi).unwrap();
        let times_u = prod.symbolic_mul(&Rate::power(q_int(1), 1)).unwrap();
        let root = times_u.symbolic_pow(-1, 2).unwrap();
        let p = root.as_pow().unwrap();
        assert_eq!(p.u_exp, Rational64::new(1, 2));
        assert_eq!(root.eval_exact(9), Some(q_int(3)));
    }

    #[test]
    fn max_and_monotonicity() {
        // max(u^-3, u^-3/2) = u^-3/2 for u >= 1
        let m = Rate::max(
            Rate::power(q_int(1), -3),
            Rate::power_rational(q_int(1), -3, 2),
        );
        assert_eq!(m.eval_exact(4), Some(q_ratio(1, 8)));
        assert!(m.is_nonincreasing_on(1, 50));
        assert!(!Rate::power(q_int(2), 1).is_nonincreasing_on(1, 10));
    }

    #[test]
    fn lambda_regularity_along_m_adic_levels() {
        // psi(q) = 1/q^2 along u_n = 2^n: psi(u_{n+1}) = psi(u_n)/4
        let psi = Rate::power(q_int(1), -2);
        let levels: Vec<f64> = (1..=10).map(|n| (1u64 << n) as f64).collect();
        assert!(is_lambda_regular(&psi, &levels, 0.25));
        assert!(!is_lambda_regular(&psi, &levels, 0.2));
    }
}
