//! Rate sanitization: normalize approximation rates before building
//! ubiquity functions.
//!
//! Simultaneous system: if `q * prod phi_i(q) > 1` for all large `q` the
//! limsup set is everything (convex-body existence at every scale), so the
//! full-measure flag short-circuits. Otherwise each rate is floored at
//! `q^(-1 - 1/(2d))`, which changes the limsup set only by a null set.
//!
//! Linear forms: an inductive blend lifts the rates on the levels where
//! `(max Phi)^d * prod Phi * prod phi` drops below a slowly growing `f`,
//! keeping them nonincreasing, no smaller than the originals, and equal to
//! the originals on the good set `N1`. The blend parameter solves
//! `G(t) = prod(t * prev_i + (1-t) * phi_i(u)) = target(u)` by bisection.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Signed;

use super::rate::Rate;
use super::SystemError;
use crate::num::q_int;

/// Result of sanitization: the adjusted rates plus the bookkeeping record.
#[derive(Clone, Debug)]
pub struct SanitizedRates {
    /// Adjusted rates (`phi_bar` or the tabulated `phi_tilde`).
    pub phi: Vec<Rate>,
    /// The limsup set is trivially of full measure; rate construction stops.
    pub full_measure: bool,
    /// Membership of each `u` in the good set `N1` (index 0 is `u = 1`).
    pub n1: Vec<bool>,
    /// First element of `N1`, if any was found on the window.
    pub u0: Option<u64>,
    /// Exponent of the auxiliary `f(u) = (max Phi)^epsilon`, when used.
    pub f_epsilon: Option<f64>,
    pub warnings: Vec<String>,
}

/// Simultaneous-approximation sanitization on `[1, window]`.
pub fn sanitize_simultaneous(
    phi: &[Rate],
    d: usize,
    window: u64,
) -> Result<SanitizedRates, SystemError> {
    if phi.len() != d || d == 0 {
        return Err(SystemError::BadParams("need d rates".into()));
    }
    for (i, rate) in phi.iter().enumerate() {
        if !rate.is_nonincreasing_on(1, window.min(4096)) {
            return Err(SystemError::BadParams(format!(
                "phi_{i} must be nonincreasing"
            )));
        }
    }
    // q * prod phi_i(q) > 1 eventually?
    let mut product = Rate::power(q_int(1), 1);
    for rate in phi {
        product = match product.symbolic_mul(rate) {
            Some(p) => p,
            None => {
                // non-symbolic input: decide on the tail of the window
                return sanitize_simultaneous_tabulated(phi, d, window);
            }
        };
    }
    let full = symbolic_exceeds_one_eventually(&product);
    if full {
        return Ok(SanitizedRates {
            phi: phi.to_vec(),
            full_measure: true,
            n1: Vec::new(),
            u0: None,
            f_epsilon: None,
            warnings: Vec::new(),
        });
    }
    let floor = Rate::power_rational(q_int(1), -(2 * d as i64 + 1), 2 * d as i64);
    let phi_bar = phi
        .iter()
        .map(|rate| max_simplified(rate, &floor))
        .collect();
    Ok(SanitizedRates {
        phi: phi_bar,
        full_measure: false,
        n1: Vec::new(),
        u0: None,
        f_epsilon: None,
        warnings: Vec::new(),
    })
}

/// Keep the symbolic form when one side dominates on `[1, oo)`.
fn max_simplified(a: &Rate, b: &Rate) -> Rate {
    if let (Some(pa), Some(pb)) = (a.as_pow(), b.as_pow()) {
        if pa.geo.is_none() && pb.geo.is_none() {
            let dominates = |x: &super::rate::PowRate, y: &super::rate::PowRate| {
                x.u_exp >= y.u_exp && x.log_exp >= y.log_exp && x.coeff >= y.coeff
            };
            if dominates(pa, pb) {
                return a.clone();
            }
            if dominates(pb, pa) {
                return b.clone();
            }
        }
    }
    Rate::max(a.clone(), b.clone())
}

fn sanitize_simultaneous_tabulated(
    phi: &[Rate],
    d: usize,
    window: u64,
) -> Result<SanitizedRates, SystemError> {
    let tail_start = (window / 2).max(1);
    let mut all_above = true;
    for u in tail_start..=window {
        let mut t = u as f64;
        for rate in phi {
            t *= rate.eval(u as f64);
        }
        if t <= 1.0 {
            all_above = false;
            break;
        }
    }
    if all_above {
        return Ok(SanitizedRates {
            phi: phi.to_vec(),
            full_measure: true,
            n1: Vec::new(),
            u0: None,
            f_epsilon: None,
            warnings: alloc::vec!["full-measure decided on a finite tail window".into()],
        });
    }
    let floor = Rate::power_rational(q_int(1), -(2 * d as i64 + 1), 2 * d as i64);
    Ok(SanitizedRates {
        phi: phi
            .iter()
            .map(|r| Rate::max(r.clone(), floor.clone()))
            .collect(),
        full_measure: false,
        n1: Vec::new(),
        u0: None,
        f_epsilon: None,
        warnings: Vec::new(),
    })
}

/// `c u^a log(u)^b s^u > 1` for all large `u`.
fn symbolic_exceeds_one_eventually(rate: &Rate) -> bool {
    let p = match rate.as_pow() {
        Some(p) => p,
        None => return false,
    };
    if let Some(geo) = &p.geo {
        if geo > &q_int(1) {
            return true;
        }
        if geo < &q_int(1) {
            return false;
        }
    }
    if p.u_exp.is_positive() {
        return true;
    }
    if p.u_exp.is_negative() {
        return false;
    }
    if p.log_exp.is_positive() {
        return true;
    }
    if p.log_exp.is_negative() {
        return false;
    }
    p.coeff > q_int(1)
}

/// Linear-forms sanitization on `[1, window]`: the inductive lift.
///
/// `epsilon` picks `f(u) = (max_k Phi_k(u))^epsilon`. `m_for_growth`, when
/// given, additionally checks `c1 Phi_k(M^n) <= Phi_k(M^(n+1)) <= c2 Phi_k(M^n)`
/// with constants `c1, c2 > 1` on the tested range (violations become
/// warnings in the record).
pub fn sanitize_linear_forms(
    phi: &[Rate],
    big_phi: &[Rate],
    d: usize,
    h: usize,
    epsilon: f64,
    window: u64,
    m_for_growth: Option<u64>,
) -> Result<SanitizedRates, SystemError> {
    if phi.len() != d || big_phi.len() != h || d == 0 || h == 0 {
        return Err(SystemError::BadParams(
            "need d rates and h growth functions".into(),
        ));
    }
    if !(0.0..(d as f64)).contains(&epsilon) || epsilon <= 0.0 {
        return Err(SystemError::BadParams("epsilon must lie in (0, d)".into()));
    }
    for (i, rate) in phi.iter().enumerate() {
        if !rate.is_nonincreasing_on(1, window.min(4096)) {
            return Err(SystemError::BadParams(format!(
                "phi_{i} must be nonincreasing"
            )));
        }
    }
    let mut warnings = Vec::new();

    let max_phi = |u: u64| -> f64 {
        big_phi
            .iter()
            .map(|r| libm::round(r.eval(u as f64)))
            .fold(1.0f64, f64::max)
    };
    let prod_phi_big = |u: u64| -> f64 {
        big_phi
            .iter()
            .map(|r| libm::round(r.eval(u as f64)))
            .product()
    };
    let f_val = |u: u64| -> f64 { libm::pow(max_phi(u), epsilon) };
    let target = |u: u64| -> f64 { f_val(u) / (libm::pow(max_phi(u), d as f64) * prod_phi_big(u)) };

    // growth constants along M-adic levels
    if let Some(m) = m_for_growth {
        let mut n = 1u32;
        while (m as u128).pow(n + 1) <= window as u128 {
            for (k, rate) in big_phi.iter().enumerate() {
                let a = libm::round(rate.eval(m.pow(n) as f64));
                let b = libm::round(rate.eval(m.pow(n + 1) as f64));
                if b <= a {
                    warnings.push(format!(
                        "Phi_{k} growth not strict between levels {n} and {}",
                        n + 1
                    ));
                }
            }
            n += 1;
        }
    }
    // target must be nonincreasing for the induction to stay consistent
    let mut prev_target = target(1);
    for u in 2..=window.min(4096) {
        let t = target(u);
        if t > prev_target * (1.0 + 1e-9) {
            warnings.push(format!("auxiliary target increases at u = {u}"));
            break;
        }
        prev_target = t;
    }

    let in_n1 = |u: u64| -> bool {
        let mut lhs = libm::pow(max_phi(u), d as f64) * prod_phi_big(u);
        for rate in phi {
            lhs *= rate.eval(u as f64);
        }
        lhs >= f_val(u)
    };
    let n1: Vec<bool> = (1..=window).map(in_n1).collect();
    let u0 = n1.iter().position(|&b| b).map(|i| i as u64 + 1);

    let mut tables: Vec<Vec<f64>> = alloc::vec![Vec::with_capacity(window as usize); d];
    let start = match u0 {
        Some(u0) => u0,
        None => {
            warnings.push(
                "good set empty on the window; lifting the first value to seed the induction"
                    .into(),
            );
            1
        }
    };
    // below the seed the rates are untouched
    for u in 1..start {
        for (i, rate) in phi.iter().enumerate() {
            tables[i].push(rate.eval(u as f64));
        }
    }
    // seed
    for (i, rate) in phi.iter().enumerate() {
        let mut v = rate.eval(start as f64);
        if u0.is_none() {
            // redefine the first value large enough that the product meets
            // the target, mirroring the redefinition of phi(1)
            v = v.max(libm::pow(target(start), 1.0 / d as f64));
        }
        tables[i].push(v);
    }
    for u in start + 1..=window {
        if in_n1(u) {
            for (i, rate) in phi.iter().enumerate() {
                tables[i].push(rate.eval(u as f64));
            }
            continue;
        }
        let prev: Vec<f64> = tables.iter().map(|t| *t.last().unwrap()).collect();
        let cur: Vec<f64> = phi.iter().map(|r| r.eval(u as f64)).collect();
        let g = |t: f64| -> f64 {
            let mut acc = 1.0;
            for i in 0..d {
                acc *= t * prev[i] + (1.0 - t) * cur[i];
            }
            acc
        };
        let want = target(u);
        // G is increasing in t; bisect on [0, 1]
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        if g(1.0) <= want {
            lo = 1.0;
        } else if g(0.0) >= want {
            hi = 0.0;
        } else {
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if g(mid) < want {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let t_star = 0.5 * (lo + hi);
        for i in 0..d {
            tables[i].push(t_star * prev[i] + (1.0 - t_star) * cur[i]);
        }
    }

    let phi_tilde: Vec<Rate> = tables.into_iter().map(|t| Rate::table(1, t)).collect();

    // the convex-body cap: prod phi_tilde * prod Phi <= 1, else full measure
    let mut full = false;
    for u in 1..=window {
        let mut v = prod_phi_big(u);
        for rate in &phi_tilde {
            v *= rate.eval(u as f64);
        }
        if v > 1.0 + 1e-9 {
            full = true;
            break;
        }
    }

    Ok(SanitizedRates {
        phi: phi_tilde,
        full_measure: full,
        n1,
        u0,
        f_epsilon: Some(epsilon),
        warnings,
    })
}

/// Convenience: the `q^(-1-1/(2d))` floor used by the simultaneous system.
pub fn dirichlet_floor(d: usize) -> Rate {
    Rate::power_rational(q_int(1), -(2 * d as i64 + 1), 2 * d as i64)
}

/// `phi_bar >= phi`, `phi_bar` nonincreasing, and equality on `N1` — the
/// pointwise sanity bundle callers assert in tests.
pub fn sanitized_invariants_hold(
    original: &[Rate],
    sanitized: &SanitizedRates,
    window: u64,
) -> bool {
    for (orig, new) in original.iter().zip(sanitized.phi.iter()) {
        if !new.is_nonincreasing_on(1, window) {
            return false;
        }
        for u in 1..=window {
            let o = orig.eval(u as f64);
            let s = new.eval(u as f64);
            if s < o * (1.0 - 1e-9) {
                return false;
            }
            if let Some(&good) = sanitized.n1.get(u as usize - 1) {
                if good && (s - o).abs() > 1e-9 * o.abs().max(1e-300) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q_int;

    #[test]
    fn dirichlet_floor_applies() {
        // d=1, phi(q) = q^-3: floored to q^-3/2
        let phi = [Rate::power(q_int(1), -3)];
        let out = sanitize_simultaneous(&phi, 1, 1000).unwrap();
        assert!(!out.full_measure);
        let bar = &out.phi[0];
        assert_eq!(bar.eval_exact(4), Some(crate::num::q_ratio(1, 8)));
        assert!((bar.eval(9.0) - 1.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn minkowski_short_circuit() {
        // d=1, phi(q) = 2/q: q*phi = 2 > 1 always, full measure
        let phi = [Rate::power(q_int(2), -1)];
        let out = sanitize_simultaneous(&phi, 1, 1000).unwrap();
        assert!(out.full_measure);
        // boundary case q*phi = 1 is not "> 1": no flag
        let phi = [Rate::power(q_int(1), -1)];
        let out = sanitize_simultaneous(&phi, 1, 1000).unwrap();
        assert!(!out.full_measure);
    }

    #[test]
    fn inductive_lift_matches_closed_form() {
        // h=d=1, Phi(u)=u, phi(u)=u^-5, f(u)=u^0.1:
        // N1 = {1}; for u >= 2 the lift solves to u^-1.9 = f/(Phi^2)
        let phi = [Rate::power(q_int(1), -5)];
        let big = [Rate::power(q_int(1), 1)];
        let out = sanitize_linear_forms(&phi, &big, 1, 1, 0.1, 200, Some(2)).unwrap();
        assert!(!out.full_measure);
        assert_eq!(out.u0, Some(1));
        assert!(out.n1[0]);
        assert!(!out.n1[1]);
        for u in 2..=200u64 {
            let got = out.phi[0].eval(u as f64);
            let want = libm::pow(u as f64, -1.9);
            assert!((got - want).abs() <= 1e-9 * want, "u={u}: {got} vs {want}");
        }
        assert!(sanitized_invariants_hold(&phi, &out, 200));
    }

    #[test]
    fn cap_flags_full_measure() {
        // phi too large for (g2): prod phi * prod Phi > 1 somewhere
        let phi = [Rate::power(q_int(3), 0)];
        let big = [Rate::power(q_int(1), 1)];
        let out = sanitize_linear_forms(&phi, &big, 1, 1, 0.1, 50, None).unwrap();
        assert!(out.full_measure);
    }
}
