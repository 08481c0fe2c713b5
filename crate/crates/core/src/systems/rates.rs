//! Building the approximating and ubiquity rate pairs per system.
//!
//! Simultaneous: `psi_i(q) = phi_i(q)/q` and
//! `rho_i(q) = psi_i(q) * (q prod_j phi_j(q))^(-1/d)`.
//!
//! Linear forms: `psi_i(u) = phi_i(u) / (h max_k Phi_k(u))` and
//! `rho_i(u) = M * (phi_i(u)/max_k Phi_k(u)) * (prod phi prod Phi)^(-1/d)`.
//!
//! Shrinking targets: `rho_i(n) = b_i^-n` and the effective approximating
//! radius `psi_i(n) = psi_raw_i(n) * b_i^-n` from rewriting the orbit
//! condition on the inverse images.

use alloc::format;
use alloc::vec::Vec;

use super::linear::LinearForms;
use super::rate::{is_lambda_regular, Rate};
use super::scheme::LevelScheme;
use super::shrinking::Shrinking;
use super::SystemError;
use crate::num::{q_from_f64, q_int, q_ratio};

/// Dense tables back non-symbolic rates; refuse windows that would not fit.
const MAX_TABLE_LEN: u64 = 1 << 24;

/// Which tuple carries the lambda-regularity used by the dichotomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegularSide {
    Psi,
    Rho,
}

/// The per-factor rate pair with its level scheme and regularity record.
#[derive(Clone, Debug)]
pub struct RatePair {
    pub psi: Vec<Rate>,
    pub rho: Vec<Rate>,
    pub scheme: LevelScheme,
    /// Recorded contraction constant along consecutive levels.
    pub lambda: Option<f64>,
    pub regular_side: RegularSide,
}

impl RatePair {
    /// `psi_i(u_n) <= rho_i(u_n)` for levels `1..=n_max`; errors name the
    /// first offending level.
    pub fn check_psi_le_rho(&self, n_max: u32) -> Result<(), SystemError> {
        for n in 1..=n_max {
            let u = self.scheme.upper_f64(n);
            for (i, (psi, rho)) in self.psi.iter().zip(self.rho.iter()).enumerate() {
                let a = psi.eval(u);
                let b = rho.eval(u);
                if a > b * (1.0 + 1e-12) {
                    return Err(SystemError::RateViolation {
                        level: n as u64,
                        detail: format!("psi_{i}({u}) = {a} > rho_{i}({u}) = {b}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Level values `u_1..u_n` (for regularity checks and series terms).
    pub fn level_uppers(&self, n_max: u32) -> Vec<f64> {
        (1..=n_max).map(|n| self.scheme.upper_f64(n)).collect()
    }
}

/// Rates for the simultaneous system from sanitized `phi`.
pub fn make_rates_simultaneous(
    phi: &[Rate],
    d: usize,
    m: u64,
    check_levels: u32,
) -> Result<RatePair, SystemError> {
    if phi.len() != d || d == 0 {
        return Err(SystemError::BadParams("need d sanitized rates".into()));
    }
    if m < 2 {
        return Err(SystemError::BadParams("M must be at least 2".into()));
    }
    let inv_q = Rate::power(q_int(1), -1);
    // q * prod phi_j(q), then its -1/d power
    let mut qprod = Rate::power(q_int(1), 1);
    let mut symbolic = true;
    for rate in phi {
        match qprod.symbolic_mul(rate) {
            Some(p) => qprod = p,
            None => {
                symbolic = false;
                break;
            }
        }
    }
    let (psi, rho): (Vec<Rate>, Vec<Rate>) = if symbolic {
        let correction = qprod
            .symbolic_pow(-1, d as i64)
            .or_else(|| {
                // irrational coefficient root: coerce through a double
                let p = qprod.as_pow()?;
                let c = libm::pow(crate::num::q_to_f64(&p.coeff), -1.0 / d as f64);
                let mut adjusted = p.clone();
                adjusted.coeff = q_int(1);
                let root = Rate::Pow(adjusted).symbolic_pow(-1, d as i64)?;
                root.symbolic_mul(&Rate::constant(q_from_f64(c)))
            })
            .ok_or_else(|| SystemError::BadParams("rates not closed under -1/d power".into()))?;
        let mut psi = Vec::with_capacity(d);
        let mut rho = Vec::with_capacity(d);
        for rate in phi {
            let psi_i = rate
                .symbolic_mul(&inv_q)
                .ok_or_else(|| SystemError::BadParams("non-symbolic rate".into()))?;
            let rho_i = psi_i
                .symbolic_mul(&correction)
                .ok_or_else(|| SystemError::BadParams("non-symbolic rate".into()))?;
            psi.push(psi_i);
            rho.push(rho_i);
        }
        (psi, rho)
    } else {
        // tabulate on [1, u_max]
        let u_max = LevelScheme::MAdic { m }.upper(check_levels);
        if u_max > MAX_TABLE_LEN {
            return Err(SystemError::BadParams(format!(
                "non-symbolic rates need a dense table of {u_max} entries; \
                 lower the level range or use the c*u^a*log(u)^b family"
            )));
        }
        let mut psi = Vec::with_capacity(d);
        let mut rho = Vec::with_capacity(d);
        for rate in phi {
            let mut tp = Vec::with_capacity(u_max as usize);
            let mut tr = Vec::with_capacity(u_max as usize);
            for u in 1..=u_max {
                let uf = u as f64;
                let mut qp = uf;
                for r2 in phi {
                    qp *= r2.eval(uf);
                }
                let psi_v = rate.eval(uf) / uf;
                tp.push(psi_v);
                tr.push(psi_v * libm::pow(qp, -1.0 / d as f64));
            }
            psi.push(Rate::table(1, tp));
            rho.push(Rate::table(1, tr));
        }
        (psi, rho)
    };

    let pair = RatePair {
        psi,
        rho,
        scheme: LevelScheme::MAdic { m },
        // psi_i(M^(n+1)) <= psi_i(M^n)/M by monotonicity of phi
        lambda: Some(1.0 / m as f64),
        regular_side: RegularSide::Psi,
    };
    pair.check_psi_le_rho(check_levels)?;
    let levels = pair.level_uppers(check_levels);
    for (i, psi) in pair.psi.iter().enumerate() {
        if !is_lambda_regular(psi, &levels, 1.0 / m as f64) {
            return Err(SystemError::RateViolation {
                level: 0,
                detail: format!("psi_{i} is not (1/M)-regular along the levels"),
            });
        }
    }
    Ok(pair)
}

/// Rates for the linear-forms system from sanitized `phi` and the family's
/// growth functions.
pub fn make_rates_linear(
    phi: &[Rate],
    family: &LinearForms,
    check_levels: u32,
) -> Result<RatePair, SystemError> {
    let d = family.d;
    let h = family.h;
    if phi.len() != d {
        return Err(SystemError::BadParams("need d sanitized rates".into()));
    }
    let u_max = LevelScheme::MAdic { m: family.m }.upper(check_levels);
    if u_max > MAX_TABLE_LEN {
        return Err(SystemError::BadParams(format!(
            "rate tables would need {u_max} entries; lower the level range"
        )));
    }
    let mut psi = Vec::with_capacity(d);
    let mut rho = Vec::with_capacity(d);
    for rate in phi {
        let mut tp = Vec::with_capacity(u_max as usize);
        let mut tr = Vec::with_capacity(u_max as usize);
        for u in 1..=u_max {
            let uf = u as f64;
            let maxphi = (0..h)
                .map(|k| family.phi_int(k, u) as f64)
                .fold(1.0f64, f64::max);
            let mut prod = 1.0;
            for r2 in phi {
                prod *= r2.eval(uf);
            }
            for k in 0..h {
                prod *= family.phi_int(k, u) as f64;
            }
            let base = rate.eval(uf) / maxphi;
            tp.push(base / h as f64);
            tr.push(family.m as f64 * base * libm::pow(prod, -1.0 / d as f64));
        }
        psi.push(Rate::table(1, tp));
        rho.push(Rate::table(1, tr));
    }

    // recorded lambda = 1/c1 with c1 the smallest observed level-to-level
    // growth of max Phi
    let mut c1 = f64::INFINITY;
    for n in 1..check_levels {
        for k in 0..h {
            let a = family.phi_int(k, family.m.pow(n)) as f64;
            let b = family.phi_int(k, family.m.pow(n + 1)) as f64;
            if a > 0.0 {
                c1 = c1.min(b / a);
            }
        }
    }
    let lambda = if c1.is_finite() && c1 > 1.0 {
        Some(1.0 / c1)
    } else {
        None
    };

    let pair = RatePair {
        psi,
        rho,
        scheme: LevelScheme::MAdic { m: family.m },
        lambda,
        regular_side: RegularSide::Psi,
    };
    pair.check_psi_le_rho(check_levels)?;
    Ok(pair)
}

/// Rates for the shrinking-target system from the raw orbit rates.
pub fn make_rates_shrinking(
    psi_raw: &[Rate],
    family: &Shrinking,
    check_levels: u32,
) -> Result<RatePair, SystemError> {
    let d = family.specs.len();
    if psi_raw.len() != d {
        return Err(SystemError::BadParams(
            "need one raw rate per factor".into(),
        ));
    }
    let mut psi = Vec::with_capacity(d);
    let mut rho = Vec::with_capacity(d);
    let mut min_b = u64::MAX;
    for (raw, spec) in psi_raw.iter().zip(family.specs.iter()) {
        let b = spec.base() as i64;
        min_b = min_b.min(spec.base() as u64);
        let geo = Rate::geometric(q_ratio(1, b));
        let psi_i = raw
            .symbolic_mul(&geo)
            .unwrap_or_else(|| tabulate_scaled(raw, b as u64, check_levels));
        psi.push(psi_i);
        rho.push(geo);
    }
    let pair = RatePair {
        psi,
        rho,
        scheme: LevelScheme::PerIndex,
        lambda: Some(1.0 / min_b as f64),
        regular_side: RegularSide::Rho,
    };
    pair.check_psi_le_rho(check_levels)?;
    Ok(pair)
}

fn tabulate_scaled(raw: &Rate, b: u64, levels: u32) -> Rate {
    let mut values = Vec::with_capacity(levels as usize);
    let mut scale = 1.0f64;
    for n in 1..=levels as u64 {
        scale /= b as f64;
        values.push(raw.eval(n as f64) * scale);
    }
    Rate::table(1, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::space::CantorSpec;
    use crate::num::{q_int, q_ratio, q_to_f64};

    #[test]
    fn simultaneous_closed_form_d2() {
        // d=2, phi_i(q) = 1/q: psi_i = q^-2, rho_i = q^-3/2
        let phi = [Rate::power(q_int(1), -1), Rate::power(q_int(1), -1)];
        let pair = make_rates_simultaneous(&phi, 2, 128, 3).unwrap();
        for u in [4u64, 9, 16, 100] {
            let want_psi = libm::pow(u as f64, -2.0);
            let want_rho = libm::pow(u as f64, -1.5);
            assert!((pair.psi[0].eval(u as f64) - want_psi).abs() < 1e-15 * want_psi);
            assert!((pair.rho[0].eval(u as f64) - want_rho).abs() < 1e-12 * want_rho);
        }
        // exact at perfect squares
        assert_eq!(pair.rho[0].eval_exact(16), Some(q_ratio(1, 64)));
    }

    #[test]
    fn simultaneous_d1() {
        // d=1, phi(q) = 1/q: psi = rho = q^-2
        let phi = [Rate::power(q_int(1), -1)];
        let pair = make_rates_simultaneous(&phi, 1, 16, 5).unwrap();
        assert_eq!(pair.psi[0].eval_exact(7), Some(q_ratio(1, 49)));
        assert_eq!(pair.rho[0].eval_exact(7), Some(q_ratio(1, 49)));
        pair.check_psi_le_rho(5).unwrap();
    }

    #[test]
    fn linear_forms_closed_form() {
        // h=d=1, Phi(u)=u, phi(u)=1/u, M=2: psi(u)=u^-2, rho(u)=M u^-2
        let fam = LinearForms::new(1, 1, alloc::vec![Rate::power(q_int(1), 1)], 2).unwrap();
        let phi = [Rate::power(q_int(1), -1)];
        let pair = make_rates_linear(&phi, &fam, 8).unwrap();
        for u in [2u64, 5, 32, 100] {
            let want_psi = libm::pow(u as f64, -2.0);
            let want_rho = 2.0 * want_psi;
            assert!((pair.psi[0].eval(u as f64) - want_psi).abs() < 1e-12 * want_psi);
            assert!((pair.rho[0].eval(u as f64) - want_rho).abs() < 1e-12 * want_rho);
        }
        assert_eq!(pair.lambda, Some(0.5));
    }

    #[test]
    fn shrinking_rates() {
        // b=2: rho(3) = 1/8; psi_raw(n) = 1/n gives psi(3) = 1/24
        let fam = Shrinking::new(
            alloc::vec![CantorSpec::full(2).unwrap()],
            alloc::vec![q_int(0)],
        )
        .unwrap();
        let pair = make_rates_shrinking(&[Rate::power(q_int(1), -1)], &fam, 10).unwrap();
        assert_eq!(pair.rho[0].eval_exact(3), Some(q_ratio(1, 8)));
        assert_eq!(pair.psi[0].eval_exact(3), Some(q_ratio(1, 24)));
        assert_eq!(pair.scheme, LevelScheme::PerIndex);
        let _ = q_to_f64(&q_int(1));
    }

    #[test]
    fn psi_above_rho_is_an_error() {
        // shrinking with psi_raw(n) = 2 > 1: psi = 2 b^-n > rho = b^-n
        let fam = Shrinking::new(
            alloc::vec![CantorSpec::full(2).unwrap()],
            alloc::vec![q_int(0)],
        )
        .unwrap();
        let err = make_rates_shrinking(&[Rate::constant(q_int(2))], &fam, 5).unwrap_err();
        assert!(matches!(err, SystemError::RateViolation { level: 1, .. }));
    }
}
