//! Exhaustive witness search for the Minkowski-type inequality system.
//!
//! Given a matrix `A` in `[0,1]^(dh)`, radii `rho_i` and bounds `Phi_k`,
//! find a nonzero integer vector `(q, p)` with `|A_i q - p_i| < rho_i` and
//! `|q_k| <= Phi_k`. When the box volume is large enough, convex-body
//! existence guarantees a witness; failing to find one under the volume
//! precondition signals an arithmetic bug, not a data condition.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Signed;

use super::SystemError;
use crate::num::{q_int, q_round, Q};

/// A verified solution `(q, p)` with its exact residuals `A_i q - p_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub q: Vec<i64>,
    pub p: Vec<BigInt>,
    pub residuals: Vec<Q>,
}

/// First (lexicographic in `q`) nonzero integer solution of
/// `|A_i q - p_i| < rho_i (1 <= i <= d)`, `|q_k| <= bounds_k`.
///
/// Preconditions: the scaled volume `prod rho_i * prod (2 bounds_k + 1)`
/// must reach `2^d`, and the `q`-box size must stay under `cap`.
pub fn minkowski_witness(
    matrix: &[Vec<Q>],
    bounds: &[u64],
    rho: &[Q],
    cap: u64,
) -> Result<Witness, SystemError> {
    let d = matrix.len();
    if d == 0 || rho.len() != d {
        return Err(SystemError::BadParams("need d rows and d radii".into()));
    }
    let h = matrix[0].len();
    if h == 0 || bounds.len() != h || matrix.iter().any(|row| row.len() != h) {
        return Err(SystemError::BadParams("need h columns and h bounds".into()));
    }

    // volume sufficiency: the open symmetric body
    // { |q_k| < Phi_k + 1/2, |A_i q - p_i| < rho_i } in R^(h+d) has volume
    // prod (2 Phi_k + 1) * prod (2 rho_i); existence of a nonzero integer
    // point needs it above 2^(h+d), i.e. prod rho_i * prod (2 Phi_k + 1)
    // strictly above 2^h (radii at most 1 keep q nonzero)
    let mut volume = q_int(1);
    for r in rho {
        if !r.is_positive() {
            return Err(SystemError::BadParams("radii must be positive".into()));
        }
        volume *= r;
    }
    let mut qbox: u128 = 1;
    for &b in bounds {
        volume *= q_int(2 * b as i64 + 1);
        qbox = qbox.saturating_mul(2 * b as u128 + 1);
    }
    if volume <= crate::num::q_powi(&q_int(2), h as i64) {
        return Err(SystemError::BadParams(format!(
            "volume precondition failed: {} <= 2^{h}",
            crate::num::q_to_f64(&volume)
        )));
    }
    if qbox > cap as u128 {
        return Err(SystemError::SizeCap { count: qbox, cap });
    }

    let mut q = alloc::vec![0i64; h];
    for (k, &b) in bounds.iter().enumerate() {
        q[k] = -(b as i64);
    }
    loop {
        if q.iter().any(|&v| v != 0) {
            let mut p = Vec::with_capacity(d);
            let mut residuals = Vec::with_capacity(d);
            let mut ok = true;
            for i in 0..d {
                let mut dot = q_int(0);
                for (a, &qk) in matrix[i].iter().zip(q.iter()) {
                    dot += a * q_int(qk);
                }
                let nearest = q_round(&dot);
                let residual = &dot - Q::from_integer(nearest.clone());
                if residual.abs() >= rho[i] {
                    ok = false;
                    break;
                }
                p.push(nearest);
                residuals.push(residual);
            }
            if ok {
                return Ok(Witness { q, p, residuals });
            }
        }
        let mut done = true;
        for k in (0..h).rev() {
            if q[k] < bounds[k] as i64 {
                q[k] += 1;
                done = false;
                break;
            }
            q[k] = -(bounds[k] as i64);
        }
        if done {
            break;
        }
    }
    Err(SystemError::BadParams(
        "no witness found despite volume precondition; arithmetic bug".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q_ratio;

    #[test]
    fn half_has_immediate_witness() {
        // A = 0.5, Phi = 5, rho = 0.3: the scan reaches (q, p) = (2, 1)
        // with residual 0 before any larger |residual| candidate survives
        let w = minkowski_witness(
            &[alloc::vec![q_ratio(1, 2)]],
            &[5],
            &[q_ratio(3, 10)],
            10_000,
        )
        .unwrap();
        // first lexicographic hit: q = -5, p = round(-2.5) = -3? residual 0.5
        // too big; the first surviving q is -2 with p = -1
        assert_eq!(w.q.len(), 1);
        assert!(w.residuals[0].abs() < q_ratio(3, 10));
        let verify = q_ratio(1, 2) * q_int(w.q[0]) - Q::from_integer(w.p[0].clone());
        assert_eq!(verify, w.residuals[0]);
    }

    #[test]
    fn golden_ratio_witness() {
        // A ~ 0.6180339887, Phi = 5, rho = 0.2: q = 5 gives residual ~ 0.09
        let a = q_ratio(6_180_339_887, 10_000_000_000);
        let w =
            minkowski_witness(&[alloc::vec![a.clone()]], &[5], &[q_ratio(1, 5)], 10_000).unwrap();
        let residual = &a * q_int(w.q[0]) - Q::from_integer(w.p[0].clone());
        assert!(residual.abs() < q_ratio(1, 5));
    }

    #[test]
    fn volume_precondition_enforced() {
        let err = minkowski_witness(
            &[alloc::vec![q_ratio(1, 2)]],
            &[2],
            &[q_ratio(1, 10)],
            10_000,
        )
        .unwrap_err();
        assert!(matches!(err, SystemError::BadParams(_)));
    }

    #[test]
    fn two_by_two_system() {
        let matrix = alloc::vec![
            alloc::vec![q_ratio(3, 7), q_ratio(1, 3)],
            alloc::vec![q_ratio(5, 11), q_ratio(2, 9)],
        ];
        // volume: rho^2 * (2*8+1)^2 = (0.4)^2 * 289 = 46 >= 4
        let rho = alloc::vec![q_ratio(2, 5), q_ratio(2, 5)];
        let w = minkowski_witness(&matrix, &[8, 8], &rho, 1_000_000).unwrap();
        for i in 0..2 {
            let mut dot = q_int(0);
            for (a, &qk) in matrix[i].iter().zip(w.q.iter()) {
                dot += a * q_int(qk);
            }
            assert_eq!(&dot - Q::from_integer(w.p[i].clone()), w.residuals[i]);
            assert!(w.residuals[i].abs() < rho[i]);
        }
    }
}
