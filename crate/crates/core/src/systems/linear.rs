//! Systems of linear forms: resonant hyperplanes `{A_i : A_i q = p_i}`.
//!
//! The matrix `A` lives in `[0,1]^(dh)` seen as `d` factors of dimension
//! `h` (one per row). Items are integer tuples `(q_1..q_h, p_1..p_d)` with
//! `q != 0` and `|p_i| <= h max_k |q_k|`; the weight is
//! `beta = max_k PhiInv_k(|q_k|+)` through the generalized inverse
//! `PhiInv(m) = min { u : Phi(u) >= m }`. Level `n` enumerates the window
//! `Phi_k(M^n)/M <= |q_k|+ <= Phi_k(M^n)`.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Signed;

use super::rate::Rate;
use super::scheme::LevelScheme;
use super::{ResonantItem, SystemError};
use crate::geom::space::{AmbientSpace, FactorSpace};
use crate::measure::region::FactorGeometry;
use crate::num::{q_int, q_round, Q};

#[derive(Clone, Debug)]
pub struct LinearForms {
    pub d: usize,
    pub h: usize,
    /// The functions `Phi_k`: positive, nondecreasing, integer-valued.
    pub big_phi: Vec<Rate>,
    pub m: u64,
}

impl LinearForms {
    pub fn new(d: usize, h: usize, big_phi: Vec<Rate>, m: u64) -> Result<Self, SystemError> {
        if d == 0 || h == 0 {
            return Err(SystemError::BadParams("d and h must be positive".into()));
        }
        if big_phi.len() != h {
            return Err(SystemError::BadParams(format!(
                "need {h} growth functions, got {}",
                big_phi.len()
            )));
        }
        if m < 2 {
            return Err(SystemError::BadParams("M must be at least 2".into()));
        }
        let fam = LinearForms { d, h, big_phi, m };
        // nondecreasing positive integer values on a sanity window
        for k in 0..h {
            let mut prev = 0u64;
            for u in 1..=64u64 {
                let v = fam.phi_int(k, u);
                if v == 0 || v < prev {
                    return Err(SystemError::BadParams(format!(
                        "Phi_{k} must be positive and nondecreasing"
                    )));
                }
                prev = v;
            }
        }
        Ok(fam)
    }

    /// `d` Lebesgue factors of dimension `h`; hyperplanes scale with
    /// `kappa = (h-1)/h`.
    pub fn space(&self) -> Result<AmbientSpace, SystemError> {
        let kappa = (self.h as f64 - 1.0) / self.h as f64;
        let mut factors = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            factors.push(FactorSpace::lebesgue(self.h, kappa, false)?);
        }
        AmbientSpace::new(factors).map_err(SystemError::Geometry)
    }

    /// Integer value of `Phi_k(u)`.
    pub fn phi_int(&self, k: usize, u: u64) -> u64 {
        let v = self.big_phi[k].eval(u as f64);
        libm::round(v).max(0.0) as u64
    }

    /// Generalized inverse `min { u >= 1 : Phi_k(u) >= m }`.
    pub fn phi_inv(&self, k: usize, m: u64) -> u64 {
        let mut hi = 1u64;
        while self.phi_int(k, hi) < m {
            hi = hi.saturating_mul(2);
            if hi > (1 << 62) {
                return hi;
            }
        }
        let mut lo = if hi == 1 { 1 } else { hi / 2 };
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.phi_int(k, mid) >= m {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        hi
    }

    pub fn beta(&self, index: &[i64]) -> Result<u64, SystemError> {
        if index.len() != self.h + self.d {
            return Err(SystemError::BadParams(format!(
                "linear-forms index must have h + d = {} entries",
                self.h + self.d
            )));
        }
        let mut best = 0u64;
        for (k, qk) in index.iter().take(self.h).enumerate() {
            best = best.max(self.phi_inv(k, qk.unsigned_abs().max(1)));
        }
        Ok(best)
    }

    /// Allowed `q_k` values at level `n`, ascending.
    fn q_choices(&self, k: usize, n: u32) -> Vec<i64> {
        let upper = self.phi_int(k, self.m.pow(n)) as i64;
        let lower = (self.phi_int(k, self.m.pow(n)).div_ceil(self.m) as i64).max(1);
        let mut vals = Vec::new();
        for q in -upper..=-lower {
            vals.push(q);
        }
        if lower <= 1 {
            vals.push(0);
        }
        for q in lower..=upper {
            vals.push(q);
        }
        vals
    }

    pub fn enumerate_level(
        &self,
        scheme: &LevelScheme,
        n: u32,
        cap: u64,
    ) -> Result<Vec<ResonantItem>, SystemError> {
        match scheme {
            LevelScheme::MAdic { m } if *m == self.m => {}
            _ => {
                return Err(SystemError::BadParams(format!(
                    "linear forms enumerate over the M-adic scheme with M = {}",
                    self.m
                )))
            }
        }
        let choices: Vec<Vec<i64>> = (0..self.h).map(|k| self.q_choices(k, n)).collect();

        // count first, with the per-item p ranges
        let mut count: u128 = 0;
        let mut cursor = alloc::vec![0usize; self.h];
        loop {
            let q: Vec<i64> = (0..self.h).map(|k| choices[k][cursor[k]]).collect();
            if q.iter().any(|&v| v != 0) {
                let maxq = q.iter().map(|v| v.unsigned_abs()).max().unwrap();
                let p_each = (2 * (self.h as u128) * maxq as u128) + 1;
                count = count.saturating_add(p_each.saturating_pow(self.d as u32));
                if count > cap as u128 {
                    return Err(SystemError::SizeCap { count, cap });
                }
            }
            if !advance_mixed(&mut cursor, &choices) {
                break;
            }
        }

        let mut items = Vec::with_capacity(count as usize);
        let mut cursor = alloc::vec![0usize; self.h];
        loop {
            let q: Vec<i64> = (0..self.h).map(|k| choices[k][cursor[k]]).collect();
            if q.iter().any(|&v| v != 0) {
                let maxq = q.iter().map(|v| v.unsigned_abs()).max().unwrap() as i64;
                let bound = self.h as i64 * maxq;
                let beta = {
                    let mut best = 0u64;
                    for (k, qk) in q.iter().enumerate() {
                        best = best.max(self.phi_inv(k, qk.unsigned_abs().max(1)));
                    }
                    best
                };
                let mut p = alloc::vec![-bound; self.d];
                loop {
                    let mut index = q.clone();
                    index.extend(p.iter().copied());
                    let geometry = p
                        .iter()
                        .map(|&pi| FactorGeometry::Affine {
                            normal: q.clone(),
                            offset: pi,
                        })
                        .collect();
                    items.push(ResonantItem {
                        index,
                        beta,
                        geometry,
                    });
                    if !advance_range(&mut p, -bound, bound) {
                        break;
                    }
                }
            }
            if !advance_mixed(&mut cursor, &choices) {
                break;
            }
        }
        Ok(items)
    }

    /// Membership at window `[l_n, u_n]`: some `q` with weight in the window
    /// brings every row within its radius of an integer.
    pub fn hits_level(
        &self,
        point: &[Q],
        psi_radii: &[Q],
        scheme: &LevelScheme,
        n: u32,
        cap: u64,
    ) -> Result<bool, SystemError> {
        if point.len() != self.d * self.h || psi_radii.len() != self.d {
            return Err(SystemError::BadParams("point/radii arity".into()));
        }
        let (l, u) = scheme.bounds(n);
        let outer: Vec<u64> = (0..self.h).map(|k| self.phi_int(k, u)).collect();
        let inner: Vec<u64> = if l >= 2 {
            (0..self.h).map(|k| self.phi_int(k, l - 1)).collect()
        } else {
            alloc::vec![0; self.h]
        };
        let mut total: u128 = 1;
        for &o in &outer {
            total = total.saturating_mul(2 * o as u128 + 1);
        }
        if total > cap as u128 {
            return Err(SystemError::SizeCap { count: total, cap });
        }
        let mut q = alloc::vec![0i64; self.h];
        for (k, &o) in outer.iter().enumerate() {
            q[k] = -(o as i64);
        }
        loop {
            let nonzero = q.iter().any(|&v| v != 0);
            // weight in window: inside the outer box but not the inner box
            let in_inner = l >= 2
                && q.iter()
                    .enumerate()
                    .all(|(k, &v)| v.unsigned_abs().max(1) <= inner[k]);
            if nonzero && !in_inner {
                let mut all = true;
                for i in 0..self.d {
                    let row = &point[i * self.h..(i + 1) * self.h];
                    let mut dot = q_int(0);
                    for (x, &qk) in row.iter().zip(q.iter()) {
                        dot += x * q_int(qk);
                    }
                    let residual = (&dot - Q::from_integer(q_round(&dot))).abs();
                    if residual >= psi_radii[i] {
                        all = false;
                        break;
                    }
                }
                if all {
                    return Ok(true);
                }
            }
            // advance q through the outer box
            let mut done = true;
            for k in (0..self.h).rev() {
                if q[k] < outer[k] as i64 {
                    q[k] += 1;
                    done = false;
                    break;
                }
                q[k] = -(outer[k] as i64);
            }
            if done {
                return Ok(false);
            }
        }
    }
}

fn advance_mixed(cursor: &mut [usize], choices: &[Vec<i64>]) -> bool {
    for k in (0..cursor.len()).rev() {
        if cursor[k] + 1 < choices[k].len() {
            cursor[k] += 1;
            return true;
        }
        cursor[k] = 0;
    }
    false
}

fn advance_range(p: &mut [i64], lo: i64, hi: i64) -> bool {
    for axis in (0..p.len()).rev() {
        if p[axis] < hi {
            p[axis] += 1;
            return true;
        }
        p[axis] = lo;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q_ratio;

    fn identity_phi() -> Rate {
        Rate::power(q_int(1), 1)
    }

    #[test]
    fn generalized_inverse() {
        // Phi(u) = 2u: PhiInv(5) = min { u : 2u >= 5 } = 3
        let fam = LinearForms::new(1, 1, alloc::vec![Rate::power(q_int(2), 1)], 2).unwrap();
        assert_eq!(fam.phi_inv(0, 5), 3);
        assert_eq!(fam.phi_inv(0, 1), 1);
        assert_eq!(fam.phi_inv(0, 6), 3);
        assert_eq!(fam.phi_inv(0, 7), 4);
    }

    #[test]
    fn beta_uses_q_plus() {
        // |q|+ = max(1, |q|): the zero component contributes PhiInv(1) = 1
        let fam = LinearForms::new(1, 2, alloc::vec![identity_phi(), identity_phi()], 2).unwrap();
        assert_eq!(fam.beta(&[0, 3, 0]).unwrap(), 3);
        assert_eq!(fam.beta(&[0, 0, 0]).unwrap(), 1);
    }

    #[test]
    fn level_window_enumeration() {
        // h=d=1, Phi(u)=u, M=2, n=2: 2 <= |q|+ <= 4, |p| <= |q|
        let fam = LinearForms::new(1, 1, alloc::vec![identity_phi()], 2).unwrap();
        let items = fam
            .enumerate_level(&LevelScheme::MAdic { m: 2 }, 2, 10_000)
            .unwrap();
        let q_vals: Vec<i64> = items.iter().map(|it| it.index[0]).collect();
        assert!(q_vals.iter().all(|q| (2..=4).contains(&q.abs())));
        // per q: 2|q|+1 offsets
        let expected: usize = [2i64, 3, 4].iter().map(|q| 2 * (2 * q + 1)).sum::<i64>() as usize;
        assert_eq!(items.len(), expected);
        // every item's weight is within the level bound
        assert!(items.iter().all(|it| it.beta <= 4));
        // index order is lexicographic
        let mut sorted = items.clone();
        sorted.sort_by(|a, b| a.index.cmp(&b.index));
        assert_eq!(
            items.iter().map(|i| &i.index).collect::<Vec<_>>(),
            sorted.iter().map(|i| &i.index).collect::<Vec<_>>()
        );
    }

    #[test]
    fn membership_by_rounding() {
        // A = [0.5], q in window [1, 2] (n=1, M=2): |0.5 q - p| minimal at
        // q=2, p=1 with residual 0
        let fam = LinearForms::new(1, 1, alloc::vec![identity_phi()], 2).unwrap();
        let hit = fam
            .hits_level(
                &[q_ratio(1, 2)],
                &[q_ratio(1, 100)],
                &LevelScheme::MAdic { m: 2 },
                1,
                10_000,
            )
            .unwrap();
        assert!(hit);
        // A = [1/3] with tiny radius: 3 is outside the window [1, 2]
        let miss = fam
            .hits_level(
                &[q_ratio(1, 3)],
                &[q_ratio(1, 100)],
                &LevelScheme::MAdic { m: 2 },
                1,
                10_000,
            )
            .unwrap();
        assert!(!miss);
    }
}
