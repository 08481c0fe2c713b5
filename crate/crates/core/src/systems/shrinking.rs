//! b-adic shrinking targets on digit-restricted Cantor products.
//!
//! Factor `i` carries the base `b_i` map `x -> b_i x (mod 1)` restricted to
//! the Cantor set of allowed digits. The level-`n` items are the digit
//! words `w_i` of length `n`; the resonant point in factor `i` is the n-th
//! inverse image of the target inside the cylinder of `w_i`:
//! `x_i(w) = e_1/b + ... + (e_n + x_o)/b^n`.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::scheme::LevelScheme;
use super::{ResonantItem, SystemError};
use crate::geom::space::{AmbientSpace, CantorSpec, FactorSpace};
use crate::measure::region::FactorGeometry;
use crate::num::{q_big, q_int, Q};

#[derive(Clone, Debug)]
pub struct Shrinking {
    pub specs: Vec<CantorSpec>,
    pub target: Vec<Q>,
}

impl Shrinking {
    pub fn new(specs: Vec<CantorSpec>, target: Vec<Q>) -> Result<Self, SystemError> {
        if specs.is_empty() || specs.len() != target.len() {
            return Err(SystemError::BadParams(
                "need one cantor spec and one target coordinate per factor".into(),
            ));
        }
        for t in &target {
            if t.is_negative() || t > &q_int(1) {
                return Err(SystemError::BadParams("target outside [0,1]".into()));
            }
        }
        Ok(Shrinking { specs, target })
    }

    /// Full-digit factors degenerate to Lebesgue; restricted ones carry the
    /// Cantor measure. Non-torus per the absolute-value target distance.
    pub fn space(&self) -> Result<AmbientSpace, SystemError> {
        let mut factors = Vec::with_capacity(self.specs.len());
        for spec in &self.specs {
            if spec.digits().len() as u32 == spec.base() {
                factors.push(FactorSpace::lebesgue(1, 0.0, false)?);
            } else {
                factors.push(FactorSpace::cantor(spec.clone()));
            }
        }
        AmbientSpace::new(factors).map_err(SystemError::Geometry)
    }

    pub fn count_level(&self, n: u32) -> u128 {
        let mut total: u128 = 1;
        for spec in &self.specs {
            let per = (spec.digits().len() as u128).saturating_pow(n);
            total = total.saturating_mul(per);
        }
        total
    }

    /// Center `x_i(w)` of the word `w` in factor `i`.
    pub fn word_center(&self, factor: usize, word: &[u32]) -> Q {
        let spec = &self.specs[factor];
        let b = BigInt::from(spec.base());
        let mut num = BigInt::zero();
        for &digit in word {
            num = num * &b + BigInt::from(digit);
        }
        let den = b.pow(word.len() as u32);
        q_big(num, den.clone()) + &self.target[factor] / Q::from_integer(den)
    }

    pub fn enumerate_level(
        &self,
        scheme: &LevelScheme,
        n: u32,
        cap: u64,
    ) -> Result<Vec<ResonantItem>, SystemError> {
        if !matches!(scheme, LevelScheme::PerIndex) {
            return Err(SystemError::BadParams(
                "shrinking targets use the per-index level scheme (l_n = u_n = n)".into(),
            ));
        }
        let count = self.count_level(n);
        if count > cap as u128 {
            return Err(SystemError::SizeCap { count, cap });
        }
        let d = self.specs.len();
        let word_len = n as usize;
        // odometer over digit-set positions, factor-major then position
        let mut positions = alloc::vec![0usize; d * word_len];
        let mut items = Vec::with_capacity(count as usize);
        loop {
            let mut index = Vec::with_capacity(d * word_len);
            let mut geometry = Vec::with_capacity(d);
            for factor in 0..d {
                let spec = &self.specs[factor];
                let word: Vec<u32> = (0..word_len)
                    .map(|j| spec.digits()[positions[factor * word_len + j]])
                    .collect();
                index.extend(word.iter().map(|&digit| digit as i64));
                let center = self.word_center(factor, &word);
                geometry.push(FactorGeometry::CantorPreimage { word, center });
            }
            items.push(ResonantItem {
                index,
                beta: n as u64,
                geometry,
            });
            // advance with per-position radix = digit-set size of its factor
            let mut done = true;
            for pos in (0..positions.len()).rev() {
                let radix = self.specs[pos / word_len].digits().len();
                if positions[pos] + 1 < radix {
                    positions[pos] += 1;
                    done = false;
                    break;
                }
                positions[pos] = 0;
            }
            if done {
                break;
            }
        }
        Ok(items)
    }

    pub fn beta(&self, index: &[i64]) -> Result<u64, SystemError> {
        let d = self.specs.len();
        if index.is_empty() || !index.len().is_multiple_of(d) {
            return Err(SystemError::BadParams(format!(
                "shrinking index length must be a multiple of d = {d}"
            )));
        }
        Ok((index.len() / d) as u64)
    }

    /// Membership at level `n`: for every factor, `x_i` is within the given
    /// radius of some inverse image `x_i(w)` with an allowed digit word.
    /// Exact rational arithmetic.
    pub fn hits_level(
        &self,
        point: &[Q],
        psi_radii: &[Q],
        _scheme: &LevelScheme,
        n: u32,
    ) -> Result<bool, SystemError> {
        let d = self.specs.len();
        if point.len() != d || psi_radii.len() != d {
            return Err(SystemError::BadParams("point/radii arity".into()));
        }
        for factor in 0..d {
            let spec = &self.specs[factor];
            let b = BigInt::from(spec.base());
            let bn = b.pow(n);
            // |x - (m + x_o)/b^n| < r  <=>  |b^n x - x_o - m| < r b^n
            let t = &point[factor] * Q::from_integer(bn.clone()) - &self.target[factor];
            let threshold = &psi_radii[factor] * Q::from_integer(bn.clone());
            let lo = (&t - &threshold).ceil().to_integer();
            let hi = (&t + &threshold).floor().to_integer();
            let mut found = false;
            let mut m = lo.clone();
            while m <= hi {
                if (&t - Q::from_integer(m.clone())).abs() < threshold
                    && m >= BigInt::zero()
                    && m < bn
                    && digits_allowed(&m, spec, n)
                {
                    found = true;
                    break;
                }
                m += 1;
            }
            if !found {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// All `n` base-b digits of `m` lie in the allowed set.
fn digits_allowed(m: &BigInt, spec: &CantorSpec, n: u32) -> bool {
    let b = BigInt::from(spec.base());
    let mut rest = m.clone();
    for _ in 0..n {
        let digit = (&rest % &b).to_u32().expect("digit fits");
        if !spec.digits().contains(&digit) {
            return false;
        }
        rest /= &b;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q_ratio;

    #[test]
    fn level_two_centers_base_two() {
        // b=2, full digits, d=1, n=2, target 0: centers 0, 1/4, 1/2, 3/4
        let fam = Shrinking::new(
            alloc::vec![CantorSpec::full(2).unwrap()],
            alloc::vec![q_int(0)],
        )
        .unwrap();
        let items = fam.enumerate_level(&LevelScheme::PerIndex, 2, 100).unwrap();
        assert_eq!(items.len(), 4);
        let centers: Vec<Q> = items
            .iter()
            .map(|it| match &it.geometry[0] {
                FactorGeometry::CantorPreimage { center, .. } => center.clone(),
                _ => panic!(),
            })
            .collect();
        assert_eq!(
            centers,
            alloc::vec![q_int(0), q_ratio(1, 4), q_ratio(1, 2), q_ratio(3, 4)]
        );
    }

    #[test]
    fn count_matches_closed_form() {
        let fam = Shrinking::new(
            alloc::vec![
                CantorSpec::new(3, alloc::vec![0, 2]).unwrap(),
                CantorSpec::full(2).unwrap()
            ],
            alloc::vec![q_int(0), q_int(0)],
        )
        .unwrap();
        // (#digits)^n per factor: 2^3 * 2^3 = 64
        assert_eq!(fam.count_level(3), 64);
        let items = fam.enumerate_level(&LevelScheme::PerIndex, 3, 100).unwrap();
        assert_eq!(items.len(), 64);
        assert!(items.iter().all(|it| it.beta == 3));
    }

    #[test]
    fn target_offset_centers() {
        // b=2, target 1/3: center of word (1,) is 1/2 + (1/3)/2 = 2/3
        let fam = Shrinking::new(
            alloc::vec![CantorSpec::full(2).unwrap()],
            alloc::vec![q_ratio(1, 3)],
        )
        .unwrap();
        assert_eq!(fam.word_center(0, &[1]), q_ratio(2, 3));
    }

    #[test]
    fn hits_respect_digit_restriction() {
        // b=3, digits {0,2}: at n=1 the centers are 0 and 2/3 (target 0)
        let fam = Shrinking::new(
            alloc::vec![CantorSpec::new(3, alloc::vec![0, 2]).unwrap()],
            alloc::vec![q_int(0)],
        )
        .unwrap();
        let r = q_ratio(1, 10);
        // 1/3 is the forbidden-digit center, 0.35 is near it but not near 0 or 2/3
        assert!(!fam
            .hits_level(&[q_ratio(35, 100)], &[r.clone()], &LevelScheme::PerIndex, 1)
            .unwrap());
        assert!(fam
            .hits_level(&[q_ratio(65, 100)], &[r.clone()], &LevelScheme::PerIndex, 1)
            .unwrap());
        assert!(fam
            .hits_level(&[q_ratio(5, 100)], &[r], &LevelScheme::PerIndex, 1)
            .unwrap());
    }

    #[test]
    fn orbit_membership_matches_definition() {
        // full digits b=2: |T^n x - x_o| < psi_raw with T the doubling map,
        // and the effective radius on x is psi_raw / b^n
        let fam = Shrinking::new(
            alloc::vec![CantorSpec::full(2).unwrap()],
            alloc::vec![q_ratio(1, 4)],
        )
        .unwrap();
        // x = 0.3 -> T^2 x = 0.2; |0.2 - 0.25| = 0.05, so the effective
        // threshold is 0.05 / 4 = 0.0125
        let x = q_ratio(3, 10);
        assert!(fam
            .hits_level(&[x.clone()], &[q_ratio(2, 100)], &LevelScheme::PerIndex, 2)
            .unwrap());
        assert!(!fam
            .hits_level(&[x], &[q_ratio(1, 100)], &LevelScheme::PerIndex, 2)
            .unwrap());
    }
}
