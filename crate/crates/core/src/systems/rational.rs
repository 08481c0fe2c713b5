//! Simultaneous approximation by rational points with common denominator.
//!
//! Index set: `(q, p_1, ..., p_d)` with `q >= 1` and `0 <= p_i <= q`;
//! resonant point `(p_1/q, ..., p_d/q)` on the d-torus; weight `beta = q`.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Signed;

use super::farey::near_fraction_on_torus;
use super::scheme::LevelScheme;
use super::{ResonantItem, SystemError};
use crate::geom::space::AmbientSpace;
use crate::measure::region::FactorGeometry;
use crate::num::{q_int, q_ratio, q_round, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rational {
    pub d: usize,
}

impl Rational {
    pub fn new(d: usize) -> Result<Self, SystemError> {
        if d == 0 {
            return Err(SystemError::BadParams("d must be positive".into()));
        }
        Ok(Rational { d })
    }

    /// `d` Lebesgue torus factors, point resonant sets (`kappa = 0`).
    pub fn space(&self) -> Result<AmbientSpace, SystemError> {
        AmbientSpace::unit_torus(self.d).map_err(SystemError::Geometry)
    }

    /// Item count for a window, `sum_{q=l}^{u} (q+1)^d`.
    pub fn count_window(&self, l: u64, u: u64) -> u128 {
        let mut total: u128 = 0;
        for q in l..=u {
            let base = (q + 1) as u128;
            let mut t: u128 = 1;
            for _ in 0..self.d {
                t = t.saturating_mul(base);
            }
            total = total.saturating_add(t);
        }
        total
    }

    pub fn enumerate_level(
        &self,
        scheme: &LevelScheme,
        n: u32,
        cap: u64,
    ) -> Result<Vec<ResonantItem>, SystemError> {
        let (l, u) = scheme.bounds(n);
        let count = self.count_window(l, u);
        if count > cap as u128 {
            return Err(SystemError::SizeCap { count, cap });
        }
        let mut items = Vec::with_capacity(count as usize);
        for q in l..=u {
            let mut p = alloc::vec![0u64; self.d];
            loop {
                let mut index = Vec::with_capacity(1 + self.d);
                index.push(q as i64);
                index.extend(p.iter().map(|&v| v as i64));
                let geometry = p
                    .iter()
                    .map(|&pi| FactorGeometry::Point(alloc::vec![q_ratio(pi as i64, q as i64)]))
                    .collect();
                items.push(ResonantItem {
                    index,
                    beta: q,
                    geometry,
                });
                if !advance_odometer(&mut p, q) {
                    break;
                }
            }
        }
        Ok(items)
    }

    pub fn beta(&self, index: &[i64]) -> Result<u64, SystemError> {
        if index.len() != self.d + 1 || index[0] < 1 {
            return Err(SystemError::BadParams(format!(
                "rational index must be (q, p_1..p_{}) with q >= 1",
                self.d
            )));
        }
        Ok(index[0] as u64)
    }

    /// Is `point` within the per-factor radii of some resonant point with
    /// weight in the window? Exact; `d = 1` uses the Stern-Brocot interval
    /// decision, higher `d` scans the window (subject to `cap`).
    pub fn hits_level(
        &self,
        point: &[Q],
        psi_radii: &[Q],
        scheme: &LevelScheme,
        n: u32,
        cap: u64,
    ) -> Result<bool, SystemError> {
        if point.len() != self.d || psi_radii.len() != self.d {
            return Err(SystemError::BadParams("point/radii arity".into()));
        }
        let (l, u) = scheme.bounds(n);
        if self.d == 1 {
            return near_fraction_on_torus(&point[0], &psi_radii[0], l, u)
                .map_err(SystemError::Measure);
        }
        if u - l + 1 > cap {
            return Err(SystemError::SizeCap {
                count: (u - l + 1) as u128,
                cap,
            });
        }
        for q in l..=u {
            let mut all = true;
            for (x, r) in point.iter().zip(psi_radii.iter()) {
                // || q x || < q r on the torus
                let t = x * q_int(q as i64);
                let nearest = q_round(&t);
                let dist = (t - Q::from_integer(nearest)).abs();
                if dist >= r * q_int(q as i64) {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Distance (torus) from `x` to the nearest `p/q` at fixed `q`, as doubles;
/// handy for diagnostics.
pub fn nearest_fraction_dist_f64(x: f64, q: u64) -> f64 {
    let t = x * q as f64;
    let r = t - libm::round(t);
    libm::fabs(r) / q as f64
}

/// Advance a lexicographic digit vector over `{0..=max}^len`; false at wrap.
pub(crate) fn advance_odometer(p: &mut [u64], max: u64) -> bool {
    for axis in (0..p.len()).rev() {
        if p[axis] < max {
            p[axis] += 1;
            return true;
        }
        p[axis] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_enumeration_matches_closed_form() {
        // d=1, l=2, u=3: seven items
        let fam = Rational::new(1).unwrap();
        let scheme = LevelScheme::PerIndex;
        let mut got = Vec::new();
        for n in 2..=3 {
            got.extend(fam.enumerate_level(&scheme, n, 1000).unwrap());
        }
        let indices: Vec<Vec<i64>> = got.iter().map(|i| i.index.clone()).collect();
        assert_eq!(
            indices,
            alloc::vec![
                alloc::vec![2, 0],
                alloc::vec![2, 1],
                alloc::vec![2, 2],
                alloc::vec![3, 0],
                alloc::vec![3, 1],
                alloc::vec![3, 2],
                alloc::vec![3, 3],
            ]
        );
        assert_eq!(fam.count_window(2, 3), 7);
        // d=2 count: sum (q+1)^2
        let fam2 = Rational::new(2).unwrap();
        assert_eq!(fam2.count_window(2, 3), 9 + 16);
        let items = fam2
            .enumerate_level(&LevelScheme::PerIndex, 2, 100)
            .unwrap();
        assert_eq!(items.len(), 9);
    }

    #[test]
    fn beta_is_the_denominator() {
        let fam = Rational::new(1).unwrap();
        assert_eq!(fam.beta(&[3, 1]).unwrap(), 3);
        for item in fam
            .enumerate_level(&LevelScheme::MAdic { m: 4 }, 2, 10_000)
            .unwrap()
        {
            assert!((4..=16).contains(&item.beta));
            assert_eq!(fam.beta(&item.index).unwrap(), item.beta);
        }
    }

    #[test]
    fn cap_errors_carry_the_count() {
        let fam = Rational::new(1).unwrap();
        let err = fam
            .enumerate_level(&LevelScheme::MAdic { m: 16 }, 4, 1000)
            .unwrap_err();
        match err {
            SystemError::SizeCap { count, cap } => {
                assert_eq!(cap, 1000);
                assert_eq!(count, fam.count_window(4096, 65536));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn zero_hits_every_level() {
        // x = 0 is p/q = 0 for every q
        let fam = Rational::new(1).unwrap();
        for n in 1..=20 {
            assert!(fam
                .hits_level(
                    &[q_int(0)],
                    &[q_ratio(1, 1_000_000)],
                    &LevelScheme::PerIndex,
                    n,
                    1000
                )
                .unwrap());
        }
    }

    #[test]
    fn d1_fast_path_matches_scan() {
        let fam = Rational::new(1).unwrap();
        let scheme = LevelScheme::MAdic { m: 2 };
        for k in 0..200u64 {
            let x = q_ratio((k * 97 % 1000) as i64, 1000);
            let r = q_ratio(1, 150 + (k % 50) as i64);
            for n in 1..=6 {
                let fast = fam
                    .hits_level(&[x.clone()], &[r.clone()], &scheme, n, 10_000)
                    .unwrap();
                // direct scan oracle
                let (l, u) = scheme.bounds(n);
                let mut slow = false;
                'outer: for q in l..=u {
                    for p in 0..=q {
                        let f = q_ratio(p as i64, q as i64);
                        let d0 = (&x - &f).abs();
                        let d1 = q_int(1) - &d0;
                        let dist = if d1 < d0 { d1 } else { d0 };
                        if dist < r {
                            slow = true;
                            break 'outer;
                        }
                    }
                }
                assert_eq!(fast, slow, "x={x} r={r} n={n}");
            }
        }
    }

    #[test]
    fn golden_ratio_hits_are_fibonacci() {
        // psi(q) = q^-2: membership at level q means ||q x|| < 1/q
        let fam = Rational::new(1).unwrap();
        let x = q_ratio(6_180_339_887, 10_000_000_000);
        let mut hits = Vec::new();
        for q in 2..=100u32 {
            let radius = q_ratio(1, (q as i64) * (q as i64));
            if fam
                .hits_level(&[x.clone()], &[radius], &LevelScheme::PerIndex, q, 1000)
                .unwrap()
            {
                hits.push(q);
            }
        }
        assert_eq!(hits, alloc::vec![2, 3, 5, 8, 13, 21, 34, 55, 89]);
    }
}
