//! Seeded Monte Carlo measure estimation.

use crate::geom::estimate::MeasureEstimate;
use crate::geom::space::AmbientSpace;
use crate::geom::GeomError;
use crate::rng::{fill_sample_f64, CounterRng};

/// Hit fraction of `membership` under `samples` i.i.d. draws from the
/// product measure of `space`. The reported error is `4 sqrt(p(1-p)/n)`
/// (a four-sigma normal bound on the binomial estimator). Deterministic
/// for a fixed `(seed, samples)` pair regardless of how callers split
/// the index range.
pub fn mc_measure<F>(
    membership: F,
    space: &AmbientSpace,
    samples: u64,
    seed: u64,
) -> Result<MeasureEstimate, GeomError>
where
    F: Fn(&[f64]) -> bool,
{
    if samples == 0 {
        return Err(GeomError::NotPositive("samples".into()));
    }
    let rng = CounterRng::new(seed);
    let mut hits: u64 = 0;
    let mut point = alloc::vec::Vec::with_capacity(space.total_dim());
    for i in 0..samples {
        fill_sample_f64(&rng, space, i, &mut point);
        if membership(&point) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let sigma = libm::sqrt(p * (1.0 - p) / samples as f64);
    Ok(MeasureEstimate::monte_carlo(p, 4.0 * sigma, seed, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::rect::Rect;
    use crate::geom::space::FactorSpace;
    use crate::num::q_ratio;

    #[test]
    fn constant_memberships() {
        let space = AmbientSpace::unit_torus(2).unwrap();
        let yes = mc_measure(|_| true, &space, 1000, 7).unwrap();
        assert_eq!(yes.value, 1.0);
        assert_eq!(yes.error, 0.0);
        let no = mc_measure(|_| false, &space, 1000, 7).unwrap();
        assert_eq!(no.value, 0.0);
    }

    #[test]
    fn box_fraction_within_band() {
        // box [0, 0.3]^2 has measure 0.09
        let space = AmbientSpace::unit_torus(2).unwrap();
        let rect = Rect::new(vec![
            (q_ratio(0, 1), q_ratio(3, 10)),
            (q_ratio(0, 1), q_ratio(3, 10)),
        ])
        .unwrap();
        let est = mc_measure(|p| rect.contains_point_f64(p), &space, 100_000, 5).unwrap();
        assert!((est.value - 0.09).abs() <= est.error, "value {}", est.value);
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let space = AmbientSpace::unit_torus(1).unwrap();
        let a = mc_measure(|p| p[0] < 0.5, &space, 10_000, 11).unwrap();
        let b = mc_measure(|p| p[0] < 0.5, &space, 10_000, 11).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn cantor_sampling_stays_on_support() {
        let spec = crate::geom::space::CantorSpec::new(3, vec![0, 2]).unwrap();
        let space = AmbientSpace::new(vec![FactorSpace::cantor(spec)]).unwrap();
        // the middle third is off-support: hit fraction must be 0
        let est = mc_measure(|p| p[0] > 1.0 / 3.0 && p[0] < 2.0 / 3.0, &space, 20_000, 3).unwrap();
        assert_eq!(est.value, 0.0);
        // the first third carries mass 1/2
        let est = mc_measure(|p| p[0] <= 1.0 / 3.0, &space, 100_000, 3).unwrap();
        assert!((est.value - 0.5).abs() <= est.error);
    }
}
