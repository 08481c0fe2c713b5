//! Property tests for the measure-layer invariants.

use proptest::prelude::*;

use rectlimsup::measure::cover::five_r_cover;
use rectlimsup::measure::region::{neighborhood, FactorGeometry, FactorRegion};
use rectlimsup::measure::sweep::union_measure_exact;
use rectlimsup::measure::MeasurePolicy;
use rectlimsup::num::{q_int, q_ratio, q_zero, Q};
use rectlimsup::{AmbientSpace, CantorSpec, CenteredRect, FactorSpace, Rect};

fn lebesgue_space(dim: usize) -> AmbientSpace {
    AmbientSpace::new(vec![FactorSpace::lebesgue(dim, 0.0, false).unwrap()]).unwrap()
}

/// A random box in the unit square on the 1/64 grid.
fn arb_box(dim: usize) -> impl Strategy<Value = Rect> {
    proptest::collection::vec((0i64..63, 1i64..64), dim).prop_map(|axes| {
        Rect::new(
            axes.into_iter()
                .map(|(lo, len)| {
                    let hi = (lo + len).min(64);
                    (q_ratio(lo, 64), q_ratio(hi, 64))
                })
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_measure_monotone_and_permutation_invariant(
        boxes in proptest::collection::vec(arb_box(2), 1..8),
        extra in arb_box(2),
        seed in 0u64..1000,
    ) {
        let space = lebesgue_space(2);
        let policy = MeasurePolicy::default();
        let (base, _) = union_measure_exact(&boxes, &space, &policy).unwrap();
        let mut bigger = boxes.clone();
        bigger.push(extra);
        let (grown, _) = union_measure_exact(&bigger, &space, &policy).unwrap();
        prop_assert!(grown >= base);

        // deterministic pseudo-shuffle of the list order
        let mut permuted = boxes.clone();
        let n = permuted.len();
        for i in 0..n {
            let j = ((seed as usize).wrapping_mul(31).wrapping_add(i * 17)) % n;
            permuted.swap(i, j);
        }
        let (shuffled, _) = union_measure_exact(&permuted, &space, &policy).unwrap();
        prop_assert_eq!(base, shuffled);
    }

    #[test]
    fn cantor_cylinders_partition_the_mass(base in 2u32..6, pick in 0u32..5) {
        // choose a digit set of size >= 2 deterministically from `pick`
        let digits: Vec<u32> = (0..base).filter(|d| d % 2 == pick % 2 || *d <= 1).collect();
        prop_assume!(digits.len() >= 2);
        let spec = CantorSpec::new(base, digits.clone()).unwrap();
        let mut total = q_zero();
        for d in &digits {
            let lo = q_ratio(*d as i64, base as i64);
            let hi = q_ratio(*d as i64 + 1, base as i64);
            let (v, e) =
                rectlimsup::measure::cantor::cantor_box_measure(&lo, &hi, &spec, 8).unwrap();
            prop_assert_eq!(e, q_zero());
            prop_assert_eq!(v.clone(), q_ratio(1, digits.len() as i64));
            total += v;
        }
        prop_assert_eq!(total, q_int(1));
    }

    #[test]
    fn cover_is_disjoint_and_covers(
        centers in proptest::collection::vec((0i64..=96, 0i64..=96), 1..40),
        half_num in 1i64..4,
        torus in any::<bool>(),
    ) {
        let half = q_ratio(half_num, 128);
        let family: Vec<CenteredRect> = centers
            .iter()
            .map(|&(x, y)| {
                CenteredRect::new(
                    vec![q_ratio(x + 16, 128), q_ratio(y + 16, 128)],
                    vec![half.clone(), half.clone()],
                )
                .unwrap()
            })
            .collect();
        let scale = q_int(5);
        let flags = [torus, torus];
        let kept = five_r_cover(&family, &scale, &flags).unwrap();
        prop_assert!(!kept.is_empty());

        // pairwise disjoint at scale 5, checked on center gaps exactly
        let gap = &half * q_int(10);
        for (a, &i) in kept.iter().enumerate() {
            for &j in kept.iter().skip(a + 1) {
                let separated = (0..2).any(|axis| {
                    rectlimsup::geom::rect::axis_dist(
                        &family[i].center[axis],
                        &family[j].center[axis],
                        torus,
                    ) > gap
                });
                prop_assert!(separated);
            }
        }

        // residual coverage measure is exactly zero at 25x
        let space = AmbientSpace::new(vec![
            FactorSpace::lebesgue(2, 0.0, torus).unwrap()
        ]).unwrap();
        let policy = MeasurePolicy::default();
        let mut enlarged: Vec<Rect> = kept
            .iter()
            .flat_map(|&i| family[i].scaled(&q_int(25)).pieces(&flags))
            .collect();
        let (cover_only, _) = union_measure_exact(&enlarged, &space, &policy).unwrap();
        enlarged.extend(family.iter().flat_map(|r| r.pieces(&flags)));
        let (with_inputs, _) = union_measure_exact(&enlarged, &space, &policy).unwrap();
        prop_assert_eq!(with_inputs, cover_only);
    }

    #[test]
    fn torus_point_neighborhood_measure(center_num in 0i64..=64, r_num in 1i64..40) {
        // pieces are pairwise disjoint and their total length is min(1, 2r)
        let factor = FactorSpace::lebesgue(1, 0.0, true).unwrap();
        let center = q_ratio(center_num, 64);
        let r = q_ratio(r_num, 64);
        let region = neighborhood(&FactorGeometry::Point(vec![center]), &r, &factor).unwrap();
        let boxes = match region {
            FactorRegion::Boxes(b) => b,
            _ => unreachable!(),
        };
        for (i, a) in boxes.iter().enumerate() {
            for b in boxes.iter().skip(i + 1) {
                let inter = a.intersect(b);
                prop_assert!(inter.is_none() || !inter.unwrap().is_solid());
            }
        }
        let space = AmbientSpace::unit_torus(1).unwrap();
        let (v, e) = union_measure_exact(&boxes, &space, &MeasurePolicy::default()).unwrap();
        prop_assert_eq!(e, q_zero());
        let expected: Q = {
            let two_r = &r + &r;
            if two_r > q_int(1) { q_int(1) } else { two_r }
        };
        prop_assert_eq!(v, expected);
    }
}
