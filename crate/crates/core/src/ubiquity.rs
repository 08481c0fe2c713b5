//! Empirical ubiquity ratios and kappa-scaling probes.
//!
//! The ubiquity ratio at level `n` is
//! `mu(B ∩ union over J_n of the rho(u_n)-neighborhoods) / mu(B)`.
//! The report tabulates raw ratios per (ball, level); it never claims the
//! for-all-levels property, it only exhibits the empirical infima. When the
//! level enumeration exceeds its cap, the ratio falls back to seeded Monte
//! Carlo over ball-conditional samples with the exact membership test.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Signed;

use crate::geom::estimate::MeasureEstimate;
use crate::geom::rect::Rect;
use crate::geom::space::{AmbientSpace, FactorSpace, MeasureKind};
use crate::measure::region::{neighborhood, FactorGeometry, FactorRegion, ProductRegion};
use crate::measure::sweep::union_measure_exact;
use crate::measure::{MeasureError, MeasurePolicy};
use crate::num::{q_to_f64, q_zero, Q};
use crate::rng::CounterRng;
use crate::systems::rates::RatePair;
use crate::systems::{Family, SystemError};

/// One (ball, level) ratio measurement.
#[derive(Clone, Debug)]
pub struct UbiquityRow {
    pub ball_id: usize,
    pub n: u32,
    pub ratio: MeasureEstimate,
}

/// Ratios tabulated over balls and levels, with per-ball infima.
#[derive(Clone, Debug)]
pub struct UbiquityReport {
    pub rows: Vec<UbiquityRow>,
    /// Per ball: minimum ratio over all tested levels.
    pub per_ball_min: Vec<f64>,
    /// Per ball: minimum over `n >= n0` for each candidate `n0` in the
    /// tested range (the empirical version of the eventually-above-c claim).
    pub per_ball_tail_min: Vec<Vec<(u32, f64)>>,
    /// Balls whose tail minima stay at zero: diagnostic only.
    pub flagged_balls: Vec<usize>,
}

/// The ratio at one level for one ball.
pub fn ubiquity_ratio(
    family: &Family,
    rates: &RatePair,
    ball: &Rect,
    n: u32,
    policy: &MeasurePolicy,
    item_cap: u64,
) -> Result<MeasureEstimate, SystemError> {
    let space = family.space()?;
    if ball.dim() != space.total_dim() {
        return Err(SystemError::Geometry(
            crate::geom::GeomError::DimensionMismatch {
                expected: space.total_dim(),
                got: ball.dim(),
            },
        ));
    }
    let (ball_v, ball_e) = union_measure_exact(core::slice::from_ref(ball), &space, policy)?;
    if !ball_v.is_positive() {
        return Err(SystemError::Geometry(crate::geom::GeomError::NotPositive(
            "ball measure".into(),
        )));
    }
    let u_n = rates.scheme.upper(n);
    let rho_radii: Vec<Q> = rates.rho.iter().map(|r| r.eval_q(u_n)).collect();

    // the one-dimensional simultaneous system enumerates only the fractions
    // whose neighborhoods meet the ball, which reaches far deeper levels
    if let Family::Rational(fam) = family {
        if fam.d == 1 {
            if let Some((value, components)) =
                rational_interval_ratio(ball, &rho_radii[0], rates, n, item_cap)
            {
                let est = MeasureEstimate {
                    value,
                    error: (components as f64 + 1.0) * f64::EPSILON,
                    method: crate::geom::estimate::Method::ExactSweep,
                };
                return Ok(divide_estimates(&est, &ball_v, &ball_e));
            }
        }
    }

    match family.enumerate_level(&rates.scheme, n, item_cap) {
        Ok(items) => {
            let mut regions = Vec::with_capacity(items.len());
            for item in &items {
                let factors = item
                    .geometry
                    .iter()
                    .enumerate()
                    .map(|(i, g)| neighborhood(g, &rho_radii[i], &space.factors()[i]))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(SystemError::Geometry)?;
                regions.push(ProductRegion { factors });
            }
            let est = crate::measure::region::region_union_measure(&regions, ball, &space, policy)?;
            Ok(divide_estimates(&est, &ball_v, &ball_e))
        }
        Err(SystemError::SizeCap { .. }) => {
            statistical_ratio(family, &space, ball, &rho_radii, rates, n, policy, item_cap)
        }
        Err(e) => Err(e),
    }
}

/// Exact `mu(ball ∩ union of B(p/q, rho))` over the level window for the
/// one-dimensional simultaneous system, touching only the fractions near
/// the ball. Endpoints are compared as `i128` cross products (exact), so
/// the merge stays fast; `None` falls back to the generic paths when the
/// interval count exceeds the cap, and arbitrary precision takes over if
/// any cross product would overflow.
fn rational_interval_ratio(
    ball: &Rect,
    rho: &Q,
    rates: &RatePair,
    n: u32,
    item_cap: u64,
) -> Option<(f64, u64)> {
    use num_traits::ToPrimitive;
    let (l, u) = rates.scheme.bounds(n);
    let (blo, bhi) = ball.interval(0);
    let rho_num = rho.numer().to_i128()?;
    let rho_den = rho.denom().to_i128()?;
    if rho_num <= 0 || u >= 1 << 40 || rho_den >= 1 << 58 {
        return None;
    }
    let lo_edge = blo - rho;
    let hi_edge = bhi + rho;
    // per-q admissible numerator ranges, counted before materializing
    let mut ranges: Vec<(u64, i128, i128)> = Vec::new();
    let mut count: u128 = 0;
    for q in l..=u {
        let p_lo = (&lo_edge * crate::num::q_int(q as i64)).ceil().to_integer();
        let p_hi = (&hi_edge * crate::num::q_int(q as i64))
            .floor()
            .to_integer();
        let p_lo = p_lo.to_i128()?.max(0);
        let p_hi = p_hi.to_i128()?.min(q as i128);
        if p_hi >= p_lo {
            count += (p_hi - p_lo + 1) as u128;
            if count > item_cap as u128 {
                return None;
            }
            ranges.push((q, p_lo, p_hi));
        }
    }
    let blo_f = (blo.numer().to_i128()?, blo.denom().to_i128()?);
    let bhi_f = (bhi.numer().to_i128()?, bhi.denom().to_i128()?);
    match rational_interval_union_i128(&ranges, rho_num, rho_den, blo_f, bhi_f) {
        Some(total) => Some(total),
        None => rational_interval_union_slow(&ranges, rho, blo, bhi),
    }
}

type Frac = (i128, i128);

fn rational_interval_union_i128(
    ranges: &[(u64, i128, i128)],
    rho_num: i128,
    rho_den: i128,
    blo: Frac,
    bhi: Frac,
) -> Option<(f64, u64)> {
    let mut intervals: Vec<(Frac, Frac)> = Vec::new();
    for &(q, p_lo, p_hi) in ranges {
        let qi = q as i128;
        let den = qi.checked_mul(rho_den)?;
        let spread = rho_num.checked_mul(qi)?;
        for p in p_lo..=p_hi {
            let center = p.checked_mul(rho_den)?;
            let lo = frac_max((center.checked_sub(spread)?, den), blo)?;
            let hi = frac_min((center.checked_add(spread)?, den), bhi)?;
            if frac_lt(lo, hi)? {
                intervals.push((lo, hi));
            }
        }
    }
    // sort by left endpoint; a compare overflow poisons the order and
    // sends the whole computation to the arbitrary-precision fallback
    let mut poisoned = false;
    intervals.sort_by(
        |a, b| match (a.0 .0.checked_mul(b.0 .1), b.0 .0.checked_mul(a.0 .1)) {
            (Some(x), Some(y)) => x.cmp(&y),
            _ => {
                poisoned = true;
                core::cmp::Ordering::Equal
            }
        },
    );
    if poisoned {
        return None;
    }
    // merge exactly; the component lengths are summed in compensated
    // doubles (the exact total would carry an lcm-of-denominators blowup)
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut components = 0u64;
    let mut add = |lo: Frac, hi: Frac| {
        let len = frac_f64(hi) - frac_f64(lo);
        let y = len - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        components += 1;
    };
    let mut cur: Option<(Frac, Frac)> = None;
    for &(lo, hi) in &intervals {
        match cur {
            None => cur = Some((lo, hi)),
            Some((clo, chi)) => {
                if !frac_lt(chi, lo)? {
                    if frac_lt(chi, hi)? {
                        cur = Some((clo, hi));
                    }
                } else {
                    add(clo, chi);
                    cur = Some((lo, hi));
                }
            }
        }
    }
    if let Some((clo, chi)) = cur {
        add(clo, chi);
    }
    Some((sum, components))
}

fn frac_f64(x: Frac) -> f64 {
    x.0 as f64 / x.1 as f64
}

/// Arbitrary-precision fallback over the same per-q ranges.
fn rational_interval_union_slow(
    ranges: &[(u64, i128, i128)],
    rho: &Q,
    blo: &Q,
    bhi: &Q,
) -> Option<(f64, u64)> {
    let mut intervals: Vec<(Q, Q)> = Vec::new();
    for &(q, p_lo, p_hi) in ranges {
        for p in p_lo..=p_hi {
            let center = q_frac_i128(p, q as i128);
            let lo = &center - rho;
            let hi = &center + rho;
            let lo = if &lo < blo { blo.clone() } else { lo };
            let hi = if &hi > bhi { bhi.clone() } else { hi };
            if lo < hi {
                intervals.push((lo, hi));
            }
        }
    }
    intervals.sort_by(|a, b| a.0.cmp(&b.0));
    let mut sum = 0.0f64;
    let mut components = 0u64;
    let mut cur: Option<(Q, Q)> = None;
    for (lo, hi) in intervals {
        match cur.take() {
            None => cur = Some((lo, hi)),
            Some((clo, chi)) => {
                if lo <= chi {
                    cur = Some((clo, if hi > chi { hi } else { chi }));
                } else {
                    sum += crate::num::q_to_f64(&(&chi - &clo));
                    components += 1;
                    cur = Some((lo, hi));
                }
            }
        }
    }
    if let Some((clo, chi)) = cur {
        sum += crate::num::q_to_f64(&(&chi - &clo));
        components += 1;
    }
    Some((sum, components))
}

fn q_frac_i128(num: i128, den: i128) -> Q {
    crate::num::q_big(num_bigint::BigInt::from(num), num_bigint::BigInt::from(den))
}

fn frac_lt(a: Frac, b: Frac) -> Option<bool> {
    Some(a.0.checked_mul(b.1)? < b.0.checked_mul(a.1)?)
}

fn frac_max(a: Frac, b: Frac) -> Option<Frac> {
    Some(if frac_lt(a, b)? { b } else { a })
}

fn frac_min(a: Frac, b: Frac) -> Option<Frac> {
    Some(if frac_lt(a, b)? { a } else { b })
}

fn divide_estimates(est: &MeasureEstimate, ball_v: &Q, ball_e: &Q) -> MeasureEstimate {
    let bv = q_to_f64(ball_v);
    let be = q_to_f64(ball_e);
    let value = est.value / bv;
    let denom_slack = (bv - be).max(f64::MIN_POSITIVE);
    let error = (est.error + value * be) / denom_slack;
    MeasureEstimate {
        value,
        error,
        method: est.method.clone(),
    }
}

/// Monte Carlo ratio with points drawn uniformly from the ball (Lebesgue
/// factors only; the Cantor systems never outgrow their enumeration caps
/// at desk scale).
#[allow(clippy::too_many_arguments)]
fn statistical_ratio(
    family: &Family,
    space: &AmbientSpace,
    ball: &Rect,
    rho_radii: &[Q],
    rates: &RatePair,
    n: u32,
    policy: &MeasurePolicy,
    membership_cap: u64,
) -> Result<MeasureEstimate, SystemError> {
    if space
        .factors()
        .iter()
        .any(|f| !matches!(f.kind(), MeasureKind::Lebesgue))
    {
        return Err(SystemError::Measure(MeasureError::Degenerate(
            String::from("statistical ubiquity fallback requires Lebesgue factors"),
        )));
    }
    let rng = CounterRng::new(policy.mc_seed);
    let samples = policy.mc_samples;
    let mut hits = 0u64;
    let dim = space.total_dim();
    let mut point: Vec<Q> = Vec::with_capacity(dim);
    for index in 0..samples {
        point.clear();
        for (axis, (lo, hi)) in ball.intervals().iter().enumerate() {
            let t = rng.unit_q64(axis as u64, index);
            point.push(lo + (hi - lo) * t);
        }
        if family.hits_level(&point, rho_radii, &rates.scheme, n, membership_cap)? {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let sigma = libm::sqrt(p * (1.0 - p) / samples as f64);
    Ok(MeasureEstimate::monte_carlo(
        p,
        4.0 * sigma,
        policy.mc_seed,
        samples,
    ))
}

/// Tabulate ratios for every ball over an inclusive level range.
pub fn verify_ubiquity(
    family: &Family,
    rates: &RatePair,
    balls: &[Rect],
    n_range: (u32, u32),
    policy: &MeasurePolicy,
    item_cap: u64,
) -> Result<UbiquityReport, SystemError> {
    let mut rows = Vec::new();
    let mut per_ball_min = Vec::with_capacity(balls.len());
    let mut per_ball_tail_min = Vec::with_capacity(balls.len());
    let mut flagged = Vec::new();
    for (ball_id, ball) in balls.iter().enumerate() {
        let mut ratios = Vec::new();
        for n in n_range.0..=n_range.1 {
            let ratio = ubiquity_ratio(family, rates, ball, n, policy, item_cap)?;
            ratios.push((n, ratio.value));
            rows.push(UbiquityRow { ball_id, n, ratio });
        }
        let min_all = ratios.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
        per_ball_min.push(min_all);
        let tails: Vec<(u32, f64)> = (n_range.0..=n_range.1)
            .map(|n0| {
                let tail = ratios
                    .iter()
                    .filter(|&&(n, _)| n >= n0)
                    .map(|&(_, v)| v)
                    .fold(f64::INFINITY, f64::min);
                (n0, tail)
            })
            .collect();
        if tails.iter().all(|&(_, v)| v <= 0.0) {
            flagged.push(ball_id);
        }
        per_ball_tail_min.push(tails);
    }
    Ok(UbiquityReport {
        rows,
        per_ball_min,
        per_ball_tail_min,
        flagged_balls: flagged,
    })
}

/// Measured intersections `mu(B(x,r) ∩ Delta(geometry, eps))` over a grid
/// of `(r, eps)` pairs, with fitted log-log exponents.
#[derive(Clone, Debug)]
pub struct ScalingProbeReport {
    pub grid: Vec<(f64, f64, MeasureEstimate)>,
    /// Fitted slope in `log eps` at fixed `r`, averaged over `r`.
    pub eps_slope: f64,
    /// Fitted slope in `log r` at fixed `eps`, averaged over `eps`.
    pub r_slope: f64,
    /// `delta kappa + delta (1 - kappa)`.
    pub implied_delta: f64,
    pub implied_kappa: f64,
}

/// Probe the scaling exponents of one factor's resonant geometry at a
/// center `x` on the resonant set. Point-like geometry measures exactly;
/// slabs go through seeded Monte Carlo.
pub fn kappa_scaling_probe(
    factor: &FactorSpace,
    geometry: &FactorGeometry,
    x: &[Q],
    r_list: &[Q],
    eps_list: &[Q],
    samples: u64,
    seed: u64,
) -> Result<ScalingProbeReport, SystemError> {
    if r_list.len() < 2 || eps_list.len() < 2 {
        return Err(SystemError::Measure(MeasureError::Degenerate(
            "need at least two radii and two widths to fit exponents".into(),
        )));
    }
    if x.len() != factor.dim() {
        return Err(SystemError::BadParams("center arity".into()));
    }
    let max_eps = eps_list.iter().max().unwrap();
    let min_r = r_list.iter().min().unwrap();
    if max_eps >= min_r {
        return Err(SystemError::BadParams(
            "every eps must be smaller than every r".into(),
        ));
    }
    match geometry {
        FactorGeometry::Point(p) => {
            if p.as_slice() != x {
                return Err(SystemError::BadParams(
                    "center off the resonant point".into(),
                ));
            }
        }
        FactorGeometry::CantorPreimage { center, .. } => {
            if core::slice::from_ref(center) != x {
                return Err(SystemError::BadParams(
                    "center off the resonant point".into(),
                ));
            }
        }
        FactorGeometry::Affine { normal, offset } => {
            let mut dot = q_zero();
            for (c, v) in normal.iter().zip(x.iter()) {
                dot += crate::num::q_int(*c) * v;
            }
            if dot != crate::num::q_int(*offset) {
                return Err(SystemError::BadParams(
                    "center off the resonant hyperplane".into(),
                ));
            }
        }
    }

    let space = AmbientSpace::new(alloc::vec![factor.clone()])?;
    let policy = MeasurePolicy {
        mc_samples: samples,
        mc_seed: seed,
        ..MeasurePolicy::default()
    };
    let torus_flags = space.axis_torus_flags();
    let mut grid = Vec::with_capacity(r_list.len() * eps_list.len());
    for r in r_list {
        for eps in eps_list {
            let region = neighborhood(geometry, eps, factor)?;
            let ball_pieces = crate::geom::rect::CenteredRect::new(
                x.to_vec(),
                alloc::vec![r.clone(); factor.dim()],
            )?
            .pieces(&torus_flags);
            let est = match &region {
                FactorRegion::Boxes(boxes) => {
                    let mut clipped = Vec::new();
                    for b in boxes {
                        for piece in &ball_pieces {
                            if let Some(c) = b.intersect(piece) {
                                if c.is_solid() {
                                    clipped.push(c);
                                }
                            }
                        }
                    }
                    let (v, e) = union_measure_exact(&clipped, &space, &policy)?;
                    MeasureEstimate::exact(&v, &e)
                }
                FactorRegion::Slab(slab) => {
                    let slab = slab.clone();
                    let pieces = ball_pieces.clone();
                    crate::measure::mc::mc_measure(
                        move |p| {
                            pieces.iter().any(|piece| piece.contains_point_f64(p))
                                && slab.contains_f64(p)
                        },
                        &space,
                        samples,
                        seed,
                    )
                    .map_err(SystemError::Geometry)?
                }
            };
            grid.push((q_to_f64(r), q_to_f64(eps), est));
        }
    }

    let eps_slope = average_slope(&grid, true);
    let r_slope = average_slope(&grid, false);
    let implied_delta = eps_slope + r_slope;
    let implied_kappa = if implied_delta.abs() > 1e-12 {
        r_slope / implied_delta
    } else {
        0.0
    };
    Ok(ScalingProbeReport {
        grid,
        eps_slope,
        r_slope,
        implied_delta,
        implied_kappa,
    })
}

fn average_slope(grid: &[(f64, f64, MeasureEstimate)], vary_eps: bool) -> f64 {
    let mut keys: Vec<f64> = grid
        .iter()
        .map(|&(r, e, _)| if vary_eps { r } else { e })
        .collect();
    keys.sort_by(f64::total_cmp);
    keys.dedup();
    let mut slopes = Vec::new();
    for key in keys {
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .filter_map(|&(r, e, ref m)| {
                let (fixed, varying) = if vary_eps { (r, e) } else { (e, r) };
                if fixed == key && m.value > 0.0 {
                    Some((libm::log(varying), libm::log(m.value)))
                } else {
                    None
                }
            })
            .collect();
        if pts.len() >= 2 {
            slopes.push(ls_slope(&pts));
        }
    }
    if slopes.is_empty() {
        return 0.0;
    }
    slopes.iter().sum::<f64>() / slopes.len() as f64
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
