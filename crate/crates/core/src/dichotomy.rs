//! The measure-dichotomy laboratory: series diagnostics, packed level
//! sets, the Chung-Erdos second-moment lower bound, and Monte Carlo hit
//! statistics approximating the limsup set.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::geom::rect::{axis_dist, CenteredRect, Rect};
use crate::geom::space::AmbientSpace;
use crate::measure::cover::five_r_cover;
use crate::measure::region::FactorGeometry;
use crate::measure::sweep::{pairwise_intersections, union_measure_exact};
use crate::measure::MeasurePolicy;
use crate::num::{q_int, q_to_f64, q_zero, Q};
use crate::rng::{sample_point_q, CounterRng};
use crate::systems::rates::RatePair;
use crate::systems::{Family, SystemError};

// ---------------------------------------------------------------------------
// series diagnostics
// ---------------------------------------------------------------------------

/// Heuristic verdict from finite partial sums; never a proof.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesVerdict {
    Diverging,
    Converging,
    Inconclusive,
}

/// Partial sums at dyadic checkpoints with a tail-slope classification.
#[derive(Clone, Debug)]
pub struct SeriesReport {
    /// `(N, S_N, t_N)` at each checkpoint.
    pub checkpoints: Vec<(u64, f64, f64)>,
    pub total: f64,
    pub verdict: SeriesVerdict,
    /// Fitted tail exponent of `t_n ~ n^-alpha`.
    pub tail_alpha: f64,
    /// M-adic block sums, for the side-by-side comparison of the
    /// linear-forms series (empty otherwise).
    pub block_sums: Vec<(u32, f64)>,
}

fn classify(terms: &[f64]) -> (SeriesVerdict, f64) {
    let n = terms.len();
    if n < 16 {
        return (SeriesVerdict::Inconclusive, f64::NAN);
    }
    // dyadic block sums B1 = sum over [N/2, N), B0 = sum over [N/4, N/2)
    let b1: f64 = terms[n / 2..].iter().sum();
    let b0: f64 = terms[n / 4..n / 2].iter().sum();
    if b1 <= 0.0 {
        // a vanished tail after positive terms is fast convergence
        return if terms.iter().any(|&t| t > 0.0) {
            (SeriesVerdict::Converging, f64::INFINITY)
        } else {
            (SeriesVerdict::Inconclusive, f64::NAN)
        };
    }
    if b0 <= 0.0 {
        return (SeriesVerdict::Inconclusive, f64::NAN);
    }
    let alpha = 1.0 - libm::log2(b1 / b0);
    if alpha < 0.9 {
        return (SeriesVerdict::Diverging, alpha);
    }
    if alpha > 1.1 {
        return (SeriesVerdict::Converging, alpha);
    }
    // near the power boundary: inspect the extra slowly varying factor via
    // t_n * n ~ (log n)^-beta
    let t_hi = terms[n - 1] * n as f64;
    let t_lo = terms[n / 2 - 1] * (n / 2) as f64;
    if t_lo <= 0.0 || t_hi <= 0.0 {
        return (SeriesVerdict::Inconclusive, alpha);
    }
    let lr = libm::log(libm::log(n as f64) / libm::log(n as f64 / 2.0));
    let beta = if lr.abs() > 0.0 {
        -libm::log(t_hi / t_lo) / lr
    } else {
        f64::NAN
    };
    if beta.is_finite() && beta < 0.9 {
        (SeriesVerdict::Diverging, alpha)
    } else if beta.is_finite() && beta > 1.1 {
        (SeriesVerdict::Converging, alpha)
    } else {
        (SeriesVerdict::Inconclusive, alpha)
    }
}

fn report_from_terms(terms: &[f64], block_sums: Vec<(u32, f64)>) -> SeriesReport {
    let mut checkpoints = Vec::new();
    let mut sum = 0.0;
    let mut compensation = 0.0;
    let mut next_checkpoint = 1u64;
    for (i, &t) in terms.iter().enumerate() {
        // Kahan summation; partial sums are reported to 1e-6 tolerances
        let y = t - compensation;
        let s = sum + y;
        compensation = (s - sum) - y;
        sum = s;
        let n = i as u64 + 1;
        if n == next_checkpoint || n == terms.len() as u64 {
            checkpoints.push((n, sum, t));
            while next_checkpoint <= n {
                next_checkpoint *= 2;
            }
        }
    }
    let (verdict, alpha) = classify(terms);
    SeriesReport {
        checkpoints,
        total: sum,
        verdict,
        tail_alpha: alpha,
        block_sums,
    }
}

/// The dichotomy series of the general theorem:
/// `sum_n prod_i (psi_i(u_n)/rho_i(u_n))^(delta_i (1-kappa_i))`.
pub fn theorem_series(rates: &RatePair, space: &AmbientSpace, n_max: u32) -> SeriesReport {
    // divide symbolically where possible: the quotient stays finite far
    // past the point where psi and rho individually underflow
    let quotients: Vec<Option<crate::systems::rate::Rate>> = rates
        .psi
        .iter()
        .zip(rates.rho.iter())
        .map(|(psi, rho)| {
            rho.symbolic_pow(-1, 1)
                .and_then(|inv| psi.symbolic_mul(&inv))
        })
        .collect();
    let mut terms = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let u = rates.scheme.upper_f64(n);
        let mut t = 1.0f64;
        for (i, factor) in space.factors().iter().enumerate() {
            let ratio = match &quotients[i] {
                Some(q) => q.eval(u),
                None => rates.psi[i].eval(u) / rates.rho[i].eval(u),
            };
            let exponent = factor.delta() * (1.0 - factor.kappa());
            let term = libm::pow(ratio, exponent);
            t *= if term.is_finite() { term } else { 0.0 };
        }
        terms.push(t);
    }
    report_from_terms(&terms, Vec::new())
}

/// The concrete application series of the three systems.
pub enum ApplicationSeries<'a> {
    /// `sum_q prod_i phi_i(q)`.
    Simultaneous {
        phi: &'a [crate::systems::rate::Rate],
    },
    /// `sum_q q^-1 prod_i phi_i(q) prod_k Phi_k(q)`, with the M-adic block
    /// sums `sum_t prod phi(M^t) prod Phi(M^t)` reported side by side.
    LinearForms {
        phi: &'a [crate::systems::rate::Rate],
        big_phi: &'a [crate::systems::rate::Rate],
        m: u64,
    },
    /// `sum_n prod_i psi_i(n)^(delta_i)`.
    Shrinking {
        psi_raw: &'a [crate::systems::rate::Rate],
        deltas: &'a [f64],
    },
}

pub fn application_series(kind: &ApplicationSeries<'_>, q_max: u64) -> SeriesReport {
    match kind {
        ApplicationSeries::Simultaneous { phi } => {
            let terms: Vec<f64> = (1..=q_max)
                .map(|q| phi.iter().map(|r| r.eval(q as f64)).product())
                .collect();
            report_from_terms(&terms, Vec::new())
        }
        ApplicationSeries::LinearForms { phi, big_phi, m } => {
            let terms: Vec<f64> = (1..=q_max)
                .map(|q| {
                    let qf = q as f64;
                    let mut t = 1.0 / qf;
                    for r in phi.iter() {
                        t *= r.eval(qf);
                    }
                    for r in big_phi.iter() {
                        t *= libm::round(r.eval(qf));
                    }
                    t
                })
                .collect();
            let mut blocks = Vec::new();
            let mut acc = 0.0f64;
            let mut t_idx = 0u32;
            loop {
                let u = (*m as u128).pow(t_idx);
                if u > q_max as u128 {
                    break;
                }
                let uf = u as f64;
                let mut term = 1.0;
                for r in phi.iter() {
                    term *= r.eval(uf);
                }
                for r in big_phi.iter() {
                    term *= libm::round(r.eval(uf));
                }
                acc += term;
                blocks.push((t_idx, acc));
                t_idx += 1;
            }
            report_from_terms(&terms, blocks)
        }
        ApplicationSeries::Shrinking { psi_raw, deltas } => {
            let terms: Vec<f64> = (1..=q_max)
                .map(|n| {
                    psi_raw
                        .iter()
                        .zip(deltas.iter())
                        .map(|(r, &d)| libm::pow(r.eval(n as f64), d))
                        .product()
                })
                .collect();
            report_from_terms(&terms, Vec::new())
        }
    }
}

// ---------------------------------------------------------------------------
// packed level sets
// ---------------------------------------------------------------------------

/// The packed construction at one level: big rectangles selected 5x-disjoint
/// around resonant centers in half the ball, then per kept center the
/// shrunk rectangles of its fixed resonant index.
#[derive(Clone, Debug)]
pub struct LevelSet {
    pub n: u32,
    pub ball: Rect,
    /// Per-axis big and shrunk radii at this level.
    pub rho_axes: Vec<Q>,
    pub psi_axes: Vec<Q>,
    /// Kept big-rectangle centers (the packing skeleton).
    pub big_centers: Vec<Vec<Q>>,
    /// The fixed resonant index of each kept center.
    pub chosen_index: Vec<Vec<i64>>,
    /// Shrunk-rectangle centers, tagged by their big-center position.
    pub shrunk_centers: Vec<(usize, Vec<Q>)>,
    /// The set E_n: shrunk rectangles as boxes, clipped to the ball.
    pub rects: Vec<Rect>,
}

impl LevelSet {
    /// Exact structural invariants: 5x-disjointness of the big skeleton and
    /// of each center's shrunk family, and containment of every shrunk
    /// rectangle in its big rectangle's 5x-enlargement.
    pub fn verify(&self, space: &AmbientSpace) -> Result<(), SystemError> {
        let torus = space.axis_torus_flags();
        let ten = q_int(10);
        for (a, xa) in self.big_centers.iter().enumerate() {
            for xb in self.big_centers.iter().skip(a + 1) {
                let separated = (0..xa.len()).any(|axis| {
                    axis_dist(&xa[axis], &xb[axis], torus[axis]) > &ten * &self.rho_axes[axis]
                });
                if !separated {
                    return Err(SystemError::BadParams(format!(
                        "big rectangles {a} and a later one overlap at scale 5"
                    )));
                }
            }
        }
        for (i, (big_a, za)) in self.shrunk_centers.iter().enumerate() {
            // containment in the big rectangle's 5x-enlargement
            let x = &self.big_centers[*big_a];
            for axis in 0..za.len() {
                let slack = &q_int(5) * &self.rho_axes[axis] - &self.psi_axes[axis];
                if axis_dist(&za[axis], &x[axis], torus[axis]) > slack {
                    return Err(SystemError::BadParams(format!(
                        "shrunk rectangle {i} leaves its big rectangle's 5x-enlargement"
                    )));
                }
            }
            for (big_b, zb) in self.shrunk_centers.iter().skip(i + 1) {
                if big_a != big_b {
                    continue;
                }
                let separated = (0..za.len()).any(|axis| {
                    axis_dist(&za[axis], &zb[axis], torus[axis]) > &ten * &self.psi_axes[axis]
                });
                if !separated {
                    return Err(SystemError::BadParams(format!(
                        "shrunk rectangles under big center {big_a} overlap at scale 5"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `mu(E_n)` by the exact sweep.
    pub fn measure(
        &self,
        space: &AmbientSpace,
        policy: &MeasurePolicy,
    ) -> Result<(Q, Q), SystemError> {
        union_measure_exact(&self.rects, space, policy).map_err(SystemError::Measure)
    }
}

/// Candidate big-rectangle centers of one item: the resonant points, or a
/// grid of on-hyperplane points with the given spacing.
fn candidate_centers(
    geometry: &[FactorGeometry],
    space: &AmbientSpace,
    spacing_axes: &[Q],
    window: &Rect,
    inflate: &[Q],
) -> Vec<Vec<Q>> {
    // per factor, a list of coordinate-block choices
    let mut per_factor: Vec<Vec<Vec<Q>>> = Vec::with_capacity(geometry.len());
    for (i, g) in geometry.iter().enumerate() {
        let offset = space.axis_offset(i);
        let dim = space.factors()[i].dim();
        match g {
            FactorGeometry::Point(coords) => per_factor.push(alloc::vec![coords.clone()]),
            FactorGeometry::CantorPreimage { center, .. } => {
                per_factor.push(alloc::vec![alloc::vec![center.clone()]])
            }
            FactorGeometry::Affine { normal, offset: p } => {
                // pivot on the largest coefficient, grid the rest
                let pivot = (0..dim)
                    .max_by_key(|&j| normal[j].unsigned_abs())
                    .expect("nonzero normal");
                let mut blocks: Vec<Vec<Q>> = alloc::vec![Vec::new()];
                for j in 0..dim {
                    if j == pivot {
                        for b in &mut blocks {
                            b.push(q_zero()); // placeholder, solved below
                        }
                        continue;
                    }
                    let axis = offset + j;
                    let (wlo, whi) = window.interval(axis);
                    let lo = wlo - &inflate[axis];
                    let hi = whi + &inflate[axis];
                    let step = &spacing_axes[axis];
                    let mut values = Vec::new();
                    let mut k = (&lo / step).ceil().to_integer();
                    loop {
                        let v = Q::from_integer(k.clone()) * step;
                        if v > hi {
                            break;
                        }
                        if v >= q_zero() && v <= q_int(1) {
                            values.push(v);
                        }
                        k += 1;
                    }
                    let mut next = Vec::with_capacity(blocks.len() * values.len());
                    for b in &blocks {
                        for v in &values {
                            let mut nb = b.clone();
                            nb[j] = v.clone();
                            next.push(nb);
                        }
                    }
                    blocks = next;
                }
                // solve the pivot coordinate on the hyperplane
                let mut solved = Vec::new();
                for mut b in blocks {
                    let mut rest = q_int(*p);
                    for (j, coef) in normal.iter().enumerate() {
                        if j != pivot {
                            rest -= q_int(*coef) * &b[j];
                        }
                    }
                    let v = rest / q_int(normal[pivot]);
                    if v >= q_zero() && v <= q_int(1) {
                        b[pivot] = v;
                        solved.push(b);
                    }
                }
                per_factor.push(solved);
            }
        }
    }
    // cartesian product across factors
    let mut centers: Vec<Vec<Q>> = alloc::vec![Vec::new()];
    for blocks in per_factor {
        let mut next = Vec::with_capacity(centers.len() * blocks.len());
        for c in &centers {
            for b in &blocks {
                let mut nc = c.clone();
                nc.extend(b.iter().cloned());
                next.push(nc);
            }
        }
        centers = next;
    }
    centers
}

/// Point-to-interval distance on one axis, torus-aware.
fn dist_to_interval(x: &Q, lo: &Q, hi: &Q, torus: bool) -> Q {
    if x >= lo && x <= hi {
        return q_zero();
    }
    let d_lo = axis_dist(x, lo, torus);
    let d_hi = axis_dist(x, hi, torus);
    if d_lo < d_hi {
        d_lo
    } else {
        d_hi
    }
}

/// The packed level set at level `n` inside `ball`.
///
/// Step 1 covers half the ball's trace of the rho-neighborhoods by
/// rectangles centered on resonant points and keeps a 5x-disjoint
/// subfamily. Step 2 fixes, per kept center, the lexicographically
/// smallest resonant index through it and packs psi-rectangles centered on
/// that resonant set.
pub fn build_level_set(
    family: &Family,
    rates: &RatePair,
    ball: &Rect,
    n: u32,
    item_cap: u64,
) -> Result<LevelSet, SystemError> {
    let space = family.space()?;
    let torus = space.axis_torus_flags();
    let u_n = rates.scheme.upper(n);
    let mut rho_axes = Vec::with_capacity(space.total_dim());
    let mut psi_axes = Vec::with_capacity(space.total_dim());
    for (i, factor) in space.factors().iter().enumerate() {
        let rho = rates.rho[i].eval_q(u_n);
        let psi = rates.psi[i].eval_q(u_n);
        if psi > rho {
            return Err(SystemError::RateViolation {
                level: n as u64,
                detail: "psi above rho".into(),
            });
        }
        for _ in 0..factor.dim() {
            rho_axes.push(rho.clone());
            psi_axes.push(psi.clone());
        }
    }

    let items = family.enumerate_level(&rates.scheme, n, item_cap)?;
    let half_ball = ball.scaled_about_center(1, 2);
    let spacing: Vec<Q> = rho_axes.iter().map(|r| r / q_int(2)).collect();

    // candidates: (center, owning index), deduplicated on the center with
    // the lexicographically smallest index fixed
    let mut candidates: Vec<(Vec<Q>, Vec<i64>)> = Vec::new();
    for item in &items {
        for center in candidate_centers(&item.geometry, &space, &spacing, &half_ball, &rho_axes) {
            let near = (0..center.len()).all(|axis| {
                let (lo, hi) = half_ball.interval(axis);
                dist_to_interval(&center[axis], lo, hi, torus[axis]) <= rho_axes[axis]
            });
            if near {
                candidates.push((center, item.index.clone()));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    candidates.dedup_by(|later, first| later.0 == first.0);

    let rects: Vec<CenteredRect> = candidates
        .iter()
        .map(|(c, _)| CenteredRect::new(c.clone(), rho_axes.clone()))
        .collect::<Result<_, _>>()?;
    let kept = five_r_cover(&rects, &q_int(5), &torus)?;

    let mut big_centers = Vec::with_capacity(kept.len());
    let mut chosen_index = Vec::with_capacity(kept.len());
    let mut shrunk_centers: Vec<(usize, Vec<Q>)> = Vec::new();
    let mut e_rects: Vec<Rect> = Vec::new();
    for (pos, &ci) in kept.iter().enumerate() {
        let (center, index) = &candidates[ci];
        big_centers.push(center.clone());
        chosen_index.push(index.clone());

        // shrunk candidates on the chosen resonant set within the big rect
        let item = items
            .iter()
            .find(|it| &it.index == index)
            .expect("kept index exists");
        let big_rect = Rect::new(
            center
                .iter()
                .zip(rho_axes.iter())
                .map(|(c, r)| {
                    let lo = c - r;
                    let hi = c + r;
                    (
                        if lo < q_zero() { q_zero() } else { lo },
                        if hi > q_int(1) { q_int(1) } else { hi },
                    )
                })
                .collect(),
        )?;
        let shrink_spacing: Vec<Q> = psi_axes.iter().map(|r| r / q_int(2)).collect();
        let mut shrunk_cands = candidate_centers(
            &item.geometry,
            &space,
            &shrink_spacing,
            &big_rect,
            &psi_axes,
        );
        shrunk_cands.retain(|z| {
            (0..z.len())
                .all(|axis| axis_dist(&z[axis], &center[axis], torus[axis]) <= rho_axes[axis])
        });
        shrunk_cands.sort();
        shrunk_cands.dedup();
        let shrunk_rects: Vec<CenteredRect> = shrunk_cands
            .iter()
            .map(|z| CenteredRect::new(z.clone(), psi_axes.clone()))
            .collect::<Result<_, _>>()?;
        let kept_shrunk = five_r_cover(&shrunk_rects, &q_int(5), &torus)?;
        for &si in &kept_shrunk {
            shrunk_centers.push((pos, shrunk_cands[si].clone()));
            for piece in shrunk_rects[si].pieces(&torus) {
                if let Some(clipped) = piece.intersect(ball) {
                    if clipped.is_solid() {
                        e_rects.push(clipped);
                    }
                }
            }
        }
    }

    Ok(LevelSet {
        n,
        ball: ball.clone(),
        rho_axes,
        psi_axes,
        big_centers,
        chosen_index,
        shrunk_centers,
        rects: e_rects,
    })
}

// ---------------------------------------------------------------------------
// Chung-Erdos
// ---------------------------------------------------------------------------

/// First and second moments of the level sets with the prefix ratios
/// `(sum mu(E_n))^2 / sum_{m != n} mu(E_m ∩ E_n)`.
#[derive(Clone, Debug)]
pub struct ChungErdosReport {
    pub mu: Vec<f64>,
    /// Full symmetric matrix with `mu(E_n)` on the diagonal.
    pub pair_matrix: Vec<Vec<f64>>,
    /// Ratio per prefix `N = 2..=len` (infinite when the off-diagonal
    /// pair sum is zero).
    pub prefix_ratios: Vec<f64>,
    /// `min(1, sum mu)`: the trivial bound recorded when all pairwise
    /// intersections vanish.
    pub disjoint_lower_bound: Option<f64>,
}

pub fn chung_erdos_bound(
    level_sets: &[LevelSet],
    space: &AmbientSpace,
    policy: &MeasurePolicy,
) -> Result<ChungErdosReport, SystemError> {
    if level_sets.len() < 2 {
        return Err(SystemError::BadParams(
            "need at least two level sets".into(),
        ));
    }
    let n = level_sets.len();
    let mut mu_exact: Vec<Q> = Vec::with_capacity(n);
    for ls in level_sets {
        let (v, _) = ls.measure(space, policy)?;
        mu_exact.push(v);
    }
    let mut matrix_exact = alloc::vec![alloc::vec![q_zero(); n]; n];
    for (i, mi) in mu_exact.iter().enumerate() {
        matrix_exact[i][i] = mi.clone();
    }
    for i in 0..n {
        for j in i + 1..n {
            let inter = pairwise_intersections(&level_sets[i].rects, &level_sets[j].rects);
            let (v, _) = union_measure_exact(&inter, space, policy)?;
            matrix_exact[i][j] = v.clone();
            matrix_exact[j][i] = v;
        }
    }
    let mut prefix_ratios = Vec::with_capacity(n - 1);
    let mut disjoint_lower_bound = None;
    for upto in 2..=n {
        let mut first = q_zero();
        for mi in mu_exact.iter().take(upto) {
            first += mi;
        }
        let mut second = q_zero();
        for (i, row) in matrix_exact.iter().enumerate().take(upto) {
            for (j, entry) in row.iter().enumerate().take(upto) {
                if i != j {
                    second += entry;
                }
            }
        }
        if second.is_zero() {
            prefix_ratios.push(f64::INFINITY);
            if upto == n {
                let total = q_to_f64(&first);
                disjoint_lower_bound = Some(total.min(1.0));
            }
        } else {
            prefix_ratios.push(q_to_f64(&(&first * &first / second)));
        }
    }
    Ok(ChungErdosReport {
        mu: mu_exact.iter().map(q_to_f64).collect(),
        pair_matrix: matrix_exact
            .iter()
            .map(|row| row.iter().map(q_to_f64).collect())
            .collect(),
        prefix_ratios,
        disjoint_lower_bound,
    })
}

// ---------------------------------------------------------------------------
// hit statistics
// ---------------------------------------------------------------------------

/// Where the sample points come from.
pub enum PointSource {
    /// `count` i.i.d. draws from the product measure under `seed`.
    Sampled { count: u64, seed: u64 },
    /// Explicit rational points.
    Explicit(Vec<Vec<Q>>),
}

/// Window aggregate: fraction of points hit in at least `k` levels of
/// `[n_lo, n_hi]`.
#[derive(Clone, Debug)]
pub struct WindowStat {
    pub n_lo: u32,
    pub n_hi: u32,
    pub k: u32,
    pub fraction: f64,
}

/// Per-level hit counts over the sampled points plus window aggregates.
#[derive(Clone, Debug)]
pub struct HitHistogram {
    pub levels: Vec<u32>,
    pub per_level_hits: Vec<u64>,
    pub total_points: u64,
    /// For each point, the levels (by value) at which it was hit.
    pub per_point_levels: Vec<Vec<u32>>,
    pub windows: Vec<WindowStat>,
    pub seed: Option<u64>,
}

/// Membership bits of the psi-neighborhood unions per level, aggregated
/// over the points. Exact arithmetic throughout.
pub fn hit_statistics(
    family: &Family,
    rates: &RatePair,
    points: &PointSource,
    n_range: (u32, u32),
    windows: &[(u32, u32)],
    k: u32,
    cap: u64,
) -> Result<HitHistogram, SystemError> {
    let space = family.space()?;
    let explicit;
    let (pts, seed): (&[Vec<Q>], Option<u64>) = match points {
        PointSource::Explicit(p) => (p.as_slice(), None),
        PointSource::Sampled { count, seed } => {
            let rng = CounterRng::new(*seed);
            explicit = (0..*count)
                .map(|i| sample_point_q(&rng, &space, i, 64))
                .collect::<Vec<_>>();
            (explicit.as_slice(), Some(*seed))
        }
    };
    let levels: Vec<u32> = (n_range.0..=n_range.1).collect();
    let mut per_level_hits = alloc::vec![0u64; levels.len()];
    let mut per_point_bits: Vec<Vec<bool>> = Vec::with_capacity(pts.len());
    for point in pts {
        let mut bits = Vec::with_capacity(levels.len());
        for (li, &n) in levels.iter().enumerate() {
            let u_n = rates.scheme.upper(n);
            let psi_radii: Vec<Q> = rates.psi.iter().map(|r| r.eval_q(u_n)).collect();
            let hit = family.hits_level(point, &psi_radii, &rates.scheme, n, cap)?;
            if hit {
                per_level_hits[li] += 1;
            }
            bits.push(hit);
        }
        per_point_bits.push(bits);
    }
    let mut window_stats = Vec::with_capacity(windows.len());
    for &(lo, hi) in windows {
        let mut count = 0u64;
        for bits in &per_point_bits {
            let hits_in_window = levels
                .iter()
                .zip(bits.iter())
                .filter(|(&n, &b)| b && n >= lo && n <= hi)
                .count() as u32;
            if hits_in_window >= k {
                count += 1;
            }
        }
        window_stats.push(WindowStat {
            n_lo: lo,
            n_hi: hi,
            k,
            fraction: count as f64 / pts.len().max(1) as f64,
        });
    }
    let per_point_levels = per_point_bits
        .iter()
        .map(|bits| {
            levels
                .iter()
                .zip(bits.iter())
                .filter_map(|(&n, &b)| if b { Some(n) } else { None })
                .collect()
        })
        .collect();
    Ok(HitHistogram {
        levels,
        per_level_hits,
        total_points: pts.len() as u64,
        per_point_levels,
        windows: window_stats,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::space::CantorSpec;
    use crate::num::q_ratio;
    use crate::systems::rate::Rate;
    use crate::systems::rates::{make_rates_shrinking, make_rates_simultaneous, RegularSide};
    use crate::systems::scheme::LevelScheme;
    use crate::systems::{Rational, Shrinking};
    use num_traits::Signed;

    #[test]
    fn constant_terms_diverge_linearly() {
        // psi = rho: every term is 1 and S_N = N
        let fam = Shrinking::new(
            alloc::vec![CantorSpec::full(2).unwrap()],
            alloc::vec![q_int(0)],
        )
        .unwrap();
        let pair = make_rates_shrinking(&[Rate::constant(q_int(1))], &fam, 64).unwrap();
        let space = fam.space().unwrap();
        let report = theorem_series(&pair, &space, 64);
        assert_eq!(report.total, 64.0);
        assert_eq!(report.verdict, SeriesVerdict::Diverging);
        assert!(report
            .checkpoints
            .iter()
            .all(|&(n, s, t)| s == n as f64 && t == 1.0));
        assert_eq!(pair.regular_side, RegularSide::Rho);
    }

    #[test]
    fn geometric_series_sums_to_closed_form() {
        // d=2, phi_i(q) = 1/q along u_n = M^n: terms M^-n, sum 1/(M-1)
        let phi = [Rate::power(q_int(1), -1), Rate::power(q_int(1), -1)];
        let pair = make_rates_simultaneous(&phi, 2, 4, 10).unwrap();
        let space = AmbientSpace::unit_torus(2).unwrap();
        let report = theorem_series(&pair, &space, 30);
        assert!((report.total - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(report.verdict, SeriesVerdict::Converging);
    }

    #[test]
    fn harmonic_labels_diverging_and_zeta2_converging() {
        let harmonic = ApplicationSeries::LinearForms {
            phi: &[Rate::power(q_int(1), -1)],
            big_phi: &[Rate::power(q_int(1), 1)],
            m: 2,
        };
        let report = application_series(&harmonic, 10_000);
        assert_eq!(report.verdict, SeriesVerdict::Diverging);
        let zeta2 = ApplicationSeries::Simultaneous {
            phi: &[Rate::power(q_int(1), -1), Rate::power(q_int(1), -1)],
        };
        let report = application_series(&zeta2, 10_000);
        assert_eq!(report.verdict, SeriesVerdict::Converging);
        assert!((report.total - 1.6448340718480652).abs() < 1e-9);
    }

    #[test]
    fn shrinking_level_set_keeps_one_center() {
        // b=2, d=1, n=3, ball [0,1]: 5x-disjointness forces one center
        let fam = Shrinking::new(
            alloc::vec![CantorSpec::full(2).unwrap()],
            alloc::vec![q_int(0)],
        )
        .unwrap();
        let pair = make_rates_shrinking(&[Rate::power(q_int(1), -1)], &fam, 10).unwrap();
        let family = Family::Shrinking(fam);
        let space = family.space().unwrap();
        let ls = build_level_set(&family, &pair, &Rect::unit_cube(1), 3, 100_000).unwrap();
        assert_eq!(ls.big_centers.len(), 1);
        // point resonant sets: one shrunk rectangle per kept center
        assert_eq!(ls.shrunk_centers.len(), 1);
        ls.verify(&space).unwrap();
    }

    #[test]
    fn rational_level_set_invariants() {
        let fam = Rational::new(1).unwrap();
        let phi = [Rate::power(q_int(1), -1)];
        let pair = RatePair {
            scheme: LevelScheme::PerIndex,
            ..make_rates_simultaneous(&phi, 1, 16, 3).unwrap()
        };
        let family = Family::Rational(fam);
        let space = family.space().unwrap();
        let policy = MeasurePolicy::default();
        for n in [5u32, 12, 20] {
            let ls = build_level_set(&family, &pair, &Rect::unit_cube(1), n, 100_000).unwrap();
            ls.verify(&space).unwrap();
            assert!(!ls.rects.is_empty());
            let (v, e) = ls.measure(&space, &policy).unwrap();
            assert!(e.is_zero());
            assert!(v.is_positive());
        }
    }

    #[test]
    fn identical_sets_ratio_collapses() {
        // all E_n equal: ratio at N is mu * N/(N-1)
        let fam = Shrinking::new(
            alloc::vec![CantorSpec::full(2).unwrap()],
            alloc::vec![q_int(0)],
        )
        .unwrap();
        let pair = make_rates_shrinking(&[Rate::power(q_int(1), -1)], &fam, 10).unwrap();
        let family = Family::Shrinking(fam);
        let space = family.space().unwrap();
        let policy = MeasurePolicy::default();
        let ls = build_level_set(&family, &pair, &Rect::unit_cube(1), 3, 100_000).unwrap();
        let copies = alloc::vec![ls.clone(), ls.clone(), ls.clone(), ls];
        let report = chung_erdos_bound(&copies, &space, &policy).unwrap();
        let mu = report.mu[0];
        for (idx, upto) in (2..=4u32).enumerate() {
            let want = mu * upto as f64 / (upto as f64 - 1.0);
            assert!((report.prefix_ratios[idx] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_sets_hit_the_infinity_sentinel() {
        let fam = Shrinking::new(
            alloc::vec![CantorSpec::full(2).unwrap()],
            alloc::vec![q_int(0)],
        )
        .unwrap();
        let pair = make_rates_shrinking(&[Rate::power(q_int(1), -2)], &fam, 10).unwrap();
        let family = Family::Shrinking(fam);
        let space = family.space().unwrap();
        let policy = MeasurePolicy::default();
        // levels 2 and 3 in disjoint sub-balls
        let b1 = Rect::new(alloc::vec![(q_zero(), q_ratio(1, 4))]).unwrap();
        let b2 = Rect::new(alloc::vec![(q_ratio(1, 2), q_ratio(3, 4))]).unwrap();
        let l1 = build_level_set(&family, &pair, &b1, 4, 100_000).unwrap();
        let l2 = build_level_set(&family, &pair, &b2, 4, 100_000).unwrap();
        let report = chung_erdos_bound(&[l1, l2], &space, &policy).unwrap();
        assert!(report.prefix_ratios[0].is_infinite());
        assert!(report.disjoint_lower_bound.is_some());
    }

    #[test]
    fn hit_statistics_on_explicit_points() {
        // x = 0 hits every level of the rational system
        let family = Family::Rational(Rational::new(1).unwrap());
        let phi = [Rate::power(q_int(1), -1)];
        let pair = RatePair {
            scheme: LevelScheme::PerIndex,
            ..make_rates_simultaneous(&phi, 1, 16, 3).unwrap()
        };
        let pts = PointSource::Explicit(alloc::vec![
            alloc::vec![q_int(0)],
            alloc::vec![q_ratio(6_180_339_887, 10_000_000_000)]
        ]);
        let hist =
            hit_statistics(&family, &pair, &pts, (4, 16), &[(4, 8), (8, 16)], 1, 10_000).unwrap();
        assert_eq!(hist.total_points, 2);
        // level q=5 and q=8 catch the golden point; every level catches 0
        let idx5 = hist.levels.iter().position(|&n| n == 5).unwrap();
        let idx6 = hist.levels.iter().position(|&n| n == 6).unwrap();
        assert_eq!(hist.per_level_hits[idx5], 2);
        assert_eq!(hist.per_level_hits[idx6], 1);
        // the zero point is in every level's set; the golden point's set
        // within [4, 16] is the fibonacci trio
        assert_eq!(hist.per_point_levels[0].len(), hist.levels.len());
        assert_eq!(hist.per_point_levels[1], alloc::vec![5, 8, 13]);
        assert!(hist.windows.iter().all(|w| w.fraction == 1.0));
    }
}
