//! Dispatch a parsed configuration to the computational modules and
//! collect the report bundle.

use std::fmt;
use std::time::Instant;

use rectlimsup::dichotomy::{
    application_series, build_level_set, chung_erdos_bound, hit_statistics, theorem_series,
    ApplicationSeries, PointSource, SeriesReport,
};
use rectlimsup::geom::space::{AmbientSpace, CantorSpec, FactorSpace};
use rectlimsup::measure::mc::mc_measure;
use rectlimsup::measure::region::FactorGeometry;
use rectlimsup::measure::sweep::union_measure;
use rectlimsup::measure::{MeasureError, MeasurePolicy};
use rectlimsup::num::{format_sig, Q};
use rectlimsup::rng::CounterRng;
use rectlimsup::systems::rates::{
    make_rates_linear, make_rates_shrinking, make_rates_simultaneous, RatePair,
};
use rectlimsup::systems::sanitize::{sanitize_linear_forms, sanitize_simultaneous};
use rectlimsup::systems::scheme::LevelScheme;
use rectlimsup::systems::{Family, LinearForms, Rational, Shrinking, SystemError};
use rectlimsup::ubiquity::{kappa_scaling_probe, verify_ubiquity};
use rectlimsup::Rect;

use crate::config::{BallSpec, ExperimentConfig, ProbeGeometry, SystemKind, TaskKind};

const BALL_SEED: u64 = 0xba11;

#[derive(Debug)]
pub struct RunError(pub String);

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for RunError {}

impl From<SystemError> for RunError {
    fn from(e: SystemError) -> Self {
        RunError(e.to_string())
    }
}

impl From<MeasureError> for RunError {
    fn from(e: MeasureError) -> Self {
        RunError(e.to_string())
    }
}

/// One CSV table: a name, a header, and stringified rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything a run produced, plus provenance.
#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub task: TaskKind,
    pub version: String,
    pub seed: u64,
    pub config_echo: String,
    pub tables: Vec<Table>,
    pub summary_lines: Vec<String>,
    pub elapsed_ms: u128,
}

fn fmt12(x: f64) -> String {
    format_sig(x, 12)
}

fn method_tag(est: &rectlimsup::MeasureEstimate) -> String {
    // statistical figures carry their seed and sample count inline
    match &est.method {
        rectlimsup::Method::MonteCarlo { seed, samples } => {
            format!("monte-carlo[seed={seed};samples={samples}]")
        }
        other => other.tag().to_string(),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReportBundle, RunError> {
    let start = Instant::now();
    let mut tables = Vec::new();
    let mut summary = Vec::new();
    match cfg.task {
        TaskKind::Measure => run_measure(cfg, &mut tables, &mut summary)?,
        TaskKind::Ubiquity => run_ubiquity(cfg, &mut tables, &mut summary)?,
        TaskKind::Series => run_series(cfg, &mut tables, &mut summary)?,
        TaskKind::ChungErdos => run_chung_erdos(cfg, &mut tables, &mut summary)?,
        TaskKind::Hits => run_hits(cfg, &mut tables, &mut summary)?,
        TaskKind::ScalingProbe => run_probe(cfg, &mut tables, &mut summary)?,
    }
    Ok(ReportBundle {
        task: cfg.task,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_echo: cfg.echo.clone(),
        tables,
        summary_lines: summary,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

fn policy_for(cfg: &ExperimentConfig) -> MeasurePolicy {
    MeasurePolicy {
        mc_samples: cfg.samples,
        mc_seed: cfg.seed,
        ..MeasurePolicy::default()
    }
}

fn build_family(cfg: &ExperimentConfig) -> Result<Family, RunError> {
    match cfg.system {
        SystemKind::Rational => Ok(Family::Rational(Rational::new(cfg.d)?)),
        SystemKind::LinearForms => {
            if cfg.big_phi.len() != cfg.h {
                return Err(RunError(format!(
                    "linear-forms system needs Phi_1..Phi_{}",
                    cfg.h
                )));
            }
            Ok(Family::LinearForms(LinearForms::new(
                cfg.d,
                cfg.h,
                cfg.big_phi.clone(),
                cfg.m,
            )?))
        }
        SystemKind::Shrinking => {
            let mut specs = Vec::with_capacity(cfg.d);
            for (b, ds) in cfg.bases.iter().zip(cfg.digit_sets.iter()) {
                specs.push(CantorSpec::new(*b, ds.clone()).map_err(SystemError::Geometry)?);
            }
            Ok(Family::Shrinking(Shrinking::new(
                specs,
                cfg.target.clone(),
            )?))
        }
    }
}

/// Rates for the configured system, with the sanitize step where it applies.
/// Returns `None` when sanitization short-circuits to full measure.
fn build_rates(
    cfg: &ExperimentConfig,
    family: &Family,
    summary: &mut Vec<String>,
) -> Result<Option<RatePair>, RunError> {
    let check_levels = cfg.n_max.max(2);
    let pair = match (cfg.system, family) {
        (SystemKind::Rational, _) => {
            if cfg.phi.len() != cfg.d {
                return Err(RunError(format!(
                    "rational system needs phi_1..phi_{}",
                    cfg.d
                )));
            }
            let sanitized = sanitize_simultaneous(&cfg.phi, cfg.d, cfg.sanitize_window)?;
            for w in &sanitized.warnings {
                summary.push(format!("sanitize warning: {w}"));
            }
            if sanitized.full_measure {
                summary.push(
                    "sanitize: full-measure short-circuit (volume above the convex-body threshold)"
                        .into(),
                );
                return Ok(None);
            }
            let mut pair = make_rates_simultaneous(&sanitized.phi, cfg.d, cfg.m, check_levels)?;
            if cfg.per_index_levels {
                pair.scheme = LevelScheme::PerIndex;
                pair.lambda = None;
            }
            pair
        }
        (SystemKind::LinearForms, Family::LinearForms(fam)) => {
            if cfg.phi.len() != cfg.d {
                return Err(RunError(format!(
                    "linear-forms system needs phi_1..phi_{}",
                    cfg.d
                )));
            }
            let sanitized = sanitize_linear_forms(
                &cfg.phi,
                &cfg.big_phi,
                cfg.d,
                cfg.h,
                cfg.epsilon,
                cfg.sanitize_window,
                Some(cfg.m),
            )?;
            for w in &sanitized.warnings {
                summary.push(format!("sanitize warning: {w}"));
            }
            if sanitized.full_measure {
                summary.push(
                    "sanitize: full-measure short-circuit (volume above the convex-body threshold)"
                        .into(),
                );
                return Ok(None);
            }
            make_rates_linear(&sanitized.phi, fam, check_levels)?
        }
        (SystemKind::Shrinking, Family::Shrinking(fam)) => {
            if cfg.psi_raw.len() != cfg.d {
                return Err(RunError(format!(
                    "shrinking system needs psi_1..psi_{}",
                    cfg.d
                )));
            }
            make_rates_shrinking(&cfg.psi_raw, fam, check_levels.max(cfg.n_max))?
        }
        _ => unreachable!("family matches system kind"),
    };
    for (i, (psi, rho)) in pair.psi.iter().zip(pair.rho.iter()).enumerate() {
        summary.push(format!(
            "rates factor {}: psi = {}, rho = {}",
            i + 1,
            psi.describe(),
            rho.describe()
        ));
    }
    Ok(Some(pair))
}

fn make_balls(spec: &BallSpec, dim: usize) -> Result<Vec<Rect>, RunError> {
    match spec {
        BallSpec::Full => Ok(vec![Rect::unit_cube(dim)]),
        BallSpec::Dyadic { k, count } => {
            let rng = CounterRng::new(BALL_SEED);
            let denom = 1u64 << k;
            if denom < 2 {
                return Err(RunError("dyadic balls need k >= 1".into()));
            }
            let mut balls = vec![Rect::unit_cube(dim)];
            for i in 0..*count {
                let mut intervals = Vec::with_capacity(dim);
                for axis in 0..dim {
                    let j = rng.below(axis as u64, i as u64, denom - 2);
                    intervals.push((
                        rectlimsup::num::q_ratio(j as i64, denom as i64),
                        rectlimsup::num::q_ratio(j as i64 + 2, denom as i64),
                    ));
                }
                balls.push(Rect::new(intervals).map_err(|e| RunError(e.to_string()))?);
            }
            Ok(balls)
        }
        BallSpec::Explicit(list) => {
            let mut balls = Vec::with_capacity(list.len());
            for iv in list {
                if iv.len() != dim {
                    return Err(RunError(format!(
                        "ball has {} axes, space has {dim}",
                        iv.len()
                    )));
                }
                balls.push(Rect::new(iv.clone()).map_err(|e| RunError(e.to_string()))?);
            }
            Ok(balls)
        }
    }
}

fn run_measure(
    cfg: &ExperimentConfig,
    tables: &mut Vec<Table>,
    summary: &mut Vec<String>,
) -> Result<(), RunError> {
    if cfg.boxes.is_empty() {
        return Err(RunError("measure task needs task.boxes".into()));
    }
    let dim = cfg.boxes[0].len();
    let space = AmbientSpace::new(vec![
        FactorSpace::lebesgue(dim, 0.0, false).map_err(|e| RunError(e.to_string()))?
    ])
    .map_err(|e| RunError(e.to_string()))?;
    let mut rects = Vec::with_capacity(cfg.boxes.len());
    for iv in &cfg.boxes {
        if iv.len() != dim {
            return Err(RunError("boxes must share one dimension".into()));
        }
        rects.push(Rect::new(iv.clone()).map_err(|e| RunError(e.to_string()))?);
    }
    let policy = policy_for(cfg);
    let mut table = Table::new("measure", &["method", "value", "error"]);
    match union_measure(&rects, &space, &policy) {
        Ok(est) => {
            table.push(vec![method_tag(&est), fmt12(est.value), fmt12(est.error)]);
        }
        Err(MeasureError::UseStatistical { dim, cutoff }) => {
            summary.push(format!(
                "exact sweep refused: dimension {dim} above cutoff {cutoff}"
            ));
        }
        Err(e) => return Err(e.into()),
    }
    let rects2 = rects.clone();
    let est = mc_measure(
        move |p| rects2.iter().any(|r| r.contains_point_f64(p)),
        &space,
        cfg.samples,
        cfg.seed,
    )
    .map_err(|e| RunError(e.to_string()))?;
    table.push(vec![method_tag(&est), fmt12(est.value), fmt12(est.error)]);
    summary.push(format!("union of {} boxes in dimension {dim}", rects.len()));
    tables.push(table);
    Ok(())
}

fn run_ubiquity(
    cfg: &ExperimentConfig,
    tables: &mut Vec<Table>,
    summary: &mut Vec<String>,
) -> Result<(), RunError> {
    let family = build_family(cfg)?;
    let rates = match build_rates(cfg, &family, summary)? {
        Some(r) => r,
        None => {
            summary.push("no ubiquity run: rates short-circuited".into());
            return Ok(());
        }
    };
    let space = family.space()?;
    let balls = make_balls(&cfg.balls, space.total_dim())?;
    let policy = policy_for(cfg);
    let report = verify_ubiquity(
        &family,
        &rates,
        &balls,
        (cfg.n_min, cfg.n_max),
        &policy,
        cfg.item_cap,
    )?;
    let mut table = Table::new("ubiquity", &["ball_id", "n", "ratio", "method", "error"]);
    for row in &report.rows {
        table.push(vec![
            row.ball_id.to_string(),
            row.n.to_string(),
            fmt12(row.ratio.value),
            method_tag(&row.ratio),
            fmt12(row.ratio.error),
        ]);
    }
    tables.push(table);
    let mut tails = Table::new("ubiquity-tails", &["ball_id", "n0", "tail_min_ratio"]);
    for (ball_id, per_ball) in report.per_ball_tail_min.iter().enumerate() {
        for (n0, v) in per_ball {
            tails.push(vec![ball_id.to_string(), n0.to_string(), fmt12(*v)]);
        }
    }
    tables.push(tails);
    summary.push(format!(
        "ubiquity over {} balls, levels {}..={}; min ratio {}",
        balls.len(),
        cfg.n_min,
        cfg.n_max,
        fmt12(
            report
                .per_ball_min
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        ),
    ));
    if !report.flagged_balls.is_empty() {
        summary.push(format!(
            "balls with vanishing tail minima: {:?}",
            report.flagged_balls
        ));
    }
    Ok(())
}

fn push_series_table(tables: &mut Vec<Table>, name: &str, report: &SeriesReport) {
    let mut table = Table::new(name, &["N", "partial_sum", "last_term"]);
    for &(n, s, t) in &report.checkpoints {
        table.push(vec![n.to_string(), fmt12(s), fmt12(t)]);
    }
    tables.push(table);
}

fn verdict_name(v: rectlimsup::dichotomy::SeriesVerdict) -> &'static str {
    match v {
        rectlimsup::dichotomy::SeriesVerdict::Diverging => "diverging",
        rectlimsup::dichotomy::SeriesVerdict::Converging => "converging",
        rectlimsup::dichotomy::SeriesVerdict::Inconclusive => "inconclusive",
    }
}

fn run_series(
    cfg: &ExperimentConfig,
    tables: &mut Vec<Table>,
    summary: &mut Vec<String>,
) -> Result<(), RunError> {
    let family = build_family(cfg)?;
    // the application series of the configured system
    let app = match cfg.system {
        SystemKind::Rational => {
            if cfg.phi.len() != cfg.d {
                return Err(RunError("need phi rates".into()));
            }
            application_series(
                &ApplicationSeries::Simultaneous { phi: &cfg.phi },
                cfg.q_max,
            )
        }
        SystemKind::LinearForms => application_series(
            &ApplicationSeries::LinearForms {
                phi: &cfg.phi,
                big_phi: &cfg.big_phi,
                m: cfg.m,
            },
            cfg.q_max,
        ),
        SystemKind::Shrinking => {
            let space = family.space()?;
            let deltas: Vec<f64> = space.factors().iter().map(|f| f.delta()).collect();
            application_series(
                &ApplicationSeries::Shrinking {
                    psi_raw: &cfg.psi_raw,
                    deltas: &deltas,
                },
                cfg.q_max,
            )
        }
    };
    summary.push(format!(
        "application series: S_{} = {}, verdict {} (tail alpha {})",
        cfg.q_max,
        fmt12(app.total),
        verdict_name(app.verdict),
        fmt12(app.tail_alpha),
    ));
    if !app.block_sums.is_empty() {
        let mut table = Table::new("series-blocks", &["t", "block_partial_sum"]);
        for &(t, s) in &app.block_sums {
            table.push(vec![t.to_string(), fmt12(s)]);
        }
        tables.push(table);
    }
    push_series_table(tables, "series", &app);

    // the general dichotomy series when rates are constructible
    if let Some(rates) = build_rates(cfg, &family, summary)? {
        let space = family.space()?;
        let theorem = theorem_series(&rates, &space, cfg.n_max.max(2));
        summary.push(format!(
            "dichotomy series: S_{} = {}, verdict {}",
            theorem.checkpoints.last().map(|c| c.0).unwrap_or(0),
            fmt12(theorem.total),
            verdict_name(theorem.verdict),
        ));
        push_series_table(tables, "theorem-series", &theorem);
    }
    Ok(())
}

fn run_chung_erdos(
    cfg: &ExperimentConfig,
    tables: &mut Vec<Table>,
    summary: &mut Vec<String>,
) -> Result<(), RunError> {
    let family = build_family(cfg)?;
    let rates = match build_rates(cfg, &family, summary)? {
        Some(r) => r,
        None => return Ok(()),
    };
    let space = family.space()?;
    let balls = make_balls(&cfg.balls, space.total_dim())?;
    let ball = &balls[0];
    let policy = policy_for(cfg);
    let mut level_sets = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let ls = build_level_set(&family, &rates, ball, n, cfg.item_cap)?;
        ls.verify(&space)?;
        level_sets.push(ls);
    }
    let report = chung_erdos_bound(&level_sets, &space, &policy)?;
    let mut mu_table = Table::new(
        "chung-erdos-levels",
        &["n", "mu", "big_rects", "shrunk_rects"],
    );
    for (i, ls) in level_sets.iter().enumerate() {
        mu_table.push(vec![
            ls.n.to_string(),
            fmt12(report.mu[i]),
            ls.big_centers.len().to_string(),
            ls.shrunk_centers.len().to_string(),
        ]);
    }
    tables.push(mu_table);
    let mut ratio_table = Table::new("chung-erdos-ratios", &["N", "ratio"]);
    for (i, r) in report.prefix_ratios.iter().enumerate() {
        ratio_table.push(vec![(i + 2).to_string(), fmt12(*r)]);
    }
    tables.push(ratio_table);
    summary.push(format!(
        "chung-erdos over levels {}..={}: final ratio {}",
        cfg.n_min,
        cfg.n_max,
        fmt12(*report.prefix_ratios.last().unwrap()),
    ));
    if let Some(lb) = report.disjoint_lower_bound {
        summary.push(format!(
            "pairwise intersections vanish; trivial lower bound {}",
            fmt12(lb)
        ));
    }
    Ok(())
}

fn run_hits(
    cfg: &ExperimentConfig,
    tables: &mut Vec<Table>,
    summary: &mut Vec<String>,
) -> Result<(), RunError> {
    let family = build_family(cfg)?;
    let rates = match build_rates(cfg, &family, summary)? {
        Some(r) => r,
        None => return Ok(()),
    };
    let source = PointSource::Sampled {
        count: cfg.points,
        seed: cfg.seed,
    };
    let hist = hit_statistics(
        &family,
        &rates,
        &source,
        (cfg.n_min, cfg.n_max),
        &cfg.windows,
        cfg.k_threshold,
        cfg.item_cap,
    )?;
    let mut table = Table::new("hits", &["level", "hits", "fraction"]);
    for (i, &n) in hist.levels.iter().enumerate() {
        table.push(vec![
            n.to_string(),
            hist.per_level_hits[i].to_string(),
            fmt12(hist.per_level_hits[i] as f64 / hist.total_points as f64),
        ]);
    }
    tables.push(table);
    let mut wtable = Table::new("hit-windows", &["n_lo", "n_hi", "k", "fraction"]);
    for w in &hist.windows {
        wtable.push(vec![
            w.n_lo.to_string(),
            w.n_hi.to_string(),
            w.k.to_string(),
            fmt12(w.fraction),
        ]);
    }
    tables.push(wtable);
    summary.push(format!(
        "hit statistics over {} points, levels {}..={}",
        hist.total_points, cfg.n_min, cfg.n_max
    ));
    Ok(())
}

fn run_probe(
    cfg: &ExperimentConfig,
    tables: &mut Vec<Table>,
    summary: &mut Vec<String>,
) -> Result<(), RunError> {
    let family = build_family(cfg)?;
    let space = family.space()?;
    let factor = space.factors()[0].clone();
    let geometry = match &cfg.probe_geometry {
        Some(ProbeGeometry::Point(c)) => FactorGeometry::Point(c.clone()),
        Some(ProbeGeometry::Affine { normal, offset }) => FactorGeometry::Affine {
            normal: normal.clone(),
            offset: *offset,
        },
        None => return Err(RunError("scaling-probe task needs task.geometry".into())),
    };
    let center: Vec<Q> = if cfg.probe_center.is_empty() {
        match &geometry {
            FactorGeometry::Point(c) => c.clone(),
            _ => return Err(RunError("affine probes need task.center".into())),
        }
    } else {
        cfg.probe_center.clone()
    };
    let report = kappa_scaling_probe(
        &factor,
        &geometry,
        &center,
        &cfg.r_list,
        &cfg.eps_list,
        cfg.samples,
        cfg.seed,
    )?;
    let mut table = Table::new("scaling-probe", &["r", "eps", "measure", "method", "error"]);
    for (r, eps, est) in &report.grid {
        table.push(vec![
            fmt12(*r),
            fmt12(*eps),
            fmt12(est.value),
            method_tag(est),
            fmt12(est.error),
        ]);
    }
    tables.push(table);
    let mut fit = Table::new(
        "scaling-fit",
        &["eps_slope", "r_slope", "implied_delta", "implied_kappa"],
    );
    fit.push(vec![
        fmt12(report.eps_slope),
        fmt12(report.r_slope),
        fmt12(report.implied_delta),
        fmt12(report.implied_kappa),
    ]);
    tables.push(fit);
    summary.push(format!(
        "scaling probe: delta = {}, kappa = {}",
        fmt12(report.implied_delta),
        fmt12(report.implied_kappa)
    ));
    Ok(())
}
