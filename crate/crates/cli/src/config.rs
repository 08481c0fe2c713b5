//! Experiment configuration: a flat key-value text file with two sections.
//!
//! ```text
//! [system]
//! kind = rational
//! d = 1
//! M = 16
//! phi_1 = 1*u^-1
//!
//! [task]
//! kind = ubiquity
//! n_min = 2
//! n_max = 5
//! balls = dyadic:6:20
//! seed = 7
//! ```
//!
//! Rates use the `c*u^a*log(u)^b` syntax with rational or decimal `c`, `a`,
//! `b`. Numbers may be written as decimals (`0.25`) or fractions (`1/4`).

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use rectlimsup::num::{q_int, q_ratio, Q};
use rectlimsup::systems::rate::Rate;

#[derive(Debug)]
pub struct ConfigError {
    /// Every offending field with its complaint.
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "invalid configuration ({} problems):",
            self.problems.len()
        )?;
        for p in &self.problems {
            writeln!(f, "  - {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Rational,
    LinearForms,
    Shrinking,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    Measure,
    Ubiquity,
    Series,
    ChungErdos,
    Hits,
    ScalingProbe,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Measure => "measure",
            TaskKind::Ubiquity => "ubiquity",
            TaskKind::Series => "series",
            TaskKind::ChungErdos => "chung-erdos",
            TaskKind::Hits => "hits",
            TaskKind::ScalingProbe => "scaling-probe",
        }
    }
}

/// Ball specifications for ubiquity runs.
#[derive(Clone, Debug, PartialEq)]
pub enum BallSpec {
    Full,
    /// `count` deterministic dyadic balls of radius `2^-k` plus the cube.
    Dyadic {
        k: u32,
        count: u32,
    },
    Explicit(Vec<Vec<(Q, Q)>>),
}

/// Scaling-probe geometry.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbeGeometry {
    Point(Vec<Q>),
    Affine { normal: Vec<i64>, offset: i64 },
}

/// Everything a run needs; the provenance echo serializes this back out.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub system: SystemKind,
    pub task: TaskKind,
    pub d: usize,
    pub h: usize,
    pub m: u64,
    pub phi: Vec<Rate>,
    pub big_phi: Vec<Rate>,
    pub psi_raw: Vec<Rate>,
    pub epsilon: f64,
    pub bases: Vec<u32>,
    pub digit_sets: Vec<Vec<u32>>,
    pub target: Vec<Q>,
    pub per_index_levels: bool,
    pub n_min: u32,
    pub n_max: u32,
    pub q_max: u64,
    pub samples: u64,
    pub seed: u64,
    pub item_cap: u64,
    pub points: u64,
    pub windows: Vec<(u32, u32)>,
    pub k_threshold: u32,
    pub balls: BallSpec,
    pub boxes: Vec<Vec<(Q, Q)>>,
    pub probe_geometry: Option<ProbeGeometry>,
    pub probe_center: Vec<Q>,
    pub r_list: Vec<Q>,
    pub eps_list: Vec<Q>,
    pub sanitize_window: u64,
    /// Raw lines for the provenance echo.
    pub echo: String,
}

pub fn parse_number(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num.trim().parse().ok()?;
        let d: i64 = den.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(q_ratio(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let neg = int_part.trim_start().starts_with('-');
        let i: i64 = if int_part.is_empty() || int_part == "-" {
            0
        } else {
            int_part.parse().ok()?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let f: i64 = frac_part.parse().ok()?;
        let scale = 10i64.checked_pow(frac_part.len() as u32)?;
        let frac = q_ratio(f, scale);
        let base = q_int(i);
        return Some(if neg { base - frac } else { base + frac });
    }
    s.parse::<i64>().ok().map(q_int)
}

fn parse_exponent(s: &str) -> Option<Rational64> {
    let q = parse_number(s)?;
    use num_traits::ToPrimitive;
    Some(Rational64::new(q.numer().to_i64()?, q.denom().to_i64()?))
}

/// Parse the `c*u^a*log(u)^b` rate syntax.
pub fn parse_rate(s: &str) -> Option<Rate> {
    let mut coeff = q_int(1);
    let mut u_exp = Rational64::from_integer(0);
    let mut log_exp = Rational64::from_integer(0);
    let mut saw_anything = false;
    for part in s.split('*') {
        let part = part.trim();
        if part.is_empty() {
            return None;
        }
        saw_anything = true;
        if let Some(rest) = part.strip_prefix("u^") {
            u_exp += parse_exponent(rest)?;
        } else if part == "u" {
            u_exp += Rational64::from_integer(1);
        } else if let Some(rest) = part.strip_prefix("log(u)^") {
            log_exp += parse_exponent(rest)?;
        } else if part == "log(u)" {
            log_exp += Rational64::from_integer(1);
        } else {
            coeff *= parse_number(part)?;
        }
    }
    if !saw_anything {
        return None;
    }
    Some(Rate::power_log(coeff, u_exp, log_exp))
}

fn parse_intervals(s: &str) -> Option<Vec<(Q, Q)>> {
    let mut out = Vec::new();
    for axis in s.split(';') {
        let (lo, hi) = axis.split_once(',')?;
        out.push((parse_number(lo)?, parse_number(hi)?));
    }
    Some(out)
}

struct Raw {
    map: BTreeMap<String, String>,
    echo: String,
}

fn read_raw(text: &str) -> Result<Raw, ConfigError> {
    let mut section = String::new();
    let mut map = BTreeMap::new();
    let mut problems = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        match line.split_once('=') {
            Some((key, value)) => {
                let full = if section.is_empty() {
                    key.trim().to_string()
                } else {
                    format!("{section}.{}", key.trim())
                };
                map.insert(full, value.trim().to_string());
            }
            None => problems.push(format!("line {}: expected `key = value`", lineno + 1)),
        }
    }
    if problems.is_empty() {
        Ok(Raw {
            map,
            echo: text.to_string(),
        })
    } else {
        Err(ConfigError { problems })
    }
}

pub fn parse_config(
    text: &str,
    seed_override: Option<u64>,
) -> Result<ExperimentConfig, ConfigError> {
    parse_config_for_task(text, seed_override, None)
}

/// Parse with the task fixed by a subcommand; `task.kind` in the file is
/// then optional (and overridden), and task-dependent validation follows
/// the effective task.
pub fn parse_config_for_task(
    text: &str,
    seed_override: Option<u64>,
    task_override: Option<TaskKind>,
) -> Result<ExperimentConfig, ConfigError> {
    let raw = read_raw(text)?;
    let mut problems: Vec<String> = Vec::new();
    let get = |key: &str| raw.map.get(key).map(|s| s.as_str());

    let system = match get("system.kind") {
        Some("rational") => SystemKind::Rational,
        Some("linear-forms") => SystemKind::LinearForms,
        Some("shrinking") => SystemKind::Shrinking,
        Some(other) => {
            problems.push(format!("system.kind: unknown system `{other}`"));
            SystemKind::Rational
        }
        None => {
            problems.push("system.kind: missing".into());
            SystemKind::Rational
        }
    };
    let task = match (task_override, get("task.kind")) {
        (Some(t), _) => t,
        (None, Some("measure")) => TaskKind::Measure,
        (None, Some("ubiquity")) => TaskKind::Ubiquity,
        (None, Some("series")) => TaskKind::Series,
        (None, Some("chung-erdos")) => TaskKind::ChungErdos,
        (None, Some("hits")) => TaskKind::Hits,
        (None, Some("scaling-probe")) => TaskKind::ScalingProbe,
        (None, Some(other)) => {
            problems.push(format!("task.kind: unknown task `{other}`"));
            TaskKind::Series
        }
        (None, None) => {
            problems.push("task.kind: missing".into());
            TaskKind::Series
        }
    };

    let mut parse_u64 = |key: &str, default: u64| -> u64 {
        match get(key) {
            None => default,
            Some(v) => match v.parse::<u64>() {
                Ok(x) => x,
                Err(_) => {
                    problems.push(format!("{key}: expected an unsigned integer, got `{v}`"));
                    default
                }
            },
        }
    };

    let d = parse_u64("system.d", 1) as usize;
    let h = parse_u64("system.h", 1) as usize;
    let m = parse_u64("system.M", 16);
    let n_min = parse_u64("task.n_min", 1) as u32;
    let n_max = parse_u64("task.n_max", n_min as u64) as u32;
    let q_max = parse_u64("task.q_max", 10_000);
    let samples = parse_u64("task.samples", 100_000);
    let config_seed = parse_u64("task.seed", u64::MAX);
    let item_cap = parse_u64("task.item_cap", 10_000_000);
    let points = parse_u64("task.points", 10_000);
    let k_threshold = parse_u64("task.k", 1) as u32;
    let sanitize_window = parse_u64("system.sanitize_window", 4096);

    let seed = seed_override.unwrap_or(config_seed);
    let statistical = matches!(
        task,
        TaskKind::Measure | TaskKind::Ubiquity | TaskKind::Hits | TaskKind::ScalingProbe
    );
    if statistical && seed == u64::MAX {
        problems.push("task.seed: mandatory for statistical tasks".into());
    }

    let mut rates = |prefix: &str, count: usize| -> Vec<Rate> {
        let mut out = Vec::new();
        for i in 1..=count {
            let key = format!("system.{prefix}_{i}");
            match raw.map.get(&key) {
                Some(v) => match parse_rate(v) {
                    Some(r) => out.push(r),
                    None => problems.push(format!("{key}: unparsable rate `{v}`")),
                },
                None => {
                    if i == 1 || !out.is_empty() {
                        // allow phi_1 to stand for all factors
                    }
                }
            }
        }
        out
    };
    let mut phi = rates("phi", d);
    if phi.len() == 1 && d > 1 {
        phi = vec![phi[0].clone(); d];
    }
    let mut big_phi = rates("Phi", h);
    if big_phi.len() == 1 && h > 1 {
        big_phi = vec![big_phi[0].clone(); h];
    }
    let mut psi_raw = rates("psi", d);
    if psi_raw.len() == 1 && d > 1 {
        psi_raw = vec![psi_raw[0].clone(); d];
    }

    let epsilon = match get("system.epsilon") {
        None => 0.1,
        Some(v) => match v.parse::<f64>() {
            Ok(x) => x,
            Err(_) => {
                problems.push(format!("system.epsilon: expected a float, got `{v}`"));
                0.1
            }
        },
    };

    let mut bases = Vec::new();
    let mut digit_sets = Vec::new();
    let mut target = Vec::new();
    if system == SystemKind::Shrinking {
        for i in 1..=d {
            let bkey = format!("system.base_{i}");
            match raw.map.get(&bkey).map(|s| s.parse::<u32>()) {
                Some(Ok(b)) if b >= 2 => bases.push(b),
                Some(_) => problems.push(format!("{bkey}: expected an integer base >= 2")),
                None => problems.push(format!("{bkey}: missing for shrinking system")),
            }
            let dkey = format!("system.digits_{i}");
            match raw.map.get(&dkey) {
                Some(v) => {
                    let parsed: Result<Vec<u32>, _> =
                        v.split(',').map(|t| t.trim().parse::<u32>()).collect();
                    match parsed {
                        Ok(ds) => {
                            if let Some(&b) = bases.last() {
                                if ds.iter().any(|&x| x >= b) || ds.len() < 2 {
                                    problems.push(format!(
                                        "{dkey}: digit set {v} invalid for base {b}"
                                    ));
                                }
                            }
                            digit_sets.push(ds);
                        }
                        Err(_) => problems.push(format!("{dkey}: unparsable digit list `{v}`")),
                    }
                }
                None => {
                    // default: full digit set
                    if let Some(&b) = bases.last() {
                        digit_sets.push((0..b).collect());
                    }
                }
            }
            let tkey = format!("system.target_{i}");
            match raw.map.get(&tkey) {
                Some(v) => match parse_number(v) {
                    Some(t) => target.push(t),
                    None => problems.push(format!("{tkey}: unparsable number `{v}`")),
                },
                None => target.push(q_int(0)),
            }
        }
    }

    let per_index_levels = match get("system.levels") {
        None => system == SystemKind::Shrinking,
        Some("per-index") => true,
        Some("m-adic") => false,
        Some(other) => {
            problems.push(format!("system.levels: unknown scheme `{other}`"));
            false
        }
    };

    let balls = match get("task.balls") {
        None | Some("full") => BallSpec::Full,
        Some(v) => {
            if let Some(rest) = v.strip_prefix("dyadic:") {
                let parts: Vec<&str> = rest.split(':').collect();
                match (
                    parts.first().and_then(|s| s.parse::<u32>().ok()),
                    parts.get(1).and_then(|s| s.parse::<u32>().ok()),
                ) {
                    (Some(k), Some(count)) if parts.len() == 2 => BallSpec::Dyadic { k, count },
                    _ => {
                        problems.push(format!("task.balls: bad dyadic spec `{v}`"));
                        BallSpec::Full
                    }
                }
            } else {
                let mut parsed = Vec::new();
                let mut ok = true;
                for ball in v.split('|') {
                    match parse_intervals(ball) {
                        Some(iv) => parsed.push(iv),
                        None => {
                            ok = false;
                            problems.push(format!("task.balls: bad interval list `{ball}`"));
                        }
                    }
                }
                if ok {
                    BallSpec::Explicit(parsed)
                } else {
                    BallSpec::Full
                }
            }
        }
    };

    let mut boxes = Vec::new();
    if let Some(v) = get("task.boxes") {
        for item in v.split('|') {
            match parse_intervals(item) {
                Some(iv) => boxes.push(iv),
                None => problems.push(format!("task.boxes: bad interval list `{item}`")),
            }
        }
    }

    let mut windows = Vec::new();
    if let Some(v) = get("task.windows") {
        for w in v.split(',') {
            match w.split_once(':').and_then(|(a, b)| {
                Some((a.trim().parse::<u32>().ok()?, b.trim().parse::<u32>().ok()?))
            }) {
                Some(pair) => windows.push(pair),
                None => problems.push(format!("task.windows: bad window `{w}`")),
            }
        }
    }

    let probe_geometry = match get("task.geometry") {
        None => None,
        Some(v) => {
            if let Some(rest) = v.strip_prefix("point:") {
                let coords: Option<Vec<Q>> = rest.split(',').map(parse_number).collect();
                match coords {
                    Some(c) => Some(ProbeGeometry::Point(c)),
                    None => {
                        problems.push(format!("task.geometry: bad point `{v}`"));
                        None
                    }
                }
            } else if let Some(rest) = v.strip_prefix("affine:") {
                let mut it = rest.split(':');
                let normal: Option<Vec<i64>> = it
                    .next()
                    .map(|ns| {
                        ns.split(',')
                            .map(|t| t.trim().parse::<i64>().ok())
                            .collect()
                    })
                    .unwrap_or(None);
                let offset = it.next().and_then(|s| s.trim().parse::<i64>().ok());
                match (normal, offset) {
                    (Some(nv), Some(p)) => Some(ProbeGeometry::Affine {
                        normal: nv,
                        offset: p,
                    }),
                    _ => {
                        problems.push(format!("task.geometry: bad affine spec `{v}`"));
                        None
                    }
                }
            } else {
                problems.push(format!("task.geometry: unknown geometry `{v}`"));
                None
            }
        }
    };
    let probe_center = match get("task.center") {
        None => Vec::new(),
        Some(v) => v.split(',').filter_map(parse_number).collect(),
    };
    let parse_qlist = |key: &str, problems: &mut Vec<String>| -> Vec<Q> {
        match get(key) {
            None => Vec::new(),
            Some(v) => {
                let parsed: Option<Vec<Q>> = v.split(',').map(parse_number).collect();
                match parsed {
                    Some(list) => list,
                    None => {
                        problems.push(format!("{key}: unparsable number list `{v}`"));
                        Vec::new()
                    }
                }
            }
        }
    };
    let r_list = parse_qlist("task.r_list", &mut problems);
    let eps_list = parse_qlist("task.eps_list", &mut problems);

    if !problems.is_empty() {
        return Err(ConfigError { problems });
    }
    Ok(ExperimentConfig {
        system,
        task,
        d,
        h,
        m,
        phi,
        big_phi,
        psi_raw,
        epsilon,
        bases,
        digit_sets,
        target,
        per_index_levels,
        n_min,
        n_max,
        q_max,
        samples,
        seed,
        item_cap,
        points,
        windows,
        k_threshold,
        balls,
        boxes,
        probe_geometry,
        probe_center,
        r_list,
        eps_list,
        sanitize_window,
        echo: raw.echo,
    })
}
