//! Brute-force oracles and the seeded fuzz harness.
//!
//! The oracles here share no code with the algorithms they check: bad sets
//! are enumerated subset by subset, and box Lebesgue numbers are bracketed by
//! evaluating complement distances slab by slab on a grid.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::boxlab::{self, BoxError};
use crate::cover::{self, BoxFamily, FiniteFamily, Member, OpenBox, OpenInterval};
use crate::homothety::{self, AmbientMode, HomothetyInstance, HomothetyMap, TransportInput};
use crate::io::{CoverDoc, HomothetyDoc, SpaceDoc};
use crate::lebesgue::{self, DiamReport};
use crate::space::{numbered_labels, validate_metric, Axis, FiniteMetricSpace, Norm, PointSet, SliceSpace};
use crate::value::{format_rational, rational_str, Rational, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("subset enumeration is limited to 20 points, got {0}")]
    TooLarge(usize),
    #[error("sampling step must be positive")]
    BadStep,
    #[error(transparent)]
    Box(#[from] BoxError),
}

/// `L_Diam` by enumerating every subset and keeping those contained in no
/// member.
pub fn lebesgue_diam_bruteforce(space: &FiniteMetricSpace, f: &FiniteFamily) -> Result<DiamReport, OracleError> {
    let n = space.len();
    if n > 20 {
        return Err(OracleError::TooLarge(n));
    }
    let masks: Vec<u32> = f.iter().map(|m| m.set.iter().fold(0u32, |acc, &i| acc | (1 << i))).collect();
    let mut best: Option<(Value, u32)> = None;
    for set in 1u32..(1 << n) {
        if masks.iter().any(|&m| set & !m == 0) {
            continue;
        }
        let points: Vec<usize> = (0..n).filter(|&i| set & (1 << i) != 0).collect();
        let mut diam = Value::zero();
        for (k, &i) in points.iter().enumerate() {
            for &j in &points[k + 1..] {
                diam = diam.max(space.d(i, j).clone());
            }
        }
        if best.as_ref().is_none_or(|(b, _)| diam < *b) {
            best = Some((diam, set));
        }
    }
    Ok(match best {
        None => DiamReport { value: Value::Infinite, bad_set: None },
        Some((value, set)) => DiamReport { value, bad_set: Some((0..n).filter(|&i| set & (1 << i) != 0).collect()) },
    })
}

/// `dist(x, S \ u)` as the least distance to one of the slabs
/// `{y in S : y_i not in u_i}`; a slab differs from `x` in one coordinate only.
fn slab_distance(slice: &SliceSpace, x: &[Rational], u: &OpenBox) -> Value {
    let mut best = Value::Infinite;
    for ((axis, side), t) in slice.axes().iter().zip(u.sides()).zip(x) {
        let (a, b) = axis.bounds();
        // part of the axis at or below side.lo
        if let Some(lo) = &side.lo {
            if a.is_none_or(|a| a <= lo) {
                let top = b.map_or(lo.clone(), |b| b.min(lo).clone());
                let d = if t > &top { t - &top } else { Rational::zero() };
                best = best.min(Value::abs_rational(&d));
            }
        }
        if let Some(hi) = &side.hi {
            if b.is_none_or(|b| b >= hi) {
                let bottom = a.map_or(hi.clone(), |a| a.max(hi).clone());
                let d = if t < &bottom { &bottom - t } else { Rational::zero() };
                best = best.min(Value::abs_rational(&d));
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampledBracket {
    pub lower: Value,
    pub upper: Value,
    pub grid_points: usize,
}

fn grid(lo: &Rational, hi: &Rational, step: &Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut t = lo.clone();
    while &t < hi {
        out.push(t.clone());
        t += step;
    }
    out.push(hi.clone());
    out
}

/// Brackets `L_S(U, A)` by its minimum over the `step`-grid of `a`. The
/// objective is 1-Lipschitz in each coordinate separately, so the true
/// minimum is at most `step/2` below the grid minimum.
pub fn box_lebesgue_sampled(
    slice: &SliceSpace,
    f: &BoxFamily,
    a: &SliceSpace,
    step: &Rational,
) -> Result<SampledBracket, OracleError> {
    if !step.is_positive() {
        return Err(OracleError::BadStep);
    }
    let bounds = a.box_bounds().ok_or_else(|| BoxError::Unbounded(a.to_string()))?;
    let axes: Vec<Vec<Rational>> = bounds.iter().map(|(lo, hi)| grid(lo, hi, step)).collect();
    let mut min = Value::Infinite;
    let mut count = 0;
    let mut idx = vec![0usize; axes.len()];
    loop {
        let x: Vec<Rational> = idx.iter().zip(&axes).map(|(&k, g)| g[k].clone()).collect();
        let v = f.iter().map(|m| slab_distance(slice, &x, &m.set)).max().unwrap_or_else(Value::zero);
        min = min.min(v);
        count += 1;
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    let spread = bounds.iter().any(|(lo, hi)| lo < hi);
    let half = if spread { step / Rational::from_integer(2.into()) } else { Rational::zero() };
    let lower = min.saturating_sub_rational(&half).unwrap_or_else(Value::zero);
    Ok(SampledBracket { lower, upper: min, grid_points: count })
}

/// Parameters of a fuzz run. Equal configurations give equal instance
/// streams and equal reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzConfig {
    pub seed: u64,
    /// Finite-space instances.
    pub trials: usize,
    pub box_trials: usize,
    pub homothety_trials: usize,
    /// Size bound for instances checked against subset enumeration.
    pub max_points: usize,
    pub max_points_large: usize,
    /// Share of finite instances drawn above `max_points`.
    pub large_percent: u32,
    /// Share of finite instances given as distance matrices (the rest are
    /// point clouds).
    pub matrix_percent: u32,
    pub max_denominator: u32,
    #[serde(with = "rational_str")]
    pub sample_step: Rational,
    /// Factor `c` in the checked bound `L_Diam <= c L`.
    #[serde(with = "rational_str")]
    pub ldiam_upper_factor: Rational,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            trials: 1000,
            box_trials: 200,
            homothety_trials: 500,
            max_points: 12,
            max_points_large: 40,
            large_percent: 10,
            matrix_percent: 50,
            max_denominator: 6,
            sample_step: Rational::new(1.into(), 64.into()),
            ldiam_upper_factor: Rational::from_integer(2.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Finite,
    Boxes,
    Homothety,
}

impl InstanceKind {
    fn stream(self) -> u64 {
        match self {
            InstanceKind::Finite => 0,
            InstanceKind::Boxes => 1,
            InstanceKind::Homothety => 2,
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceKind::Finite => "finite",
            InstanceKind::Boxes => "boxes",
            InstanceKind::Homothety => "homothety",
        })
    }
}

/// Finite space with a cover, nested subsets `a ⊆ b` and a subcover.
#[derive(Debug, Clone)]
pub struct FiniteInstance {
    pub space: FiniteMetricSpace,
    pub family: FiniteFamily,
    pub a: PointSet,
    pub b: PointSet,
    pub subcover: FiniteFamily,
    /// Dilation factor for the scale check.
    pub scale: Rational,
}

/// Box family covering the closed box `a` of `slice`; `b` is a slice
/// between them.
#[derive(Debug, Clone)]
pub struct BoxInstance {
    pub slice: SliceSpace,
    pub family: BoxFamily,
    pub a: SliceSpace,
    pub b: SliceSpace,
}

/// Verified finite map with a codomain family covering `h(v)`.
#[derive(Debug, Clone)]
pub struct HomothetyCase {
    pub map: HomothetyInstance,
    pub v: PointSet,
    pub family: FiniteFamily,
    /// Set for exact dilations by this factor.
    pub dilation: Option<Rational>,
}

#[derive(Debug, Clone)]
pub enum Instance {
    Finite(FiniteInstance),
    Boxes(BoxInstance),
    Homothety(HomothetyCase),
}

fn labels_json(space: &FiniteMetricSpace, set: &PointSet) -> serde_json::Value {
    json!(space.labels_of(set))
}

impl Instance {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Instance::Finite(i) => json!({
                "space": SpaceDoc::from_finite(&i.space),
                "cover": CoverDoc::from_finite(&i.space, &i.family),
                "a": labels_json(&i.space, &i.a),
                "b": labels_json(&i.space, &i.b),
                "subcover": CoverDoc::from_finite(&i.space, &i.subcover),
                "scale": format_rational(&i.scale),
            }),
            Instance::Boxes(i) => json!({
                "space": SpaceDoc::from_slice(&i.slice),
                "cover": CoverDoc::from_boxes(&i.family),
                "a": i.a.to_string(),
                "b": i.b.to_string(),
            }),
            Instance::Homothety(c) => {
                let HomothetyMap::Explicit { domain, codomain, .. } = &c.map.map else {
                    unreachable!("generated maps are explicit")
                };
                json!({
                    "homothety": HomothetyDoc::from_instance(&c.map),
                    "v": labels_json(domain, &c.v),
                    "cover": CoverDoc::from_finite(codomain, &c.family),
                })
            }
        }
    }
}

fn rng_for(cfg: &FuzzConfig, kind: InstanceKind, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64 * 3 + kind.stream());
    rng
}

fn rat(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: u32) -> Rational {
    let den = den.max(1) as i64;
    Rational::new(rng.random_range(lo * den..=hi * den).into(), den.into())
}

fn denominator(rng: &mut ChaCha8Rng, cfg: &FuzzConfig) -> u32 {
    rng.random_range(1..=cfg.max_denominator.max(1))
}

fn random_norm(rng: &mut ChaCha8Rng) -> Norm {
    [Norm::Euclidean, Norm::Linf, Norm::L1][rng.random_range(0..3)]
}

/// Distinct random points with coordinates in `[0, span]`, the span widened
/// until the lattice holds at least `2n` points.
fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize, span: i64, den: u32) -> Vec<Vec<Rational>> {
    let mut span = span.max(1);
    while ((span * den.max(1) as i64 + 1) as f64).powi(dim as i32) < 2.0 * n as f64 {
        span += 1;
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p: Vec<Rational> = (0..dim).map(|_| rat(rng, 0, span, den)).collect();
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    out
}

/// Random positive weights made metric by shortest-path completion.
#[allow(clippy::needless_range_loop)]
fn random_matrix_space(rng: &mut ChaCha8Rng, n: usize, den: u32) -> FiniteMetricSpace {
    let mut d = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = Rational::new(rng.random_range(1..=4 * den as i64).into(), (den as i64).into());
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteMetricSpace::from_fn(numbered_labels(n), |i, j| Value::abs_rational(&d[i][j])).expect("square table")
}

fn random_subset(rng: &mut ChaCha8Rng, from: &PointSet, p: f64) -> PointSet {
    let items: Vec<usize> = from.iter().copied().collect();
    let mut set: PointSet = items.iter().copied().filter(|_| rng.random_bool(p)).collect();
    if set.is_empty() {
        set.insert(items[rng.random_range(0..items.len())]);
    }
    set
}

/// Random family whose members together contain `target`.
fn random_cover_of(rng: &mut ChaCha8Rng, n: usize, target: &PointSet) -> FiniteFamily {
    let all: PointSet = (0..n).collect();
    let m = rng.random_range(1..=5);
    let mut sets: Vec<PointSet> = (0..m)
        .map(|_| if rng.random_ratio(1, 20) { all.clone() } else { random_subset(rng, &all, 0.35) })
        .collect();
    for &x in target {
        if !sets.iter().any(|s| s.contains(&x)) {
            let k = rng.random_range(0..m);
            sets[k].insert(x);
        }
    }
    FiniteFamily::from_sets(sets)
}

fn generate_finite(cfg: &FuzzConfig, rng: &mut ChaCha8Rng) -> FiniteInstance {
    let small = cfg.max_points.max(2);
    let n = if cfg.max_points_large > small && rng.random_ratio(cfg.large_percent.min(100), 100) {
        rng.random_range(small + 1..=cfg.max_points_large)
    } else {
        rng.random_range(2..=small)
    };
    let den = denominator(rng, cfg);
    let space = if rng.random_ratio(cfg.matrix_percent.min(100), 100) {
        random_matrix_space(rng, n, den)
    } else {
        let dim = rng.random_range(1..=3);
        let norm = random_norm(rng);
        FiniteMetricSpace::from_cloud(numbered_labels(n), random_cloud(rng, n, dim, 3, den), norm)
            .expect("uniform dimension")
    };
    let all = space.all_points();
    let family = random_cover_of(rng, n, &all);
    let b = random_subset(rng, &all, 0.6);
    let a = random_subset(rng, &b, 0.5);
    let mut order: Vec<usize> = (0..family.len()).collect();
    order.shuffle(rng);
    let mut keep = vec![true; family.len()];
    for k in order {
        keep[k] = false;
        let covers = all.iter().all(|x| family.iter().zip(&keep).any(|(m, &kept)| kept && m.set.contains(x)));
        if !covers {
            keep[k] = true;
        }
    }
    let subcover = FiniteFamily::new(
        family.iter().zip(&keep).filter(|(_, &k)| k).map(|(m, _)| m.clone()).collect(),
    );
    let scale = Rational::new(rng.random_range(1..=9).into(), 3.into());
    FiniteInstance { space, family, a, b, subcover, scale }
}

fn random_free_axis(rng: &mut ChaCha8Rng, den: u32) -> Axis {
    if rng.random_ratio(2, 5) {
        Axis::Line
    } else {
        let lo = rat(rng, -2, 0, den);
        let len = Rational::new(rng.random_range(den as i64..=3 * den as i64).into(), (den as i64).into());
        Axis::Interval(lo.clone(), lo + len)
    }
}

fn generate_boxes(cfg: &FuzzConfig, rng: &mut ChaCha8Rng) -> BoxInstance {
    let den = denominator(rng, cfg);
    let dim = rng.random_range(1..=3usize);
    let free = rng.random_range(1..=dim.min(2));
    let mut free_axes: Vec<bool> = (0..dim).map(|k| k < free).collect();
    free_axes.shuffle(rng);
    let axes: Vec<Axis> = free_axes
        .iter()
        .map(|&f| if f { random_free_axis(rng, den) } else { Axis::Point(rat(rng, -1, 1, den)) })
        .collect();
    let slice = SliceSpace::new(axes, random_norm(rng));

    // the subset `a`, at most one unit wide per coordinate
    let a_bounds: Vec<(Rational, Rational)> = slice
        .axes()
        .iter()
        .map(|axis| match axis {
            Axis::Point(c) => (c.clone(), c.clone()),
            _ => {
                let (s_lo, s_hi) = match axis.bounds() {
                    (Some(l), Some(h)) => (l.clone(), h.clone()),
                    _ => (Rational::from_integer((-2).into()), Rational::from_integer(2.into())),
                };
                let fine = den * 2;
                let lo = pick_between(rng, &s_lo, &s_hi, fine);
                let hi = if rng.random_ratio(1, 20) {
                    lo.clone()
                } else {
                    let cap = (&lo + Rational::one()).min(s_hi.clone());
                    pick_between(rng, &lo, &cap, fine)
                };
                (lo, hi)
            }
        })
        .collect();
    let a = SliceSpace::closed_box(a_bounds.clone(), slice.norm()).expect("ordered bounds");

    // grid partition of `a`, each cell enlarged to an open box
    let cuts: Vec<Vec<Rational>> = a_bounds
        .iter()
        .map(|(lo, hi)| {
            let mut pts = vec![lo.clone(), hi.clone()];
            if lo < hi {
                for _ in 0..rng.random_range(0..=2) {
                    pts.push(pick_between(rng, lo, hi, den * 4));
                }
            }
            pts.sort();
            pts.dedup();
            if pts.len() == 1 {
                pts.push(pts[0].clone());
            }
            pts
        })
        .collect();
    let mut cells: Vec<Vec<(Rational, Rational)>> = vec![Vec::new()];
    for c in &cuts {
        cells = cells
            .into_iter()
            .flat_map(|prefix| {
                c.windows(2).map(move |w| {
                    let mut p = prefix.clone();
                    p.push((w[0].clone(), w[1].clone()));
                    p
                })
            })
            .collect();
    }
    let mut boxes: Vec<OpenBox> = cells
        .iter()
        .map(|cell| {
            OpenBox(
                cell.iter()
                    .map(|(lo, hi)| {
                        let lo = (!rng.random_ratio(1, 10)).then(|| lo - margin(rng, den));
                        let hi = (!rng.random_ratio(1, 10)).then(|| hi + margin(rng, den));
                        OpenInterval::new(lo, hi)
                    })
                    .collect(),
            )
        })
        .collect();
    for _ in 0..rng.random_range(0..=2) {
        boxes.push(OpenBox(
            (0..dim)
                .map(|_| {
                    let c = rat(rng, -2, 2, den);
                    let r = margin(rng, den) * Rational::from_integer(2.into());
                    OpenInterval::bounded(&c - &r, &c + &r)
                })
                .collect(),
        ));
    }
    boxes.shuffle(rng);
    let family = BoxFamily::new(boxes.into_iter().enumerate().map(|(k, b)| Member::new(format!("U{}", k + 1), b)).collect());

    // an ambient between `a` and `slice`
    let b_axes: Vec<Axis> = slice
        .axes()
        .iter()
        .zip(a.axes())
        .map(|(s, a_axis)| match rng.random_range(0..3) {
            0 => s.clone(),
            1 => a_axis.clone(),
            _ => {
                let (alo, ahi) = a_axis.bounds();
                let (alo, ahi) = (alo.expect("bounded").clone(), ahi.expect("bounded").clone());
                let lo = &alo - margin(rng, den);
                let hi = &ahi + margin(rng, den);
                let (slo, shi) = s.bounds();
                let lo = slo.map_or(lo.clone(), |l| lo.clone().max(l.clone()));
                let hi = shi.map_or(hi.clone(), |h| hi.clone().min(h.clone()));
                Axis::interval(lo, hi).expect("ordered bounds")
            }
        })
        .collect();
    let b = SliceSpace::new(b_axes, slice.norm());
    BoxInstance { slice, family, a, b }
}

fn margin(rng: &mut ChaCha8Rng, den: u32) -> Rational {
    Rational::new(rng.random_range(1..=den as i64).into(), (2 * den as i64).into())
}

/// Random multiple of `1/den` in `[lo, hi]`, or `lo` when there is none.
fn pick_between(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational, den: u32) -> Rational {
    let d = Rational::from_integer((den as i64).into());
    let first = (lo * &d).ceil().to_integer();
    let last = (hi * &d).floor().to_integer();
    if first > last {
        return lo.clone();
    }
    let span: i64 = (&last - &first).try_into().unwrap_or(i64::MAX);
    let k = rng.random_range(0..=span);
    Rational::new(first + k, (den as i64).into())
}

fn generate_homothety(cfg: &FuzzConfig, rng: &mut ChaCha8Rng) -> HomothetyCase {
    let den = denominator(rng, cfg);
    let n = rng.random_range(2..=8);
    let dim = rng.random_range(1..=3);
    let norm = random_norm(rng);
    let points = random_cloud(rng, n, dim, 3, den);
    let c = Rational::new(rng.random_range(1..=8).into(), rng.random_range(1..=4).into());
    let exact = rng.random_ratio(1, 4);
    let mut seen = BTreeSet::new();
    let mut images = Vec::with_capacity(n);
    for p in &points {
        loop {
            let img: Vec<Rational> = p
                .iter()
                .map(|t| {
                    let jitter = if exact { Rational::zero() } else { rat(rng, -1, 1, 4 * den) / Rational::from_integer(4.into()) };
                    t * &c + jitter
                })
                .collect();
            if seen.insert(img.clone()) {
                images.push(img);
                break;
            }
        }
    }
    let extras = rng.random_range(0..=3);
    let extra = random_cloud(rng, extras, dim, 3 * 8, den)
        .into_iter()
        .filter(|p| seen.insert(p.clone()));
    let mut cod_points: Vec<(Option<usize>, Vec<Rational>)> =
        images.into_iter().enumerate().map(|(i, p)| (Some(i), p)).chain(extra.map(|p| (None, p))).collect();
    cod_points.shuffle(rng);
    let mut map = vec![0; n];
    for (j, (src, _)) in cod_points.iter().enumerate() {
        if let Some(i) = src {
            map[*i] = j;
        }
    }
    let domain = FiniteMetricSpace::from_cloud(numbered_labels(n), points, norm).expect("uniform dimension");
    let m = cod_points.len();
    let codomain = FiniteMetricSpace::from_cloud(
        (0..m).map(|j| format!("y{j}")).collect(),
        cod_points.into_iter().map(|(_, p)| p).collect(),
        norm,
    )
    .expect("uniform dimension");
    let (lambda_sq, r_sq) = if exact {
        (Rational::one(), &c * &c)
    } else {
        let fit = homothety::fit_homothety(&domain, &codomain, &map).expect("injective map");
        let lambda_sq = &fit.rho_sq_max / &fit.rho_sq_min;
        let (lo, hi) = fit.r_sq_interval(&lambda_sq).expect("ratio bound dominates its square root");
        let r_sq = match rng.random_range(0..3) {
            0 => lo,
            1 => hi,
            _ => (lo + hi) / Rational::from_integer(2.into()),
        };
        (lambda_sq, r_sq)
    };
    let v = random_subset(rng, &domain.all_points(), 0.6);
    let hv: PointSet = v.iter().map(|&i| map[i]).collect();
    let family = random_cover_of(rng, m, &hv);
    let map = HomothetyInstance::new(HomothetyMap::Explicit { domain, codomain, map }, lambda_sq, r_sq)
        .expect("valid parameters");
    HomothetyCase { map, v, family, dilation: exact.then_some(c) }
}

/// Instance number `trial` of the given kind; depends only on `cfg.seed`,
/// the size bounds and `trial`.
pub fn generate_instance(cfg: &FuzzConfig, kind: InstanceKind, trial: usize) -> Instance {
    let mut rng = rng_for(cfg, kind, trial);
    match kind {
        InstanceKind::Finite => Instance::Finite(generate_finite(cfg, &mut rng)),
        InstanceKind::Boxes => Instance::Boxes(generate_boxes(cfg, &mut rng)),
        InstanceKind::Homothety => Instance::Homothety(generate_homothety(cfg, &mut rng)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// A failure is a bug.
    Assert,
    /// A failure is reported as a finding only.
    Search,
}

/// One failed check, with enough data to replay it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: String,
    pub level: Level,
    pub seed: u64,
    pub trial: usize,
    pub kind: InstanceKind,
    pub expected: String,
    pub got: String,
    pub instance: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub instances: usize,
    pub checks: usize,
    pub violations: Vec<Violation>,
    pub findings: Vec<Violation>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Collects check outcomes for one instance.
struct Checker {
    checks: usize,
    failures: Vec<(String, Level, String, String)>,
}

impl Checker {
    fn new() -> Self {
        Self { checks: 0, failures: Vec::new() }
    }

    fn check(&mut self, name: &str, ok: bool, expected: impl FnOnce() -> String, got: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push((name.to_string(), Level::Assert, expected(), got()));
        }
    }

    fn search(&mut self, name: &str, ok: bool, expected: impl FnOnce() -> String, got: impl FnOnce() -> String) {
        if !ok {
            self.failures.push((name.to_string(), Level::Search, expected(), got()));
        }
    }

    fn error(&mut self, name: &str, err: impl fmt::Display) {
        self.checks += 1;
        self.failures.push((name.to_string(), Level::Assert, "no error".into(), err.to_string()));
    }
}

fn check_finite(cfg: &FuzzConfig, inst: &FiniteInstance, c: &mut Checker) {
    let (space, f) = (&inst.space, &inst.family);
    let all = space.all_points();
    let report = validate_metric(space);
    c.check("metric-valid", report.is_valid(), || "no violations".into(), || format!("{:?}", report.violations));
    let covered = cover::is_covering_family(space, f, &all).map(|r| r.covered).unwrap_or(false);
    c.check("cover-covers", covered, || "cover".into(), || "not a cover".into());
    if !covered {
        return;
    }
    let mut run = || -> Result<(), lebesgue::LebesgueError> {
        let l = lebesgue::lebesgue(space, f)?;
        let lrad = lebesgue::lebesgue_rad(space, f, &all)?;
        let same_points = l.per_point.iter().zip(&lrad.per_point).all(|(p, q)| p.value == q.value);
        c.check("l-equals-lrad", l.value == lrad.value && same_points, || l.value.to_string(), || lrad.value.to_string());

        let diam = lebesgue::lebesgue_diam(space, f)?;
        c.check("l-le-ldiam", l.value <= diam.value, || format!("L = {} <= L_diam", l.value), || diam.value.to_string());
        let bound = l.value.scale(&cfg.ldiam_upper_factor).expect("positive factor");
        c.check(
            "ldiam-le-factor-l",
            diam.value <= bound,
            || format!("L_diam <= {} * {} = {}", format_rational(&cfg.ldiam_upper_factor), l.value, bound),
            || diam.value.to_string(),
        );
        if space.len() <= cfg.max_points.min(20) {
            let brute = lebesgue_diam_bruteforce(space, f).expect("within enumeration bound");
            c.check("ldiam-oracle", brute.value == diam.value, || brute.value.to_string(), || diam.value.to_string());
        }

        let chain = lebesgue::chain_report(space, f, &inst.a, &inst.b)?;
        c.check("chain", chain.holds, || "non-decreasing chain".into(), || {
            chain.terms().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" , ")
        });

        let sub = lebesgue::lebesgue(space, &inst.subcover)?;
        c.check("subcover-lebesgue", sub.value <= l.value, || format!("<= {}", l.value), || sub.value.to_string());
        let (mesh, sub_mesh) = (cover::mesh(space, f), cover::mesh(space, &inst.subcover));
        c.check("subcover-mesh", sub_mesh <= mesh, || format!("<= {mesh}"), || sub_mesh.to_string());
        let restricted = cover::restrict(space, f, &inst.a)?;
        let r_mesh = cover::mesh(&restricted.space, &restricted.family);
        c.check("restriction-mesh", r_mesh <= mesh, || format!("<= {mesh}"), || r_mesh.to_string());
        let sup_at = all.iter().map(|&x| cover::mesh_at(space, f, x)).max().unwrap_or_else(Value::zero);
        c.check("mesh-is-sup-of-mesh-at", sup_at == mesh, || mesh.to_string(), || sup_at.to_string());

        let second = lebesgue::second_kind_relative(space, f, &all)?;
        c.check("second-kind-le-mesh", second.value <= mesh, || format!("<= {mesh}"), || second.value.to_string());

        for r in radii_below(space, &l.value) {
            let refine = lebesgue::ball_refinement_holds(space, f, &r);
            c.check("refinement-below-l", refine.holds, || format!("balls of radius {r} refine"), || {
                format!("{:?}", refine.witness)
            });
        }

        let scaled = space.scaled(&inst.scale);
        let s = &inst.scale;
        let times = |v: &Value| v.scale(s).expect("positive scale");
        let pairs = [
            ("L", l.value.clone(), lebesgue::lebesgue(&scaled, f)?.value),
            ("L_rad", lrad.value.clone(), lebesgue::lebesgue_rad(&scaled, f, &all)?.value),
            ("L_diam", diam.value.clone(), lebesgue::lebesgue_diam(&scaled, f)?.value),
            ("mesh", mesh.clone(), cover::mesh(&scaled, f)),
            ("L_second", second.value.clone(), lebesgue::second_kind_relative(&scaled, f, &all)?.value),
        ];
        for (name, before, after) in pairs {
            let want = times(&before);
            c.check("scale-equivariance", after == want, || format!("{name} = {want}"), || after.to_string());
        }

        // relative second-kind numbers along the restriction chain
        let in_x = lebesgue::second_kind_relative(space, f, &inst.a)?.value;
        let rb = cover::restrict(space, f, &inst.b)?;
        let a_in_b = rb.map_subset(&inst.a).expect("a inside b");
        let in_b = lebesgue::second_kind_relative(&rb.space, &rb.family, &a_in_b)?.value;
        let ra = cover::restrict(space, f, &inst.a)?;
        let in_a = lebesgue::second_kind_relative(&ra.space, &ra.family, &ra.space.all_points())?.value;
        c.search(
            "second-kind-chain",
            in_x <= in_b && in_b <= in_a,
            || "non-decreasing chain".into(),
            || format!("{in_x} , {in_b} , {in_a}"),
        );
        Ok(())
    };
    if let Err(e) = run() {
        c.error("finite-error", e);
    }
}

/// Radii strictly below `l`: half of it and the largest distance below it;
/// beyond every distance when `l` is infinite.
fn radii_below(space: &FiniteMetricSpace, l: &Value) -> Vec<Value> {
    if l.is_infinite() {
        let diam = space.diameter(&space.all_points());
        return vec![diam.scale(&Rational::from_integer(2.into())).expect("positive")];
    }
    let mut out = vec![l.scale(&Rational::new(1.into(), 2.into())).expect("positive")];
    let below = (0..space.len()).flat_map(|i| space.row(i).iter()).filter(|d| *d < l).max();
    if let Some(d) = below {
        out.push(d.clone());
    }
    out
}

fn check_boxes(cfg: &FuzzConfig, inst: &BoxInstance, c: &mut Checker) {
    let (slice, f, a) = (&inst.slice, &inst.family, &inst.a);
    let covered = cover::is_box_covering_family(slice, f, a).map(|r| r.covered).unwrap_or(false);
    c.check("box-cover-covers", covered, || "covering family".into(), || "not covering".into());
    if !covered {
        return;
    }
    let mut run = || -> Result<(), OracleError> {
        let exact = boxlab::box_lebesgue_relative(slice, f, a)?;
        let v = &exact.value;
        let bracket = box_lebesgue_sampled(slice, f, a, &cfg.sample_step)?;
        c.check(
            "box-sampling-bracket",
            bracket.lower <= *v && *v <= bracket.upper,
            || format!("[{}, {}]", bracket.lower, bracket.upper),
            || v.to_string(),
        );

        let in_b = boxlab::box_lebesgue_relative(&inst.b, f, a)?.value;
        let in_a = boxlab::box_lebesgue_relative(a, f, a)?.value;
        c.check(
            "box-ambient-monotone",
            *v <= in_b && in_b <= in_a,
            || "non-decreasing chain".into(),
            || format!("{v} , {in_b} , {in_a}"),
        );

        if !f.iter().any(|m| m.set.contains_slice(slice)) {
            let mesh = boxlab::box_mesh(slice, f);
            let mut points = vec![a.sample_point()];
            if let Some(b) = a.box_bounds() {
                points.push(b.iter().map(|p| p.0.clone()).collect());
                points.push(b.iter().map(|p| p.1.clone()).collect());
            }
            points.extend(exact.certificate.clone());
            for x in points {
                let p = boxlab::box_pointwise(slice, f, &x)?;
                c.check("box-pointwise-le-mesh", p <= mesh, || format!("<= {mesh}"), || p.to_string());
            }
        }

        let candidates = boxlab::candidate_radii(slice, f, a);
        let stride = candidates.len().div_ceil(40).max(1);
        let sampled: Vec<&Rational> = candidates.iter().step_by(stride).collect();
        for m in f.iter() {
            for w in sampled.windows(2) {
                let (big, small) = (boxlab::shrunk_box(slice, &m.set, a, w[0]), boxlab::shrunk_box(slice, &m.set, a, w[1]));
                let nested = match (&big, &small) {
                    (_, None) => true,
                    (None, Some(_)) => false,
                    (Some(b), Some(s)) => s.iter().zip(b).all(|(x, y)| y.0 <= x.0 && x.1 <= y.1),
                };
                c.check("box-shrink-antitone", nested, || format!("{}: nested shrunk boxes", m.name), || {
                    format!("radii {} and {}", w[0], w[1])
                });
            }
        }

        if let Some(r) = v.as_rational().filter(|r| r.is_positive()) {
            let at = boxlab::box_ball_refinement(slice, f, a, &r)?;
            c.check("box-refinement-at-l", at.holds, || format!("balls of radius {r} refine"), || {
                format!("{:?}", at.witness)
            });
        }
        if let (Some(next), Some(cert)) = (exact.next_candidate.as_ref(), exact.certificate.as_ref()) {
            let r = next.as_rational().expect("rational candidate");
            let above = boxlab::box_ball_refinement(slice, f, a, &r)?;
            c.check("box-refinement-above-l", !above.holds, || format!("balls of radius {r} fail"), || "refine".into());
            let p = boxlab::box_pointwise(slice, f, cert)?;
            c.check("box-certificate", *v <= p && p < *next, || format!("in [{v}, {next})"), || p.to_string());
        }
        Ok(())
    };
    if let Err(e) = run() {
        c.error("box-error", e);
    }
}

fn check_homothety(case: &HomothetyCase, c: &mut Checker) {
    let h = &case.map;
    let HomothetyMap::Explicit { domain, codomain, map } = &h.map else {
        unreachable!("generated maps are explicit")
    };
    let ver = homothety::verify_homothety(h);
    c.check("homothety-verified", ver.holds, || "verified".into(), || format!("{:?}", ver.worst));
    let mut run = || -> Result<(), homothety::HomothetyError> {
        let fit = homothety::fit_homothety(domain, codomain, map)?;
        let lambda_sq = fit.rational_lambda_sq(64);
        match fit.r_sq_interval(&lambda_sq) {
            Some((r_sq, _)) => {
                let fitted = HomothetyInstance { lambda_sq, r_sq, ..h.clone() };
                let ok = homothety::verify_homothety(&fitted).holds;
                c.check("homothety-fit-verifies", ok, || "verified at fitted parameters".into(), || "fails".into());
            }
            None => c.check("homothety-fit-verifies", false, || "nonempty R^2 interval".into(), || "empty".into()),
        }

        let input = TransportInput::Finite { v: case.v.clone(), family: case.family.clone() };
        let report = homothety::transport_lemma_check(h, &input, AmbientMode::Image)?;
        for ineq in &report.inequalities {
            c.check("transport-image", ineq.holds, || format!("{}: {} <= {}", ineq.name, ineq.lhs, ineq.rhs), || {
                "fails".into()
            });
        }
        if let Some(s) = &case.dilation {
            let times = |v: &Value| v.scale(s).expect("positive");
            let (m, l) = (times(&report.mesh_domain), times(&report.lebesgue_domain));
            c.check("transport-dilation-equality", report.mesh_codomain == m && report.lebesgue_codomain == l, || {
                format!("mesh {m}, L {l}")
            }, || format!("mesh {}, L {}", report.mesh_codomain, report.lebesgue_codomain));
        }

        let (pulled, dropped) = homothety::pullback_finite(h, &case.family)?;
        let back = homothety::push_forward_finite(h, &pulled)?;
        let image: PointSet = map.iter().copied().collect();
        let expected: Vec<PointSet> = case
            .family
            .iter()
            .filter(|m| !dropped.contains(&m.name))
            .map(|m| m.set.intersection(&image).copied().collect())
            .collect();
        let got: Vec<PointSet> = back.iter().map(|m| m.set.clone()).collect();
        c.check("pullback-round-trip", got == expected, || format!("{expected:?}"), || format!("{got:?}"));
        Ok(())
    };
    if let Err(e) = run() {
        c.error("homothety-error", e);
    }
}

struct TrialOutcome {
    checks: usize,
    violations: Vec<Violation>,
}

fn run_trial(cfg: &FuzzConfig, kind: InstanceKind, trial: usize) -> TrialOutcome {
    let instance = generate_instance(cfg, kind, trial);
    let mut c = Checker::new();
    match &instance {
        Instance::Finite(i) => check_finite(cfg, i, &mut c),
        Instance::Boxes(i) => check_boxes(cfg, i, &mut c),
        Instance::Homothety(i) => check_homothety(i, &mut c),
    }
    let json = (!c.failures.is_empty()).then(|| instance.to_json());
    let violations = c
        .failures
        .into_iter()
        .map(|(invariant, level, expected, got)| Violation {
            invariant,
            level,
            seed: cfg.seed,
            trial,
            kind,
            expected,
            got,
            instance: json.clone().expect("set on failure"),
        })
        .collect();
    TrialOutcome { checks: c.checks, violations }
}

/// Runs every registered check over the instance stream. Trials run in
/// parallel; results are merged in (kind, trial) order.
pub fn fuzz_suite(cfg: &FuzzConfig) -> FuzzReport {
    let jobs: Vec<(InstanceKind, usize)> = [
        (InstanceKind::Finite, cfg.trials),
        (InstanceKind::Boxes, cfg.box_trials),
        (InstanceKind::Homothety, cfg.homothety_trials),
    ]
    .into_iter()
    .flat_map(|(k, n)| (0..n).map(move |t| (k, t)))
    .collect();
    let outcomes: Vec<TrialOutcome> = jobs.par_iter().map(|&(k, t)| run_trial(cfg, k, t)).collect();
    let mut report = FuzzReport {
        config: cfg.clone(),
        instances: jobs.len(),
        checks: 0,
        violations: Vec::new(),
        findings: Vec::new(),
    };
    for o in outcomes {
        report.checks += o.checks;
        for v in o.violations {
            match v.level {
                Level::Assert => report.violations.push(v),
                Level::Search => report.findings.push(v),
            }
        }
    }
    for f in &report.findings {
        log::info!("finding {} (trial {}): expected {}, got {}", f.invariant, f.trial, f.expected, f.got);
    }
    report
}

/// Reruns the finite stream with the `L_Diam` factor lowered to `19/10`.
/// Returns the violations of that bound, falling back to the five-point line
/// (where the ratio is exactly 2) if no random instance trips it.
pub fn mutation_self_test(cfg: &FuzzConfig) -> Vec<Violation> {
    let mutated = FuzzConfig {
        box_trials: 0,
        homothety_trials: 0,
        ldiam_upper_factor: Rational::new(19.into(), 10.into()),
        ..cfg.clone()
    };
    let caught: Vec<Violation> =
        fuzz_suite(&mutated).violations.into_iter().filter(|v| v.invariant == "ldiam-le-factor-l").collect();
    if !caught.is_empty() {
        return caught;
    }
    let (space, family) = crate::fixtures::five_point_line();
    let all = space.all_points();
    let inst = FiniteInstance {
        a: all.clone(),
        b: all,
        subcover: family.clone(),
        space,
        family,
        scale: Rational::one(),
    };
    let mut c = Checker::new();
    check_finite(&mutated, &inst, &mut c);
    let json = Instance::Finite(inst).to_json();
    c.failures
        .into_iter()
        .filter(|f| f.0 == "ldiam-le-factor-l")
        .map(|(invariant, level, expected, got)| Violation {
            invariant,
            level,
            seed: cfg.seed,
            trial: 0,
            kind: InstanceKind::Finite,
            expected,
            got,
            instance: json.clone(),
        })
        .collect()
}

/// Directory for reproducer files: `COVERLENS_RESULTS_DIR`, else `results`.
pub fn results_dir() -> PathBuf {
    std::env::var_os("COVERLENS_RESULTS_DIR").map_or_else(|| PathBuf::from("results"), PathBuf::from)
}

/// Writes one JSON file per violation into `dir`, plus a single file listing
/// the findings of the run.
pub fn write_reproducers(report: &FuzzReport, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    if report.violations.is_empty() && report.findings.is_empty() {
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (k, v) in report.violations.iter().enumerate() {
        let path = dir.join(format!("violation-{}-{}-seed{}-trial{}-{k}.json", v.invariant, v.kind, v.seed, v.trial));
        std::fs::write(&path, serde_json::to_string_pretty(v).expect("serializable") + "\n")?;
        paths.push(path);
    }
    if !report.findings.is_empty() {
        let path = dir.join(format!("findings-seed{}.json", report.config.seed));
        std::fs::write(&path, serde_json::to_string_pretty(&report.findings).expect("serializable") + "\n")?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::value::q;

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    #[test]
    fn brute_force_diam_on_fixtures() {
        let space = FiniteMetricSpace::discrete(4);
        assert_eq!(lebesgue_diam_bruteforce(&space, &FiniteFamily::whole(&space)).unwrap().value, Value::Infinite);
        let (space, f) = fixtures::discrete_singletons(4);
        assert_eq!(lebesgue_diam_bruteforce(&space, &f).unwrap().value, v("1"));
        let (space, f) = fixtures::five_point_line();
        let r = lebesgue_diam_bruteforce(&space, &f).unwrap();
        assert_eq!(r.value, v("2"));
        assert!(matches!(lebesgue_diam_bruteforce(&FiniteMetricSpace::discrete(21), &f), Err(OracleError::TooLarge(21))));
    }

    #[test]
    fn slab_distance_agrees_on_fixture() {
        let chain = fixtures::box_chain();
        let x = vec![q(1, 2), q(1, 2), q(0, 1)];
        let u1 = &chain.family.members[0].set;
        assert_eq!(slab_distance(&chain.x, &x, u1), v("1/8"));
        assert_eq!(slab_distance(&chain.b, &x, u1), v("3/8"));
        assert_eq!(slab_distance(&chain.a, &x, u1), v("3/8"));
    }

    #[test]
    fn sampling_brackets_the_chain() {
        let chain = fixtures::box_chain();
        for (ambient, exact) in [(&chain.x, "1/8"), (&chain.b, "1/4"), (&chain.a, "3/8")] {
            let b = box_lebesgue_sampled(ambient, &chain.family, &chain.a, &q(1, 32)).unwrap();
            assert!(b.lower <= v(exact) && v(exact) <= b.upper, "{ambient}: {b:?}");
        }
        let whole = BoxFamily::new(vec![Member::new("R", OpenBox(vec![OpenInterval::unbounded(); 3]))]);
        let b = box_lebesgue_sampled(&chain.x, &whole, &chain.a, &q(1, 4)).unwrap();
        assert_eq!((b.lower, b.upper), (Value::Infinite, Value::Infinite));
        let point: SliceSpace = "{1/2}x{1/2}x{0}".parse().unwrap();
        let b = box_lebesgue_sampled(&chain.x, &chain.family, &point, &q(1, 4)).unwrap();
        assert_eq!(b.lower, b.upper);
        assert_eq!(b.grid_points, 1);
        assert!(box_lebesgue_sampled(&chain.x, &chain.family, &chain.a, &q(0, 1)).is_err());
    }

    #[test]
    fn instances_are_deterministic() {
        let cfg = FuzzConfig::default();
        for kind in [InstanceKind::Finite, InstanceKind::Boxes, InstanceKind::Homothety] {
            let a = serde_json::to_string(&generate_instance(&cfg, kind, 1).to_json()).unwrap();
            let b = serde_json::to_string(&generate_instance(&cfg, kind, 1).to_json()).unwrap();
            assert_eq!(a, b);
            let other = serde_json::to_string(&generate_instance(&cfg, kind, 2).to_json()).unwrap();
            assert_ne!(a, other);
        }
    }

    #[test]
    fn small_fuzz_run_is_clean_and_repeatable() {
        let cfg = FuzzConfig { trials: 30, box_trials: 10, homothety_trials: 20, ..FuzzConfig::default() };
        let r1 = fuzz_suite(&cfg);
        assert!(r1.passed(), "{:#?}", r1.violations);
        let r2 = fuzz_suite(&cfg);
        assert_eq!(r1, r2);
    }

    #[test]
    fn mutated_bound_is_caught() {
        let cfg = FuzzConfig { trials: 50, ..FuzzConfig::default() };
        let caught = mutation_self_test(&cfg);
        assert!(!caught.is_empty());
        assert!(caught[0].expected.contains("19/10"));
    }

    #[test]
    fn config_json_defaults() {
        let cfg: FuzzConfig = serde_json::from_str(r#"{"seed": 3, "ldiam_upper_factor": "19/10"}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.trials, 1000);
        assert_eq!(cfg.ldiam_upper_factor, q(19, 10));
        assert!(serde_json::from_str::<FuzzConfig>(r#"{"sed": 3}"#).is_err());
    }

    #[test]
    fn reproducers_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = FuzzConfig { trials: 1, box_trials: 0, homothety_trials: 0, ..FuzzConfig::default() };
        let mut report = fuzz_suite(&cfg);
        report.findings.clear();
        assert!(write_reproducers(&report, dir.path()).unwrap().is_empty());
        report.violations.push(Violation {
            invariant: "demo".into(),
            level: Level::Assert,
            seed: 7,
            trial: 0,
            kind: InstanceKind::Finite,
            expected: "x".into(),
            got: "y".into(),
            instance: generate_instance(&cfg, InstanceKind::Finite, 0).to_json(),
        });
        let paths = write_reproducers(&report, dir.path()).unwrap();
        assert_eq!(paths.len(), 1);
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        assert!(text.contains("\"invariant\": \"demo\""));
    }
}
