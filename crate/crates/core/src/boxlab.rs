//! Exact Lebesgue numbers of open box families over slices.
//!
//! For an open box `U` and a slice `S`, the complement `S \ U` is a union of
//! slabs, one per coordinate, so `dist(x, S \ U)` is the minimum over free
//! coordinates of a one-dimensional margin. Each margin is piecewise linear
//! with slopes in `{-1, 0, 1}`, which makes `{x : dist(x, S \ U) >= r}` a
//! closed box (the shrunk box). The relative Lebesgue number is then the
//! largest `r` at which the shrunk boxes still cover the subset, and that `r`
//! is found among differences and half-differences of input endpoints.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cover::arrangement::{self, Bits};
use crate::cover::{self, BoxFamily, Cell, Coverage, CoverError, Member, OpenBox, OpenInterval};
use crate::space::{format_point, Axis, Norm, SliceSpace, SpaceError};
use crate::value::{format_rational, Rational, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoxError {
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("family does not cover the subset: {} lies in no member", format_point(.witness))]
    NotCovering { witness: Vec<Rational> },
    #[error("subset {0} must be bounded")]
    Unbounded(String),
    #[error("box has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown scenario {0:?} (expected interval-tail or ball-tail)")]
    UnknownScenario(String),
    #[error("truncation bound must be at least 2, got {0}")]
    BadTruncation(usize),
}

fn two() -> Rational {
    Rational::one() + Rational::one()
}

/// `t -> dist(t, S_i \ U_i)` for one free coordinate.
///
/// The margin is `t - lo` near a constraining lower end, `hi - t` near a
/// constraining upper end, and zero outside `U_i`. An end of `U_i` constrains
/// only when it lies inside the slice axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarginProfile {
    /// `S_i` lies inside `U_i`.
    Infinite,
    Finite { lower: Option<Rational>, upper: Option<Rational> },
}

impl MarginProfile {
    pub fn new(axis: &Axis, side: &OpenInterval) -> Self {
        let (a, b) = axis.bounds();
        let lower = side.lo.clone().filter(|lo| a.is_none_or(|a| lo >= a));
        let upper = side.hi.clone().filter(|hi| b.is_none_or(|b| hi <= b));
        match (lower, upper) {
            (None, None) => MarginProfile::Infinite,
            (lower, upper) => MarginProfile::Finite { lower, upper },
        }
    }

    /// Margin at `t`, `None` meaning infinity.
    pub fn eval(&self, t: &Rational) -> Option<Rational> {
        match self {
            MarginProfile::Infinite => None,
            MarginProfile::Finite { lower, upper } => {
                let left = lower.as_ref().map(|lo| t - lo);
                let right = upper.as_ref().map(|hi| hi - t);
                let m = match (left, right) {
                    (Some(l), Some(r)) => l.min(r),
                    (Some(l), None) => l,
                    (None, Some(r)) => r,
                    (None, None) => unreachable!("finite profile has an end"),
                };
                Some(m.max(Rational::zero()))
            }
        }
    }

    /// Breakpoints with the slope to their right, starting with the slope on
    /// `(-inf, first breakpoint)`.
    pub fn pieces(&self) -> (i8, Vec<(Rational, i8)>) {
        match self {
            MarginProfile::Infinite => (0, Vec::new()),
            MarginProfile::Finite { lower: Some(lo), upper: Some(hi) } if lo < hi => {
                let mid = (lo + hi) / two();
                (0, vec![(lo.clone(), 1), (mid, -1), (hi.clone(), 0)])
            }
            MarginProfile::Finite { lower: Some(_), upper: Some(_) } => (0, Vec::new()),
            MarginProfile::Finite { lower: Some(lo), upper: None } => (0, vec![(lo.clone(), 1)]),
            MarginProfile::Finite { lower: None, upper: Some(hi) } => (-1, vec![(hi.clone(), 0)]),
            MarginProfile::Finite { lower: None, upper: None } => (0, Vec::new()),
        }
    }

    /// `{t : margin(t) >= r}` for `r > 0` as `(lower, upper)` bounds, `None`
    /// for an unbounded side.
    pub fn superlevel(&self, r: &Rational) -> (Option<Rational>, Option<Rational>) {
        match self {
            MarginProfile::Infinite => (None, None),
            MarginProfile::Finite { lower, upper } => {
                (lower.as_ref().map(|lo| lo + r), upper.as_ref().map(|hi| hi - r))
            }
        }
    }
}

/// Margin profiles of `u` on each coordinate of `slice`; `None` when the
/// member misses a fixed coordinate (empty trace).
fn profiles(slice: &SliceSpace, u: &OpenBox) -> Option<Vec<MarginProfile>> {
    slice
        .axes()
        .iter()
        .zip(u.sides())
        .map(|(axis, side)| match axis {
            Axis::Point(c) => side.contains(c).then_some(MarginProfile::Infinite),
            _ => Some(MarginProfile::new(axis, side)),
        })
        .collect()
}

fn check_member(slice: &SliceSpace, u: &OpenBox) -> Result<(), BoxError> {
    if u.dim() != slice.dim() {
        return Err(BoxError::DimensionMismatch { expected: slice.dim(), got: u.dim() });
    }
    Ok(())
}

/// `dist(x, S \ u)` in the slice. Zero when `x` is outside `u`, infinite when
/// the slice lies inside `u`.
pub fn slice_dist_to_complement(slice: &SliceSpace, x: &[Rational], u: &OpenBox) -> Result<Value, BoxError> {
    check_member(slice, u)?;
    slice.check_point(x)?;
    Ok(dist_unchecked(slice, x, u))
}

fn dist_unchecked(slice: &SliceSpace, x: &[Rational], u: &OpenBox) -> Value {
    let Some(profiles) = profiles(slice, u) else {
        return Value::zero();
    };
    profiles
        .iter()
        .zip(x)
        .filter_map(|(p, t)| p.eval(t))
        .min()
        .map_or(Value::Infinite, |m| Value::abs_rational(&m))
}

/// `L(U, x)` over the slice.
pub fn box_pointwise(slice: &SliceSpace, f: &BoxFamily, x: &[Rational]) -> Result<Value, BoxError> {
    slice.check_point(x)?;
    for m in f.iter() {
        check_member(slice, &m.set)?;
    }
    Ok(f.iter().map(|m| dist_unchecked(slice, x, &m.set)).max().unwrap_or_else(Value::zero))
}

/// Closed box, one `(lo, hi)` pair per coordinate, possibly degenerate.
pub type ClosedBox = Vec<(Rational, Rational)>;

/// `{x in a : dist(x, S \ u) >= r}`; `None` when empty.
pub fn shrunk_box(slice: &SliceSpace, u: &OpenBox, a: &SliceSpace, r: &Rational) -> Option<ClosedBox> {
    let bounds = a.box_bounds()?;
    if r.is_zero() {
        return Some(bounds);
    }
    let profiles = profiles(slice, u)?;
    let mut out = Vec::with_capacity(bounds.len());
    for (p, (alo, ahi)) in profiles.iter().zip(bounds) {
        let (lo, hi) = p.superlevel(r);
        let lo = lo.map_or(alo.clone(), |l| l.max(alo));
        let hi = hi.map_or(ahi.clone(), |h| h.min(ahi));
        if lo > hi {
            return None;
        }
        out.push((lo, hi));
    }
    Some(out)
}

/// Whether the closed boxes `parts` cover the closed box `a`. Cells of the
/// arrangement of all part endpoints are tested at their midpoints; the
/// witness is an uncovered midpoint.
pub fn box_coverage(a: &ClosedBox, parts: &[ClosedBox]) -> Result<Coverage<Vec<Rational>>, BoxError> {
    if let Some(p) = parts.iter().find(|p| p.len() != a.len()) {
        return Err(BoxError::DimensionMismatch { expected: a.len(), got: p.len() });
    }
    let coords: Vec<Vec<Cell>> = a
        .iter()
        .enumerate()
        .map(|(i, (lo, hi))| {
            let reps = if lo == hi {
                vec![lo.clone()]
            } else {
                let mut breaks: Vec<Rational> = parts
                    .iter()
                    .flat_map(|p| [&p[i].0, &p[i].1])
                    .filter(|t| lo < *t && *t < hi)
                    .cloned()
                    .collect();
                breaks.push(lo.clone());
                breaks.push(hi.clone());
                breaks.sort();
                breaks.dedup();
                breaks.windows(2).map(|w| (&w[0] + &w[1]) / two()).collect()
            };
            reps.into_iter()
                .map(|rep| {
                    let members = Bits::from_fn(parts.len(), |k| parts[k][i].0 <= rep && rep <= parts[k][i].1);
                    Cell { rep, members }
                })
                .collect()
        })
        .collect();
    Ok(match arrangement::first_uncovered(&coords, parts.len()) {
        Some(w) => Coverage { covered: false, witness: Some(w) },
        None => Coverage { covered: true, witness: None },
    })
}

/// Exact value of a relative Lebesgue number over a box subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxLebesgue {
    pub value: Value,
    /// A point of the subset left uncovered by the shrunk boxes at
    /// `next_candidate`, certifying that the value is not larger.
    #[serde(with = "crate::value::opt_point_str")]
    pub certificate: Option<Vec<Rational>>,
    pub next_candidate: Option<Value>,
    pub candidates_tested: usize,
}

fn check_subset(slice: &SliceSpace, f: &BoxFamily, a: &SliceSpace) -> Result<(), BoxError> {
    cover::check_box_family(slice, f)?;
    if !a.is_bounded() {
        return Err(BoxError::Unbounded(a.to_string()));
    }
    let c = cover::is_box_covering_family(slice, f, a)?;
    match c.witness {
        Some(witness) => Err(BoxError::NotCovering { witness }),
        None => Ok(()),
    }
}

/// Radii at which the combinatorics of the shrunk boxes can change: zero,
/// and all differences and half-differences of endpoints on one coordinate.
pub fn candidate_radii(slice: &SliceSpace, f: &BoxFamily, a: &SliceSpace) -> Vec<Rational> {
    let mut out = BTreeSet::from([Rational::zero()]);
    for i in slice.free_axes() {
        let mut ends: BTreeSet<Rational> = f
            .iter()
            .flat_map(|m| {
                let s = &m.set.sides()[i];
                s.lo.iter().chain(s.hi.iter()).cloned().collect::<Vec<_>>()
            })
            .collect();
        let (sa, sb) = slice.axis(i).bounds();
        let (aa, ab) = a.axis(i).bounds();
        ends.extend([sa, sb, aa, ab].into_iter().flatten().cloned());
        let ends: Vec<Rational> = ends.into_iter().collect();
        for (k, e) in ends.iter().enumerate() {
            for e2 in &ends[k + 1..] {
                let d = e2 - e;
                out.insert(&d / two());
                out.insert(d);
            }
        }
    }
    out.into_iter().collect()
}

/// Drops members whose trace on the slice lies inside another member's trace;
/// their margins are dominated everywhere.
fn undominated<'a>(slice: &SliceSpace, f: &'a BoxFamily) -> Vec<&'a Member<OpenBox>> {
    let traces: Vec<Option<Vec<cover::Span>>> = f.iter().map(|m| cover::member_extent(slice, &m.set)).collect();
    let inside = |s: &cover::Span, t: &cover::Span| {
        let lo_ok = match (&t.lo, &s.lo) {
            (cover::Bound::Unbounded, _) => true,
            (_, cover::Bound::Unbounded) => false,
            (cover::Bound::Closed(a), cover::Bound::Closed(b) | cover::Bound::Open(b)) => a <= b,
            (cover::Bound::Open(a), cover::Bound::Open(b)) => a <= b,
            (cover::Bound::Open(a), cover::Bound::Closed(b)) => a < b,
        };
        let hi_ok = match (&t.hi, &s.hi) {
            (cover::Bound::Unbounded, _) => true,
            (_, cover::Bound::Unbounded) => false,
            (cover::Bound::Closed(a), cover::Bound::Closed(b) | cover::Bound::Open(b)) => a >= b,
            (cover::Bound::Open(a), cover::Bound::Open(b)) => a >= b,
            (cover::Bound::Open(a), cover::Bound::Closed(b)) => a > b,
        };
        lo_ok && hi_ok
    };
    f.iter()
        .enumerate()
        .filter(|(k, _)| match &traces[*k] {
            None => false,
            Some(s) => !traces.iter().enumerate().any(|(j, t)| {
                j != *k
                    && t.as_ref().is_some_and(|t| {
                        let contained = s.iter().zip(t).all(|(a, b)| inside(a, b));
                        // keep the first of equal traces
                        let equal = contained && t.iter().zip(s).all(|(a, b)| inside(a, b));
                        contained && (!equal || j < *k)
                    })
            }),
        })
        .map(|(_, m)| m)
        .collect()
}

fn covered_at(
    slice: &SliceSpace,
    members: &[&Member<OpenBox>],
    a: &SliceSpace,
    abox: &ClosedBox,
    r: &Rational,
) -> Coverage<Vec<Rational>> {
    let parts: Vec<ClosedBox> = members.iter().filter_map(|m| shrunk_box(slice, &m.set, a, r)).collect();
    box_coverage(abox, &parts).expect("dimensions agree")
}

/// `L_S(U, A) = inf_{x in A} sup_U dist(x, S \ U)` for a closed bounded box
/// `a` inside the slice.
pub fn box_lebesgue_relative(slice: &SliceSpace, f: &BoxFamily, a: &SliceSpace) -> Result<BoxLebesgue, BoxError> {
    check_subset(slice, f, a)?;
    if f.iter().any(|m| m.set.contains_slice(slice)) {
        return Ok(BoxLebesgue { value: Value::Infinite, certificate: None, next_candidate: None, candidates_tested: 0 });
    }
    let abox = a.box_bounds().expect("bounded subset");
    let members = undominated(slice, f);
    let candidates = candidate_radii(slice, f, a);
    // coverage is antitone in r and holds at 0
    let (mut lo, mut hi) = (0usize, candidates.len());
    let mut tested = 0;
    let mut certificate = None;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        tested += 1;
        let c = covered_at(slice, &members, a, &abox, &candidates[mid]);
        if c.covered {
            lo = mid;
        } else {
            hi = mid;
            certificate = c.witness;
        }
    }
    let next = candidates.get(hi).map(Value::abs_rational);
    if next.is_some() && certificate.is_none() {
        certificate = covered_at(slice, &members, a, &abox, &candidates[hi]).witness;
    }
    Ok(BoxLebesgue {
        value: Value::abs_rational(&candidates[lo]),
        certificate,
        next_candidate: next,
        candidates_tested: tested,
    })
}

/// Supremum of the diameters of member traces on the slice.
pub fn box_mesh(slice: &SliceSpace, f: &BoxFamily) -> Value {
    f.iter()
        .filter_map(|m| cover::box_diameter(slice, &m.set))
        .max()
        .unwrap_or_else(Value::zero)
}

/// Mesh restricted to members containing `x`; zero when there are none.
pub fn box_mesh_at(slice: &SliceSpace, f: &BoxFamily, x: &[Rational]) -> Value {
    f.iter()
        .filter(|m| m.set.contains(x))
        .filter_map(|m| cover::box_diameter(slice, &m.set))
        .max()
        .unwrap_or_else(Value::zero)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxRefinement {
    pub holds: bool,
    /// A centre in the subset whose open `r`-ball fits in no member.
    #[serde(with = "crate::value::opt_point_str")]
    pub witness: Option<Vec<Rational>>,
}

/// Centres `x` in `a` whose open `r`-ball (within the slice) fits inside `u`.
///
/// A ball fits in a box iff each coordinate projection `(x_i - r, x_i + r)`
/// clipped to the slice axis fits in the box side. An end of the side that
/// lies outside the axis never touches the clipped projection.
fn ball_centres(slice: &SliceSpace, u: &OpenBox, a: &SliceSpace, r: &Rational) -> Option<ClosedBox> {
    let bounds = a.box_bounds()?;
    let mut out = Vec::with_capacity(bounds.len());
    for ((axis, side), (alo, ahi)) in slice.axes().iter().zip(u.sides()).zip(bounds) {
        if let Axis::Point(c) = axis {
            if !side.contains(c) {
                return None;
            }
            out.push((alo, ahi));
            continue;
        }
        let (sa, sb) = axis.bounds();
        let mut lo = alo;
        let mut hi = ahi;
        if let Some(l) = &side.lo {
            if sa.is_none_or(|sa| sa <= l) {
                lo = lo.max(l + r);
            }
        }
        if let Some(h) = &side.hi {
            if sb.is_none_or(|sb| h <= sb) {
                hi = hi.min(h - r);
            }
        }
        if lo > hi {
            return None;
        }
        out.push((lo, hi));
    }
    Some(out)
}

/// Whether every open ball `B(x, r)` with centre in `a` lies in some member.
pub fn box_ball_refinement(
    slice: &SliceSpace,
    f: &BoxFamily,
    a: &SliceSpace,
    r: &Rational,
) -> Result<BoxRefinement, BoxError> {
    cover::check_box_family(slice, f)?;
    let abox = a.box_bounds().ok_or_else(|| BoxError::Unbounded(a.to_string()))?;
    if r <= &Rational::zero() {
        return Ok(BoxRefinement { holds: true, witness: None });
    }
    let parts: Vec<ClosedBox> = f.iter().filter_map(|m| ball_centres(slice, &m.set, a, r)).collect();
    let c = box_coverage(&abox, &parts)?;
    Ok(BoxRefinement { holds: c.covered, witness: c.witness })
}

/// Finite truncations of the infinite families used as limit examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `{(1/n, 1) : 2 <= n <= N}` on the unit interval.
    IntervalTail,
    /// Sup-norm balls of radius `1 - 1/n`, `2 <= n <= N`, centred on the
    /// grid `(Z/N)^2 ∩ [0,1]^2` in the plane.
    BallTail,
}

impl FromStr for Scenario {
    type Err = BoxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "interval-tail" => Ok(Scenario::IntervalTail),
            "ball-tail" => Ok(Scenario::BallTail),
            other => Err(BoxError::UnknownScenario(other.to_string())),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::IntervalTail => "interval-tail",
            Scenario::BallTail => "ball-tail",
        })
    }
}

/// Ambient slice, truncated family and default subset of a scenario.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub slice: SliceSpace,
    pub family: BoxFamily,
    pub subset: SliceSpace,
}

fn rat(n: i64, d: i64) -> Rational {
    crate::value::q(n, d)
}

/// Builds the truncation at `n_max`.
///
/// The open interval `(0, 1)` is modelled by its closure: member `(1/n, 1)`
/// becomes the relatively open `(1/n, 1]`, written as `(1/n, inf)`. Distances
/// from points of `(0, 1)` to the complement are unchanged.
pub fn truncated_family(n_max: usize, scenario: Scenario) -> Result<Truncation, BoxError> {
    if n_max < 2 {
        return Err(BoxError::BadTruncation(n_max));
    }
    let n_max_i = n_max as i64;
    Ok(match scenario {
        Scenario::IntervalTail => Truncation {
            slice: SliceSpace::new(vec![Axis::Interval(rat(0, 1), rat(1, 1))], Norm::Euclidean),
            family: BoxFamily::new(
                (2..=n_max_i)
                    .map(|n| Member::new(format!("(1/{n},1)"), OpenBox(vec![OpenInterval::new(Some(rat(1, n)), None)])))
                    .collect(),
            ),
            subset: SliceSpace::new(vec![Axis::Interval(rat(1, 2), rat(3, 4))], Norm::Euclidean),
        },
        Scenario::BallTail => {
            let mut members = Vec::new();
            for i in 0..=n_max_i {
                for j in 0..=n_max_i {
                    let (cx, cy) = (rat(i, n_max_i), rat(j, n_max_i));
                    for n in 2..=n_max_i {
                        let rho = rat(n - 1, n);
                        members.push(Member::new(
                            format!("B(({},{}),{})", format_rational(&cx), format_rational(&cy), format_rational(&rho)),
                            OpenBox::from_bounds(vec![(&cx - &rho, &cx + &rho), (&cy - &rho, &cy + &rho)]),
                        ));
                    }
                }
            }
            Truncation {
                slice: SliceSpace::full(2, Norm::Euclidean),
                family: BoxFamily::new(members),
                subset: SliceSpace::new(vec![Axis::Interval(rat(1, 4), rat(3, 4)); 2], Norm::Euclidean),
            }
        }
    })
}

/// Exact Lebesgue number of a truncated family on `subset` (the scenario's
/// default subset when `None`).
pub fn truncated_family_lebesgue(
    n_max: usize,
    scenario: Scenario,
    subset: Option<&SliceSpace>,
) -> Result<Value, BoxError> {
    let t = truncated_family(n_max, scenario)?;
    let a = subset.unwrap_or(&t.subset);
    Ok(box_lebesgue_relative(&t.slice, &t.family, a)?.value)
}

/// Limit of the ball-tail family as `N -> inf`: every point is the centre of
/// balls of all radii `1 - 1/n`.
pub fn ball_tail_limit() -> Value {
    Value::one()
}
