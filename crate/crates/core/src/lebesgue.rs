//! Lebesgue numbers of covering families on finite metric spaces.
//!
//! All infima and suprema range over finite sets, so each report carries the
//! point (or set) that attains its value.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cover::{self, CoverError, FiniteFamily};
use crate::space::{FiniteMetricSpace, PointSet, SpaceError};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LebesgueError {
    #[error("family does not cover the subset: point {label:?} lies in no member")]
    NotCovering { index: usize, label: String },
    #[error("subset is empty")]
    EmptySubset,
    #[error("subset A is not contained in B")]
    NotNested,
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Standard,
    Rad,
    Diam,
    SecondKind,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Standard => "L",
            Variant::Rad => "L_rad",
            Variant::Diam => "L_diam",
            Variant::SecondKind => "L_second",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointValue {
    pub index: usize,
    pub label: String,
    pub value: Value,
}

/// An infimum over a subset of pointwise values, with its minimizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LebesgueReport {
    pub variant: Variant,
    pub value: Value,
    pub argmin: usize,
    pub argmin_label: String,
    pub per_point: Vec<PointValue>,
    /// Points of the subset lying in no member (their pointwise value is 0).
    pub uncovered: Vec<usize>,
}

impl LebesgueReport {
    fn from_points(
        variant: Variant,
        space: &FiniteMetricSpace,
        values: Vec<(usize, Value)>,
        uncovered: Vec<usize>,
    ) -> Result<Self, LebesgueError> {
        // first minimum in index order
        let (argmin, value) = values
            .iter()
            .fold(None::<&(usize, Value)>, |best, cur| match best {
                Some(b) if b.1 <= cur.1 => Some(b),
                _ => Some(cur),
            })
            .cloned()
            .ok_or(LebesgueError::EmptySubset)?;
        let per_point = values
            .into_iter()
            .map(|(index, value)| PointValue { index, label: space.label(index).to_string(), value })
            .collect();
        Ok(Self {
            variant,
            value,
            argmin,
            argmin_label: space.label(argmin).to_string(),
            per_point,
            uncovered,
        })
    }
}

/// `dist(x, X \ member)`; infinite when the member is the whole space.
pub fn dist_to_complement(space: &FiniteMetricSpace, x: usize, member: &PointSet) -> Value {
    space
        .row(x)
        .iter()
        .enumerate()
        .filter(|(y, _)| !member.contains(y))
        .map(|(_, d)| d)
        .min()
        .cloned()
        .unwrap_or(Value::Infinite)
}

/// `L(U, x)`: supremum over members of the distance to the complement.
/// Zero when `f` is empty.
pub fn pointwise(space: &FiniteMetricSpace, f: &FiniteFamily, x: usize) -> Value {
    f.iter()
        .map(|m| dist_to_complement(space, x, &m.set))
        .max()
        .unwrap_or_else(Value::zero)
}

fn require_cover(space: &FiniteMetricSpace, f: &FiniteFamily, a: &PointSet) -> Result<(), LebesgueError> {
    if a.is_empty() {
        return Err(LebesgueError::EmptySubset);
    }
    let c = cover::is_covering_family(space, f, a)?;
    match c.witness {
        Some(index) => Err(LebesgueError::NotCovering { index, label: space.label(index).to_string() }),
        None => Ok(()),
    }
}

/// `L_X(U, A) = inf_{x in A} sup_{U} dist(x, X \ U)`.
pub fn lebesgue_relative(
    space: &FiniteMetricSpace,
    f: &FiniteFamily,
    a: &PointSet,
) -> Result<LebesgueReport, LebesgueError> {
    require_cover(space, f, a)?;
    let values = a.iter().map(|&x| (x, pointwise(space, f, x))).collect();
    LebesgueReport::from_points(Variant::Standard, space, values, Vec::new())
}

/// `L(U)` of a cover of the whole space.
pub fn lebesgue(space: &FiniteMetricSpace, f: &FiniteFamily) -> Result<LebesgueReport, LebesgueError> {
    lebesgue_relative(space, f, &space.all_points())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadAt {
    pub value: Value,
    /// No ball of positive radius around the point fits in a member.
    pub uncovered: bool,
}

/// Supremum of radii `r > 0` with `B(x, r)` inside some member.
///
/// Walks the distinct distances from `x` in increasing order: for `r` in
/// `(d_j, d_{j+1}]` the open ball is the set of points at distance at most
/// `d_j`. The answer is the first radius whose ball escapes every member.
pub fn lebesgue_rad_at(space: &FiniteMetricSpace, f: &FiniteFamily, x: usize) -> RadAt {
    let shells = space.distance_shells(x);
    let mut ball = PointSet::new();
    for (k, (_, pts)) in shells.iter().enumerate() {
        ball.extend(pts.iter().copied());
        if !f.iter().any(|m| ball.is_subset(&m.set)) {
            return if k == 0 {
                RadAt { value: Value::zero(), uncovered: true }
            } else {
                RadAt { value: shells[k].0.clone(), uncovered: false }
            };
        }
    }
    RadAt { value: Value::Infinite, uncovered: false }
}

/// `L_Rad` relative to a subset: the infimum of [`lebesgue_rad_at`].
pub fn lebesgue_rad(
    space: &FiniteMetricSpace,
    f: &FiniteFamily,
    a: &PointSet,
) -> Result<LebesgueReport, LebesgueError> {
    if a.is_empty() {
        return Err(LebesgueError::EmptySubset);
    }
    f.check_ambient(space)?;
    let mut uncovered = Vec::new();
    let values = a
        .iter()
        .map(|&x| {
            let r = lebesgue_rad_at(space, f, x);
            if r.uncovered {
                uncovered.push(x);
            }
            (x, r.value)
        })
        .collect();
    LebesgueReport::from_points(Variant::Rad, space, values, uncovered)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiamReport {
    pub value: Value,
    /// A set of minimal diameter lying in no member; absent when no such set
    /// exists (value infinite).
    pub bad_set: Option<PointSet>,
}

/// `L_Diam(U) = sup { D : every set of diameter <= D lies in a member }`.
///
/// On a finite space this is the least diameter of a bad set, and the bad sets
/// are exactly the sets meeting every member complement. The least such
/// diameter is found by branch and bound over transversals of the complements.
pub fn lebesgue_diam(space: &FiniteMetricSpace, f: &FiniteFamily) -> Result<DiamReport, LebesgueError> {
    f.check_ambient(space)?;
    let n = space.len();
    let complements: Vec<PointSet> = f
        .iter()
        .map(|m| (0..n).filter(|i| !m.set.contains(i)).collect())
        .collect();
    if complements.iter().any(BTreeSet::is_empty) {
        return Ok(DiamReport { value: Value::Infinite, bad_set: None });
    }
    let (value, set) = min_diameter_transversal(space, complements);
    Ok(DiamReport { value, bad_set: Some(set) })
}

/// Order-preserving integer ranks of all distances, so the search compares
/// machine integers.
struct RankTable {
    n: usize,
    ranks: Vec<u32>,
    values: Vec<Value>,
}

impl RankTable {
    fn new(space: &FiniteMetricSpace) -> Self {
        let n = space.len();
        let distinct: BTreeSet<&Value> = (0..n).flat_map(|i| space.row(i).iter()).collect();
        let values: Vec<Value> = distinct.into_iter().cloned().collect();
        let ranks = (0..n * n)
            .map(|k| values.binary_search(space.d(k / n, k % n)).expect("known distance") as u32)
            .collect();
        Self { n, ranks, values }
    }

    fn rank(&self, i: usize, j: usize) -> u32 {
        self.ranks[i * self.n + j]
    }
}

fn min_diameter_transversal(space: &FiniteMetricSpace, mut sets: Vec<PointSet>) -> (Value, PointSet) {
    sets.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
    sets.dedup();
    // hitting a subset hits all of its supersets
    let minimal: Vec<Vec<usize>> = sets
        .iter()
        .enumerate()
        .filter(|(k, s)| !sets[..*k].iter().any(|t| t.is_subset(s)))
        .map(|(_, s)| s.iter().copied().collect())
        .collect();
    let table = RankTable::new(space);
    let mut search = Transversal { table: &table, sets: &minimal, best: u32::MAX, best_set: Vec::new() };
    search.run(&mut Vec::new(), 0);
    let value = table.values[search.best as usize].clone();
    (value, search.best_set.into_iter().collect())
}

struct Transversal<'a> {
    table: &'a RankTable,
    sets: &'a [Vec<usize>],
    best: u32,
    best_set: Vec<usize>,
}

impl Transversal<'_> {
    fn run(&mut self, chosen: &mut Vec<usize>, diam: u32) {
        let unhit: Vec<&Vec<usize>> = self
            .sets
            .iter()
            .filter(|s| !s.iter().any(|y| chosen.contains(y)))
            .collect();
        if unhit.is_empty() {
            if diam < self.best {
                self.best = diam;
                self.best_set = chosen.clone();
            }
            return;
        }
        let grow = |y: usize| chosen.iter().map(|&s| self.table.rank(y, s)).max().unwrap_or(0).max(diam);
        // every unhit set forces at least its cheapest extension
        let mut bound = diam;
        let mut branch: Option<Vec<(u32, usize)>> = None;
        for s in &unhit {
            let mut opts: Vec<(u32, usize)> = s.iter().map(|&y| (grow(y), y)).collect();
            opts.sort();
            bound = bound.max(opts[0].0);
            let live = opts.iter().filter(|o| o.0 < self.best).count();
            if branch.as_ref().is_none_or(|b| live < b.iter().filter(|o| o.0 < self.best).count()) {
                branch = Some(opts);
            }
        }
        if bound >= self.best {
            return;
        }
        for (nd, y) in branch.expect("an unhit set") {
            if nd >= self.best {
                break;
            }
            chosen.push(y);
            self.run(chosen, nd);
            chosen.pop();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BallWitness {
    pub center: usize,
    pub ball: PointSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Refinement {
    pub holds: bool,
    pub witness: Option<BallWitness>,
}

/// Whether every open ball `B(x, r) = {y : d(x, y) < r}` lies in some member.
/// The empty ball (`r = 0`) always does.
pub fn ball_refinement_holds(space: &FiniteMetricSpace, f: &FiniteFamily, r: &Value) -> Refinement {
    for x in 0..space.len() {
        let ball: PointSet = space
            .row(x)
            .iter()
            .enumerate()
            .filter(|(_, d)| *d < r)
            .map(|(y, _)| y)
            .collect();
        if !ball.is_empty() && !f.iter().any(|m| ball.is_subset(&m.set)) {
            return Refinement { holds: false, witness: Some(BallWitness { center: x, ball }) };
        }
    }
    Refinement { holds: true, witness: None }
}

/// Second-kind number relative to `a`: the infimum of
/// `min(L(U, x), mesh(U, x))`.
pub fn second_kind_relative(
    space: &FiniteMetricSpace,
    f: &FiniteFamily,
    a: &PointSet,
) -> Result<LebesgueReport, LebesgueError> {
    require_cover(space, f, a)?;
    let values = a
        .iter()
        .map(|&x| (x, pointwise(space, f, x).min(cover::mesh_at(space, f, x))))
        .collect();
    LebesgueReport::from_points(Variant::SecondKind, space, values, Vec::new())
}

/// The four numbers of the restriction chain
/// `L(U) <= L_X(U, A) <= L_B(U|_B, A) <= L_A(U|_A, A)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    /// `L(U)`; absent when `f` is only a covering family of `A`.
    pub whole: Option<Value>,
    pub in_ambient: Value,
    pub in_b: Value,
    pub intrinsic: Value,
    pub holds: bool,
}

impl ChainReport {
    pub fn terms(&self) -> Vec<&Value> {
        self.whole.iter().chain([&self.in_ambient, &self.in_b, &self.intrinsic]).collect()
    }
}

pub fn chain_report(
    space: &FiniteMetricSpace,
    f: &FiniteFamily,
    a: &PointSet,
    b: &PointSet,
) -> Result<ChainReport, LebesgueError> {
    if !a.is_subset(b) {
        return Err(LebesgueError::NotNested);
    }
    let whole = if cover::is_covering_family(space, f, &space.all_points())?.covered {
        Some(lebesgue(space, f)?.value)
    } else {
        None
    };
    let in_ambient = lebesgue_relative(space, f, a)?.value;
    let rb = cover::restrict(space, f, b)?;
    let a_in_b = rb.map_subset(a).ok_or(LebesgueError::NotNested)?;
    let in_b = lebesgue_relative(&rb.space, &rb.family, &a_in_b)?.value;
    let ra = cover::restrict(space, f, a)?;
    let intrinsic = lebesgue(&ra.space, &ra.family)?.value;
    let mut report = ChainReport { whole, in_ambient, in_b, intrinsic, holds: false };
    report.holds = report.terms().windows(2).all(|w| w[0] <= w[1]);
    Ok(report)
}
