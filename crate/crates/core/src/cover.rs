//! Covering families over finite spaces (index sets) and over slices (open
//! axis-aligned boxes).

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::space::{Axis, FiniteMetricSpace, PointSet, SliceSpace};
use crate::value::{format_rational, Rational, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("member {member:?} refers to point {index} outside the ambient space")]
    MemberOutsideAmbient { member: String, index: usize },
    #[error("subset refers to point {0} outside the ambient space")]
    SubsetOutsideAmbient(usize),
    #[error("member {member:?} has dimension {got}, ambient has dimension {expected}")]
    MemberDimension { member: String, expected: usize, got: usize },
    #[error("subset {subset} is not contained in the ambient slice {ambient}")]
    SubsetNotInSlice { subset: String, ambient: String },
    #[error("multiplicity is only defined for finite families")]
    Unsupported,
}

/// A named member of a covering family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member<S> {
    pub name: String,
    pub set: S,
}

impl<S> Member<S> {
    pub fn new(name: impl Into<String>, set: S) -> Self {
        Self { name: name.into(), set }
    }
}

/// Ordered list of named members. Reports cite members by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringFamily<S> {
    pub members: Vec<Member<S>>,
}

impl<S> CoveringFamily<S> {
    pub fn new(members: Vec<Member<S>>) -> Self {
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Member<S>> {
        self.members.iter()
    }

    pub fn names(&self) -> Vec<&str> {
        self.members.iter().map(|m| m.name.as_str()).collect()
    }
}

pub type FiniteFamily = CoveringFamily<PointSet>;
pub type BoxFamily = CoveringFamily<OpenBox>;

impl FiniteFamily {
    pub fn from_sets(sets: Vec<PointSet>) -> Self {
        Self::new(
            sets.into_iter()
                .enumerate()
                .map(|(i, s)| Member::new(format!("U{}", i + 1), s))
                .collect(),
        )
    }

    /// Cover of `space` by singletons, named after the points.
    pub fn singletons(space: &FiniteMetricSpace) -> Self {
        Self::new(
            (0..space.len())
                .map(|i| Member::new(format!("{{{}}}", space.label(i)), PointSet::from([i])))
                .collect(),
        )
    }

    /// The one-member cover `{X}`.
    pub fn whole(space: &FiniteMetricSpace) -> Self {
        Self::new(vec![Member::new("X", space.all_points())])
    }

    pub fn check_ambient(&self, space: &FiniteMetricSpace) -> Result<(), CoverError> {
        for m in &self.members {
            if let Some(&index) = m.set.iter().find(|&&i| i >= space.len()) {
                return Err(CoverError::MemberOutsideAmbient { member: m.name.clone(), index });
            }
        }
        Ok(())
    }

    pub fn members_containing(&self, x: usize) -> impl Iterator<Item = &Member<PointSet>> {
        self.members.iter().filter(move |m| m.set.contains(&x))
    }
}

/// Result of a covering test, with an uncovered point when it fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coverage<P> {
    pub covered: bool,
    pub witness: Option<P>,
}

impl<P> Coverage<P> {
    fn yes() -> Self {
        Self { covered: true, witness: None }
    }

    fn no(witness: P) -> Self {
        Self { covered: false, witness: Some(witness) }
    }
}

fn check_subset(space: &FiniteMetricSpace, a: &PointSet) -> Result<(), CoverError> {
    match a.iter().find(|&&i| i >= space.len()) {
        Some(&i) => Err(CoverError::SubsetOutsideAmbient(i)),
        None => Ok(()),
    }
}

/// Whether `a` lies in the union of `f`; the witness is the first uncovered
/// point.
pub fn is_covering_family(
    space: &FiniteMetricSpace,
    f: &FiniteFamily,
    a: &PointSet,
) -> Result<Coverage<usize>, CoverError> {
    f.check_ambient(space)?;
    check_subset(space, a)?;
    Ok(match a.iter().find(|&&x| f.members_containing(x).next().is_none()) {
        Some(&x) => Coverage::no(x),
        None => Coverage::yes(),
    })
}

/// A family restricted to a subset, re-expressed over the induced subspace.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub space: FiniteMetricSpace,
    pub family: FiniteFamily,
    /// Parent index of each point of the induced subspace.
    pub to_parent: Vec<usize>,
    /// Members whose intersection with the subset was empty.
    pub dropped: Vec<String>,
}

impl Restriction {
    /// Re-indexes a parent subset; `None` when it leaves the restricted set.
    pub fn map_subset(&self, parent: &PointSet) -> Option<PointSet> {
        parent
            .iter()
            .map(|p| self.to_parent.binary_search(p).ok())
            .collect()
    }

    pub fn map_point(&self, parent: usize) -> Option<usize> {
        self.to_parent.binary_search(&parent).ok()
    }
}

/// `U|_B = {U ∩ B}` over the subspace `B`. Empty intersections are dropped.
pub fn restrict(
    space: &FiniteMetricSpace,
    f: &FiniteFamily,
    b: &PointSet,
) -> Result<Restriction, crate::space::SpaceError> {
    let sub = space.induced_subspace(b)?;
    let to_parent: Vec<usize> = b.iter().copied().collect();
    let mut members = Vec::new();
    let mut dropped = Vec::new();
    for m in &f.members {
        let set: PointSet = to_parent
            .iter()
            .enumerate()
            .filter(|(_, p)| m.set.contains(p))
            .map(|(i, _)| i)
            .collect();
        if set.is_empty() {
            log::info!("restriction drops member {} (empty intersection)", m.name);
            dropped.push(m.name.clone());
        } else {
            members.push(Member::new(m.name.clone(), set));
        }
    }
    Ok(Restriction { space: sub, family: FiniteFamily::new(members), to_parent, dropped })
}

/// Supremum of member diameters; zero for an empty family.
pub fn mesh(space: &FiniteMetricSpace, f: &FiniteFamily) -> Value {
    f.iter().map(|m| space.diameter(&m.set)).max().unwrap_or_else(Value::zero)
}

/// Supremum of the diameters of members containing `x`; zero when no member
/// contains it.
pub fn mesh_at(space: &FiniteMetricSpace, f: &FiniteFamily, x: usize) -> Value {
    f.members_containing(x)
        .map(|m| space.diameter(&m.set))
        .max()
        .unwrap_or_else(Value::zero)
}

/// Largest number of members sharing a point.
pub fn multiplicity(space: &FiniteMetricSpace, f: &FiniteFamily) -> usize {
    (0..space.len())
        .map(|x| f.members_containing(x).count())
        .max()
        .unwrap_or(0)
}

/// True iff every member of `g` is (extensionally) a member of `f` and `g`
/// still covers the whole space.
pub fn subcover_check(space: &FiniteMetricSpace, f: &FiniteFamily, g: &FiniteFamily) -> bool {
    let members_of_f = g.iter().all(|m| f.iter().any(|n| n.set == m.set));
    members_of_f
        && is_covering_family(space, g, &space.all_points())
            .map(|c| c.covered)
            .unwrap_or(false)
}

/// Open interval `(lo, hi)` with optional (infinite) ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpenInterval {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

impl OpenInterval {
    pub fn new(lo: Option<Rational>, hi: Option<Rational>) -> Self {
        Self { lo, hi }
    }

    pub fn bounded(lo: Rational, hi: Rational) -> Self {
        Self::new(Some(lo), Some(hi))
    }

    pub fn unbounded() -> Self {
        Self::new(None, None)
    }

    pub fn contains(&self, t: &Rational) -> bool {
        self.lo.as_ref().is_none_or(|lo| lo < t) && self.hi.as_ref().is_none_or(|hi| t < hi)
    }

    pub fn is_empty(&self) -> bool {
        matches!((&self.lo, &self.hi), (Some(lo), Some(hi)) if lo >= hi)
    }

    /// Whether the closed axis lies inside this interval.
    pub fn contains_axis(&self, axis: &Axis) -> bool {
        match axis.bounds() {
            (Some(lo), Some(hi)) => self.contains(lo) && self.contains(hi),
            _ => self.lo.is_none() && self.hi.is_none(),
        }
    }

    pub fn scaled(&self, c: &Rational) -> OpenInterval {
        OpenInterval::new(self.lo.as_ref().map(|t| t * c), self.hi.as_ref().map(|t| t * c))
    }
}

impl fmt::Display for OpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lo.as_ref().map_or("-inf".to_string(), format_rational);
        let hi = self.hi.as_ref().map_or("inf".to_string(), format_rational);
        write!(f, "({lo},{hi})")
    }
}

/// Open axis-aligned box, a product of open intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpenBox(pub Vec<OpenInterval>);

impl OpenBox {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn sides(&self) -> &[OpenInterval] {
        &self.0
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.0.len() == x.len() && self.0.iter().zip(x).all(|(s, t)| s.contains(t))
    }

    pub fn contains_slice(&self, slice: &SliceSpace) -> bool {
        self.0.iter().zip(slice.axes()).all(|(s, a)| s.contains_axis(a))
    }

    /// `(lo_i, hi_i)` bounded box from pairs.
    pub fn from_bounds(bounds: Vec<(Rational, Rational)>) -> Self {
        OpenBox(bounds.into_iter().map(|(lo, hi)| OpenInterval::bounded(lo, hi)).collect())
    }
}

impl fmt::Display for OpenBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(OpenInterval::to_string).collect();
        f.write_str(&parts.join("x"))
    }
}

/// End of a one-dimensional piece of `member ∩ slice`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Unbounded,
    Open(Rational),
    Closed(Rational),
}

impl Bound {
    fn value(&self) -> Option<&Rational> {
        match self {
            Bound::Unbounded => None,
            Bound::Open(t) | Bound::Closed(t) => Some(t),
        }
    }
}

/// One coordinate of `member ∩ slice`: an interval with open, closed or
/// infinite ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub lo: Bound,
    pub hi: Bound,
}

impl Span {
    /// Length of the span; `None` when unbounded.
    pub fn length(&self) -> Option<Rational> {
        Some(self.hi.value()? - self.lo.value()?)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = match &self.lo {
            Bound::Unbounded => "(-inf".to_string(),
            Bound::Open(t) => format!("({}", format_rational(t)),
            Bound::Closed(t) => format!("[{}", format_rational(t)),
        };
        let hi = match &self.hi {
            Bound::Unbounded => "inf)".to_string(),
            Bound::Open(t) => format!("{})", format_rational(t)),
            Bound::Closed(t) => format!("{}]", format_rational(t)),
        };
        write!(f, "{lo},{hi}")
    }
}

fn lower_of(side: &OpenInterval, axis_lo: Option<&Rational>) -> Bound {
    match (&side.lo, axis_lo) {
        (None, None) => Bound::Unbounded,
        (Some(l), None) => Bound::Open(l.clone()),
        (None, Some(a)) => Bound::Closed(a.clone()),
        (Some(l), Some(a)) if l >= a => Bound::Open(l.clone()),
        (Some(_), Some(a)) => Bound::Closed(a.clone()),
    }
}

fn upper_of(side: &OpenInterval, axis_hi: Option<&Rational>) -> Bound {
    match (&side.hi, axis_hi) {
        (None, None) => Bound::Unbounded,
        (Some(h), None) => Bound::Open(h.clone()),
        (None, Some(b)) => Bound::Closed(b.clone()),
        (Some(h), Some(b)) if h <= b => Bound::Open(h.clone()),
        (Some(_), Some(b)) => Bound::Closed(b.clone()),
    }
}

fn span_is_empty(s: &Span) -> bool {
    match (&s.lo, &s.hi) {
        (Bound::Closed(a), Bound::Closed(b)) => a > b,
        (lo, hi) => match (lo.value(), hi.value()) {
            (Some(a), Some(b)) => a >= b,
            _ => false,
        },
    }
}

/// Per-coordinate description of `member ∩ slice`, or `None` when empty.
pub fn member_extent(slice: &SliceSpace, member: &OpenBox) -> Option<Vec<Span>> {
    let mut spans = Vec::with_capacity(slice.dim());
    for (side, axis) in member.0.iter().zip(slice.axes()) {
        let span = match axis {
            Axis::Point(c) => {
                if !side.contains(c) {
                    return None;
                }
                Span { lo: Bound::Closed(c.clone()), hi: Bound::Closed(c.clone()) }
            }
            _ => {
                let (a, b) = axis.bounds();
                Span { lo: lower_of(side, a), hi: upper_of(side, b) }
            }
        };
        if span_is_empty(&span) {
            return None;
        }
        spans.push(span);
    }
    Some(spans)
}

/// Diameter of `member ∩ slice` under the slice norm (that of its closure);
/// `None` when the intersection is empty.
pub fn box_diameter(slice: &SliceSpace, member: &OpenBox) -> Option<Value> {
    let spans = member_extent(slice, member)?;
    let mut sides = Vec::with_capacity(spans.len());
    for s in &spans {
        match s.length() {
            Some(len) => sides.push(len),
            None => return Some(Value::Infinite),
        }
    }
    Some(slice.norm().of(&sides))
}

pub fn check_box_family(slice: &SliceSpace, f: &BoxFamily) -> Result<(), CoverError> {
    for m in &f.members {
        if m.set.dim() != slice.dim() {
            return Err(CoverError::MemberDimension {
                member: m.name.clone(),
                expected: slice.dim(),
                got: m.set.dim(),
            });
        }
        if member_extent(slice, &m.set).is_none() {
            log::warn!("member {} does not meet the ambient slice {slice}", m.name);
        }
    }
    Ok(())
}

/// Members with an empty trace on `slice`.
pub fn empty_members<'a>(slice: &SliceSpace, f: &'a BoxFamily) -> Vec<&'a str> {
    f.iter()
        .filter(|m| member_extent(slice, &m.set).is_none())
        .map(|m| m.name.as_str())
        .collect()
}

/// Whether the closed region `a` (a sub-slice of `slice`) lies in the union
/// of the open boxes. The witness is a representative of an uncovered cell of
/// the arrangement of all member endpoints.
pub fn is_box_covering_family(
    slice: &SliceSpace,
    f: &BoxFamily,
    a: &SliceSpace,
) -> Result<Coverage<Vec<Rational>>, CoverError> {
    check_box_family(slice, f)?;
    if !a.is_subset_of(slice) {
        return Err(CoverError::SubsetNotInSlice { subset: a.to_string(), ambient: slice.to_string() });
    }
    let coords: Vec<Vec<Cell>> = (0..a.dim())
        .map(|i| {
            let sides: Vec<&OpenInterval> = f.iter().map(|m| &m.set.0[i]).collect();
            open_cells(a.axis(i), &sides)
        })
        .collect();
    Ok(match arrangement::first_uncovered(&coords, f.len()) {
        Some(w) => Coverage::no(w),
        None => Coverage::yes(),
    })
}

/// `U|_B`: the ambient becomes the closed box `b` and members missing it are
/// dropped. Members keep their open-box description; their trace on the new
/// ambient is given by [`member_extent`].
pub fn restrict_boxes(
    slice: &SliceSpace,
    f: &BoxFamily,
    b: &SliceSpace,
) -> Result<(SliceSpace, BoxFamily, Vec<String>), CoverError> {
    check_box_family(slice, f)?;
    if !b.is_subset_of(slice) {
        return Err(CoverError::SubsetNotInSlice { subset: b.to_string(), ambient: slice.to_string() });
    }
    let ambient = b.clone().with_norm(slice.norm());
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for m in &f.members {
        if member_extent(&ambient, &m.set).is_some() {
            kept.push(m.clone());
        } else {
            log::info!("restriction drops member {} (empty intersection)", m.name);
            dropped.push(m.name.clone());
        }
    }
    Ok((ambient, BoxFamily::new(kept), dropped))
}

/// Box analogue of [`subcover_check`]: members of `g` are members of `f` and
/// `g` covers the whole slice.
pub fn box_subcover_check(slice: &SliceSpace, f: &BoxFamily, g: &BoxFamily) -> bool {
    g.iter().all(|m| f.iter().any(|n| n.set == m.set))
        && is_box_covering_family(slice, g, slice).map(|c| c.covered).unwrap_or(false)
}

/// One element of a one-dimensional arrangement: a representative point and
/// the members containing the whole element.
pub(crate) struct Cell {
    pub rep: Rational,
    pub members: arrangement::Bits,
}

fn two() -> Rational {
    Rational::one() + Rational::one()
}

/// Elements (points and open gaps) of the arrangement of open member sides on
/// a closed axis. Membership of an element in an open side is decided by its
/// representative, since all side endpoints are breakpoints.
fn open_cells(axis: &Axis, sides: &[&OpenInterval]) -> Vec<Cell> {
    let mut breaks: Vec<Rational> = sides
        .iter()
        .flat_map(|s| s.lo.iter().chain(s.hi.iter()))
        .filter(|t| axis.contains(t))
        .cloned()
        .collect();
    let (a, b) = axis.bounds();
    breaks.extend(a.cloned());
    breaks.extend(b.cloned());
    breaks.sort();
    breaks.dedup();
    let mut reps = Vec::new();
    if breaks.is_empty() {
        reps.push(Rational::zero());
    } else {
        if a.is_none() {
            reps.push(&breaks[0] - Rational::one());
        }
        for (k, p) in breaks.iter().enumerate() {
            reps.push(p.clone());
            if let Some(next) = breaks.get(k + 1) {
                reps.push((p + next) / two());
            }
        }
        if b.is_none() {
            reps.push(breaks.last().expect("nonempty") + Rational::one());
        }
    }
    reps.into_iter()
        .map(|rep| {
            let members = arrangement::Bits::from_fn(sides.len(), |k| sides[k].contains(&rep));
            Cell { rep, members }
        })
        .collect()
}

pub(crate) mod arrangement {
    use super::Cell;
    use crate::value::Rational;

    /// Fixed-width bitset over family members.
    #[derive(Clone, Debug, PartialEq, Eq)]
    pub struct Bits(Vec<u64>);

    impl Bits {
        pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Self {
            let mut words = vec![0u64; n.div_ceil(64).max(1)];
            for k in 0..n {
                if f(k) {
                    words[k / 64] |= 1 << (k % 64);
                }
            }
            Bits(words)
        }

        pub fn full(n: usize) -> Self {
            Self::from_fn(n, |_| true)
        }

        pub fn and(&self, other: &Bits) -> Bits {
            Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
        }

        pub fn any(&self) -> bool {
            self.0.iter().any(|&w| w != 0)
        }
    }

    /// Depth-first search over the product of per-coordinate cells for one
    /// that no member contains. Prefixes whose member set is already empty
    /// are completed arbitrarily.
    pub fn first_uncovered(coords: &[Vec<Cell>], members: usize) -> Option<Vec<Rational>> {
        if coords.iter().any(Vec::is_empty) {
            return None;
        }
        let mut point = Vec::with_capacity(coords.len());
        if search(coords, &Bits::full(members), &mut point) {
            Some(point)
        } else {
            None
        }
    }

    fn search(coords: &[Vec<Cell>], live: &Bits, point: &mut Vec<Rational>) -> bool {
        let depth = point.len();
        if depth == coords.len() {
            return !live.any();
        }
        if !live.any() {
            for c in &coords[depth..] {
                point.push(c[0].rep.clone());
            }
            return true;
        }
        for cell in &coords[depth] {
            point.push(cell.rep.clone());
            if search(coords, &live.and(&cell.members), point) {
                return true;
            }
            point.pop();
        }
        false
    }
}
