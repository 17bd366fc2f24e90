//! Finite metric spaces and axis-aligned slices of `Q^n`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{format_rational, parse_rational, Rational, Value};

/// Indices into a [`FiniteMetricSpace`].
pub type PointSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("point index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("point cloud mixes dimensions {0} and {1}")]
    MixedDimension(usize, usize),
    #[error("empty subset")]
    EmptySubset,
    #[error("empty space")]
    EmptySpace,
    #[error("point has dimension {got}, slice has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point {0} is not in the slice")]
    OutsideSlice(String),
    #[error("interval [{0}, {1}] is empty or degenerate; use a point axis")]
    BadInterval(String, String),
    #[error("cannot parse slice {0:?}: {1}")]
    SliceSyntax(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Euclidean,
    Linf,
    L1,
}

impl Norm {
    /// Norm of a vector given by its (possibly negative) components.
    pub fn of<'a>(&self, components: impl IntoIterator<Item = &'a Rational>) -> Value {
        match self {
            Norm::Euclidean => {
                Value::Finite(components.into_iter().map(|c| c * c).sum())
            }
            Norm::Linf => {
                let m = components
                    .into_iter()
                    .map(|c| c.abs())
                    .max()
                    .unwrap_or_else(Rational::zero);
                Value::abs_rational(&m)
            }
            Norm::L1 => {
                let s: Rational = components.into_iter().map(|c| c.abs()).sum();
                Value::abs_rational(&s)
            }
        }
    }

    pub fn distance(&self, p: &[Rational], q: &[Rational]) -> Value {
        let diffs: Vec<Rational> = p.iter().zip(q).map(|(a, b)| a - b).collect();
        self.of(&diffs)
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Euclidean => "euclidean",
            Norm::Linf => "linf",
            Norm::L1 => "l1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Matrix,
    Cloud { points: Vec<Vec<Rational>>, norm: Norm },
}

/// Labeled points with an exact distance table.
///
/// Cloud spaces keep their coordinates so they can be scaled, restricted and
/// serialized without losing the geometric description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    backend: Backend,
    table: Vec<Value>,
}

fn check_labels(labels: &[String], n: usize) -> Result<(), SpaceError> {
    if labels.len() != n {
        return Err(SpaceError::LabelCount { expected: n, got: labels.len() });
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(SpaceError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl FiniteMetricSpace {
    /// Builds a space from an explicit distance table. Metric axioms are not
    /// checked here; see [`validate_metric`].
    pub fn from_matrix(labels: Vec<String>, rows: Vec<Vec<Value>>) -> Result<Self, SpaceError> {
        let n = rows.len();
        if n == 0 {
            return Err(SpaceError::EmptySpace);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(SpaceError::NotSquare { row, len: r.len(), expected: n });
            }
        }
        check_labels(&labels, n)?;
        Ok(Self {
            labels,
            backend: Backend::Matrix,
            table: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_cloud(
        labels: Vec<String>,
        points: Vec<Vec<Rational>>,
        norm: Norm,
    ) -> Result<Self, SpaceError> {
        let n = points.len();
        if n == 0 {
            return Err(SpaceError::EmptySpace);
        }
        let dim = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(SpaceError::MixedDimension(dim, p.len()));
        }
        check_labels(&labels, n)?;
        let mut table = Vec::with_capacity(n * n);
        for p in &points {
            for q in &points {
                table.push(norm.distance(p, q));
            }
        }
        Ok(Self { labels, backend: Backend::Cloud { points, norm }, table })
    }

    /// Matrix space with `d(i, j) = dist(i, j)` for `i != j`.
    pub fn from_fn(labels: Vec<String>, dist: impl Fn(usize, usize) -> Value) -> Result<Self, SpaceError> {
        let n = labels.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Value::zero() } else { dist(i, j) }).collect())
            .collect();
        Self::from_matrix(labels, rows)
    }

    /// `n` points, all at mutual distance one.
    pub fn discrete(n: usize) -> Self {
        Self::from_fn(numbered_labels(n), |_, _| Value::one()).expect("discrete space")
    }

    /// Points `0..n` on a line with `d(i, j) = |i - j|`.
    pub fn path(n: usize) -> Self {
        Self::from_fn(numbered_labels(n), |i, j| Value::from_integer(i.abs_diff(j) as u64))
            .expect("path space")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn index_of(&self, label: &str) -> Result<usize, SpaceError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| SpaceError::UnknownPoint(label.to_string()))
    }

    pub fn subset_of_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<PointSet, SpaceError> {
        labels.iter().map(|l| self.index_of(l.as_ref())).collect()
    }

    pub fn labels_of(&self, set: &PointSet) -> Vec<String> {
        set.iter().map(|&i| self.labels[i].clone()).collect()
    }

    pub fn all_points(&self) -> PointSet {
        (0..self.len()).collect()
    }

    /// Distance by index. Panics on out-of-range indices; use
    /// [`FiniteMetricSpace::distance_checked`] for untrusted input.
    pub fn d(&self, i: usize, j: usize) -> &Value {
        &self.table[i * self.len() + j]
    }

    pub fn distance_checked(&self, i: usize, j: usize) -> Result<&Value, SpaceError> {
        let n = self.len();
        if i >= n {
            return Err(SpaceError::IndexOutOfRange(i));
        }
        if j >= n {
            return Err(SpaceError::IndexOutOfRange(j));
        }
        Ok(self.d(i, j))
    }

    pub fn distance(&self, p: &str, q: &str) -> Result<&Value, SpaceError> {
        Ok(self.d(self.index_of(p)?, self.index_of(q)?))
    }

    pub fn row(&self, i: usize) -> &[Value] {
        let n = self.len();
        &self.table[i * n..(i + 1) * n]
    }

    /// Diameter of a subset; zero for singletons and the empty set.
    pub fn diameter(&self, set: &PointSet) -> Value {
        let pts: Vec<usize> = set.iter().copied().collect();
        let mut best = Value::zero();
        for (k, &i) in pts.iter().enumerate() {
            for &j in &pts[k + 1..] {
                if self.d(i, j) > &best {
                    best = self.d(i, j).clone();
                }
            }
        }
        best
    }

    /// Distinct distances from `i`, ascending, each with the points at that
    /// distance.
    pub fn distance_shells(&self, i: usize) -> Vec<(Value, Vec<usize>)> {
        let mut shells: BTreeMap<&Value, Vec<usize>> = BTreeMap::new();
        for (j, dist) in self.row(i).iter().enumerate() {
            shells.entry(dist).or_default().push(j);
        }
        shells.into_iter().map(|(d, pts)| (d.clone(), pts)).collect()
    }

    /// The subspace on `set`, with labels preserved and points renumbered in
    /// increasing index order.
    pub fn induced_subspace(&self, set: &PointSet) -> Result<FiniteMetricSpace, SpaceError> {
        if set.is_empty() {
            return Err(SpaceError::EmptySubset);
        }
        if let Some(&bad) = set.iter().find(|&&i| i >= self.len()) {
            return Err(SpaceError::IndexOutOfRange(bad));
        }
        let idx: Vec<usize> = set.iter().copied().collect();
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let table = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.d(i, j).clone())
            .collect();
        let backend = match &self.backend {
            Backend::Matrix => Backend::Matrix,
            Backend::Cloud { points, norm } => Backend::Cloud {
                points: idx.iter().map(|&i| points[i].clone()).collect(),
                norm: *norm,
            },
        };
        Ok(FiniteMetricSpace { labels, backend, table })
    }

    /// The same points with every distance multiplied by `c > 0`.
    pub fn scaled(&self, c: &Rational) -> FiniteMetricSpace {
        let table = self.table.iter().map(|v| v.scale(c).expect("positive scale")).collect();
        let backend = match &self.backend {
            Backend::Matrix => Backend::Matrix,
            Backend::Cloud { points, norm } => Backend::Cloud {
                points: points.iter().map(|p| p.iter().map(|x| x * c).collect()).collect(),
                norm: *norm,
            },
        };
        FiniteMetricSpace { labels: self.labels.clone(), backend, table }
    }
}

pub fn numbered_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricViolation {
    NonzeroDiagonal { point: String },
    ZeroDistance { x: String, y: String },
    Asymmetric { x: String, y: String },
    Triangle { x: String, y: String, z: String },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::NonzeroDiagonal { point } => write!(f, "d({point},{point}) != 0"),
            MetricViolation::ZeroDistance { x, y } => write!(f, "d({x},{y}) = 0 for distinct points"),
            MetricViolation::Asymmetric { x, y } => write!(f, "d({x},{y}) != d({y},{x})"),
            MetricViolation::Triangle { x, y, z } => {
                write!(f, "d({x},{z}) > d({x},{y}) + d({y},{z})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<MetricViolation>,
    /// Set when some entry is irrational; the triangle inequality is then
    /// not checked at all.
    pub triangle_skipped: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the metric axioms. Cloud spaces satisfy them by construction, but
/// are checked the same way.
pub fn validate_metric(space: &FiniteMetricSpace) -> ValidationReport {
    let n = space.len();
    let mut report = ValidationReport::default();
    let lab = |i: usize| space.label(i).to_string();
    for i in 0..n {
        if !space.d(i, i).is_zero() {
            report.violations.push(MetricViolation::NonzeroDiagonal { point: lab(i) });
        }
        for j in i + 1..n {
            if space.d(i, j) != space.d(j, i) {
                report.violations.push(MetricViolation::Asymmetric { x: lab(i), y: lab(j) });
            }
            if space.d(i, j).is_zero() || space.d(j, i).is_zero() {
                report.violations.push(MetricViolation::ZeroDistance { x: lab(i), y: lab(j) });
            }
        }
    }
    let rational: Option<Vec<Option<Rational>>> = match space.backend() {
        Backend::Cloud { .. } => None,
        Backend::Matrix => {
            let entries: Vec<Option<Rational>> = (0..n * n)
                .map(|k| space.d(k / n, k % n))
                .map(|v| if v.is_infinite() { None } else { v.as_rational() })
                .collect();
            if entries.iter().any(Option::is_none) {
                report.triangle_skipped = true;
                log::info!("triangle check skipped (irrational entries)");
                None
            } else {
                Some(entries)
            }
        }
    };
    if let Some(entries) = rational {
        let e = |i: usize, j: usize| entries[i * n + j].as_ref().expect("rational entry");
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if e(i, k) > &(e(i, j) + e(j, k)) {
                        report.violations.push(MetricViolation::Triangle {
                            x: lab(i),
                            y: lab(j),
                            z: lab(k),
                        });
                    }
                }
            }
        }
    }
    report
}

/// One coordinate of a [`SliceSpace`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Axis {
    Line,
    /// Closed interval `[lo, hi]` with `lo < hi`.
    Interval(Rational, Rational),
    Point(Rational),
}

impl Axis {
    pub fn interval(lo: Rational, hi: Rational) -> Result<Axis, SpaceError> {
        if lo < hi {
            Ok(Axis::Interval(lo, hi))
        } else if lo == hi {
            Ok(Axis::Point(lo))
        } else {
            Err(SpaceError::BadInterval(format_rational(&lo), format_rational(&hi)))
        }
    }

    pub fn is_free(&self) -> bool {
        !matches!(self, Axis::Point(_))
    }

    pub fn contains(&self, t: &Rational) -> bool {
        match self {
            Axis::Line => true,
            Axis::Interval(lo, hi) => lo <= t && t <= hi,
            Axis::Point(c) => c == t,
        }
    }

    /// Lower and upper bounds, `None` for an unbounded side.
    pub fn bounds(&self) -> (Option<&Rational>, Option<&Rational>) {
        match self {
            Axis::Line => (None, None),
            Axis::Interval(lo, hi) => (Some(lo), Some(hi)),
            Axis::Point(c) => (Some(c), Some(c)),
        }
    }

    pub fn is_subset_of(&self, other: &Axis) -> bool {
        match self.bounds() {
            (Some(lo), Some(hi)) => other.contains(lo) && other.contains(hi),
            _ => matches!(other, Axis::Line),
        }
    }

    pub fn scaled(&self, c: &Rational) -> Axis {
        match self {
            Axis::Line => Axis::Line,
            Axis::Interval(lo, hi) => {
                let (a, b) = (lo * c, hi * c);
                if a < b { Axis::Interval(a, b) } else { Axis::Interval(b, a) }
            }
            Axis::Point(p) => Axis::Point(p * c),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Line => f.write_str("R"),
            Axis::Interval(lo, hi) => write!(f, "[{},{}]", format_rational(lo), format_rational(hi)),
            Axis::Point(c) => write!(f, "{{{}}}", format_rational(c)),
        }
    }
}

/// An axis-aligned affine slice of `Q^n` with a norm: each coordinate is a
/// full line, a closed interval, or fixed.
///
/// Slices double as closed subsets (boxes) of larger slices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SliceSpace {
    axes: Vec<Axis>,
    norm: Norm,
}

impl SliceSpace {
    pub fn new(axes: Vec<Axis>, norm: Norm) -> Self {
        Self { axes, norm }
    }

    /// `R^n` with the given norm.
    pub fn full(n: usize, norm: Norm) -> Self {
        Self::new(vec![Axis::Line; n], norm)
    }

    /// Closed box `prod [lo_i, hi_i]`; equal bounds give fixed coordinates.
    pub fn closed_box(bounds: Vec<(Rational, Rational)>, norm: Norm) -> Result<Self, SpaceError> {
        let axes = bounds
            .into_iter()
            .map(|(lo, hi)| Axis::interval(lo, hi))
            .collect::<Result<_, _>>()?;
        Ok(Self::new(axes, norm))
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn free_axes(&self) -> impl Iterator<Item = usize> + '_ {
        self.axes.iter().enumerate().filter(|(_, a)| a.is_free()).map(|(i, _)| i)
    }

    pub fn is_bounded(&self) -> bool {
        self.axes.iter().all(|a| !matches!(a, Axis::Line))
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim() && self.axes.iter().zip(x).all(|(a, t)| a.contains(t))
    }

    pub fn check_point(&self, x: &[Rational]) -> Result<(), SpaceError> {
        if x.len() != self.dim() {
            return Err(SpaceError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        if !self.contains(x) {
            return Err(SpaceError::OutsideSlice(format_point(x)));
        }
        Ok(())
    }

    pub fn is_subset_of(&self, other: &SliceSpace) -> bool {
        self.dim() == other.dim()
            && self.axes.iter().zip(&other.axes).all(|(a, b)| a.is_subset_of(b))
    }

    pub fn distance(&self, p: &[Rational], q: &[Rational]) -> Result<Value, SpaceError> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.norm.distance(p, q))
    }

    /// Closed bounds of a bounded slice.
    pub fn box_bounds(&self) -> Option<Vec<(Rational, Rational)>> {
        self.axes
            .iter()
            .map(|a| match a.bounds() {
                (Some(lo), Some(hi)) => Some((lo.clone(), hi.clone())),
                _ => None,
            })
            .collect()
    }

    /// Some point of the slice (the centre of bounded coordinates, zero on
    /// lines).
    pub fn sample_point(&self) -> Vec<Rational> {
        self.axes
            .iter()
            .map(|a| match a {
                Axis::Line => Rational::zero(),
                Axis::Interval(lo, hi) => (lo + hi) / Rational::from_integer(2.into()),
                Axis::Point(c) => c.clone(),
            })
            .collect()
    }
}

pub fn format_point(x: &[Rational]) -> String {
    let parts: Vec<String> = x.iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}

impl fmt::Display for SliceSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.axes.iter().map(Axis::to_string).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Parses the compact slice notation: factors separated by `x`, each one of
/// `R`, `Rk`, `R^k`, `[a,b]`, `{c}`, optionally followed by `^k`.
///
/// `R2x{0}` is the plane `z = 0` in `R^3`; `[0,1]^2x{0}` the unit square in it.
/// The norm defaults to Euclidean.
impl FromStr for SliceSpace {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |m: &str| SpaceError::SliceSyntax(s.to_string(), m.to_string());
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let chars: Vec<char> = text.chars().collect();
        let mut axes = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let (axis, next) = match chars[i] {
                'R' => (Axis::Line, i + 1),
                '[' => {
                    let close = chars[i..].iter().position(|&c| c == ']').ok_or_else(|| err("unclosed ["))? + i;
                    let inner: String = chars[i + 1..close].iter().collect();
                    let (a, b) = inner.split_once(',').ok_or_else(|| err("interval needs a comma"))?;
                    let lo = parse_rational(a).map_err(|_| err("bad interval bound"))?;
                    let hi = parse_rational(b).map_err(|_| err("bad interval bound"))?;
                    (Axis::interval(lo, hi)?, close + 1)
                }
                '{' => {
                    let close = chars[i..].iter().position(|&c| c == '}').ok_or_else(|| err("unclosed {"))? + i;
                    let inner: String = chars[i + 1..close].iter().collect();
                    (Axis::Point(parse_rational(&inner).map_err(|_| err("bad point"))?), close + 1)
                }
                c => return Err(err(&format!("unexpected character {c:?}"))),
            };
            i = next;
            let mut count = 1usize;
            let starts_power = i < chars.len() && chars[i] == '^';
            let bare_digits = matches!(axis, Axis::Line) && i < chars.len() && chars[i].is_ascii_digit();
            if starts_power || bare_digits {
                if starts_power {
                    i += 1;
                }
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                count = digits.parse().map_err(|_| err("bad exponent"))?;
            }
            axes.extend(std::iter::repeat_n(axis, count));
            if i < chars.len() {
                if chars[i] != 'x' {
                    return Err(err("factors must be separated by 'x'"));
                }
                i += 1;
                if i == chars.len() {
                    return Err(err("trailing 'x'"));
                }
            }
        }
        if axes.is_empty() {
            return Err(err("no factors"));
        }
        Ok(SliceSpace::new(axes, Norm::Euclidean))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::q;

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn triangle_violation_is_reported() {
        let rows = vec![
            vec![v("0"), v("1"), v("3")],
            vec![v("1"), v("0"), v("1")],
            vec![v("3"), v("1"), v("0")],
        ];
        let s = FiniteMetricSpace::from_matrix(labels(&["1", "2", "3"]), rows).unwrap();
        let report = validate_metric(&s);
        assert!(report.violations.contains(&MetricViolation::Triangle {
            x: "1".into(),
            y: "2".into(),
            z: "3".into()
        }));
        assert!(!report.triangle_skipped);
    }

    #[test]
    fn two_point_cloud_is_valid() {
        let s = FiniteMetricSpace::from_cloud(
            labels(&["a", "b"]),
            vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(1, 1)]],
            Norm::Euclidean,
        )
        .unwrap();
        assert!(validate_metric(&s).is_valid());
        assert_eq!(s.distance("a", "b").unwrap(), &v("sqrt(2)"));
    }

    #[test]
    fn asymmetry_is_reported_with_witness() {
        let rows = vec![vec![v("0"), v("1")], vec![v("2"), v("0")]];
        let s = FiniteMetricSpace::from_matrix(labels(&["a", "b"]), rows).unwrap();
        let report = validate_metric(&s);
        assert!(report
            .violations
            .contains(&MetricViolation::Asymmetric { x: "a".into(), y: "b".into() }));
    }

    #[test]
    fn irrational_entries_skip_triangle_check() {
        let rows = vec![
            vec![v("0"), v("sqrt(2)"), v("5")],
            vec![v("sqrt(2)"), v("0"), v("1")],
            vec![v("5"), v("1"), v("0")],
        ];
        let s = FiniteMetricSpace::from_matrix(labels(&["a", "b", "c"]), rows).unwrap();
        let report = validate_metric(&s);
        assert!(report.triangle_skipped);
        assert!(report.is_valid());
    }

    #[test]
    fn zero_and_diagonal_violations() {
        let rows = vec![vec![v("1"), v("0")], vec![v("0"), v("0")]];
        let s = FiniteMetricSpace::from_matrix(labels(&["a", "b"]), rows).unwrap();
        let r = validate_metric(&s);
        assert!(r.violations.contains(&MetricViolation::NonzeroDiagonal { point: "a".into() }));
        assert!(r.violations.contains(&MetricViolation::ZeroDistance { x: "a".into(), y: "b".into() }));
    }

    #[test]
    fn distances() {
        let d = FiniteMetricSpace::discrete(4);
        assert_eq!(d.distance("0", "1").unwrap(), &Value::one());
        let c = FiniteMetricSpace::from_cloud(
            labels(&["p", "q"]),
            vec![vec![q(0, 1); 3], vec![q(1, 1), q(1, 1), q(1, 4)]],
            Norm::Euclidean,
        )
        .unwrap();
        assert_eq!(c.distance("p", "q").unwrap(), &v("sqrt(33/16)"));
        let plane: SliceSpace = "R2x{0}".parse().unwrap();
        let dist = plane
            .distance(&[q(0, 1), q(0, 1), q(0, 1)], &[q(1, 1), q(1, 1), q(0, 1)])
            .unwrap();
        assert_eq!(dist, v("sqrt(2)"));
        assert!(plane.distance(&[q(0, 1), q(0, 1), q(1, 1)], &vec![q(0, 1); 3]).is_err());
        assert!(d.distance("0", "zz").is_err());
    }

    #[test]
    fn other_norms() {
        let p = [q(0, 1), q(0, 1)];
        let r = [q(3, 1), q(-4, 1)];
        assert_eq!(Norm::Euclidean.distance(&p, &r), v("5"));
        assert_eq!(Norm::Linf.distance(&p, &r), v("4"));
        assert_eq!(Norm::L1.distance(&p, &r), v("7"));
    }

    #[test]
    fn induced_subspaces() {
        let d = FiniteMetricSpace::discrete(4);
        assert_eq!(d.induced_subspace(&d.all_points()).unwrap(), d);
        let ab = d.induced_subspace(&[0, 1].into()).unwrap();
        assert_eq!(ab.len(), 2);
        assert_eq!(ab.labels(), &["0".to_string(), "1".to_string()]);
        assert_eq!(ab.d(0, 1), &Value::one());
        assert!(d.induced_subspace(&PointSet::new()).is_err());

        let path = FiniteMetricSpace::path(3);
        let ends = path.induced_subspace(&[0, 2].into()).unwrap();
        assert_eq!(ends.len(), 2);
        assert_eq!(ends.d(0, 1), &v("2"));
        assert!(validate_metric(&ends).is_valid());
    }

    #[test]
    fn slice_notation() {
        let s: SliceSpace = "R2x{0}".parse().unwrap();
        assert_eq!(s.axes(), &[Axis::Line, Axis::Line, Axis::Point(q(0, 1))]);
        let a: SliceSpace = "[0,1]^2x{0}".parse().unwrap();
        assert_eq!(a.dim(), 3);
        assert!(a.is_subset_of(&s));
        assert!(!s.is_subset_of(&a));
        assert_eq!(a.to_string(), "[0,1]x[0,1]x{0}");
        let r3: SliceSpace = "R^3".parse().unwrap();
        assert_eq!(r3, SliceSpace::full(3, Norm::Euclidean));
        assert!("R2y".parse::<SliceSpace>().is_err());
        assert!("[1,0]".parse::<SliceSpace>().is_err());
        assert_eq!("[1/2,1/2]".parse::<SliceSpace>().unwrap().axes(), &[Axis::Point(q(1, 2))]);
    }
}
