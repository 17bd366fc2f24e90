//! Quasi-homothetic maps and the transport of meshes and Lebesgue numbers.
//!
//! A map `h` is `λ`-quasi-homothetic with coefficient `R` when
//! `(R/λ) d(a, b) <= d'(h a, h b) <= λR d(a, b)`. Everything here works with
//! `λ²` and `R²` so that all comparisons stay rational.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::boxlab::{self, BoxError};
use crate::cover::{self, BoxFamily, CoverError, FiniteFamily, Member, OpenBox, OpenInterval};
use crate::lebesgue::{self, LebesgueError};
use crate::space::{format_point, Axis, FiniteMetricSpace, Norm, PointSet, SliceSpace, SpaceError};
use crate::value::{format_rational, Rational, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomothetyError {
    #[error("lambda^2 must be at least 1, got {0}")]
    BadLambda(String),
    #[error("R^2 must be positive, got {0}")]
    BadCoefficient(String),
    #[error("map has {got} images for a domain of {expected} points")]
    MapLength { expected: usize, got: usize },
    #[error("image index {0} is outside the codomain")]
    MapOutOfRange(usize),
    #[error("inclusion of dimension {domain} into {codomain} needs domain <= codomain")]
    BadInclusion { domain: usize, codomain: usize },
    #[error("inclusion scale must be positive, got {0}")]
    BadScale(String),
    #[error("map is not injective: {0} and {1} have the same image")]
    NotInjective(String, String),
    #[error("need at least two domain points")]
    TooFewPoints,
    #[error("instance fails the quasi-homothety inequalities")]
    Unverified,
    #[error("family and subset do not match the map kind")]
    KindMismatch,
    #[error("family does not cover h(V) in the {ambient} ambient: {detail}")]
    NotCovering { ambient: AmbientMode, detail: String },
    #[error(transparent)]
    Lebesgue(LebesgueError),
    #[error(transparent)]
    Box(BoxError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomothetyMap {
    /// Point correspondence `i -> map[i]` between finite spaces.
    Explicit { domain: FiniteMetricSpace, codomain: FiniteMetricSpace, map: Vec<usize> },
    /// `x -> scale * (x, 0, ..., 0)` from `Q^domain_dim` into `Q^codomain_dim`.
    Inclusion { domain_dim: usize, codomain_dim: usize, scale: Rational, norm: Norm },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomothetyInstance {
    pub map: HomothetyMap,
    pub lambda_sq: Rational,
    pub r_sq: Rational,
}

impl HomothetyInstance {
    pub fn new(map: HomothetyMap, lambda_sq: Rational, r_sq: Rational) -> Result<Self, HomothetyError> {
        if lambda_sq < Rational::one() {
            return Err(HomothetyError::BadLambda(format_rational(&lambda_sq)));
        }
        if !r_sq.is_positive() {
            return Err(HomothetyError::BadCoefficient(format_rational(&r_sq)));
        }
        match &map {
            HomothetyMap::Explicit { domain, codomain, map } => {
                if map.len() != domain.len() {
                    return Err(HomothetyError::MapLength { expected: domain.len(), got: map.len() });
                }
                if let Some(&j) = map.iter().find(|&&j| j >= codomain.len()) {
                    return Err(HomothetyError::MapOutOfRange(j));
                }
            }
            HomothetyMap::Inclusion { domain_dim, codomain_dim, scale, .. } => {
                if domain_dim > codomain_dim {
                    return Err(HomothetyError::BadInclusion { domain: *domain_dim, codomain: *codomain_dim });
                }
                if !scale.is_positive() {
                    return Err(HomothetyError::BadScale(format_rational(scale)));
                }
            }
        }
        Ok(Self { map, lambda_sq, r_sq })
    }

    /// Coordinate inclusion `Q^n -> Q^m` with `λ = R = 1`.
    pub fn inclusion(domain_dim: usize, codomain_dim: usize, norm: Norm) -> Result<Self, HomothetyError> {
        let map = HomothetyMap::Inclusion { domain_dim, codomain_dim, scale: Rational::one(), norm };
        Self::new(map, Rational::one(), Rational::one())
    }

    pub fn lower_factor_sq(&self) -> Rational {
        &self.r_sq / &self.lambda_sq
    }

    pub fn upper_factor_sq(&self) -> Rational {
        &self.r_sq * &self.lambda_sq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// Pair violating one of the two inequalities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorstPair {
    pub a: String,
    pub b: String,
    pub side: Side,
    /// Factor by which the violated bound is exceeded; infinite for a
    /// collapsed pair.
    pub excess: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub holds: bool,
    pub injective: bool,
    pub worst: Option<WorstPair>,
}

/// Violated side and excess factor for squared distances `d_sq`, `e_sq`; `None`
/// when both bounds hold. `Value::Infinite` marks a collapsed pair.
fn pair_excess(d_sq: &Rational, e_sq: &Rational, lower: &Rational, upper: &Rational) -> Option<(Side, Value)> {
    let lo = lower * d_sq;
    if e_sq < &lo {
        let excess = if e_sq.is_zero() { Value::Infinite } else { Value::sqrt(&lo / e_sq).expect("positive") };
        return Some((Side::Lower, excess));
    }
    let hi = upper * d_sq;
    if e_sq > &hi {
        return Some((Side::Upper, Value::sqrt(e_sq / &hi).expect("positive")));
    }
    None
}

fn radicand(v: &Value) -> Rational {
    v.radicand().cloned().expect("finite distance")
}

/// Checks both inequalities on every pair; the worst violation is the one
/// with the largest excess, ties going to the lexicographically first pair.
pub fn verify_homothety(h: &HomothetyInstance) -> Verification {
    let (lower, upper) = (h.lower_factor_sq(), h.upper_factor_sq());
    match &h.map {
        HomothetyMap::Explicit { domain, codomain, map } => {
            let n = domain.len();
            let injective = (0..n).all(|i| (i + 1..n).all(|j| map[i] != map[j]));
            let worst = (0..n)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let (lower, upper) = (&lower, &upper);
                    (i + 1..n).filter_map(move |j| {
                        let d_sq = radicand(domain.d(i, j));
                        let e_sq = radicand(codomain.d(map[i], map[j]));
                        pair_excess(&d_sq, &e_sq, lower, upper).map(|(side, excess)| (i, j, side, excess))
                    })
                })
                .reduce_with(|x, y| if y.3 > x.3 || (y.3 == x.3 && (y.0, y.1) < (x.0, x.1)) { y } else { x });
            Verification {
                holds: worst.is_none(),
                injective,
                worst: worst.map(|(i, j, side, excess)| WorstPair {
                    a: domain.label(i).to_string(),
                    b: domain.label(j).to_string(),
                    side,
                    excess,
                }),
            }
        }
        HomothetyMap::Inclusion { domain_dim, scale, .. } => {
            // every pair has distance ratio exactly `scale`
            let scale_sq = scale * scale;
            let worst = (*domain_dim > 0)
                .then(|| pair_excess(&Rational::one(), &scale_sq, &lower, &upper))
                .flatten()
                .map(|(side, excess)| {
                    let origin = vec![Rational::zero(); *domain_dim];
                    let mut e1 = origin.clone();
                    e1[0] = Rational::one();
                    WorstPair { a: format_point(&origin), b: format_point(&e1), side, excess }
                });
            Verification { holds: worst.is_none(), injective: true, worst }
        }
    }
}

/// Minimal `λ²` for a finite map and the squared distance-ratio range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fit {
    /// `sqrt(ρ²_max / ρ²_min)`.
    pub lambda_sq: Value,
    #[serde(with = "crate::value::rational_str")]
    pub rho_sq_min: Rational,
    #[serde(with = "crate::value::rational_str")]
    pub rho_sq_max: Rational,
}

impl Fit {
    /// Feasible `R²` interval `[ρ²_max/λ², λ² ρ²_min]` at a rational `λ²`;
    /// `None` when empty.
    pub fn r_sq_interval(&self, lambda_sq: &Rational) -> Option<(Rational, Rational)> {
        let lo = &self.rho_sq_max / lambda_sq;
        let hi = lambda_sq * &self.rho_sq_min;
        (lo <= hi).then_some((lo, hi))
    }

    /// Smallest `k/den` with `(k/den)² >= ρ²_max / ρ²_min`, a rational `λ²`
    /// at which the interval is nonempty.
    pub fn rational_lambda_sq(&self, den: u32) -> Rational {
        let t = &self.rho_sq_max / &self.rho_sq_min;
        let den = BigInt::from(den);
        let scaled = &t * Rational::from_integer(&den * &den);
        let mut k = scaled.ceil().to_integer().sqrt();
        while Rational::from_integer(&k * &k) < scaled {
            k += 1;
        }
        Rational::new(k, den)
    }
}

/// Fits the tightest `λ` to an injective finite map.
pub fn fit_homothety(
    domain: &FiniteMetricSpace,
    codomain: &FiniteMetricSpace,
    map: &[usize],
) -> Result<Fit, HomothetyError> {
    if map.len() != domain.len() {
        return Err(HomothetyError::MapLength { expected: domain.len(), got: map.len() });
    }
    if let Some(&j) = map.iter().find(|&&j| j >= codomain.len()) {
        return Err(HomothetyError::MapOutOfRange(j));
    }
    if domain.len() < 2 {
        return Err(HomothetyError::TooFewPoints);
    }
    let mut range: Option<(Rational, Rational)> = None;
    for i in 0..domain.len() {
        for j in i + 1..domain.len() {
            if map[i] == map[j] {
                return Err(HomothetyError::NotInjective(domain.label(i).into(), domain.label(j).into()));
            }
            let rho = radicand(codomain.d(map[i], map[j])) / radicand(domain.d(i, j));
            range = Some(match range {
                None => (rho.clone(), rho),
                Some((lo, hi)) => (lo.min(rho.clone()), hi.max(rho)),
            });
        }
    }
    let (rho_sq_min, rho_sq_max) = range.expect("at least one pair");
    let lambda_sq = Value::sqrt(&rho_sq_max / &rho_sq_min).expect("positive ratio");
    Ok(Fit { lambda_sq, rho_sq_min, rho_sq_max })
}

fn preimage_name(name: &str) -> String {
    format!("h⁻¹({name})")
}

/// Preimages of codomain point sets, empty ones dropped.
pub fn pullback_finite(h: &HomothetyInstance, f: &FiniteFamily) -> Result<(FiniteFamily, Vec<String>), HomothetyError> {
    let HomothetyMap::Explicit { map, .. } = &h.map else {
        return Err(HomothetyError::KindMismatch);
    };
    let mut members = Vec::new();
    let mut dropped = Vec::new();
    for m in f.iter() {
        let set: PointSet = (0..map.len()).filter(|&i| m.set.contains(&map[i])).collect();
        if set.is_empty() {
            log::info!("pullback drops member {} (disjoint from the image)", m.name);
            dropped.push(m.name.clone());
        } else {
            members.push(Member::new(preimage_name(&m.name), set));
        }
    }
    Ok((FiniteFamily::new(members), dropped))
}

/// Images of domain point sets in the codomain.
pub fn push_forward_finite(h: &HomothetyInstance, f: &FiniteFamily) -> Result<FiniteFamily, HomothetyError> {
    let HomothetyMap::Explicit { map, .. } = &h.map else {
        return Err(HomothetyError::KindMismatch);
    };
    Ok(FiniteFamily::new(
        f.iter().map(|m| Member::new(m.name.clone(), m.set.iter().map(|&i| map[i]).collect())).collect(),
    ))
}

/// Preimages of codomain boxes under a coordinate inclusion: boxes missing
/// the image hyperplane are dropped, the rest are projected and unscaled.
pub fn pullback_boxes(h: &HomothetyInstance, f: &BoxFamily) -> Result<(BoxFamily, Vec<String>), HomothetyError> {
    let HomothetyMap::Inclusion { domain_dim, codomain_dim, scale, .. } = &h.map else {
        return Err(HomothetyError::KindMismatch);
    };
    let inv = Rational::one() / scale;
    let mut members = Vec::new();
    let mut dropped = Vec::new();
    for m in f.iter() {
        if m.set.dim() != *codomain_dim {
            return Err(CoverError::MemberDimension { member: m.name.clone(), expected: *codomain_dim, got: m.set.dim() }.into());
        }
        let sides = m.set.sides();
        let preimage: Vec<OpenInterval> = sides[..*domain_dim].iter().map(|s| s.scaled(&inv)).collect();
        let meets = sides[*domain_dim..].iter().all(|s| s.contains(&Rational::zero()))
            && preimage.iter().all(|s| !s.is_empty());
        if meets {
            members.push(Member::new(preimage_name(&m.name), OpenBox(preimage)));
        } else {
            log::info!("pullback drops member {} (disjoint from the image)", m.name);
            dropped.push(m.name.clone());
        }
    }
    Ok((BoxFamily::new(members), dropped))
}

/// `h(Z)` with the induced metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageSpace {
    /// Subspace of the codomain on the image points, listed in `points`
    /// (codomain indices, ascending).
    Finite { space: FiniteMetricSpace, points: Vec<usize> },
    Slice(SliceSpace),
}

pub fn image_space(h: &HomothetyInstance) -> Result<ImageSpace, HomothetyError> {
    if !verify_homothety(h).holds {
        return Err(HomothetyError::Unverified);
    }
    Ok(match &h.map {
        HomothetyMap::Explicit { codomain, map, .. } => {
            let image: PointSet = map.iter().copied().collect();
            ImageSpace::Finite { space: codomain.induced_subspace(&image)?, points: image.into_iter().collect() }
        }
        HomothetyMap::Inclusion { domain_dim, codomain_dim, norm, .. } => {
            let mut axes = vec![Axis::Line; *domain_dim];
            axes.extend(std::iter::repeat_n(Axis::Point(Rational::zero()), codomain_dim - domain_dim));
            ImageSpace::Slice(SliceSpace::new(axes, *norm))
        }
    })
}

/// `h(V)` for a box `V` in the domain.
pub fn image_of_box(h: &HomothetyInstance, v: &SliceSpace) -> Result<SliceSpace, HomothetyError> {
    let HomothetyMap::Inclusion { domain_dim, codomain_dim, scale, norm } = &h.map else {
        return Err(HomothetyError::KindMismatch);
    };
    if v.dim() != *domain_dim {
        return Err(SpaceError::DimensionMismatch { expected: *domain_dim, got: v.dim() }.into());
    }
    let mut axes: Vec<Axis> = v.axes().iter().map(|a| a.scaled(scale)).collect();
    axes.extend(std::iter::repeat_n(Axis::Point(Rational::zero()), codomain_dim - domain_dim));
    Ok(SliceSpace::new(axes, *norm))
}

/// Ambient in which the codomain family is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbientMode {
    /// The image `h(Z)`.
    Image,
    /// The whole codomain `Z'`.
    Codomain,
}

impl fmt::Display for AmbientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AmbientMode::Image => "image",
            AmbientMode::Codomain => "codomain",
        })
    }
}

/// Subset `V` of the domain and family over the codomain.
#[derive(Debug, Clone)]
pub enum TransportInput {
    Finite { v: PointSet, family: FiniteFamily },
    Boxes { v: SliceSpace, family: BoxFamily },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: Value,
    pub rhs: Value,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransportReport {
    pub ambient: AmbientMode,
    pub mesh_domain: Value,
    pub mesh_codomain: Value,
    pub lebesgue_domain: Value,
    pub lebesgue_codomain: Value,
    /// `(R/λ)²`.
    #[serde(with = "crate::value::rational_str")]
    pub lower_factor_sq: Rational,
    /// `(λR)²`.
    #[serde(with = "crate::value::rational_str")]
    pub upper_factor_sq: Rational,
    pub inequalities: Vec<Inequality>,
    pub dropped: Vec<String>,
}

impl TransportReport {
    pub fn all_hold(&self) -> bool {
        self.inequalities.iter().all(|i| i.holds)
    }

    fn build(
        ambient: AmbientMode,
        h: &HomothetyInstance,
        mesh: (Value, Value),
        leb: (Value, Value),
        dropped: Vec<String>,
    ) -> Self {
        let (lower, upper) = (h.lower_factor_sq(), h.upper_factor_sq());
        let scaled = |v: &Value, c: &Rational| v.scale_sqrt(c).expect("positive factor");
        let ineq = |name, lhs: Value, rhs: Value| {
            let holds = lhs <= rhs;
            Inequality { name, lhs, rhs, holds }
        };
        let inequalities = vec![
            ineq("mesh lower", scaled(&mesh.0, &lower), mesh.1.clone()),
            ineq("mesh upper", mesh.1.clone(), scaled(&mesh.0, &upper)),
            ineq("lebesgue lower", scaled(&leb.0, &lower), leb.1.clone()),
            ineq("lebesgue upper", leb.1.clone(), scaled(&leb.0, &upper)),
        ];
        TransportReport {
            ambient,
            mesh_domain: mesh.0,
            mesh_codomain: mesh.1,
            lebesgue_domain: leb.0,
            lebesgue_codomain: leb.1,
            lower_factor_sq: lower,
            upper_factor_sq: upper,
            inequalities,
            dropped,
        }
    }
}

fn not_covering_finite(ambient: AmbientMode, e: LebesgueError) -> HomothetyError {
    match e {
        LebesgueError::NotCovering { label, .. } => {
            HomothetyError::NotCovering { ambient, detail: format!("point {label} lies in no member") }
        }
        other => HomothetyError::Lebesgue(other),
    }
}

fn not_covering_box(ambient: AmbientMode, e: BoxError) -> HomothetyError {
    match e {
        BoxError::NotCovering { witness } => {
            HomothetyError::NotCovering { ambient, detail: format!("{} lies in no member", format_point(&witness)) }
        }
        other => HomothetyError::Box(other),
    }
}

/// Computes `mesh U`, `mesh Ũ`, `L_Z(U, V)` and `L(Ũ, h(V))` with
/// `U = h⁻¹(Ũ)`, reading `Ũ` in the chosen ambient, and evaluates the four
/// transport inequalities.
pub fn transport_lemma_check(
    h: &HomothetyInstance,
    input: &TransportInput,
    mode: AmbientMode,
) -> Result<TransportReport, HomothetyError> {
    match (&h.map, input) {
        (HomothetyMap::Explicit { domain, codomain, map }, TransportInput::Finite { v, family }) => {
            family.check_ambient(codomain)?;
            if let Some(&i) = v.iter().find(|&&i| i >= domain.len()) {
                return Err(CoverError::SubsetOutsideAmbient(i).into());
            }
            let (pulled, dropped) = pullback_finite(h, family)?;
            let leb_domain = lebesgue::lebesgue_relative(domain, &pulled, v)
                .map_err(|e| not_covering_finite(mode, e))?
                .value;
            let mesh_domain = cover::mesh(domain, &pulled);
            let hv: PointSet = v.iter().map(|&i| map[i]).collect();
            let (mesh_codomain, leb_codomain) = match mode {
                AmbientMode::Codomain => {
                    let l = lebesgue::lebesgue_relative(codomain, family, &hv).map_err(|e| not_covering_finite(mode, e))?;
                    (cover::mesh(codomain, family), l.value)
                }
                AmbientMode::Image => {
                    let image: PointSet = map.iter().copied().collect();
                    let r = cover::restrict(codomain, family, &image)?;
                    let hv_local = r.map_subset(&hv).expect("h(V) lies in h(Z)");
                    let l = lebesgue::lebesgue_relative(&r.space, &r.family, &hv_local)
                        .map_err(|e| not_covering_finite(mode, e))?;
                    (cover::mesh(&r.space, &r.family), l.value)
                }
            };
            Ok(TransportReport::build(mode, h, (mesh_domain, mesh_codomain), (leb_domain, leb_codomain), dropped))
        }
        (HomothetyMap::Inclusion { domain_dim, codomain_dim, norm, .. }, TransportInput::Boxes { v, family }) => {
            let domain = SliceSpace::full(*domain_dim, *norm);
            let codomain = SliceSpace::full(*codomain_dim, *norm);
            cover::check_box_family(&codomain, family)?;
            let (pulled, dropped) = pullback_boxes(h, family)?;
            let leb_domain = boxlab::box_lebesgue_relative(&domain, &pulled, v)
                .map_err(|e| not_covering_box(mode, e))?
                .value;
            let mesh_domain = boxlab::box_mesh(&domain, &pulled);
            let hv = image_of_box(h, v)?;
            let ambient = match mode {
                AmbientMode::Codomain => codomain,
                AmbientMode::Image => match image_space(h)? {
                    ImageSpace::Slice(s) => s,
                    ImageSpace::Finite { .. } => unreachable!("inclusion has a slice image"),
                },
            };
            let leb_codomain = boxlab::box_lebesgue_relative(&ambient, family, &hv)
                .map_err(|e| not_covering_box(mode, e))?
                .value;
            let mesh_codomain = boxlab::box_mesh(&ambient, family);
            Ok(TransportReport::build(mode, h, (mesh_domain, mesh_codomain), (leb_domain, leb_codomain), dropped))
        }
        _ => Err(HomothetyError::KindMismatch),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::q;

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    fn plane_example() -> (HomothetyInstance, TransportInput) {
        let h = HomothetyInstance::inclusion(2, 3, Norm::Euclidean).unwrap();
        let family = BoxFamily::new(vec![
            Member::new(
                "U1",
                OpenBox::from_bounds(vec![(q(-1, 4), q(3, 4)), (q(-1, 4), q(5, 4)), (q(-1, 8), q(1, 8))]),
            ),
            Member::new(
                "U2",
                OpenBox::from_bounds(vec![(q(1, 4), q(5, 4)), (q(-1, 4), q(5, 4)), (q(-1, 8), q(1, 8))]),
            ),
        ]);
        let square: SliceSpace = "[0,1]^2".parse().unwrap();
        (h, TransportInput::Boxes { v: square, family })
    }

    /// Points 0, 1, 3 on a line mapped to 0, 1, 5: ratios 1, 2 and 5/3.
    fn three_point_map() -> (FiniteMetricSpace, FiniteMetricSpace, Vec<usize>) {
        let line = |xs: &[i64]| {
            let pts: Vec<Vec<Rational>> = xs.iter().map(|&x| vec![q(x, 1)]).collect();
            FiniteMetricSpace::from_cloud(crate::space::numbered_labels(xs.len()), pts, Norm::Euclidean).unwrap()
        };
        (line(&[0, 1, 3]), line(&[0, 1, 5]), vec![0, 1, 2])
    }

    #[test]
    fn inclusion_is_an_isometry() {
        let (h, _) = plane_example();
        let ver = verify_homothety(&h);
        assert!(ver.holds && ver.injective);
        let scaled = HomothetyInstance::new(
            HomothetyMap::Inclusion { domain_dim: 2, codomain_dim: 3, scale: q(2, 1), norm: Norm::Euclidean },
            q(1, 1),
            q(1, 1),
        )
        .unwrap();
        let w = verify_homothety(&scaled).worst.unwrap();
        assert_eq!((w.side, w.excess), (Side::Upper, v("2")));
        assert_eq!(image_space(&h).unwrap(), ImageSpace::Slice("R2x{0}".parse().unwrap()));
    }

    #[test]
    fn dilation_and_collapse() {
        let (dom, _, _) = three_point_map();
        let c = q(3, 2);
        let h = HomothetyInstance::new(
            HomothetyMap::Explicit { domain: dom.clone(), codomain: dom.scaled(&c), map: vec![0, 1, 2] },
            q(1, 1),
            &c * &c,
        )
        .unwrap();
        assert!(verify_homothety(&h).holds);
        let collapse = HomothetyInstance::new(
            HomothetyMap::Explicit { domain: dom.clone(), codomain: dom.clone(), map: vec![0, 0, 2] },
            q(1, 1),
            q(1, 1),
        )
        .unwrap();
        let ver = verify_homothety(&collapse);
        assert!(!ver.holds && !ver.injective);
        let w = ver.worst.unwrap();
        assert_eq!((w.a.as_str(), w.b.as_str(), w.excess), ("0", "1", Value::Infinite));
        assert!(matches!(fit_homothety(&dom, &dom, &[0, 0, 2]), Err(HomothetyError::NotInjective(..))));
    }

    #[test]
    fn fit_on_three_points() {
        let (dom, cod, map) = three_point_map();
        let fit = fit_homothety(&dom, &cod, &map).unwrap();
        assert_eq!(fit.lambda_sq, v("2"));
        assert_eq!(fit.r_sq_interval(&q(2, 1)), Some((q(2, 1), q(2, 1))));
        assert_eq!(fit.r_sq_interval(&q(3, 2)), None);
        let h = HomothetyInstance::new(HomothetyMap::Explicit { domain: dom, codomain: cod, map }, q(2, 1), q(2, 1)).unwrap();
        assert!(verify_homothety(&h).holds);
        let tight = HomothetyInstance { lambda_sq: q(19, 10), ..h };
        assert!(!verify_homothety(&tight).holds);
    }

    #[test]
    fn rational_lambda_bound() {
        let fit = Fit { lambda_sq: v("sqrt(2)"), rho_sq_min: q(1, 1), rho_sq_max: q(2, 1) };
        let l = fit.rational_lambda_sq(100);
        assert_eq!(l, q(142, 100));
        assert!(fit.r_sq_interval(&l).is_some());
        assert!(fit.r_sq_interval(&q(141, 100)).is_none());
    }

    #[test]
    fn pullback_projects_boxes() {
        let (h, TransportInput::Boxes { family, .. }) = plane_example() else { unreachable!() };
        let (pulled, dropped) = pullback_boxes(&h, &family).unwrap();
        assert!(dropped.is_empty());
        assert_eq!(pulled.members[0].name, "h⁻¹(U1)");
        assert_eq!(pulled.members[0].set, OpenBox::from_bounds(vec![(q(-1, 4), q(3, 4)), (q(-1, 4), q(5, 4))]));
        let off = BoxFamily::new(vec![Member::new(
            "W",
            OpenBox::from_bounds(vec![(q(0, 1), q(1, 1)), (q(0, 1), q(1, 1)), (q(1, 4), q(1, 2))]),
        )]);
        let (none, dropped) = pullback_boxes(&h, &off).unwrap();
        assert!(none.is_empty());
        assert_eq!(dropped, vec!["W".to_string()]);
    }

    #[test]
    fn codomain_ambient_breaks_two_inequalities() {
        let (h, input) = plane_example();
        let r = transport_lemma_check(&h, &input, AmbientMode::Codomain).unwrap();
        assert_eq!(r.lebesgue_domain, v("1/4"));
        assert_eq!(r.lebesgue_codomain, v("1/8"));
        assert_eq!(r.mesh_domain, v("sqrt(13/4)"));
        assert_eq!(r.mesh_codomain, v("sqrt(53/16)"));
        let verdicts: Vec<bool> = r.inequalities.iter().map(|i| i.holds).collect();
        assert_eq!(verdicts, vec![true, false, false, true]);
    }

    #[test]
    fn image_ambient_satisfies_all_four() {
        let (h, input) = plane_example();
        let r = transport_lemma_check(&h, &input, AmbientMode::Image).unwrap();
        assert!(r.all_hold());
        assert_eq!(r.lebesgue_domain, r.lebesgue_codomain);
        assert_eq!(r.mesh_domain, r.mesh_codomain);
        assert_eq!(r.lebesgue_codomain, v("1/4"));
    }

    #[test]
    fn finite_transport_and_round_trip() {
        let (dom, cod, map) = three_point_map();
        let h = HomothetyInstance::new(HomothetyMap::Explicit { domain: dom, codomain: cod.clone(), map }, q(2, 1), q(2, 1)).unwrap();
        let family = FiniteFamily::from_sets(vec![[0, 1].into(), [1, 2].into()]);
        let input = TransportInput::Finite { v: [0, 1, 2].into(), family: family.clone() };
        for mode in [AmbientMode::Image, AmbientMode::Codomain] {
            assert!(transport_lemma_check(&h, &input, mode).unwrap().all_hold());
        }
        let (pulled, _) = pullback_finite(&h, &family).unwrap();
        let back = push_forward_finite(&h, &pulled).unwrap();
        let sets: Vec<&PointSet> = back.iter().map(|m| &m.set).collect();
        assert_eq!(sets, family.iter().map(|m| &m.set).collect::<Vec<_>>());
        let ImageSpace::Finite { space, points } = image_space(&h).unwrap() else { unreachable!() };
        assert_eq!(points, vec![0, 1, 2]);
        assert_eq!(space.d(0, 2), cod.d(0, 2));
    }

    #[test]
    fn rejects_bad_parameters() {
        let (dom, cod, map) = three_point_map();
        let m = HomothetyMap::Explicit { domain: dom, codomain: cod, map };
        assert!(matches!(HomothetyInstance::new(m.clone(), q(1, 2), q(1, 1)), Err(HomothetyError::BadLambda(_))));
        assert!(matches!(HomothetyInstance::new(m, q(1, 1), q(0, 1)), Err(HomothetyError::BadCoefficient(_))));
        assert!(HomothetyInstance::inclusion(3, 2, Norm::Linf).is_err());
    }
}
