//! JSON documents for spaces, covering families and maps.
//!
//! Rationals and values are written as strings (`"3/8"`, `"sqrt(13/4)"`,
//! `"inf"`); unbounded box ends are `null`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{BoxFamily, CoveringFamily, FiniteFamily, Member, OpenBox, OpenInterval};
use crate::homothety::{HomothetyError, HomothetyInstance, HomothetyMap};
use crate::space::{numbered_labels, Backend, FiniteMetricSpace, Norm, PointSet, SliceSpace, SpaceError};
use crate::value::{opt_rational_str, rational_str, rational_vec_str, Rational, Value};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Homothety(#[from] HomothetyError),
    #[error("member {0} has a point set but the space is a slice")]
    SetOnSlice(String),
    #[error("member {0} is a box but the space is finite")]
    BoxOnFinite(String),
    #[error("explicit maps need domain and codomain spaces")]
    MissingSpaces,
    #[error("map pairs do not cover domain point {0:?}")]
    IncompleteMap(String),
    #[error("{0} must be a finite space")]
    NotFinite(&'static str),
}

/// Point label, given either as a string or a non-negative integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelRef {
    Name(String),
    Index(u64),
}

impl LabelRef {
    pub fn as_label(&self) -> String {
        match self {
            LabelRef::Name(s) => s.clone(),
            LabelRef::Index(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SpaceDoc {
    Matrix {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        distances: Vec<Vec<Value>>,
    },
    Cloud {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        #[serde(default)]
        norm: Norm,
        points: Vec<PointDoc>,
    },
    Slice {
        slice: String,
        #[serde(default)]
        norm: Norm,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointDoc(#[serde(with = "rational_vec_str")] pub Vec<Rational>);

/// A parsed space of either backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnySpace {
    Finite(FiniteMetricSpace),
    Slice(SliceSpace),
}

impl SpaceDoc {
    pub fn build(&self) -> Result<AnySpace, IoError> {
        Ok(match self {
            SpaceDoc::Matrix { labels, distances } => {
                let labels = labels.clone().unwrap_or_else(|| numbered_labels(distances.len()));
                AnySpace::Finite(FiniteMetricSpace::from_matrix(labels, distances.clone())?)
            }
            SpaceDoc::Cloud { labels, norm, points } => {
                let labels = labels.clone().unwrap_or_else(|| numbered_labels(points.len()));
                let pts = points.iter().map(|p| p.0.clone()).collect();
                AnySpace::Finite(FiniteMetricSpace::from_cloud(labels, pts, *norm)?)
            }
            SpaceDoc::Slice { slice, norm } => {
                let s: SliceSpace = slice.parse()?;
                AnySpace::Slice(s.with_norm(*norm))
            }
        })
    }

    pub fn from_finite(space: &FiniteMetricSpace) -> Self {
        let labels = Some(space.labels().to_vec());
        match space.backend() {
            Backend::Matrix => SpaceDoc::Matrix {
                labels,
                distances: (0..space.len()).map(|i| space.row(i).to_vec()).collect(),
            },
            Backend::Cloud { points, norm } => SpaceDoc::Cloud {
                labels,
                norm: *norm,
                points: points.iter().cloned().map(PointDoc).collect(),
            },
        }
    }

    pub fn from_slice(slice: &SliceSpace) -> Self {
        SpaceDoc::Slice { slice: slice.to_string(), norm: slice.norm() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideDoc(
    #[serde(with = "opt_rational_str")] pub Option<Rational>,
    #[serde(with = "opt_rational_str")] pub Option<Rational>,
);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<Vec<LabelRef>>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bx: Option<Vec<SideDoc>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverDoc {
    pub members: Vec<MemberDoc>,
}

/// A parsed family of either kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyFamily {
    Finite(FiniteFamily),
    Boxes(BoxFamily),
}

impl CoverDoc {
    pub fn build(&self, space: &AnySpace) -> Result<AnyFamily, IoError> {
        match space {
            AnySpace::Finite(s) => {
                let members = self
                    .members
                    .iter()
                    .map(|m| {
                        if m.bx.is_some() {
                            return Err(IoError::BoxOnFinite(m.name.clone()));
                        }
                        let labels: Vec<String> = m.set.iter().flatten().map(LabelRef::as_label).collect();
                        Ok(Member::new(m.name.clone(), s.subset_of_labels(&labels)?))
                    })
                    .collect::<Result<_, IoError>>()?;
                Ok(AnyFamily::Finite(CoveringFamily::new(members)))
            }
            AnySpace::Slice(_) => {
                let members = self
                    .members
                    .iter()
                    .map(|m| match &m.bx {
                        Some(sides) => Ok(Member::new(
                            m.name.clone(),
                            OpenBox(sides.iter().map(|s| OpenInterval::new(s.0.clone(), s.1.clone())).collect()),
                        )),
                        None => Err(IoError::SetOnSlice(m.name.clone())),
                    })
                    .collect::<Result<_, IoError>>()?;
                Ok(AnyFamily::Boxes(CoveringFamily::new(members)))
            }
        }
    }

    pub fn from_finite(space: &FiniteMetricSpace, f: &FiniteFamily) -> Self {
        CoverDoc {
            members: f
                .iter()
                .map(|m| MemberDoc {
                    name: m.name.clone(),
                    set: Some(m.set.iter().map(|&i| LabelRef::Name(space.label(i).to_string())).collect()),
                    bx: None,
                })
                .collect(),
        }
    }

    pub fn from_boxes(f: &BoxFamily) -> Self {
        CoverDoc {
            members: f
                .iter()
                .map(|m| MemberDoc {
                    name: m.name.clone(),
                    set: None,
                    bx: Some(m.set.sides().iter().map(|s| SideDoc(s.lo.clone(), s.hi.clone())).collect()),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MapDoc {
    Explicit {
        pairs: Vec<(LabelRef, LabelRef)>,
    },
    Inclusion {
        dims: (usize, usize),
        #[serde(with = "rational_str", default = "one")]
        scale: Rational,
        #[serde(default)]
        norm: Norm,
    },
}

fn one() -> Rational {
    Rational::from_integer(1.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomothetyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<SpaceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<SpaceDoc>,
    pub map: MapDoc,
    #[serde(with = "rational_str")]
    pub lambda_sq: Rational,
    #[serde(rename = "R_sq", with = "rational_str")]
    pub r_sq: Rational,
}

fn finite(doc: &Option<SpaceDoc>, what: &'static str) -> Result<FiniteMetricSpace, IoError> {
    match doc.as_ref().ok_or(IoError::MissingSpaces)?.build()? {
        AnySpace::Finite(s) => Ok(s),
        AnySpace::Slice(_) => Err(IoError::NotFinite(what)),
    }
}

impl HomothetyDoc {
    pub fn build(&self) -> Result<HomothetyInstance, IoError> {
        let map = match &self.map {
            MapDoc::Explicit { pairs } => {
                let domain = finite(&self.domain, "domain")?;
                let codomain = finite(&self.codomain, "codomain")?;
                let mut map = vec![None; domain.len()];
                for (a, b) in pairs {
                    map[domain.index_of(&a.as_label())?] = Some(codomain.index_of(&b.as_label())?);
                }
                let map = map
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m.ok_or_else(|| IoError::IncompleteMap(domain.label(i).to_string())))
                    .collect::<Result<_, _>>()?;
                HomothetyMap::Explicit { domain, codomain, map }
            }
            MapDoc::Inclusion { dims, scale, norm } => HomothetyMap::Inclusion {
                domain_dim: dims.0,
                codomain_dim: dims.1,
                scale: scale.clone(),
                norm: *norm,
            },
        };
        Ok(HomothetyInstance::new(map, self.lambda_sq.clone(), self.r_sq.clone())?)
    }

    pub fn from_instance(h: &HomothetyInstance) -> Self {
        let (domain, codomain, map) = match &h.map {
            HomothetyMap::Explicit { domain, codomain, map } => (
                Some(SpaceDoc::from_finite(domain)),
                Some(SpaceDoc::from_finite(codomain)),
                MapDoc::Explicit {
                    pairs: map
                        .iter()
                        .enumerate()
                        .map(|(i, &j)| {
                            (LabelRef::Name(domain.label(i).to_string()), LabelRef::Name(codomain.label(j).to_string()))
                        })
                        .collect(),
                },
            ),
            HomothetyMap::Inclusion { domain_dim, codomain_dim, scale, norm } => (
                None,
                None,
                MapDoc::Inclusion { dims: (*domain_dim, *codomain_dim), scale: scale.clone(), norm: *norm },
            ),
        };
        HomothetyDoc { domain, codomain, map, lambda_sq: h.lambda_sq.clone(), r_sq: h.r_sq.clone() }
    }
}

/// Comma-separated labels, e.g. `"0,1,2"`; surrounding braces are allowed.
pub fn parse_label_set(space: &FiniteMetricSpace, text: &str) -> Result<PointSet, SpaceError> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    let labels: Vec<&str> = inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if labels.is_empty() {
        return Err(SpaceError::EmptySubset);
    }
    space.subset_of_labels(&labels)
}

/// `{a,b,c}` with labels in index order.
pub fn format_label_set(space: &FiniteMetricSpace, set: &PointSet) -> String {
    format!("{{{}}}", space.labels_of(set).join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::q;

    #[test]
    fn matrix_round_trip() {
        let json = r#"{"type":"matrix","distances":[["0","1"],["1","0"]]}"#;
        let doc: SpaceDoc = serde_json::from_str(json).unwrap();
        let AnySpace::Finite(s) = doc.build().unwrap() else { panic!() };
        assert_eq!(s.labels(), ["0", "1"]);
        let back = SpaceDoc::from_finite(&s);
        assert_eq!(back.build().unwrap(), AnySpace::Finite(s));
    }

    #[test]
    fn cloud_and_slice_docs() {
        let json = r#"{"type":"cloud","norm":"linf","points":[["0","0"],["1","1/2"]]}"#;
        let AnySpace::Finite(s) = serde_json::from_str::<SpaceDoc>(json).unwrap().build().unwrap() else { panic!() };
        assert_eq!(s.d(0, 1), &Value::one());
        let json = r#"{"type":"slice","slice":"R2x{0}"}"#;
        let AnySpace::Slice(s) = serde_json::from_str::<SpaceDoc>(json).unwrap().build().unwrap() else { panic!() };
        assert_eq!(s.dim(), 3);
        assert_eq!(SpaceDoc::from_slice(&s).build().unwrap(), AnySpace::Slice(s));
    }

    #[test]
    fn box_cover_with_unbounded_end() {
        let space = AnySpace::Slice("R^2".parse().unwrap());
        let json = r#"{"members":[{"name":"U1","box":[["-1/4","7/8"],[null,"1"]]}]}"#;
        let doc: CoverDoc = serde_json::from_str(json).unwrap();
        let AnyFamily::Boxes(f) = doc.build(&space).unwrap() else { panic!() };
        assert_eq!(f.members[0].set.sides()[1], OpenInterval::new(None, Some(q(1, 1))));
        let text = serde_json::to_string(&CoverDoc::from_boxes(&f)).unwrap();
        assert!(text.contains(r#"[null,"1"]"#));
        let finite = AnySpace::Finite(FiniteMetricSpace::discrete(2));
        assert!(matches!(doc.build(&finite), Err(IoError::BoxOnFinite(_))));
    }

    #[test]
    fn set_cover_accepts_numeric_labels() {
        let space = FiniteMetricSpace::path(3);
        let doc: CoverDoc = serde_json::from_str(r#"{"members":[{"name":"A","set":[0,"1"]}]}"#).unwrap();
        let AnyFamily::Finite(f) = doc.build(&AnySpace::Finite(space.clone())).unwrap() else { panic!() };
        assert_eq!(f.members[0].set, [0, 1].into());
        assert_eq!(CoverDoc::from_finite(&space, &f).build(&AnySpace::Finite(space)).unwrap(), AnyFamily::Finite(f));
    }

    #[test]
    fn homothety_docs() {
        let json = r#"{"map":{"type":"inclusion","dims":[2,3]},"lambda_sq":"1","R_sq":"1"}"#;
        let h = serde_json::from_str::<HomothetyDoc>(json).unwrap().build().unwrap();
        assert!(matches!(h.map, HomothetyMap::Inclusion { domain_dim: 2, codomain_dim: 3, .. }));
        let json = r#"{"domain":{"type":"matrix","distances":[["0","1"],["1","0"]]},
            "codomain":{"type":"matrix","labels":["a","b"],"distances":[["0","2"],["2","0"]]},
            "map":{"type":"explicit","pairs":[[0,"b"],[1,"a"]]},"lambda_sq":"1","R_sq":"4"}"#;
        let h = serde_json::from_str::<HomothetyDoc>(json).unwrap().build().unwrap();
        let HomothetyMap::Explicit { map, .. } = &h.map else { panic!() };
        assert_eq!(map, &vec![1, 0]);
        assert_eq!(HomothetyDoc::from_instance(&h).build().unwrap(), h);
        let partial = json.replace(r#",[1,"a"]"#, "");
        assert!(matches!(
            serde_json::from_str::<HomothetyDoc>(&partial).unwrap().build(),
            Err(IoError::IncompleteMap(_))
        ));
    }

    #[test]
    fn label_sets() {
        let s = FiniteMetricSpace::path(5);
        let set = parse_label_set(&s, "{1, 3}").unwrap();
        assert_eq!(format_label_set(&s, &set), "{1,3}");
        assert!(parse_label_set(&s, "{}").is_err());
        assert!(parse_label_set(&s, "9").is_err());
    }
}
