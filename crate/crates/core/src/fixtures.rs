//! Small worked instances shared by the CLI and the test suites.

use crate::cover::{BoxFamily, FiniteFamily, Member, OpenBox};
use crate::homothety::HomothetyInstance;
use crate::space::{FiniteMetricSpace, Norm, SliceSpace};
use crate::value::q;

/// Two open boxes in `R^3` covering the unit square at height zero, read in
/// three nested ambients.
pub struct BoxChain {
    pub family: BoxFamily,
    /// `[0,1]^2 x {0}`.
    pub a: SliceSpace,
    /// `R^2 x {0}`.
    pub b: SliceSpace,
    /// `R^3`.
    pub x: SliceSpace,
}

pub fn box_chain() -> BoxChain {
    let slab = (q(-1, 8), q(1, 8));
    let tall = (q(-1, 4), q(5, 4));
    BoxChain {
        family: BoxFamily::new(vec![
            Member::new("U1", OpenBox::from_bounds(vec![(q(-1, 4), q(7, 8)), tall.clone(), slab.clone()])),
            Member::new("U2", OpenBox::from_bounds(vec![(q(1, 8), q(5, 4)), tall, slab])),
        ]),
        a: "[0,1]^2x{0}".parse().expect("valid slice"),
        b: "R2x{0}".parse().expect("valid slice"),
        x: SliceSpace::full(3, Norm::Euclidean),
    }
}

/// The plane included in space, with a two-box family over the unit square.
pub struct PlaneInclusion {
    pub map: HomothetyInstance,
    pub family: BoxFamily,
    /// `[0,1]^2` in the plane.
    pub v: SliceSpace,
}

pub fn plane_inclusion() -> PlaneInclusion {
    let slab = (q(-1, 8), q(1, 8));
    let tall = (q(-1, 4), q(5, 4));
    PlaneInclusion {
        map: HomothetyInstance::inclusion(2, 3, Norm::Euclidean).expect("valid inclusion"),
        family: BoxFamily::new(vec![
            Member::new("U1", OpenBox::from_bounds(vec![(q(-1, 4), q(3, 4)), tall.clone(), slab.clone()])),
            Member::new("U2", OpenBox::from_bounds(vec![(q(1, 4), q(5, 4)), tall, slab])),
        ]),
        v: "[0,1]^2".parse().expect("valid slice"),
    }
}

/// Discrete space on `n` points with its cover by singletons.
pub fn discrete_singletons(n: usize) -> (FiniteMetricSpace, FiniteFamily) {
    let space = FiniteMetricSpace::discrete(n);
    let family = FiniteFamily::singletons(&space);
    (space, family)
}

/// Points `0..=4` on a line covered by `{0,1,2}` and `{2,3,4}`.
pub fn five_point_line() -> (FiniteMetricSpace, FiniteFamily) {
    let space = FiniteMetricSpace::path(5);
    let family = FiniteFamily::from_sets(vec![[0, 1, 2].into(), [2, 3, 4].into()]);
    (space, family)
}
