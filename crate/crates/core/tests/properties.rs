use coverlens::boxlab;
use coverlens::cover::{self, BoxFamily, FiniteFamily, Member, OpenBox, OpenInterval};
use coverlens::homothety::{self, HomothetyInstance, HomothetyMap};
use coverlens::lebesgue;
use coverlens::oracle;
use coverlens::space::numbered_labels;
use coverlens::value::q;
use coverlens::{Axis, FiniteMetricSpace, Norm, PointSet, Rational, SliceSpace, Value};
use proptest::prelude::*;

/// Shortest-path metric on `n` points from integer edge weights.
#[allow(clippy::needless_range_loop)]
fn metric(n: usize, weights: &[u32]) -> FiniteMetricSpace {
    let mut d = vec![vec![0u64; n]; n];
    let mut w = weights.iter().cycle();
    for i in 0..n {
        for j in i + 1..n {
            let x = *w.next().unwrap() as u64;
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    FiniteMetricSpace::from_fn(numbered_labels(n), |i, j| Value::from_integer(d[i][j])).unwrap()
}

/// Family from bitmasks, with uncovered points added to the first member.
fn family(n: usize, masks: &[u32]) -> FiniteFamily {
    let mut sets: Vec<PointSet> = masks.iter().map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect()).collect();
    for x in 0..n {
        if !sets.iter().any(|s| s.contains(&x)) {
            sets[0].insert(x);
        }
    }
    FiniteFamily::from_sets(sets)
}

fn mask_set(n: usize, m: u32) -> PointSet {
    let s: PointSet = (0..n).filter(|i| m & (1 << i) != 0).collect();
    if s.is_empty() {
        [0].into()
    } else {
        s
    }
}

fn instance() -> impl Strategy<Value = (FiniteMetricSpace, FiniteFamily)> {
    (2usize..9).prop_flat_map(|n| {
        (prop::collection::vec(1u32..12, n * n), prop::collection::vec(0u32..(1 << n), 1..5))
            .prop_map(move |(w, m)| (metric(n, &w), family(n, &m)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rad_equals_standard((space, f) in instance()) {
        let all = space.all_points();
        let l = lebesgue::lebesgue(&space, &f).unwrap();
        let r = lebesgue::lebesgue_rad(&space, &f, &all).unwrap();
        prop_assert_eq!(&l.value, &r.value);
        for (a, b) in l.per_point.iter().zip(&r.per_point) {
            prop_assert_eq!(&a.value, &b.value);
        }
    }

    #[test]
    fn diam_is_between_l_and_twice_l((space, f) in instance()) {
        let l = lebesgue::lebesgue(&space, &f).unwrap().value;
        let d = lebesgue::lebesgue_diam(&space, &f).unwrap();
        prop_assert!(l <= d.value);
        prop_assert!(d.value <= l.scale(&q(2, 1)).unwrap());
        let brute = oracle::lebesgue_diam_bruteforce(&space, &f).unwrap();
        prop_assert_eq!(&d.value, &brute.value);
        if let Some(bad) = &d.bad_set {
            prop_assert!(!f.iter().any(|m| bad.is_subset(&m.set)));
            prop_assert_eq!(space.diameter(bad), d.value);
        }
    }

    #[test]
    fn second_kind_below_mesh((space, f) in instance()) {
        let s = lebesgue::second_kind_relative(&space, &f, &space.all_points()).unwrap().value;
        prop_assert!(s <= cover::mesh(&space, &f));
    }

    #[test]
    fn chain_and_restriction((space, f) in instance(), ma in any::<u32>(), mb in any::<u32>()) {
        let n = space.len();
        let b = mask_set(n, mb);
        let a: PointSet = mask_set(n, ma).intersection(&b).copied().collect();
        let a = if a.is_empty() { [*b.iter().next().unwrap()].into() } else { a };
        let chain = lebesgue::chain_report(&space, &f, &a, &b).unwrap();
        prop_assert!(chain.holds);
        let r = cover::restrict(&space, &f, &a).unwrap();
        prop_assert!(cover::mesh(&r.space, &r.family) <= cover::mesh(&space, &f));
    }

    #[test]
    fn balls_below_l_refine((space, f) in instance()) {
        let l = lebesgue::lebesgue(&space, &f).unwrap().value;
        if l.is_finite() {
            let half = l.scale(&q(1, 2)).unwrap();
            prop_assert!(lebesgue::ball_refinement_holds(&space, &f, &half).holds);
        }
    }

    #[test]
    fn values_order_like_their_squares(a in 0i64..200, b in 0i64..200, d in 1i64..20) {
        let (x, y) = (q(a, d), q(b, d));
        let (sx, sy) = (Value::sqrt(x.clone()).unwrap(), Value::sqrt(y.clone()).unwrap());
        prop_assert_eq!(sx.cmp(&sy), x.cmp(&y));
        prop_assert!(sx < Value::Infinite);
        let square = Value::sqrt(&x * &x).unwrap();
        prop_assert_eq!(square, Value::abs_rational(&x));
        let text = sx.to_string();
        prop_assert_eq!(text.parse::<Value>().unwrap(), sx);
    }

    #[test]
    fn slices_round_trip(lo in -8i64..8, len in 0i64..8, c in -4i64..4, line in any::<bool>()) {
        let first = if line { Axis::Line } else { Axis::interval(q(lo, 4), q(lo + len, 4)).unwrap() };
        let s = SliceSpace::new(vec![first, Axis::Point(q(c, 3))], Norm::Euclidean);
        let back: SliceSpace = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn interval_covers_stay_in_bracket(cuts in prop::collection::vec(1i64..16, 0..4), pad in prop::collection::vec(1i64..8, 10)) {
        // partition [0,1] at the cuts and widen each piece into an open interval
        let mut ends: Vec<i64> = cuts;
        ends.push(0);
        ends.push(16);
        ends.sort();
        ends.dedup();
        let members: Vec<Member<OpenBox>> = ends
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let side = OpenInterval::bounded(q(w[0], 16) - q(pad[2 * k], 32), q(w[1], 16) + q(pad[2 * k + 1], 32));
                Member::new(format!("U{k}"), OpenBox(vec![side]))
            })
            .collect();
        let f = BoxFamily::new(members);
        let slice = SliceSpace::full(1, Norm::Euclidean);
        let a = SliceSpace::closed_box(vec![(q(0, 1), q(1, 1))], Norm::Euclidean).unwrap();
        let exact = boxlab::box_lebesgue_relative(&slice, &f, &a).unwrap();
        let b = oracle::box_lebesgue_sampled(&slice, &f, &a, &q(1, 64)).unwrap();
        prop_assert!(b.lower <= exact.value && exact.value <= b.upper);
        if let Some(c) = &exact.certificate {
            let p = boxlab::box_pointwise(&slice, &f, c).unwrap();
            prop_assert!(exact.value <= p);
            prop_assert!(p < *exact.next_candidate.as_ref().unwrap());
        }
    }

    #[test]
    fn dilations_verify_and_scale(
        pts in prop::collection::btree_set((0i64..12, 0i64..12), 2..7),
        num in 1i64..9,
        den in 1i64..5,
    ) {
        let c = q(num, den);
        let points: Vec<Vec<Rational>> = pts.iter().map(|&(x, y)| vec![q(x, 2), q(y, 2)]).collect();
        let images: Vec<Vec<Rational>> = points.iter().map(|p| p.iter().map(|t| t * &c).collect()).collect();
        let n = points.len();
        let domain = FiniteMetricSpace::from_cloud(numbered_labels(n), points, Norm::Linf).unwrap();
        let codomain = FiniteMetricSpace::from_cloud(numbered_labels(n), images, Norm::Linf).unwrap();
        let map = HomothetyMap::Explicit { domain: domain.clone(), codomain: codomain.clone(), map: (0..n).collect() };
        let h = HomothetyInstance::new(map, q(1, 1), &c * &c).unwrap();
        prop_assert!(homothety::verify_homothety(&h).holds);
        let fit = homothety::fit_homothety(&domain, &codomain, &(0..n).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(fit.lambda_sq, Value::one());
        prop_assert_eq!(domain.scaled(&c).row(0).to_vec(), codomain.row(0).to_vec());
    }
}
