//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use coverlens::boxlab::{self, Scenario};
use coverlens::cover::{self, BoxFamily};
use coverlens::fixtures;
use coverlens::homothety::{self, AmbientMode, TransportInput};
use coverlens::lebesgue;
use coverlens::oracle::{self, FuzzConfig, Instance, InstanceKind};
use coverlens::value::q;
use coverlens::{Rational, SliceSpace, Value};

fn v(s: &str) -> Value {
    s.parse().unwrap()
}

struct Criterion {
    pass: bool,
    detail: String,
}

type Check = fn() -> Criterion;

fn crit(pass: bool, detail: impl Into<String>) -> Criterion {
    Criterion { pass, detail: detail.into() }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn relative_chain() -> Criterion {
    let c = fixtures::box_chain();
    let (values, took) = timed(|| {
        [&c.a, &c.b, &c.x].map(|ambient| boxlab::box_lebesgue_relative(ambient, &c.family, &c.a).unwrap().value)
    });
    let want = [v("3/8"), v("1/4"), v("1/8")];
    let shown: Vec<String> = values.iter().map(|x| x.to_string()).collect();
    crit(
        values == want && took < Duration::from_secs(1),
        format!("L_A = {}, L_B = {}, L_X = {} in {took:.2?}", shown[0], shown[1], shown[2]),
    )
}

fn plane_input() -> (homothety::HomothetyInstance, TransportInput) {
    let p = fixtures::plane_inclusion();
    (p.map, TransportInput::Boxes { v: p.v, family: p.family })
}

fn counterexample() -> Criterion {
    let (h, input) = plane_input();
    let r = homothety::transport_lemma_check(&h, &input, AmbientMode::Codomain).unwrap();
    let failed: Vec<&str> = r.inequalities.iter().filter(|i| !i.holds).map(|i| i.name).collect();
    let pass = r.lebesgue_domain == v("1/4")
        && r.lebesgue_codomain == v("1/8")
        && r.mesh_domain == v("sqrt(13/4)")
        && r.mesh_codomain == v("sqrt(53/16)")
        && failed == ["mesh upper", "lebesgue lower"];
    crit(
        pass,
        format!(
            "L_Z = {}, L_Z' = {}, mesh^2 {} vs {}, failing: {}",
            r.lebesgue_domain,
            r.lebesgue_codomain,
            r.mesh_domain.radicand().map(|x| x.to_string()).unwrap_or_default(),
            r.mesh_codomain.radicand().map(|x| x.to_string()).unwrap_or_default(),
            failed.join(", ")
        ),
    )
}

fn corrected_lemma() -> Criterion {
    let (h, input) = plane_input();
    let r = homothety::transport_lemma_check(&h, &input, AmbientMode::Image).unwrap();
    let fixture_ok = h.lambda_sq == Rational::from_integer(1.into())
        && h.r_sq == Rational::from_integer(1.into())
        && r.inequalities.len() == 4
        && r.inequalities.iter().all(|i| i.holds && i.lhs == i.rhs);
    let cfg = FuzzConfig { trials: 0, box_trials: 0, homothety_trials: 500, ..FuzzConfig::default() };
    let (report, took) = timed(|| oracle::fuzz_suite(&cfg));
    crit(
        fixture_ok && report.instances == 500 && report.passed() && took < Duration::from_secs(60),
        format!(
            "image ambient: 4 equalities; {} random instances, {} violations in {took:.2?}",
            report.instances,
            report.violations.len()
        ),
    )
}

fn discrete() -> Criterion {
    let mut bad = Vec::new();
    for n in 2..=10 {
        let (space, f) = fixtures::discrete_singletons(n);
        let all = space.all_points();
        let got = [
            cover::mesh(&space, &f),
            lebesgue::lebesgue(&space, &f).unwrap().value,
            lebesgue::lebesgue_rad(&space, &f, &all).unwrap().value,
            lebesgue::lebesgue_diam(&space, &f).unwrap().value,
            lebesgue::second_kind_relative(&space, &f, &all).unwrap().value,
        ];
        let brute = oracle::lebesgue_diam_bruteforce(&space, &f).unwrap().value;
        if got != [v("0"), v("1"), v("1"), v("1"), v("0")] || brute != got[3] {
            bad.push(n);
        }
    }
    crit(bad.is_empty(), format!("n = 2..10: mesh 0, L 1, L_rad 1, L_diam 1, L_second 0; mismatches at {bad:?}"))
}

fn inequality_suites() -> Criterion {
    let cfg = FuzzConfig { box_trials: 0, homothety_trials: 0, ..FuzzConfig::default() };
    let (report, took) = timed(|| oracle::fuzz_suite(&cfg));
    for v in report.violations.iter().take(5) {
        eprintln!("  {} trial {}: expected {}, got {}", v.invariant, v.trial, v.expected, v.got);
    }
    crit(
        report.instances >= 1000 && report.passed() && took < Duration::from_secs(300),
        format!(
            "{} instances, {} checks, {} violations, {} search findings in {took:.2?}",
            report.instances,
            report.checks,
            report.violations.len(),
            report.findings.len()
        ),
    )
}

fn oracle_equivalence() -> Criterion {
    let cfg = FuzzConfig::default();
    let mut compared = 0;
    let mut mismatches = 0;
    for trial in 0..cfg.trials {
        let Instance::Finite(inst) = oracle::generate_instance(&cfg, InstanceKind::Finite, trial) else {
            unreachable!()
        };
        if inst.space.len() > 12 {
            continue;
        }
        compared += 1;
        let fast = lebesgue::lebesgue_diam(&inst.space, &inst.family).unwrap().value;
        let brute = oracle::lebesgue_diam_bruteforce(&inst.space, &inst.family).unwrap().value;
        if fast != brute {
            mismatches += 1;
        }
    }
    crit(compared >= 300 && mismatches == 0, format!("{compared} instances with <= 12 points, {mismatches} mismatches"))
}

fn sampling_bracket() -> Criterion {
    let step = q(1, 64);
    let cfg = FuzzConfig { trials: 0, homothety_trials: 0, sample_step: step.clone(), ..FuzzConfig::default() };
    let report = oracle::fuzz_suite(&cfg);
    let bracket_failures = report.violations.iter().filter(|v| v.invariant == "box-sampling-bracket").count();

    let chain = fixtures::box_chain();
    let plane = fixtures::plane_inclusion();
    let plane_a: SliceSpace = "[0,1]^2x{0}".parse().unwrap();
    let (pulled, _) = homothety::pullback_boxes(&plane.map, &plane.family).unwrap();
    let fixtures: Vec<(&SliceSpace, &BoxFamily, &SliceSpace)> = vec![
        (&chain.x, &chain.family, &chain.a),
        (&chain.b, &chain.family, &chain.a),
        (&chain.a, &chain.family, &chain.a),
        (&chain.x, &plane.family, &plane_a),
        (&plane_a, &plane.family, &plane_a),
        (&plane.v, &pulled, &plane.v),
    ];
    let mut fixture_failures = 0;
    for (slice, f, a) in &fixtures {
        let exact = boxlab::box_lebesgue_relative(slice, f, a).unwrap().value;
        let b = oracle::box_lebesgue_sampled(slice, f, a, &step).unwrap();
        if !(b.lower <= exact && exact <= b.upper) {
            fixture_failures += 1;
        }
    }
    crit(
        report.instances >= 200 && report.passed() && fixture_failures == 0,
        format!(
            "{} random instances ({bracket_failures} outside the bracket, {} violations), {} fixtures ({fixture_failures} outside)",
            report.instances,
            report.violations.len(),
            fixtures.len()
        ),
    )
}

fn truncation_limits() -> Criterion {
    let ns = [4usize, 8, 16, 64];
    let values: Vec<Value> =
        ns.iter().map(|&n| boxlab::truncated_family_lebesgue(n, Scenario::IntervalTail, None).unwrap()).collect();
    let exact = ns.iter().zip(&values).all(|(&n, got)| *got == Value::abs_rational(&(q(1, 2) - q(1, n as i64))));
    let increasing = values.windows(2).all(|w| w[0] < w[1]);
    let shown: Vec<String> = ns.iter().zip(&values).map(|(n, x)| format!("N={n}: {x}")).collect();
    crit(exact && increasing, shown.join(", "))
}

fn refinement_boundary() -> Criterion {
    let limit = boxlab::ball_tail_limit();
    let limit_q = limit.as_rational().unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    let mut truncations = Vec::new();
    for n in [4usize, 8, 12] {
        let t = boxlab::truncated_family(n, Scenario::BallTail).unwrap();
        let l = boxlab::box_lebesgue_relative(&t.slice, &t.family, &t.subset).unwrap();
        let l_q = l.value.as_rational().unwrap();
        pass &= l_q == Rational::from_integer(1.into()) - q(3, 2 * n as i64);
        // the truncation's own boundary
        pass &= boxlab::box_ball_refinement(&t.slice, &t.family, &t.subset, &l_q).unwrap().holds;
        if let Some(next) = l.next_candidate.as_ref().and_then(|c| c.as_rational()) {
            pass &= !boxlab::box_ball_refinement(&t.slice, &t.family, &t.subset, &next).unwrap().holds;
        }
        // and the limit's
        let at_limit = boxlab::box_ball_refinement(&t.slice, &t.family, &t.subset, &limit_q).unwrap().holds;
        pass &= !at_limit;
        notes.push(format!("N={n}: L_N = {}", l.value));
        truncations.push((t, l_q));
    }
    let tested = [q(1, 8), q(1, 4), q(1, 2), q(5, 8), q(3, 4), q(13, 16), q(7, 8)];
    let mut tested_ok = 0;
    for r in &tested {
        let witness = truncations.iter().find(|(_, l)| r <= l);
        if let Some((t, _)) = witness {
            if boxlab::box_ball_refinement(&t.slice, &t.family, &t.subset, r).unwrap().holds {
                tested_ok += 1;
            }
        }
    }
    pass &= tested_ok == tested.len();
    notes.push(format!("{tested_ok}/{} radii below {limit} refine, radius {limit} fails for every N", tested.len()));
    crit(pass, notes.join("; "))
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("relative chain on the box instance", relative_chain),
        ("ambient counterexample for the transport bounds", counterexample),
        ("transport bounds in the image ambient", corrected_lemma),
        ("discrete singleton covers", discrete),
        ("inequality suites over seeded instances", inequality_suites),
        ("L_diam against subset enumeration", oracle_equivalence),
        ("box values inside the sampling bracket", sampling_bracket),
        ("interval-tail truncations", truncation_limits),
        ("ball-tail refinement boundary", refinement_boundary),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let c = run();
        if !c.pass {
            failed += 1;
        }
        println!("{} {}. {name}: {}", if c.pass { "PASS" } else { "FAIL" }, k + 1, c.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
