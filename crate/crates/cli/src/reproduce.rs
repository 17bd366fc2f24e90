//! Worked examples with their expected values embedded.

use coverlens::boxlab::{self, Scenario};
use coverlens::cover::{self, FiniteFamily};
use coverlens::fixtures;
use coverlens::homothety::{self, AmbientMode, TransportInput, TransportReport};
use coverlens::lebesgue;
use coverlens::value::q;
use coverlens::{FiniteMetricSpace, Value};
use serde::Serialize;

pub const IDS: [&str; 6] = ["interval-tail", "discrete", "box-chain", "counterexample-44", "corrected-44", "ball-tail"];

#[derive(Debug, Serialize)]
pub struct Line {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Reproduction {
    pub id: String,
    pub lines: Vec<Line>,
    pub pass: bool,
}

struct Lines(Vec<Line>);

impl Lines {
    fn value(&mut self, name: impl Into<String>, expected: &str, got: &Value) {
        let want: Value = expected.parse().expect("embedded value");
        self.0.push(Line { name: name.into(), expected: want.to_string(), got: got.to_string(), pass: *got == want });
    }

    fn verdict(&mut self, name: impl Into<String>, expected: bool, got: bool) {
        let word = |b: bool| if b { "holds" } else { "fails" }.to_string();
        self.0.push(Line { name: name.into(), expected: word(expected), got: word(got), pass: expected == got });
    }
}

pub fn reproduce(id: &str) -> Result<Reproduction, String> {
    let mut out = Lines(Vec::new());
    match id {
        "interval-tail" => {
            for (n, want) in [(4, "1/4"), (8, "3/8"), (16, "7/16"), (64, "31/64")] {
                let got = boxlab::truncated_family_lebesgue(n, Scenario::IntervalTail, None).map_err(|e| e.to_string())?;
                out.value(format!("N = {n}: L on [1/2,3/4]"), want, &got);
            }
        }
        "discrete" => {
            for n in 2..=10 {
                let (space, f) = fixtures::discrete_singletons(n);
                discrete_lines(&mut out, n, &space, &f).map_err(|e| e.to_string())?;
            }
        }
        "box-chain" => {
            let c = fixtures::box_chain();
            for (name, ambient, want) in [("L_A(U|A, A)", &c.a, "3/8"), ("L_B(U|B, A)", &c.b, "1/4"), ("L_X(U, A)", &c.x, "1/8")] {
                let got = boxlab::box_lebesgue_relative(ambient, &c.family, &c.a).map_err(|e| e.to_string())?;
                out.value(name, want, &got.value);
            }
        }
        "counterexample-44" => {
            let r = plane_transport(AmbientMode::Codomain)?;
            out.value("L_Z(U, V)", "1/4", &r.lebesgue_domain);
            out.value("L_Z'(U', h(V))", "1/8", &r.lebesgue_codomain);
            out.value("mesh(U)", "sqrt(13/4)", &r.mesh_domain);
            out.value("mesh(U')", "sqrt(53/16)", &r.mesh_codomain);
            for (ineq, want) in r.inequalities.iter().zip([true, false, false, true]) {
                out.verdict(format!("{}: {} vs {}", ineq.name, ineq.lhs, ineq.rhs), want, ineq.holds);
            }
        }
        "corrected-44" => {
            let r = plane_transport(AmbientMode::Image)?;
            out.value("L_Z(U, V)", "1/4", &r.lebesgue_domain);
            out.value("L_h(Z)(U', h(V))", "1/4", &r.lebesgue_codomain);
            out.value("mesh(U)", "sqrt(13/4)", &r.mesh_domain);
            out.value("mesh(U')", "sqrt(13/4)", &r.mesh_codomain);
            for ineq in &r.inequalities {
                out.verdict(format!("{}: {} vs {}", ineq.name, ineq.lhs, ineq.rhs), true, ineq.holds);
                out.verdict(format!("{}: equality", ineq.name), true, ineq.lhs == ineq.rhs);
            }
        }
        "ball-tail" => {
            let limit = boxlab::ball_tail_limit();
            for (n, want) in [(4, "5/8"), (8, "13/16"), (12, "7/8")] {
                let t = boxlab::truncated_family(n, Scenario::BallTail).map_err(|e| e.to_string())?;
                let l = boxlab::box_lebesgue_relative(&t.slice, &t.family, &t.subset).map_err(|e| e.to_string())?;
                out.value(format!("N = {n}: L on [1/4,3/4]^2"), want, &l.value);
                let l_q = l.value.as_rational().ok_or("irrational value")?;
                for (r, expect) in [(q(1, 2), true), (l_q, true), (q(1, 1), false)] {
                    let got = boxlab::box_ball_refinement(&t.slice, &t.family, &t.subset, &r).map_err(|e| e.to_string())?;
                    out.verdict(format!("N = {n}: balls of radius {} refine", Value::abs_rational(&r)), expect, got.holds);
                }
            }
            out.value("limit L", "1", &limit);
        }
        other => return Err(format!("unknown example {other:?}; expected one of {}", IDS.join(", "))),
    }
    let pass = out.0.iter().all(|l| l.pass);
    Ok(Reproduction { id: id.to_string(), lines: out.0, pass })
}

fn discrete_lines(out: &mut Lines, n: usize, space: &FiniteMetricSpace, f: &FiniteFamily) -> Result<(), lebesgue::LebesgueError> {
    let all = space.all_points();
    out.value(format!("n = {n}: mesh"), "0", &cover::mesh(space, f));
    out.value(format!("n = {n}: L"), "1", &lebesgue::lebesgue(space, f)?.value);
    out.value(format!("n = {n}: L_rad"), "1", &lebesgue::lebesgue_rad(space, f, &all)?.value);
    out.value(format!("n = {n}: L_diam"), "1", &lebesgue::lebesgue_diam(space, f)?.value);
    out.value(format!("n = {n}: L_second"), "0", &lebesgue::second_kind_relative(space, f, &all)?.value);
    Ok(())
}

fn plane_transport(mode: AmbientMode) -> Result<TransportReport, String> {
    let p = fixtures::plane_inclusion();
    let input = TransportInput::Boxes { v: p.v, family: p.family };
    homothety::transport_lemma_check(&p.map, &input, mode).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_examples_pass() {
        for id in ["interval-tail", "discrete", "box-chain", "counterexample-44", "corrected-44"] {
            let r = reproduce(id).unwrap();
            assert!(r.pass, "{id}: {:#?}", r.lines);
        }
        assert!(reproduce("nope").is_err());
    }
}
