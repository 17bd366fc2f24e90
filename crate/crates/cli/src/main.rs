use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use coverlens::boxlab;
use coverlens::cover::{self, BoxFamily, FiniteFamily};
use coverlens::homothety::{self, AmbientMode, HomothetyMap, TransportInput};
use coverlens::io::{format_label_set, parse_label_set, AnyFamily, AnySpace, CoverDoc, HomothetyDoc, SpaceDoc};
use coverlens::lebesgue::{self, LebesgueReport};
use coverlens::oracle::{self, FuzzConfig};
use coverlens::space::{format_point, validate_metric};
use coverlens::{FiniteMetricSpace, PointSet, Rational, SliceSpace, Value};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

mod reproduce;

#[derive(Parser)]
#[command(name = "coverlens", version, about = "Exact Lebesgue numbers and meshes of covering families")]
struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a Lebesgue number of a family over a space.
    Compute {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long, value_enum, default_value = "L")]
        variant: VariantArg,
        /// Subset A: a label set such as `{0,2}`, or a slice such as `[0,1]^2x{0}`.
        #[arg(long)]
        subset: Option<String>,
        /// Ambient B between A and the space, written like `--subset`; a
        /// `slice:` prefix is accepted.
        #[arg(long)]
        ambient: Option<String>,
        /// Print the pointwise values.
        #[arg(long)]
        per_point: bool,
    },
    /// Check one lemma on an instance.
    Check {
        #[arg(value_enum)]
        lemma: Lemma,
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        cover: Option<PathBuf>,
        #[arg(long)]
        homothety: Option<PathBuf>,
        #[arg(long)]
        subset: Option<String>,
        /// Middle set of the chain, or `image` / `codomain` for `transport`.
        #[arg(long)]
        ambient: Option<String>,
        /// Ball radius for `refinement`.
        #[arg(long)]
        radius: Option<String>,
    },
    /// Recompute a worked example and compare with its known values.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(reproduce::IDS))]
        id: String,
    },
    /// Run the seeded invariant suite.
    Fuzz {
        /// JSON file with `FuzzConfig` fields; missing fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of finite-space instances.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Validate input files without computing anything.
    Validate {
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        cover: Option<PathBuf>,
        #[arg(long)]
        homothety: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    #[value(name = "L")]
    L,
    #[value(name = "Lrad")]
    Lrad,
    #[value(name = "Ldiam")]
    Ldiam,
    #[value(name = "second")]
    Second,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lemma {
    Chain,
    Diam,
    Rad,
    SecondKind,
    Refinement,
    Transport,
    Homothety,
}

/// Input that could not be read, parsed or validated.
enum Failure {
    Invalid(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<Output, Failure>;

/// Report text and JSON, plus whether every check passed.
struct Output {
    text: String,
    json: serde_json::Value,
    pass: bool,
}

impl Output {
    fn ok(text: String, json: impl Serialize) -> Self {
        Self { text, json: serde_json::to_value(json).expect("serializable"), pass: true }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    p.as_deref().ok_or_else(|| Failure::Invalid(format!("--{flag} is required")))
}

fn load(space: &Path, cover: &Path) -> Result<(AnySpace, AnyFamily), Failure> {
    let space = read_json::<SpaceDoc>(space)?.build()?;
    let family = read_json::<CoverDoc>(cover)?.build(&space)?;
    Ok((space, family))
}

fn parse_slice(text: &str) -> Result<SliceSpace, Failure> {
    Ok(text.trim().strip_prefix("slice:").unwrap_or(text.trim()).parse::<SliceSpace>()?)
}

/// Subset of a slice ambient, given as a slice sharing its norm.
fn slice_subset(space: &SliceSpace, text: &Option<String>) -> Result<SliceSpace, Failure> {
    let s = match text {
        Some(t) => parse_slice(t)?.with_norm(space.norm()),
        None => space.clone(),
    };
    if !s.is_subset_of(space) {
        return Err(Failure::Invalid(format!("{s} is not contained in {space}")));
    }
    Ok(s)
}

fn label_set(space: &FiniteMetricSpace, text: &Option<String>) -> Result<PointSet, Failure> {
    match text {
        Some(t) => Ok(parse_label_set(space, t.trim().strip_prefix("set:").unwrap_or(t.trim()))?),
        None => Ok(space.all_points()),
    }
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn per_point_table(report: &LebesgueReport) -> String {
    let width = report.per_point.iter().map(|p| p.label.len()).max().unwrap_or(1);
    report.per_point.iter().fold(String::new(), |mut s, p| {
        let _ = writeln!(s, "  {:width$}  {}", p.label, p.value);
        s
    })
}

fn compute(
    space: &Path,
    cover_file: &Path,
    variant: VariantArg,
    subset: &Option<String>,
    ambient: &Option<String>,
    per_point: bool,
) -> Outcome {
    match load(space, cover_file)? {
        (AnySpace::Finite(space), AnyFamily::Finite(f)) => compute_finite(&space, &f, variant, subset, ambient, per_point),
        (AnySpace::Slice(slice), AnyFamily::Boxes(f)) => {
            if !matches!(variant, VariantArg::L) {
                return Err(Failure::Invalid("box families support only --variant L".into()));
            }
            let a = slice_subset(&slice, subset)?;
            let x = match ambient {
                Some(_) => slice_subset(&slice, ambient)?,
                None => slice,
            };
            if !a.is_subset_of(&x) {
                return Err(Failure::Invalid(format!("{a} is not contained in {x}")));
            }
            let r = boxlab::box_lebesgue_relative(&x, &f, &a)?;
            let mesh = boxlab::box_mesh(&x, &f);
            let mut text = format!("L = {}, mesh = {mesh}\n", r.value);
            if let Some(c) = &r.certificate {
                let _ = writeln!(text, "certificate {}", format_point(c));
            }
            let json = json!({"variant": "L", "ambient": x.to_string(), "subset": a.to_string(), "mesh": mesh, "result": r});
            Ok(Output::ok(text, json))
        }
        _ => unreachable!("families are built against their space"),
    }
}

fn compute_finite(
    space: &FiniteMetricSpace,
    f: &FiniteFamily,
    variant: VariantArg,
    subset: &Option<String>,
    ambient: &Option<String>,
    per_point: bool,
) -> Outcome {
    let a = label_set(space, subset)?;
    let b = label_set(space, ambient)?;
    if !a.is_subset(&b) {
        return Err(Failure::Invalid("--subset must lie inside --ambient".into()));
    }
    let r = cover::restrict(space, f, &b)?;
    let (space, f, a) = if ambient.is_some() {
        let a = r.map_subset(&a).expect("nested");
        (&r.space, &r.family, a)
    } else {
        (space, f, a)
    };
    let mesh = cover::mesh(space, f);
    if let VariantArg::Ldiam = variant {
        if a != space.all_points() {
            return Err(Failure::Invalid("L_diam is defined for covers of the whole space".into()));
        }
        let d = lebesgue::lebesgue_diam(space, f)?;
        let bad = d.bad_set.as_ref().map(|s| format_label_set(space, s));
        let text = match &bad {
            Some(b) => format!("L_diam = {}, bad set {b}\n", d.value),
            None => format!("L_diam = {}, no bad set\n", d.value),
        };
        return Ok(Output::ok(text, json!({"variant": "diam", "value": d.value, "bad_set": bad, "mesh": mesh})));
    }
    let report = match variant {
        VariantArg::L => lebesgue::lebesgue_relative(space, f, &a)?,
        VariantArg::Lrad => lebesgue::lebesgue_rad(space, f, &a)?,
        VariantArg::Second => lebesgue::second_kind_relative(space, f, &a)?,
        VariantArg::Ldiam => unreachable!("handled above"),
    };
    let mut text = format!("{} = {}, mesh = {mesh}\nattained at {}\n", report.variant, report.value, report.argmin_label);
    if per_point {
        text.push_str(&per_point_table(&report));
    }
    let mut json = serde_json::to_value(&report).expect("serializable");
    json["mesh"] = serde_json::to_value(&mesh).expect("serializable");
    if !per_point {
        json.as_object_mut().expect("object").remove("per_point");
    }
    Ok(Output::ok(text, json))
}

fn check(
    lemma: Lemma,
    space: &Option<PathBuf>,
    cover_file: &Option<PathBuf>,
    homothety_file: &Option<PathBuf>,
    subset: &Option<String>,
    ambient: &Option<String>,
    radius: &Option<String>,
) -> Outcome {
    match lemma {
        Lemma::Homothety => {
            let h = read_json::<HomothetyDoc>(required(homothety_file, "homothety")?)?.build()?;
            let v = homothety::verify_homothety(&h);
            let text = match &v.worst {
                Some(w) => format!("{}: worst pair ({}, {}) on the {:?} side\n", pass_word(v.holds), w.a, w.b, w.side),
                None => format!("{}\n", pass_word(v.holds)),
            };
            return Ok(Output { text, json: serde_json::to_value(&v)?, pass: v.holds });
        }
        Lemma::Transport => return check_transport(homothety_file, cover_file, subset, ambient),
        _ => {}
    }
    let (space, family) = load(required(space, "space")?, required(cover_file, "cover")?)?;
    match (space, family) {
        (AnySpace::Finite(space), AnyFamily::Finite(f)) => check_finite(lemma, &space, &f, subset, ambient, radius),
        (AnySpace::Slice(slice), AnyFamily::Boxes(f)) => check_boxes(lemma, &slice, &f, subset, ambient, radius),
        _ => unreachable!("families are built against their space"),
    }
}

fn chain_line(terms: &[&Value], holds: bool) -> String {
    let joined: Vec<String> = terms.iter().map(|v| v.to_string()).collect();
    format!("{} {}\n", joined.join(" ≤ "), pass_word(holds))
}

fn check_finite(
    lemma: Lemma,
    space: &FiniteMetricSpace,
    f: &FiniteFamily,
    subset: &Option<String>,
    ambient: &Option<String>,
    radius: &Option<String>,
) -> Outcome {
    let all = space.all_points();
    let (text, json, pass) = match lemma {
        Lemma::Chain => {
            let a = label_set(space, subset)?;
            let b = label_set(space, ambient)?;
            let r = lebesgue::chain_report(space, f, &a, &b)?;
            (chain_line(&r.terms(), r.holds), serde_json::to_value(&r)?, r.holds)
        }
        Lemma::Diam => {
            let l = lebesgue::lebesgue(space, f)?.value;
            let d = lebesgue::lebesgue_diam(space, f)?.value;
            let two_l = l.scale(&Rational::from_integer(2.into()))?;
            let holds = l <= d && d <= two_l;
            (chain_line(&[&l, &d, &two_l], holds), json!({"L": l, "L_diam": d, "2L": two_l, "holds": holds}), holds)
        }
        Lemma::Rad => {
            let l = lebesgue::lebesgue(space, f)?;
            let r = lebesgue::lebesgue_rad(space, f, &all)?;
            let holds = l.value == r.value && l.per_point.iter().zip(&r.per_point).all(|(p, q)| p.value == q.value);
            let text = format!("L = {}, L_rad = {} {}\n", l.value, r.value, pass_word(holds));
            (text, json!({"L": l.value, "L_rad": r.value, "holds": holds}), holds)
        }
        Lemma::SecondKind => {
            let s = lebesgue::second_kind_relative(space, f, &all)?.value;
            let mesh = cover::mesh(space, f);
            let holds = s <= mesh;
            (chain_line(&[&s, &mesh], holds), json!({"L_second": s, "mesh": mesh, "holds": holds}), holds)
        }
        Lemma::Refinement => {
            let r: Value = radius.as_deref().ok_or_else(|| Failure::Invalid("--radius is required".into()))?.parse()?;
            let l = lebesgue::lebesgue(space, f)?.value;
            let refine = lebesgue::ball_refinement_holds(space, f, &r);
            refinement_output(&r, &l, refine.holds, refine.witness.map(|w| space.label(w.center).to_string()))
        }
        Lemma::Transport | Lemma::Homothety => unreachable!("dispatched earlier"),
    };
    Ok(Output { text, json, pass })
}

/// The checked statement is `r < L  =>  balls of radius r refine`.
fn refinement_output(r: &Value, l: &Value, holds: bool, witness: Option<String>) -> (String, serde_json::Value, bool) {
    let pass = holds || r >= l;
    let rel = if r < l { "<" } else { ">=" };
    let mut text = format!("r = {r} {rel} L = {l}: balls {} {}\n", if holds { "refine" } else { "do not refine" }, pass_word(pass));
    if let Some(w) = &witness {
        let _ = writeln!(text, "the ball at {w} fits in no member");
    }
    (text, json!({"radius": r, "L": l, "refines": holds, "witness": witness, "holds": pass}), pass)
}

fn check_boxes(
    lemma: Lemma,
    slice: &SliceSpace,
    f: &BoxFamily,
    subset: &Option<String>,
    ambient: &Option<String>,
    radius: &Option<String>,
) -> Outcome {
    let a = slice_subset(slice, subset)?;
    let (text, json, pass) = match lemma {
        Lemma::Chain => {
            let b = slice_subset(slice, ambient)?;
            if !a.is_subset_of(&b) {
                return Err(Failure::Invalid(format!("{a} is not contained in {b}")));
            }
            let in_x = boxlab::box_lebesgue_relative(slice, f, &a)?.value;
            let in_b = boxlab::box_lebesgue_relative(&b, f, &a)?.value;
            let in_a = boxlab::box_lebesgue_relative(&a, f, &a)?.value;
            let holds = in_x <= in_b && in_b <= in_a;
            let json = json!({"in_ambient": in_x, "in_b": in_b, "intrinsic": in_a, "holds": holds});
            (chain_line(&[&in_x, &in_b, &in_a], holds), json, holds)
        }
        Lemma::Refinement => {
            let r: Rational = coverlens::value::parse_rational(
                radius.as_deref().ok_or_else(|| Failure::Invalid("--radius is required".into()))?,
            )?;
            let l = boxlab::box_lebesgue_relative(slice, f, &a)?.value;
            let refine = boxlab::box_ball_refinement(slice, f, &a, &r)?;
            refinement_output(&Value::abs_rational(&r), &l, refine.holds, refine.witness.map(|w| format_point(&w)))
        }
        _ => return Err(Failure::Invalid("box families support the chain and refinement checks".into())),
    };
    Ok(Output { text, json, pass })
}

fn check_transport(
    homothety_file: &Option<PathBuf>,
    cover_file: &Option<PathBuf>,
    subset: &Option<String>,
    ambient: &Option<String>,
) -> Outcome {
    let h = read_json::<HomothetyDoc>(required(homothety_file, "homothety")?)?.build()?;
    let cover_doc = read_json::<CoverDoc>(required(cover_file, "cover")?)?;
    let mode = match ambient.as_deref() {
        None | Some("image") => AmbientMode::Image,
        Some("codomain") => AmbientMode::Codomain,
        Some(other) => return Err(Failure::Invalid(format!("--ambient must be image or codomain, got {other:?}"))),
    };
    let input = match &h.map {
        HomothetyMap::Explicit { domain, codomain, .. } => {
            let AnyFamily::Finite(family) = cover_doc.build(&AnySpace::Finite(codomain.clone()))? else {
                unreachable!("finite space gives a finite family")
            };
            TransportInput::Finite { v: label_set(domain, subset)?, family }
        }
        HomothetyMap::Inclusion { domain_dim, codomain_dim, norm, .. } => {
            let cod = SliceSpace::full(*codomain_dim, *norm);
            let AnyFamily::Boxes(family) = cover_doc.build(&AnySpace::Slice(cod))? else {
                unreachable!("slice gives a box family")
            };
            let v = slice_subset(&SliceSpace::full(*domain_dim, *norm), subset)?;
            TransportInput::Boxes { v, family }
        }
    };
    let r = homothety::transport_lemma_check(&h, &input, mode)?;
    let mut text = format!("ambient: {}\n", r.ambient);
    for i in &r.inequalities {
        let _ = writeln!(text, "{:15} {} ≤ {} {}", i.name, i.lhs, i.rhs, pass_word(i.holds));
    }
    let pass = r.all_hold();
    Ok(Output { text, json: serde_json::to_value(&r)?, pass })
}

fn run_reproduce(id: &str) -> Outcome {
    let r = reproduce::reproduce(id).map_err(Failure::Invalid)?;
    let mut text = format!("{}\n", r.id);
    for l in &r.lines {
        let _ = writeln!(text, "  {:44} {:14} expected {:14} {}", l.name, l.got, l.expected, pass_word(l.pass));
    }
    Ok(Output { text, json: serde_json::to_value(&r)?, pass: r.pass })
}

fn fuzz(config: &Option<PathBuf>, seed: Option<u64>, trials: Option<usize>) -> Outcome {
    let mut cfg: FuzzConfig = match config {
        Some(p) => read_json(p)?,
        None => FuzzConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    let report = oracle::fuzz_suite(&cfg);
    let dir = oracle::results_dir();
    let files = oracle::write_reproducers(&report, &dir)?;
    let mut text = format!(
        "seed {}: {} instances, {} checks, {} violations, {} findings\n",
        cfg.seed,
        report.instances,
        report.checks,
        report.violations.len(),
        report.findings.len()
    );
    for v in &report.violations {
        let _ = writeln!(text, "violation {} ({} trial {}): expected {}, got {}", v.invariant, v.kind, v.trial, v.expected, v.got);
    }
    if !files.is_empty() {
        let _ = writeln!(text, "reproducers written to {}", dir.display());
    }
    let _ = writeln!(text, "{}", pass_word(report.passed()));
    let json = json!({
        "seed": cfg.seed,
        "instances": report.instances,
        "checks": report.checks,
        "violations": report.violations,
        "findings": report.findings.len(),
        "reproducers": files,
    });
    Ok(Output { text, json, pass: report.passed() })
}

fn validate(space: &Option<PathBuf>, cover_file: &Option<PathBuf>, homothety_file: &Option<PathBuf>) -> Outcome {
    let mut text = String::new();
    let mut json = serde_json::Map::new();
    if let Some(path) = space {
        let built = read_json::<SpaceDoc>(path)?.build()?;
        if let AnySpace::Finite(s) = &built {
            let report = validate_metric(s);
            if !report.is_valid() {
                return Err(Failure::Invalid(format!("not a metric: {:?}", report.violations)));
            }
            let _ = writeln!(text, "space: {} points, metric", s.len());
            json.insert("points".into(), s.len().into());
        } else if let AnySpace::Slice(s) = &built {
            let _ = writeln!(text, "space: slice {s}");
        }
        if let Some(cpath) = cover_file {
            let family = read_json::<CoverDoc>(cpath)?.build(&built)?;
            let covered = match (&built, &family) {
                (AnySpace::Finite(s), AnyFamily::Finite(f)) => {
                    let c = cover::is_covering_family(s, f, &s.all_points())?;
                    c.witness.map(|x| s.label(x).to_string())
                }
                (AnySpace::Slice(s), AnyFamily::Boxes(f)) => match s.is_bounded() {
                    true => cover::is_box_covering_family(s, f, s)?.witness.map(|w| format_point(&w)),
                    false => None,
                },
                _ => unreachable!("families are built against their space"),
            };
            match covered {
                Some(w) => return Err(Failure::Invalid(format!("point {w} lies in no member"))),
                None => {
                    let _ = writeln!(text, "cover: {} members, covers", family_len(&family));
                }
            }
            json.insert("members".into(), family_len(&family).into());
        }
    } else if cover_file.is_some() {
        return Err(Failure::Invalid("--cover needs --space".into()));
    }
    if let Some(path) = homothety_file {
        let h = read_json::<HomothetyDoc>(path)?.build()?;
        let v = homothety::verify_homothety(&h);
        if !v.holds {
            return Err(Failure::Invalid(format!("map violates its bounds: {:?}", v.worst)));
        }
        let _ = writeln!(text, "homothety: verified");
        json.insert("homothety".into(), true.into());
    }
    text.push_str("valid\n");
    Ok(Output::ok(text, json))
}

fn family_len(f: &AnyFamily) -> usize {
    match f {
        AnyFamily::Finite(f) => f.len(),
        AnyFamily::Boxes(f) => f.len(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // generated instances trip input warnings by the thousand
    let level = if matches!(cli.command, Command::Fuzz { .. }) { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let outcome = match &cli.command {
        Command::Compute { space, cover, variant, subset, ambient, per_point } => {
            compute(space, cover, *variant, subset, ambient, *per_point)
        }
        Command::Check { lemma, space, cover, homothety, subset, ambient, radius } => {
            check(*lemma, space, cover, homothety, subset, ambient, radius)
        }
        Command::Reproduce { id } => run_reproduce(id),
        Command::Fuzz { config, seed, trials } => fuzz(config, *seed, *trials),
        Command::Validate { space, cover, homothety } => validate(space, cover, homothety),
    };
    match outcome {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("serializable"));
            } else {
                print!("{}", out.text);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
