//! Batch front end: loads a fixture, runs one command, returns a canonical JSON report.

use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use relout::candidates::candidates;
use relout::error::Error;
use relout::fixture::{format_path, load_bundled, parse_fixture, parse_word_bounded, Fixture, BUNDLED};
use relout::freeprod::{FPAutomorphism, Word};
use relout::lipschitz::{min_displacement_on_simplex, stretch, stretch_witness, CertifiedValue};
use relout::marked_graph::MarkedGraph;
use relout::minset::{explore, lambda_min, spectrum, ExploreOptions, MinSetAtlas};
use relout::rational::{fmt_decimal, fmt_q, parse_q, q, Interval, Q};
use relout::traintrack::dynamics::{bcc_bound, bcc_measured};
use relout::traintrack::{is_train_track, SearchOptions, TrainTrackResult};
use relout::limits::{discreteness_scan, twist_check, LimitLength, LimitLengthFunction, LimitOptions};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const DIGITS: usize = 16;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "relout", version, about = "Stretch factors, train tracks, limit trees and Min-set exploration for free products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Fixture file ("-" reads stdin). Without it the first positional argument names a bundled fixture or a file.
    #[arg(long, global = true)]
    pub fixture: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance as a rational, e.g. 1/1000000000.
    #[arg(long, global = true)]
    pub tol: Option<String>,
    #[arg(long, global = true)]
    pub cap_simplices: Option<usize>,
    #[arg(long, global = true)]
    pub cap_power: Option<usize>,
    #[arg(long, global = true)]
    pub length_cap: Option<usize>,
    /// Automorphism name in the fixture.
    #[arg(long, global = true, default_value = "phi")]
    pub aut: String,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// [FIXTURE] POINT WORD...: translation lengths.
    Length { args: Vec<String> },
    /// [FIXTURE] X Y: the stretch factor Λ(X, Y) and a candidate realizing it.
    Stretch { args: Vec<String> },
    /// [FIXTURE] [POINT]: Λ(X, Xφ).
    Displacement { args: Vec<String> },
    /// [FIXTURE] [POINT]: certified minimum of the displacement over the open simplex of POINT.
    MinSimplex { args: Vec<String> },
    /// [FIXTURE] [POINT]: a train-track representative found from POINT.
    Traintrack { args: Vec<String> },
    /// [FIXTURE] [POINT]: atlas of the minimally displaced set up to the action of φ.
    Explore { args: Vec<String> },
    /// [FIXTURE] [C]: displacement values below C.
    Spectrum { args: Vec<String> },
    /// [FIXTURE] WORD...: lengths in the attracting tree.
    Attract { args: Vec<String> },
    /// [FIXTURE]: dichotomy scan for the attracting and repelling trees.
    Discreteness { args: Vec<String> },
    /// [FIXTURE...]: property suite over the given (default: all bundled) fixtures.
    CheckInvariants { args: Vec<String> },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Length { .. } => "length",
            Command::Stretch { .. } => "stretch",
            Command::Displacement { .. } => "displacement",
            Command::MinSimplex { .. } => "min-simplex",
            Command::Traintrack { .. } => "traintrack",
            Command::Explore { .. } => "explore",
            Command::Spectrum { .. } => "spectrum",
            Command::Attract { .. } => "attract",
            Command::Discreteness { .. } => "discreteness",
            Command::CheckInvariants { .. } => "check-invariants",
        }
    }

    fn args(&self) -> &[String] {
        match self {
            Command::Length { args }
            | Command::Stretch { args }
            | Command::Displacement { args }
            | Command::MinSimplex { args }
            | Command::Traintrack { args }
            | Command::Explore { args }
            | Command::Spectrum { args }
            | Command::Attract { args }
            | Command::Discreteness { args }
            | Command::CheckInvariants { args } => args,
        }
    }
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_)
            | Error::IndexOutOfRange(_)
            | Error::NotAGroup(_)
            | Error::InvalidSystem(_)
            | Error::UnverifiedInverse(_)
            | Error::InvalidGraph(_) => EXIT_PARSE,
            Error::CapExceeded(_) | Error::TrainTrackFailure(_) => EXIT_PARTIAL,
            Error::Hypothesis(_)
            | Error::NotExpanding
            | Error::ReducibleDetected(_)
            | Error::ReducibleMatrix
            | Error::NotTrainTrack(_) => EXIT_HYPOTHESIS,
            _ => EXIT_ERROR,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_PARSE, message: msg.into() }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// A finished command: the report and the process exit code.
#[derive(Debug)]
pub struct Output {
    pub report: String,
    pub code: i32,
    pub out: Option<PathBuf>,
}

pub fn interval_json(i: &Interval) -> Value {
    let [lo, hi] = i.to_strings(DIGITS);
    json!([lo, hi])
}

fn value_json(v: &CertifiedValue) -> Value {
    json!({"interval": interval_json(&v.interval()), "lower": fmt_q(&v.lower), "upper": fmt_q(&v.upper)})
}

fn word_json(fs: &relout::freeprod::Fs, w: &Word) -> Value {
    Value::String(fs.format_word(w))
}

struct Ctx<'a> {
    cli: &'a Cli,
    fx: Fixture,
    args: Vec<String>,
}

impl Ctx<'_> {
    fn phi(&self) -> Outcome<&FPAutomorphism> {
        Ok(self.fx.automorphism(&self.cli.aut)?)
    }

    fn param_str(&self, key: &str) -> Option<String> {
        self.fx.params.get(key).and_then(|v| v.as_str()).map(str::to_string)
    }

    /// POINT from the positional arguments, else the fixture's default point.
    fn point_arg(&self, i: usize) -> Outcome<(String, &MarkedGraph)> {
        let name = match self.args.get(i) {
            Some(n) => n.clone(),
            None => self.param_str("point").ok_or_else(|| usage("no POINT given and the fixture has no default point"))?,
        };
        let x = self.fx.point(&name)?;
        Ok((name, x))
    }

    fn tol(&self, default: Q) -> Outcome<Q> {
        match &self.cli.tol {
            Some(s) => {
                let t = parse_q(s)?;
                if t <= Q::from_integer(0.into()) {
                    return Err(usage("--tol must be positive"));
                }
                Ok(t)
            }
            None => Ok(default),
        }
    }

    fn search(&self) -> Outcome<SearchOptions> {
        Ok(SearchOptions { tol: self.tol(SearchOptions::default().tol)?, ..Default::default() })
    }

    fn explore_opts(&self) -> Outcome<ExploreOptions> {
        let d = ExploreOptions::default();
        Ok(ExploreOptions {
            max_simplices: self.cli.cap_simplices.unwrap_or(d.max_simplices),
            max_power: self.cli.cap_power.map_or(d.max_power, |p| p as i64),
            tol: self.tol(d.tol.clone())?,
            search: self.search()?,
        })
    }

    fn limit_opts(&self) -> Outcome<LimitOptions> {
        let d = LimitOptions::default();
        Ok(LimitOptions { tol: self.tol(d.tol.clone())?, max_power: self.cli.cap_power.unwrap_or(d.max_power), ..d })
    }

    /// Train-track point reached from the POINT argument at position `i` (or the default point).
    fn train_track(&self, phi: &FPAutomorphism, i: usize) -> Outcome<TrainTrackResult> {
        let (_, x) = self.point_arg(i)?;
        Ok(lambda_min(x, phi, &self.search()?)?.1)
    }
}

fn load_fixture(cli: &Cli, stdin: &mut dyn Read) -> Outcome<(Fixture, Vec<String>)> {
    let args = cli.command.args().to_vec();
    if let Some(path) = &cli.fixture {
        let src = if path.as_os_str() == "-" {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| usage(format!("reading stdin: {e}")))?;
            s
        } else {
            std::fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?
        };
        return Ok((parse_fixture(&src)?, args));
    }
    let Some(first) = args.first() else { return Err(usage("missing FIXTURE")) };
    let fx = fixture_by_name(first)?;
    Ok((fx, args[1..].to_vec()))
}

/// A bundled fixture name or a path to a fixture file.
pub fn fixture_by_name(name: &str) -> Outcome<Fixture> {
    if BUNDLED.contains(&name) {
        return Ok(load_bundled(name)?);
    }
    let src = std::fs::read_to_string(name).map_err(|e| usage(format!("{name:?} is neither a bundled fixture nor a readable file: {e}")))?;
    Ok(parse_fixture(&src)?)
}

fn envelope(command: &str, fx: Option<&Fixture>, body: std::result::Result<(Value, i32), &Failure>) -> (Value, i32) {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("tool".into(), json!({"name": "relout", "version": VERSION}));
    m.insert("fixture".into(), fx.map_or(Value::Null, |f| json!({"name": f.name, "sha256": f.hash})));
    let code = match body {
        Ok((v, code)) => {
            m.insert("result".into(), v);
            code
        }
        Err(f) => {
            m.insert("error".into(), json!(f.message));
            f.code
        }
    };
    let status = match code {
        EXIT_OK => "ok",
        EXIT_PARTIAL => "partial",
        EXIT_HYPOTHESIS => "hypothesis-violation",
        EXIT_PARSE => "parse-error",
        _ => "error",
    };
    m.insert("status".into(), json!(status));
    m.insert("exit_code".into(), json!(code));
    (Value::Object(m), code)
}

/// Canonical rendering: keys sorted, two-space indentation, trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, stdin: &mut dyn Read) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                return Output { report: e.to_string(), code: EXIT_OK, out: None };
            }
            let (v, code) = envelope("", None, Err(&usage(e.to_string())));
            return Output { report: render(&v), code, out: None };
        }
    };
    let out = cli.out.clone();
    let (v, code) = run_cli(&cli, stdin);
    Output { report: render(&v), code, out }
}

pub fn run_cli(cli: &Cli, stdin: &mut dyn Read) -> (Value, i32) {
    let name = cli.command.name();
    if let Command::CheckInvariants { .. } = cli.command {
        return envelope(name, None, check_invariants(cli, stdin).as_ref().map(|v| v.clone()));
    }
    let (fx, args) = match load_fixture(cli, stdin) {
        Ok(p) => p,
        Err(f) => return envelope(name, None, Err(&f)),
    };
    let ctx = Ctx { cli, fx, args };
    let body = dispatch(&ctx);
    envelope(name, Some(&ctx.fx), body.as_ref().map(|v| v.clone()))
}

fn dispatch(ctx: &Ctx) -> Outcome<(Value, i32)> {
    match ctx.cli.command {
        Command::Length { .. } => length(ctx),
        Command::Stretch { .. } => cmd_stretch(ctx),
        Command::Displacement { .. } => cmd_displacement(ctx),
        Command::MinSimplex { .. } => min_simplex(ctx),
        Command::Traintrack { .. } => traintrack(ctx),
        Command::Explore { .. } => cmd_explore(ctx),
        Command::Spectrum { .. } => cmd_spectrum(ctx),
        Command::Attract { .. } => attract(ctx),
        Command::Discreteness { .. } => discreteness(ctx),
        Command::CheckInvariants { .. } => unreachable!(),
    }
}

fn ok(v: Value) -> Outcome<(Value, i32)> {
    Ok((v, EXIT_OK))
}

fn length(ctx: &Ctx) -> Outcome<(Value, i32)> {
    let (pname, x) = ctx.point_arg(0)?;
    if ctx.args.len() < 2 {
        return Err(usage("length needs POINT WORD..."));
    }
    let fs = &ctx.fx.fs;
    let mut rows = Vec::new();
    for s in &ctx.args[1..] {
        let w = parse_word_bounded(fs, s)?;
        let l = x.translation_length(&w);
        rows.push(json!({"word": fs.format_word(&w), "length": fmt_q(&l), "hyperbolic": fs.is_hyperbolic(&w)}));
    }
    ok(json!({"point": pname, "lengths": rows}))
}

fn cmd_stretch(ctx: &Ctx) -> Outcome<(Value, i32)> {
    if ctx.args.len() != 2 {
        return Err(usage("stretch needs X Y"));
    }
    let x = ctx.fx.point(&ctx.args[0])?;
    let y = ctx.fx.point(&ctx.args[1])?;
    let (s, w) = stretch_witness(x, y);
    ok(json!({
        "from": ctx.args[0],
        "to": ctx.args[1],
        "stretch": fmt_q(&s),
        "witness": word_json(&ctx.fx.fs, &w),
        "volumes": {ctx.args[0].clone(): fmt_q(&x.volume()), ctx.args[1].clone(): fmt_q(&y.volume())},
    }))
}

fn cmd_displacement(ctx: &Ctx) -> Outcome<(Value, i32)> {
    let (pname, x) = ctx.point_arg(0)?;
    let phi = ctx.phi()?;
    let (d, w) = stretch_witness(x, &x.twist(phi));
    ok(json!({"point": pname, "automorphism": ctx.cli.aut, "displacement": fmt_q(&d), "witness": word_json(&ctx.fx.fs, &w)}))
}

fn lengths_json(x: &MarkedGraph, exact: bool) -> Value {
    let m: Map<String, Value> = x
        .graph
        .edges
        .iter()
        .zip(&x.lengths)
        .map(|(e, l)| (e.name.clone(), json!(if exact { fmt_q(l) } else { fmt_decimal(l, DIGITS, false) })))
        .collect();
    Value::Object(m)
}

fn min_simplex(ctx: &Ctx) -> Outcome<(Value, i32)> {
    let (pname, x) = ctx.point_arg(0)?;
    let phi = ctx.phi()?;
    let m = min_displacement_on_simplex(x, phi, &ctx.tol(q(1, 1_000_000_000_000))?)?;
    let y = x.with_lengths(m.minimizer.clone())?;
    ok(json!({
        "point": pname,
        "value": value_json(&m.value),
        "minimizer": lengths_json(&y, true),
        "minimizer_decimal": lengths_json(&y, false),
        "interior": m.interior,
        "tight_candidates": m.tight.len(),
        "bisection_steps": m.steps,
    }))
}

fn tt_json(t: &TrainTrackResult) -> Value {
    let f = &t.map;
    let g = &f.x.graph;
    let images: Map<String, Value> =
        g.edges.iter().zip(&f.edge_images).map(|(e, p)| (e.name.clone(), json!(format_path(g, p)))).collect();
    let vertices: Vec<Value> = g.vertices.iter().map(|v| json!(v.name)).collect();
    let edges: Vec<Value> = g
        .edges
        .iter()
        .map(|e| json!({"name": e.name, "from": g.vertices[e.from].name, "to": g.vertices[e.to].name}))
        .collect();
    json!({
        "lambda": interval_json(&t.pf.lambda),
        "lengths": lengths_json(&f.x, false),
        "lengths_exact": lengths_json(&f.x, true),
        "edge_images": images,
        "transition_matrix": f.transition_matrix(),
        "graph": {"vertices": vertices, "edges": edges},
        "displacement": value_json(&t.displacement),
        "simplices_visited": t.simplices,
        "train_track": is_train_track(f).ok,
    })
}

fn traintrack(ctx: &Ctx) -> Outcome<(Value, i32)> {
    let phi = ctx.phi()?;
    let (pname, x) = ctx.point_arg(0)?;
    let (_, t) = lambda_min(x, phi, &ctx.search()?)?;
    let mut v = tt_json(&t);
    v["start"] = json!(pname);
    ok(v)
}

fn atlas_json(a: &MinSetAtlas) -> Value {
    let sims: Vec<Value> = a
        .simplices
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "index": i,
                "vertices": s.point.graph.num_vertices(),
                "edges": s.point.num_edges(),
                "status": s.status.label(),
                "orbit": s.orbit,
                "identified": s.identified.map_or(Value::Null, |(o, k)| json!({"with": o, "power": k})),
                "value": interval_json(&s.value.interval()),
            })
        })
        .collect();
    json!({
        "lambda": interval_json(&a.lambda),
        "complete": a.complete,
        "num_simplices": a.simplices.len(),
        "num_orbits": a.num_orbits(),
        "fundamental_domain": a.fundamental_domain,
        "frontier": a.frontier,
        "adjacency": a.adjacency,
        "simplices": sims,
    })
}

fn build_atlas(ctx: &Ctx) -> Outcome<(MinSetAtlas, ExploreOptions)> {
    let phi = ctx.phi()?;
    let opts = ctx.explore_opts()?;
    let t = ctx.train_track(phi, 0)?;
    let a = explore(phi, &t, &opts)?;
    Ok((a, opts))
}

fn cmd_explore(ctx: &Ctx) -> Outcome<(Value, i32)> {
    let (a, opts) = build_atlas(ctx)?;
    let code = if a.complete { EXIT_OK } else { EXIT_PARTIAL };
    let mut v = atlas_json(&a);
    v["cap_simplices"] = json!(opts.max_simplices);
    v["cap_power"] = json!(opts.max_power);
    Ok((v, code))
}

fn cmd_spectrum(ctx: &Ctx) -> Outcome<(Value, i32)> {
    let c = match ctx.args.first() {
        Some(s) => parse_q(s)?,
        None => parse_q(&ctx.param_str("spectrum_cap").ok_or_else(|| usage("no C given and the fixture has no spectrum_cap"))?)?,
    };
    let phi = ctx.phi()?;
    let opts = ctx.explore_opts()?;
    let (_, x) = ctx.point_arg(usize::MAX)?;
    let (_, t) = lambda_min(x, phi, &opts.search)?;
    let a = explore(phi, &t, &opts)?;
    let sp = spectrum(phi, &c, &a, &opts)?;
    let values: Vec<Value> =
        sp.values.iter().map(|v| json!({"value": interval_json(&v.value.interval()), "simplices": v.simplices})).collect();
    let code = if sp.complete && a.complete { EXIT_OK } else { EXIT_PARTIAL };
    Ok((json!({"cap": fmt_q(&c), "lambda": interval_json(&a.lambda), "values": values, "explored": sp.explored, "complete": sp.complete}), code))
}

fn limit_json(fs: &relout::freeprod::Fs, g: &Word, r: &LimitLength) -> Value {
    json!({
        "word": fs.format_word(g),
        "interval": interval_json(&r.interval),
        "power": r.n,
        "converged": r.converged,
        "periodic": r.periodic,
        "monotone": r.monotone,
    })
}

fn attract(ctx: &Ctx) -> Outcome<(Value, i32)> {
    if ctx.args.is_empty() {
        return Err(usage("attract needs WORD..."));
    }
    let phi = ctx.phi()?;
    let t = ctx.train_track(phi, usize::MAX)?;
    let xl = LimitLengthFunction::new(t.map.clone())?;
    let opts = ctx.limit_opts()?;
    let fs = &ctx.fx.fs;
    let mut rows = Vec::new();
    let mut all = true;
    for s in &ctx.args {
        let g = parse_word_bounded(fs, s)?;
        let r = xl.attracting_length(&g, &opts);
        all &= r.converged;
        rows.push(limit_json(fs, &g, &r));
    }
    let v = json!({
        "lambda": interval_json(&xl.lambda),
        "bcc": fmt_decimal(&xl.bcc, DIGITS, true),
        "kappa": fmt_decimal(&xl.kappa, DIGITS * 2, true),
        "point": lengths_json(xl.point(), false),
        "tol": fmt_q(&opts.tol),
        "lengths": rows,
    });
    Ok((v, if all { EXIT_OK } else { EXIT_PARTIAL }))
}

fn discreteness(ctx: &Ctx) -> Outcome<(Value, i32)> {
    let phi = ctx.phi()?;
    let inv = phi.invert();
    let xl = LimitLengthFunction::new(ctx.train_track(phi, 0)?.map)?;
    let yl = LimitLengthFunction::new(ctx.train_track(&inv, 0)?.map)?;
    let cap = ctx.cli.length_cap.unwrap_or(8);
    let opts = ctx.limit_opts()?;
    let rep = discreteness_scan(&xl, &yl, cap, &opts);
    let fs = &ctx.fx.fs;
    let entries: Vec<Value> = rep
        .entries
        .iter()
        .map(|e| {
            json!({
                "word": fs.format_word(&e.g),
                "attracting": interval_json(&e.attracting.interval),
                "repelling": interval_json(&e.repelling.interval),
                "class": e.class.label(),
            })
        })
        .collect();
    let violations: Vec<Value> = rep.violations.iter().map(|&i| json!(fs.format_word(&rep.entries[i].g))).collect();
    let v = json!({
        "length_cap": cap,
        "words": rep.entries.len(),
        "epsilon_empirical": rep.epsilon.as_ref().map_or(Value::Null, |e| json!(fmt_decimal(e, DIGITS, false))),
        "both_zero_exact": rep.exact_zero,
        "both_zero_inexact": rep.inexact_zero,
        "violations": violations,
        "entries": entries,
    });
    let code = if rep.violations.is_empty() { EXIT_OK } else { EXIT_HYPOTHESIS };
    Ok((v, code))
}

#[derive(Debug)]
struct PropertyRow {
    fixture: String,
    property: &'static str,
    status: &'static str,
    detail: String,
}

fn row(fixture: &str, property: &'static str, pass: bool, detail: impl Into<String>) -> PropertyRow {
    PropertyRow { fixture: fixture.into(), property, status: if pass { "pass" } else { "fail" }, detail: detail.into() }
}

fn skip(fixture: &str, property: &'static str, detail: impl Into<String>) -> PropertyRow {
    PropertyRow { fixture: fixture.into(), property, status: "skip", detail: detail.into() }
}

/// The property suite on one fixture.
pub fn fixture_properties(fx: &Fixture, aut: &str) -> Vec<Value> {
    properties(fx, aut)
        .into_iter()
        .map(|r| json!({"fixture": r.fixture, "property": r.property, "status": r.status, "detail": r.detail}))
        .collect()
}

fn properties(fx: &Fixture, aut: &str) -> Vec<PropertyRow> {
    let name = fx.name.as_str();
    let mut rows = Vec::new();
    let back = parse_fixture(&fx.to_json()).map(|b| b.to_raw() == fx.to_raw());
    rows.push(row(name, "fixture-roundtrip", back == Ok(true), ""));
    let gens = fx.fs.generators();
    for (aname, phi) in &fx.automorphisms {
        let good = gens.iter().all(|g| &phi.apply_inverse(&phi.apply(g)) == g && &phi.apply(&phi.apply_inverse(g)) == g);
        rows.push(row(name, "automorphism-inverse", good, aname.clone()));
    }
    let pts: Vec<(&String, &MarkedGraph)> = fx.points.iter().collect();
    let one = Q::from_integer(1.into());
    let id = pts.iter().all(|(_, x)| stretch(x, x) == one);
    rows.push(row(name, "stretch-identity", id, ""));
    let mut tri = true;
    for (_, x) in &pts {
        for (_, y) in &pts {
            for (_, z) in &pts {
                tri &= stretch(x, z) <= stretch(x, y) * stretch(y, z);
            }
        }
    }
    rows.push(row(name, "stretch-triangle", tri, format!("{} points", pts.len())));
    let words = fx.fs.cyclic_words(5);
    let mut cand = true;
    for (_, x) in &pts {
        for (_, y) in &pts {
            let s = stretch(x, y);
            cand &= words.iter().all(|w| y.translation_length(w) <= &s * x.translation_length(w));
        }
    }
    rows.push(row(name, "candidates-dominate-words", cand, format!("{} cyclic words", words.len())));
    let Ok(phi) = fx.automorphism(aut) else {
        rows.push(skip(name, "automorphism", format!("no automorphism {aut:?}")));
        return rows;
    };
    let mut eq = true;
    for (_, x) in &pts {
        for (_, y) in &pts {
            eq &= stretch(&x.twist(phi), &y.twist(phi)) == stretch(x, y);
        }
    }
    rows.push(row(name, "twist-equivariance", eq, ""));
    let cands_ok = pts.iter().all(|(_, x)| !candidates(x).is_empty());
    rows.push(row(name, "candidates-nonempty", cands_ok, ""));

    let start = fx.params.get("point").and_then(|v| v.as_str()).and_then(|p| fx.points.get(p));
    let Some(x0) = start else {
        rows.push(skip(name, "train-track", "fixture has no default point"));
        return rows;
    };
    let tt = match lambda_min(x0, phi, &SearchOptions::default()) {
        Ok((_, t)) => t,
        Err(e) => {
            rows.push(skip(name, "train-track", e.to_string()));
            return rows;
        }
    };
    let f = &tt.map;
    rows.push(row(name, "train-track", is_train_track(f).ok && f.verify(), ""));
    let st = f.stretches();
    let (smin, smax) = (st.iter().min().unwrap().clone(), st.iter().max().unwrap().clone());
    let cw = tt.pf.lambda.overlaps(&Interval::new(smin, smax));
    rows.push(row(name, "collatz-wielandt", cw, interval_json(&tt.pf.lambda).to_string()));
    let disp_ok = pts.iter().all(|(_, x)| stretch(x, &x.twist(phi)) >= tt.pf.lambda.lo);
    rows.push(row(name, "displacement-above-lambda", disp_ok, ""));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let measured = bcc_measured(f, &mut rng, 20, 8);
    let bound = bcc_bound(f);
    rows.push(row(name, "bounded-cancellation", measured <= bound, format!("{} <= {}", fmt_decimal(&measured, 8, true), fmt_decimal(&bound, 8, true))));
    if tt.pf.lambda.lo <= one {
        rows.push(skip(name, "limit-twist", "not expanding"));
        return rows;
    }
    match LimitLengthFunction::new(f.clone()) {
        Ok(xl) => {
            let opts = LimitOptions { max_steps: 20_000, ..Default::default() };
            let good = gens.iter().all(|g| twist_check(&xl, g, &opts).ok);
            rows.push(row(name, "limit-twist", good, ""));
            let mono = gens.iter().all(|g| xl.attracting_length(g, &opts).monotone);
            rows.push(row(name, "limit-monotone", mono, ""));
        }
        Err(e) => rows.push(skip(name, "limit-twist", e.to_string())),
    }
    rows
}

fn check_invariants(cli: &Cli, stdin: &mut dyn Read) -> Outcome<(Value, i32)> {
    let args = cli.command.args();
    let mut fixtures = Vec::new();
    if cli.fixture.is_some() {
        fixtures.push(load_fixture(cli, stdin)?.0);
    }
    for a in args {
        fixtures.push(fixture_by_name(a)?);
    }
    if fixtures.is_empty() {
        for n in BUNDLED {
            fixtures.push(load_bundled(n)?);
        }
    }
    let mut rows = Vec::new();
    let mut hashes = Map::new();
    for fx in &fixtures {
        hashes.insert(fx.name.clone(), json!(fx.hash));
        rows.extend(fixture_properties(fx, &cli.aut));
    }
    let failed = rows.iter().filter(|r| r["status"] == "fail").count();
    let passed = rows.iter().filter(|r| r["status"] == "pass").count();
    let v = json!({"fixtures": hashes, "properties": rows, "passed": passed, "failed": failed});
    Ok((v, if failed == 0 { EXIT_OK } else { EXIT_HYPOTHESIS }))
}
