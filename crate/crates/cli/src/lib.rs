//! Command-line front end for einstein-lab.
//!
//! Exit codes: 0 success or all checks passed, 1 verified violation, 2 usage,
//! 3 margin (ball or grid does not fit the host), 4 solver non-convergence.

pub mod args;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use clap::Parser;
use einstein_lab::conditions::{
    auto_centers, einstein_report, fit_exponents, measure_all, resistance_doubling, strong_antidoubling,
    verify_inequalities, ExponentFit, Lab, SweepGrid,
};
use einstein_lab::io::read_graph;
use einstein_lab::walker::{mc_exit_sample, WalkConfig};
use einstein_lab::{generate, potential, BallSpec, Exec, Family, FamilySpec, Fixture, LabError, Vertex, WeightRule};
use serde::Serialize;
use serde_json::{json, Value};

use args::{
    Cli, Command, ComputeArgs, FamilyArgs, FamilyName, FitArgs, GraphArgs, GridArgs, GridCommand, McArgs, Quantity,
    VerifyArgs, WeightName,
};
use output::{fmt_num, opt, render, to_value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MARGIN: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lab(LabError),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Lab(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lab(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Lab(LabError::Io(e.to_string()))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lab(e) => match e {
                LabError::Margin { .. } | LabError::EmptyGrid(_) | LabError::InsufficientRadii { .. } => EXIT_MARGIN,
                LabError::NonConvergence { .. } => EXIT_CONVERGENCE,
                _ => EXIT_USAGE,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Lab(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Embedded in every report. Thread count is deliberately absent so that reports
/// do not depend on it.
#[derive(Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub graph: Value,
    pub grid: Option<SweepGrid>,
    pub seed: Option<u64>,
    pub timestamp: String,
    pub params: Value,
}

/// `SOURCE_DATE_EPOCH` when set, otherwise the current time.
fn timestamp() -> String {
    let at = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| DateTime::<Utc>::from_timestamp(s, 0))
        .unwrap_or_else(Utc::now);
    at.to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn manifest(command: &str, graph: &Value, grid: Option<&SweepGrid>, seed: Option<u64>, params: Value) -> Value {
    to_value(&RunManifest {
        tool: "einstein-lab",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        graph: graph.clone(),
        grid: grid.cloned(),
        seed,
        timestamp: timestamp(),
        params,
    })
}

fn family_spec(a: &FamilyArgs) -> CliResult<FamilySpec> {
    let need =
        |v: Option<u32>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this family")));
    let family = match a.family {
        None => return usage("give --graph or --family"),
        Some(FamilyName::Lattice) => Family::Lattice {
            dim: a.dim,
            side: a
                .side
                .ok_or_else(|| CliError::Usage("--side is required for lattice".into()))?,
        },
        Some(FamilyName::Sierpinski) => Family::Sierpinski {
            level: need(a.level, "level")?,
        },
        Some(FamilyName::Vicsek) => Family::Vicsek {
            level: need(a.level, "level")?,
        },
        Some(FamilyName::BinaryTree) => Family::BinaryTree {
            depth: need(a.depth, "depth")?,
        },
    };
    let weights = match a.weights {
        WeightName::Unit => WeightRule::Unit,
        WeightName::Radial => WeightRule::Radial { lambda: a.lambda },
    };
    Ok(FamilySpec { family, weights })
}

/// Loads the graph and describes its source for the manifest.
fn load(a: &GraphArgs) -> CliResult<(Fixture, Value)> {
    let (mut fx, mut source) = match &a.graph {
        Some(path) => (read_graph(path)?, json!({ "path": path.display().to_string() })),
        None => {
            let spec = family_spec(&a.family)?;
            (generate(&spec)?, json!({ "generator": to_value(&spec) }))
        }
    };
    if let Some(text) = &a.inject_asymmetry {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let bad = || CliError::Usage(format!("--inject-asymmetry expects U,V,FACTOR, got `{text}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let u: Vertex = parts[0].parse().map_err(|_| bad())?;
        let v: Vertex = parts[1].parse().map_err(|_| bad())?;
        let factor: f64 = parts[2].parse().map_err(|_| bad())?;
        fx.graph.inject_asymmetry(u, v, factor)?;
        source["inject_asymmetry"] = json!([u, v, factor]);
    }
    Ok((fx, source))
}

fn parse_vertex(fx: &Fixture, s: &str) -> CliResult<Vertex> {
    let v = if s == "center" {
        fx.center
            .ok_or_else(|| CliError::Usage("graph has no center directive".into()))?
    } else {
        s.parse().map_err(|_| CliError::Usage(format!("bad vertex `{s}`")))?
    };
    fx.graph.check_vertex(v)?;
    Ok(v)
}

fn parse_ball(fx: &Fixture, s: &str) -> CliResult<(Vertex, u32)> {
    let Some((x, r)) = s.split_once(',') else {
        return usage(format!("ball must be X,R, got `{s}`"));
    };
    let r = r
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad radius in `{s}`")))?;
    Ok((parse_vertex(fx, x.trim())?, r))
}

/// `a,b,c` or the inclusive range `a..b`.
pub fn parse_radii(s: &str) -> CliResult<Vec<u32>> {
    let bad = || CliError::Usage(format!("radii must be `a,b,c` or `a..b`, got `{s}`"));
    let radii: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if radii.is_empty() || radii.contains(&0) {
        return Err(bad());
    }
    Ok(radii)
}

fn parse_centers(fx: &Fixture, s: &str) -> CliResult<Vec<Vertex>> {
    match s {
        "auto5" => {
            let c = parse_vertex(fx, "center")?;
            Ok(auto_centers(&fx.graph, c)?)
        }
        _ => s.split(',').map(|t| parse_vertex(fx, t.trim())).collect(),
    }
}

/// Dyadic ladder `2, 4, 8, ...` up to the largest clean radius among the centers.
fn default_radii(fx: &Fixture, centers: &[Vertex]) -> CliResult<Vec<u32>> {
    let mut reach = 0;
    for &x in centers {
        reach = reach.max(fx.graph.reach(x)?.max_clean_radius());
    }
    let mut out = vec![2];
    while out[out.len() - 1] * 2 <= reach {
        out.push(out[out.len() - 1] * 2);
    }
    Ok(out)
}

fn build_grid(fx: &Fixture, a: &GridArgs) -> CliResult<SweepGrid> {
    let centers = parse_centers(fx, &a.centers)?;
    let radii = match &a.radii {
        Some(s) => parse_radii(s)?,
        None => default_radii(fx, &centers)?,
    };
    Ok(SweepGrid::new(&fx.graph, centers, radii)?)
}

fn emit(out: &mut dyn Write, v: &Value) -> CliResult<()> {
    out.write_all(render(v).as_bytes())?;
    Ok(())
}

fn cmd_generate(a: &args::GenerateArgs, out: &mut dyn Write) -> CliResult<i32> {
    let spec = family_spec(&a.family)?;
    let fx = generate(&spec)?;
    let text = einstein_lab::io::format_graph(&fx.graph, fx.center);
    let counts = format!("vertices {} edges {}\n", fx.graph.vertex_count(), fx.graph.edge_count());
    match &a.out {
        Some(path) => {
            fs::write(path, text)?;
            out.write_all(counts.as_bytes())?;
        }
        None => {
            out.write_all(text.as_bytes())?;
            eprint!("{counts}");
        }
    }
    Ok(EXIT_OK)
}

fn require<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("{flag} is required")))
}

fn clean_ball(fx: &Fixture, x: Vertex, r: u32) -> CliResult<einstein_lab::VertexSet> {
    if r == 0 {
        return usage("radius must be positive");
    }
    fx.graph.check_clean_ball(x, r)?;
    Ok(fx.graph.ball(BallSpec::new(x, r))?)
}

fn cmd_compute(a: &ComputeArgs, out: &mut dyn Write) -> CliResult<i32> {
    let (fx, source) = load(&a.graph)?;
    let g = &fx.graph;
    let x_r = || -> CliResult<(Vertex, u32)> {
        if let Some(b) = &a.ball {
            return parse_ball(&fx, b);
        }
        let x = parse_vertex(&fx, require(a.x.as_deref(), "--x")?)?;
        Ok((x, require(a.radius, "--R")?))
    };
    let (name, params, value) = match a.quantity {
        Quantity::Exit => {
            let (x, r) = x_r()?;
            let field = potential::exit_time(g, &clean_ball(&fx, x, r)?)?;
            let v = json!({
                "value": field.at(x),
                "max": field.max_value,
                "max_location": field.max_location,
                "residual": field.residual,
            });
            ("exit", json!({ "x": x, "R": r }), v)
        }
        Quantity::Resistance => {
            let (ax, ar) = parse_ball(&fx, require(a.a_ball.as_deref(), "--A-ball")?)?;
            let (bx, br) = parse_ball(&fx, require(a.b_ball.as_deref(), "--B-ball")?)?;
            let outer = clean_ball(&fx, bx, br)?;
            let source_set = g.ball(BallSpec::new(ax, ar))?;
            let rho = potential::resistance(g, &source_set, &outer)?;
            (
                "resistance",
                json!({ "A_ball": [ax, ar], "B_ball": [bx, br] }),
                json!({ "value": rho.finite(), "reachable": rho.finite().is_some() }),
            )
        }
        Quantity::Green => {
            let (x, r) = x_r()?;
            let op = potential::green(g, &clean_ball(&fx, x, r)?)?;
            let row: Vec<(Vertex, f64)> = op
                .region()
                .iter()
                .map(|y| Ok((y, op.kernel(x, y)?)))
                .collect::<Result<_, LabError>>()?;
            let v = json!({ "diagonal": op.kernel(x, x)?, "row": row });
            ("green", json!({ "x": x, "R": r }), v)
        }
        Quantity::Lambda => {
            let (x, r) = x_r()?;
            let eig = potential::lambda_min(g, &clean_ball(&fx, x, r)?)?;
            ("lambda", json!({ "x": x, "R": r }), to_value(&eig))
        }
        Quantity::Harnack => {
            let (x, r) = x_r()?;
            let h = potential::harnack_constant(g, x, r)?;
            ("harnack", json!({ "x": x, "R": r }), to_value(&h))
        }
        Quantity::Hg => {
            let (x, r) = x_r()?;
            let h = potential::green_ratios(g, x, r)?;
            ("hg", json!({ "x": x, "R": r }), to_value(&h))
        }
    };
    let doc = json!({
        "manifest": manifest(&format!("compute {name}"), &source, None, None, params),
        "quantity": name,
        "result": to_value(&value),
    });
    emit(out, &doc)?;
    Ok(EXIT_OK)
}

fn write_inequality_csv(path: &Path, report: &einstein_lab::conditions::VerifyReport) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["check", "x", "radius", "param", "y", "lhs", "rhs", "value"])?;
    for r in &report.records {
        w.write_record([
            r.check.clone(),
            r.x.to_string(),
            r.radius.to_string(),
            opt(r.param),
            opt(r.y),
            fmt_num(r.lhs),
            fmt_num(r.rhs),
            fmt_num(r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_condition_csv(path: &Path, reports: &[einstein_lab::conditions::ConditionReport]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["tag", "x", "radius", "y", "value"])?;
    for rep in reports {
        for c in &rep.cells {
            w.write_record([
                rep.tag.to_string(),
                c.x.to_string(),
                c.radius.to_string(),
                opt(c.y),
                fmt_num(c.value),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CliResult<i32> {
    let (fx, source) = load(&a.graph)?;
    let grid = build_grid(&fx, &a.grid)?;
    let lab = Lab::new(&fx.graph, Exec::default());
    let report = verify_inequalities(&lab, &grid)?;
    let conditions = measure_all(&lab, &grid)?;
    let doubling = resistance_doubling(&lab, &grid).ok();
    let anti = strong_antidoubling(&lab, &grid).ok();
    let passed = report.all_passed();
    let doc = json!({
        "manifest": manifest("verify", &source, Some(&grid), None, json!({ "centers": a.grid.centers })),
        "passed": passed,
        "inequalities": to_value(&report),
        "conditions": to_value(&conditions),
        "resistance_doubling": to_value(&doubling),
        "anti_doubling": to_value(&anti),
    });
    fs::create_dir_all(&a.out_dir)?;
    fs::write(a.out_dir.join("verify.json"), render(&doc))?;
    write_inequality_csv(&a.out_dir.join("inequalities.csv"), &report)?;
    write_condition_csv(&a.out_dir.join("conditions.csv"), &conditions)?;

    for c in &report.checks {
        let status = match c.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "measured",
        };
        writeln!(
            out,
            "{:<26} {:<8} cells={:<4} worst={}",
            c.id,
            status,
            c.cells,
            c.worst.map(fmt_num).unwrap_or_else(|| "-".into())
        )?;
    }
    for c in report.failures() {
        if let Some(w) = &c.witness {
            writeln!(
                out,
                "violation {}: x={} R={} param={} y={} lhs={} rhs={} ({} of {} cells)",
                c.id,
                w.x,
                w.radius,
                opt(w.param),
                opt(w.y),
                fmt_num(w.lhs),
                fmt_num(w.rhs),
                c.violations,
                c.cells
            )?;
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_einstein(a: &GridCommand, out: &mut dyn Write) -> CliResult<i32> {
    let (fx, source) = load(&a.graph)?;
    let grid = build_grid(&fx, &a.grid)?;
    let lab = Lab::new(&fx.graph, Exec::default());
    let report = einstein_report(&lab, &grid)?;
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "radius", "e2r", "rho", "v", "q", "quadratic_ok"])?;
        for r in &report.records {
            w.write_record([
                r.x.to_string(),
                r.radius.to_string(),
                fmt_num(r.e2r),
                fmt_num(r.rho),
                fmt_num(r.v),
                fmt_num(r.q),
                r.quadratic_ok.to_string(),
            ])?;
        }
        w.flush()?;
    }
    let doc = json!({
        "manifest": manifest("einstein", &source, Some(&grid), None, json!({ "centers": a.grid.centers })),
        "report": to_value(&report),
    });
    emit(out, &doc)?;
    Ok(EXIT_OK)
}

fn write_fit_csv(path: &Path, fit: &ExponentFit) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["ln_R", "ln_value"])?;
    for &(lx, ly) in &fit.points {
        w.write_record([fmt_num(lx), fmt_num(ly)])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> CliResult<i32> {
    let (fx, source) = load(&a.graph)?;
    let x = parse_vertex(&fx, &a.x)?;
    let radii = match &a.radii {
        Some(s) => parse_radii(s)?,
        None => (2..=fx.graph.reach(x)?.max_clean_radius().max(2)).collect(),
    };
    let lab = Lab::new(&fx.graph, Exec::default());
    let report = fit_exponents(&lab, x, &radii)?;
    if let Some(dir) = &a.csv_dir {
        fs::create_dir_all(dir)?;
        write_fit_csv(&dir.join("alpha.csv"), &report.alpha)?;
        write_fit_csv(&dir.join("beta.csv"), &report.beta)?;
        write_fit_csv(&dir.join("gamma.csv"), &report.gamma)?;
    }
    let doc = json!({
        "manifest": manifest("fit", &source, None, None, json!({ "x": x, "radii": radii })),
        "report": to_value(&report),
    });
    emit(out, &doc)?;
    Ok(EXIT_OK)
}

fn cmd_mc(a: &McArgs, out: &mut dyn Write) -> CliResult<i32> {
    let (fx, source) = load(&a.graph)?;
    let x = parse_vertex(&fx, &a.x)?;
    let mut cfg = WalkConfig::for_radius(a.seed, a.n, a.radius);
    if let Some(cap) = a.cap {
        cfg.step_cap = cap;
    }
    let sample = mc_exit_sample(&fx.graph, x, a.radius, &cfg, Exec::default())?;
    let mut doc = json!({
        "manifest": manifest("mc", &source, None, Some(a.seed), json!({ "x": x, "R": a.radius, "n": a.n, "step_cap": cfg.step_cap })),
        "estimate": to_value(&sample.estimate),
    });
    if a.exits {
        doc["exit_counts"] = json!(sample.exit_counts);
    }
    emit(out, &doc)?;
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, out),
        Command::Compute(a) => cmd_compute(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Einstein(a) => cmd_einstein(a, out),
        Command::Fit(a) => cmd_fit(a, out),
        Command::Mc(a) => cmd_mc(a, out),
    }
}

/// Parses `args`, runs the command, copies its output to stdout and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut out: Vec<u8> = Vec::new();
    let result = match cli.threads {
        Some(0) => usage("--threads must be positive"),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut out)),
            Err(e) => usage(format!("cannot start {n} threads: {e}")),
        },
        None => dispatch(&cli, &mut out),
    };
    let _ = std::io::stdout().write_all(&out);
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
