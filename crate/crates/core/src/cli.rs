//! `besselsum` command line: tabulate, verify, greens, coeffs.

use crate::bessel::EvalPoint;
use crate::entropy::{
    greens_combination_estimate, greens_combination_quadrature, p_closed_with, q_asymptotic, q_leading, q_with,
    radial_integral, GreenParams, KernelSwitch,
};
use crate::error::{Error, Estimate, Result};
use crate::quadrature::{integral_j0y0_tail, QuadraturePlan};
use crate::resolvent::{nonzero_coefficients, render, term_records, TermRecord};
use crate::series::{p_direct, SeriesTruncation};
use crate::verify::{self, log_grid, Report, Tolerances, CHECK_KEYS};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

pub const SCHEMA_VERSION: u32 = 1;

/// Numerical knobs accepted by `--tol` for tabulate and greens.
pub const NUMERIC_KEYS: &[&str] = &["quadrature_budget", "series_tail", "x_switch"];

#[derive(Debug, Parser)]
#[command(name = "besselsum", version, about = "Order-derivative Bessel sums, their closed forms and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate P, Q and the tail integral on a grid
    Tabulate {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run every invariant suite
    Verify {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Green's-function combination, closed form against λ-quadrature
    Greens {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        m: f64,
        /// Also evaluate the radial integral 2π∫ r·C(mr) dr for this m
        #[arg(long)]
        radial: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List the nonzero resolvent coefficients B[i,j,l] for l ≤ l_max
    Coeffs {
        #[arg(long, default_value_t = 4)]
        l_max: i64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args, Clone, Copy, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.5)]
    pub x_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Clone)]
pub struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; verify and coeffs print plain text when omitted
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Tolerance or numerical override, KEY=VALUE (repeatable)
    #[arg(long = "tol", value_name = "KEY=VAL")]
    pub tol: Vec<String>,
}

/// Failure classes, mapped to exit codes 1, 2 and 3.
#[derive(Debug)]
pub enum CliError {
    Verify(String),
    Config(String),
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Verify(m) | CliError::Config(m) | CliError::Budget(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_budget_failure() {
            CliError::Budget(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

/// Result of a command: the rendered output and, possibly, a failure to report
/// after the output has been written.
pub struct Outcome {
    pub text: String,
    pub failure: Option<CliError>,
}

fn parse_overrides(items: &[String], allowed: &[&str]) -> std::result::Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--tol expects KEY=VAL, got {item:?}")))?;
        if !allowed.contains(&k) {
            return Err(CliError::Config(format!(
                "unknown tolerance key {k:?} (accepted: {})",
                allowed.join(", ")
            )));
        }
        let v: f64 = v
            .parse()
            .map_err(|_| CliError::Config(format!("--tol {k}: {v:?} is not a number")))?;
        out.insert(k.to_string(), v);
    }
    Ok(out)
}

struct Numerics {
    plan: QuadraturePlan,
    trunc: SeriesTruncation,
    switch: KernelSwitch,
}

fn numerics(overrides: &BTreeMap<String, f64>) -> std::result::Result<Numerics, CliError> {
    let mut n = Numerics {
        plan: QuadraturePlan::default(),
        trunc: SeriesTruncation::default(),
        switch: KernelSwitch::default(),
    };
    for (k, &v) in overrides {
        match k.as_str() {
            "quadrature_budget" => n.plan.error_budget = v,
            "series_tail" => n.trunc.tail_tolerance = v,
            "x_switch" => n.switch.x_switch = v,
            _ => unreachable!("keys are validated by parse_overrides"),
        }
    }
    n.plan.validate()?;
    n.trunc.validate()?;
    n.switch.validate()?;
    Ok(n)
}

/// Grid points; a single point is allowed when x_min = x_max.
pub fn grid_points(grid: &GridArgs) -> std::result::Result<Vec<f64>, CliError> {
    let GridArgs {
        x_min,
        x_max,
        count,
        spacing,
    } = *grid;
    if !(x_min > 0.0 && x_min.is_finite() && x_max.is_finite()) {
        return Err(CliError::Config(format!("x_min = {x_min} must be positive and x_max finite")));
    }
    match count {
        0 => Err(CliError::Config("count must be at least 1".into())),
        1 if x_min == x_max => Ok(vec![x_min]),
        1 => Err(CliError::Config("count = 1 requires x_min = x_max".into())),
        _ if x_min >= x_max => Err(CliError::Config(format!(
            "x_min = {x_min} must be below x_max = {x_max} when count > 1"
        ))),
        _ => Ok(match spacing {
            Spacing::Log => log_grid(x_min, x_max, count),
            Spacing::Linear => (0..count)
                .map(|k| {
                    if k + 1 == count {
                        x_max
                    } else {
                        x_min + (x_max - x_min) * k as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub x: f64,
    pub p_direct: Option<Estimate>,
    pub p_closed: Option<Estimate>,
    pub q: Option<Estimate>,
    pub q_asymptotic: Estimate,
    pub q_leading: Estimate,
    pub tail_integral: Option<Estimate>,
    /// `column: message` for every cell that failed.
    pub flags: Vec<String>,
}

pub const TABLE_HEADER: &str = "x,p_direct,p_direct_err,p_closed,p_closed_err,q,q_err,q_asymptotic,q_asymptotic_err,\
q_leading,q_leading_err,tail_integral,tail_integral_err,flags";

fn table_row(x: f64, n: &Numerics) -> TableRow {
    let point = EvalPoint::new(x).expect("grid points are positive");
    let mut flags = Vec::new();
    let mut cell = |name: &str, r: Result<Estimate>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            flags.push(format!("{name}: {e}"));
            None
        }
    };
    let p_direct = cell("p_direct", p_direct(point, &n.trunc));
    let p_closed = cell("p_closed", p_closed_with(point, &n.switch, &n.plan, &n.trunc));
    let q = cell("q", q_with(point, &n.switch, &n.plan, &n.trunc));
    let tail_integral = cell("tail_integral", integral_j0y0_tail(point, &n.plan));
    // next term of the large-x expansion is O(x⁻²); the quoted asymptote carries an extra cos(2x)/(2x)
    let lead = q_leading(point);
    let next = 5.0 / (x * x);
    TableRow {
        x,
        p_direct,
        p_closed,
        q,
        q_asymptotic: Estimate::new(q_asymptotic(point), lead.abs() + next),
        q_leading: Estimate::new(lead, next),
        tail_integral,
        flags,
    }
}

fn csv_pair(out: &mut String, v: Option<Estimate>) {
    match v {
        Some(e) => write!(out, ",{:.16e},{:.16e}", e.value, e.error),
        None => write!(out, ",NaN,NaN"),
    }
    .expect("writing to a String");
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn tabulate(grid: &GridArgs, output: &OutputArgs) -> std::result::Result<Outcome, CliError> {
    let overrides = parse_overrides(&output.tol, NUMERIC_KEYS)?;
    let n = numerics(&overrides)?;
    let xs = grid_points(grid)?;
    let rows: Vec<TableRow> = xs.par_iter().map(|&x| table_row(x, &n)).collect();
    let flagged = rows.iter().filter(|r| !r.flags.is_empty()).count();
    let text = match output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from(TABLE_HEADER);
            s.push('\n');
            for r in &rows {
                write!(s, "{:.16e}", r.x).expect("writing to a String");
                for v in [r.p_direct, r.p_closed, r.q, Some(r.q_asymptotic), Some(r.q_leading), r.tail_integral] {
                    csv_pair(&mut s, v);
                }
                writeln!(s, ",{}", csv_quote(&r.flags.join("; "))).expect("writing to a String");
            }
            s
        }
        Format::Json => json_doc(
            "tabulate",
            json!({"grid": grid, "tolerances": overrides}),
            "rows",
            serde_json::to_value(&rows).expect("rows serialize"),
        ),
    };
    let failure = (flagged > 0).then(|| CliError::Budget(format!("{flagged} row(s) have failed cells")));
    Ok(Outcome { text, failure })
}

fn json_doc(command: &str, config: serde_json::Value, key: &str, body: serde_json::Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), json!(command));
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("config".into(), config);
    doc.insert(key.into(), body);
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("json serializes");
    s.push('\n');
    s
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn render_report(report: &Report, format: Option<Format>, overrides: &BTreeMap<String, f64>) -> String {
    match format {
        None => {
            let mut s = String::new();
            for c in &report.checks {
                write!(
                    s,
                    "{} {} [{}] residual={:e} tolerance={:e}",
                    status(c.passed),
                    c.id,
                    c.suite,
                    c.residual,
                    c.tolerance
                )
                .expect("writing to a String");
                if let Some(e) = &c.error {
                    write!(s, " error: {e}").expect("writing to a String");
                }
                s.push('\n');
            }
            for f in &report.findings {
                writeln!(s, "FINDING {}: {}", f.id, f.statement).expect("writing to a String");
                for (k, v) in &f.values {
                    writeln!(s, "  {k} = {v:e}").expect("writing to a String");
                }
            }
            s
        }
        Some(Format::Csv) => {
            let mut s = String::from("check,suite,residual,tolerance,status,detail\n");
            for c in &report.checks {
                writeln!(
                    s,
                    "{},{},{:.16e},{:.16e},{},{}",
                    c.id,
                    c.suite,
                    c.residual,
                    c.tolerance,
                    status(c.passed),
                    csv_quote(c.error.as_deref().unwrap_or(""))
                )
                .expect("writing to a String");
            }
            for f in &report.findings {
                writeln!(s, "{},finding,NaN,NaN,FINDING,{}", f.id, csv_quote(&f.statement)).expect("writing to a String");
            }
            s
        }
        Some(Format::Json) => {
            let mut s = json_doc(
                "verify",
                json!({"tolerances": overrides}),
                "rows",
                serde_json::to_value(&report.checks).expect("checks serialize"),
            );
            // findings sit next to rows in the same object
            let mut v: serde_json::Value = serde_json::from_str(&s).expect("own output parses");
            v["findings"] = serde_json::to_value(&report.findings).expect("findings serialize");
            v["passed"] = json!(report.passed());
            s = serde_json::to_string_pretty(&v).expect("json serializes");
            s.push('\n');
            s
        }
    }
}

fn verify_cmd(output: &OutputArgs) -> std::result::Result<Outcome, CliError> {
    let overrides = parse_overrides(&output.tol, CHECK_KEYS)?;
    let mut tol = Tolerances::default();
    for (k, &v) in &overrides {
        tol.set(k, v)?;
    }
    let report = verify::run(&tol);
    let text = render_report(&report, output.format, &overrides);
    let failure = (!report.passed()).then(|| {
        let list: Vec<String> = report
            .failures()
            .iter()
            .map(|c| format!("{} (residual {:e} > tolerance {:e})", c.id, c.residual, c.tolerance))
            .collect();
        CliError::Verify(format!("verification failed: {}", list.join(", ")))
    });
    Ok(Outcome { text, failure })
}

#[derive(Debug, Serialize)]
struct GreensRecord {
    r: f64,
    m: f64,
    mr: f64,
    closed: Estimate,
    quadrature: Estimate,
    abs_diff: Estimate,
    radial: Option<Estimate>,
}

fn greens_cmd(r: f64, m: f64, radial: bool, output: &OutputArgs) -> std::result::Result<Outcome, CliError> {
    let overrides = parse_overrides(&output.tol, NUMERIC_KEYS)?;
    let n = numerics(&overrides)?;
    let params = GreenParams::new(r, m)?;
    let closed = greens_combination_estimate(params)?;
    let quadrature = greens_combination_quadrature(params, &n.plan)?;
    let rec = GreensRecord {
        r,
        m,
        mr: params.mr(),
        closed,
        quadrature,
        abs_diff: Estimate::new((closed.value - quadrature.value).abs(), closed.error + quadrature.error),
        radial: if radial { Some(radial_integral(m, None)?) } else { None },
    };
    let text = match output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from(
                "r,m,mr,closed,closed_err,quadrature,quadrature_err,abs_diff,abs_diff_err,radial,radial_err\n",
            );
            write!(s, "{:.16e},{:.16e},{:.16e}", rec.r, rec.m, rec.mr).expect("writing to a String");
            for v in [Some(rec.closed), Some(rec.quadrature), Some(rec.abs_diff), rec.radial] {
                csv_pair(&mut s, v);
            }
            s.push('\n');
            s
        }
        Format::Json => json_doc(
            "greens",
            json!({"r": r, "m": m, "radial": radial, "tolerances": overrides}),
            "rows",
            json!([rec]),
        ),
    };
    Ok(Outcome { text, failure: None })
}

#[derive(Debug, Serialize)]
struct CoeffRow {
    i: i32,
    j: i32,
    l: i32,
    text: String,
    terms: Vec<TermRecord>,
}

fn coeffs_cmd(l_max: i64, output: &OutputArgs) -> std::result::Result<Outcome, CliError> {
    parse_overrides(&output.tol, &[])?;
    if !(0..=8).contains(&l_max) {
        return Err(CliError::Config(format!("l_max = {l_max} not in 0..=8")));
    }
    let rows: Vec<CoeffRow> = nonzero_coefficients(l_max as u32)
        .into_iter()
        .map(|(idx, p)| CoeffRow {
            i: idx.i,
            j: idx.j,
            l: idx.l,
            text: render(idx, &p),
            terms: term_records(&p),
        })
        .collect();
    let text = match output.format {
        None => rows.iter().map(|r| format!("{}\n", r.text)).collect(),
        Some(Format::Csv) => {
            let mut s = String::from("i,j,l,coefficient\n");
            for r in &rows {
                let poly = r.text.split_once(" = ").map_or("", |(_, p)| p);
                writeln!(s, "{},{},{},{}", r.i, r.j, r.l, csv_quote(poly)).expect("writing to a String");
            }
            s
        }
        Some(Format::Json) => json_doc(
            "coeffs",
            json!({"l_max": l_max}),
            "rows",
            serde_json::to_value(&rows).expect("rows serialize"),
        ),
    };
    Ok(Outcome { text, failure: None })
}

/// Runs a parsed command and returns its output.
pub fn execute(cli: &Cli) -> std::result::Result<Outcome, CliError> {
    match &cli.command {
        Command::Tabulate { grid, output } => tabulate(grid, output),
        Command::Verify { output } => verify_cmd(output),
        Command::Greens { r, m, radial, output } => greens_cmd(*r, *m, *radial, output),
        Command::Coeffs { l_max, output } => coeffs_cmd(*l_max, output),
    }
}

fn output_of(cli: &Cli) -> &OutputArgs {
    match &cli.command {
        Command::Tabulate { output, .. }
        | Command::Verify { output }
        | Command::Greens { output, .. }
        | Command::Coeffs { output, .. } => output,
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return e.exit_code();
        }
    };
    let written = match &output_of(&cli).out {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(outcome.text.as_bytes()).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 2;
    }
    match outcome.failure {
        Some(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
        None => 0,
    }
}
