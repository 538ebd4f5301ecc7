//! The `car` command-line tool.
//!
//! Exit codes: 0 on success or a positive result, 1 on a domain-level
//! negative (validation violation, not CAR, not extreme, conformance
//! failure), 2 on usage, I/O or parse errors. Reports go to stdout; data goes
//! to `--out` when given and to stdout otherwise.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::decompose::{approximate_rational, decompose, recombine, sup_distance};
use crate::error::{Error, Result};
use crate::extremes::{check_car, enumerate_extremes, is_extreme, CarCheck, EnumerationLimit, ExtremeCertificate};
use crate::fibonacci::{self, verify_theorem3};
use crate::json::{self as wire, CarWire, FloatCarWire, MixtureWire, MulticoverWire};
use crate::linalg::SolveOutcome;
use crate::model::{validate_coarsening, CarMechanism};
use crate::multicover::{canonicalize, from_multicover, to_multicover, validate_multicover, UniformMulticover};
use crate::rational::format_rational;
use crate::sampler::{car_conformance_test, estimate_empirical, simulate, DEFAULT_Z};
use crate::subset::Subset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "car", version, about = "Exact toolkit for coarsening-at-random mechanisms")]
pub struct Cli {
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the command's data product here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the ChaCha8 generator used by `simulate`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Lift the default size bounds on enumeration and verification.
    #[arg(long, global = true)]
    pub max_n_override: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a coarsening mechanism and collapse it to CAR form.
    Check { mechanism: PathBuf },
    /// Test whether a CAR mechanism is a vertex of the CAR polytope.
    IsExtreme { car: PathBuf },
    /// List every extreme CAR mechanism on n elements.
    EnumerateExtremes {
        #[arg(long)]
        n: usize,
    },
    /// Canonical uniform multicover generating a CAR mechanism.
    ToMulticover { car: PathBuf },
    /// CAR mechanism generated by a uniform multicover.
    FromMulticover { multicover: PathBuf },
    /// Divide a multicover by the common factor of its height and multiplicities.
    Canonicalize { multicover: PathBuf },
    /// Write a CAR mechanism as a mixture of extreme mechanisms.
    Decompose { car: PathBuf },
    /// Recombine a mixture into a single CAR mechanism.
    Recombine { mixture: PathBuf },
    /// Rational CAR mechanism close to a floating-point one.
    Approximate {
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Draw coarsened records from the multicover procedure.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        nature: PathBuf,
        #[arg(long)]
        count: usize,
        /// Omit the underlying outcome from each record.
        #[arg(long)]
        hide_x: bool,
    },
    /// Compare simulated records with an expected CAR mechanism.
    TestCar {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        expected: PathBuf,
        #[arg(long, default_value_t = DEFAULT_Z)]
        z: f64,
    },
    /// Build S_n and check its Fibonacci-height solution.
    FibDemo {
        #[arg(long)]
        n: usize,
    },
}

/// Per-invocation result: the report to print and whether it was positive.
struct Report {
    text: String,
    json: Value,
    positive: bool,
    data: Option<String>,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Self { text, json, positive: true, data: None }
    }

    fn negative(text: String, json: Value) -> Self {
        Self { text, json, positive: false, data: None }
    }

    fn with_data(mut self, data: String) -> Self {
        self.data = Some(data);
        self
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn parse<W: serde::de::DeserializeOwned>(path: &Path) -> Result<W> {
    Ok(serde_json::from_str(&read(path)?)?)
}

fn car_json(car: &CarMechanism) -> Value {
    serde_json::to_value(CarWire::from(car)).expect("serializable")
}

fn mc_json(mc: &UniformMulticover) -> Value {
    serde_json::to_value(MulticoverWire::from(mc)).expect("serializable")
}

fn rationals_json(z: &[crate::Rational]) -> Value {
    Value::Array(z.iter().map(|v| Value::String(format_rational(v))).collect())
}

fn limit(cli: &Cli) -> EnumerationLimit {
    if cli.max_n_override {
        EnumerationLimit::overridden()
    } else {
        EnumerationLimit::default()
    }
}

fn load_car(path: &Path) -> Result<CarMechanism> {
    CarMechanism::try_from(&parse::<CarWire>(path)?)
}

fn load_multicover(path: &Path) -> Result<UniformMulticover> {
    UniformMulticover::try_from(&parse::<MulticoverWire>(path)?)
}

fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Check { mechanism } => {
            let mech = wire::coarsening_from_json(&read(mechanism)?)?;
            let report = validate_coarsening(&mech);
            if !report.is_ok() {
                let lines: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
                return Ok(Report::negative(
                    format!("invalid coarsening mechanism:\n  {}", lines.join("\n  ")),
                    json!({"status": "invalid", "violations": lines}),
                ));
            }
            match check_car(&mech)? {
                CarCheck::Car(car) => {
                    let data = wire::pretty(&CarWire::from(&car));
                    Ok(Report::ok(format!("CAR: {car}"), json!({"status": "car", "mechanism": car_json(&car)}))
                        .with_data(data))
                }
                CarCheck::NotCar(v) => {
                    let lines: Vec<String> = v.iter().map(ToString::to_string).collect();
                    Ok(Report::negative(
                        format!("not CAR:\n  {}", lines.join("\n  ")),
                        json!({"status": "not_car", "violations": v.iter().map(|v| json!({
                            "set": v.set.to_vec(), "x": v.x, "x_prob": format_rational(&v.x_prob),
                            "other": v.other, "other_prob": format_rational(&v.other_prob),
                        })).collect::<Vec<_>>()}),
                    ))
                }
            }
        }
        Command::IsExtreme { car } => {
            let car = load_car(car)?;
            let r = is_extreme(&car);
            let cert = match &r.certificate {
                ExtremeCertificate::Solution(z) => json!({"kind": "solution", "z": rationals_json(z)}),
                ExtremeCertificate::RankDeficient { rank, columns } => {
                    json!({"kind": "rank_deficient", "rank": rank, "columns": columns})
                }
                ExtremeCertificate::Inconsistent => json!({"kind": "inconsistent"}),
                ExtremeCertificate::NonPositive(z) => json!({"kind": "non_positive", "z": rationals_json(z)}),
                ExtremeCertificate::Mismatch(z) => json!({"kind": "mismatch", "z": rationals_json(z)}),
            };
            let body = json!({"extreme": r.is_extreme(), "certificate": cert,
                "support": r.support.iter().map(Subset::to_vec).collect::<Vec<_>>()});
            Ok(if r.is_extreme() { Report::ok(r.to_string(), body) } else { Report::negative(r.to_string(), body) })
        }
        Command::EnumerateExtremes { n } => {
            let all = enumerate_extremes(*n, limit(cli))?;
            let wires: Vec<CarWire> = all.iter().map(CarWire::from).collect();
            let mut text = format!("{} extreme CAR mechanisms on n = {n}", all.len());
            for car in &all {
                text.push_str(&format!("\n  {car}"));
            }
            Ok(Report::ok(text, json!({"n": n, "count": all.len(), "mechanisms": wires}))
                .with_data(wire::pretty(&wires)))
        }
        Command::ToMulticover { car } => {
            let mc = to_multicover(&load_car(car)?);
            Ok(Report::ok(mc.to_string(), mc_json(&mc)).with_data(wire::pretty(&MulticoverWire::from(&mc))))
        }
        Command::FromMulticover { multicover } | Command::Canonicalize { multicover } => {
            let mc = load_multicover(multicover)?;
            let report = validate_multicover(&mc);
            if !report.is_ok() {
                let lines: Vec<String> = report
                    .violations
                    .iter()
                    .map(|v| format!("x = {} is covered {} times, height is {}", v.x, v.degree, mc.height()))
                    .collect();
                return Ok(Report::negative(
                    format!("invalid multicover:\n  {}", lines.join("\n  ")),
                    json!({"status": "invalid", "violations": lines}),
                ));
            }
            if matches!(cli.command, Command::Canonicalize { .. }) {
                let c = canonicalize(&mc);
                Ok(Report::ok(c.to_string(), mc_json(&c)).with_data(wire::pretty(&MulticoverWire::from(&c))))
            } else {
                let car = from_multicover(&mc)?;
                Ok(Report::ok(car.to_string(), car_json(&car)).with_data(wire::pretty(&CarWire::from(&car))))
            }
        }
        Command::Decompose { car } => {
            let mixture = decompose(&load_car(car)?, limit(cli))?;
            let mut text = format!("{} extreme components", mixture.len());
            for (w, c) in mixture.iter() {
                text.push_str(&format!("\n  {w} × [{c}]"));
            }
            let w = MixtureWire::from(&mixture);
            Ok(Report::ok(text, serde_json::to_value(&w).expect("serializable")).with_data(wire::pretty(&w)))
        }
        Command::Recombine { mixture } => {
            let m = crate::model::Mixture::try_from(&parse::<MixtureWire>(mixture)?)?;
            let car = recombine(&m);
            Ok(Report::ok(car.to_string(), car_json(&car)).with_data(wire::pretty(&CarWire::from(&car))))
        }
        Command::Approximate { input, epsilon } => {
            let (space, values) = parse::<FloatCarWire>(input)?.to_values()?;
            let car = approximate_rational(space, &values, *epsilon)?;
            let d = sup_distance(&values, &car)?;
            let d_f = num_traits::ToPrimitive::to_f64(&d).unwrap_or(f64::NAN);
            Ok(Report::ok(
                format!("{car}\nsup distance {d_f:e} < {epsilon:e}"),
                json!({"mechanism": car_json(&car), "sup_distance": d_f, "epsilon": epsilon}),
            )
            .with_data(wire::pretty(&CarWire::from(&car))))
        }
        Command::Simulate { model, nature, count, hide_x } => {
            let model = wire::model_from_json(&read(model)?)?;
            let nature = wire::nature_from_json(&read(nature)?)?;
            let records = simulate(&model, &nature, *count, cli.seed)?;
            Ok(Report::ok(
                format!("{} records (seed {})", records.len(), cli.seed),
                json!({"count": records.len(), "seed": cli.seed}),
            )
            .with_data(wire::records_to_jsonl(&records, *hide_x)))
        }
        Command::TestCar { records, expected, z } => {
            let expected = load_car(expected)?;
            let file = fs::File::open(records)?;
            let records = wire::records_from_jsonl(BufReader::new(file), expected.space())?;
            let emp = estimate_empirical(expected.space(), &records)?;
            let report = car_conformance_test(&emp, &expected, *z)?;
            let body = json!({
                "passed": report.passed(),
                "z": report.z,
                "cells": report.cells.iter().map(|c| json!({
                    "x": c.x, "set": c.set.to_vec(), "observed": c.observed, "expected": c.expected,
                    "count": c.count, "bound": c.tolerance, "pass": c.pass})).collect::<Vec<_>>(),
                "agreement": report.agreement.iter().map(|a| json!({
                    "set": a.set.to_vec(), "x": a.x, "other": a.other, "observed_x": a.observed_x,
                    "observed_other": a.observed_other, "bound": a.tolerance, "pass": a.pass})).collect::<Vec<_>>(),
            });
            let text = report.to_string();
            Ok(if report.passed() { Report::ok(text, body) } else { Report::negative(text, body) })
        }
        Command::FibDemo { n } => {
            let bound = if cli.max_n_override { 63 } else { fibonacci::DEFAULT_MAX_N };
            let r = verify_theorem3(*n, bound)?;
            let solution = match &r.outcome {
                SolveOutcome::Unique(z) => rationals_json(z),
                SolveOutcome::NoSolution => json!("no solution"),
                SolveOutcome::Underdetermined => json!("underdetermined"),
            };
            let sys = r.matrix.to_incidence();
            let multicover: Vec<Value> = sys
                .columns()
                .iter()
                .zip(&r.multiplicities)
                .map(|(c, m)| json!({"set": c.to_vec(), "mult": wire::BigCount::from(m)}))
                .collect();
            let checks: serde_json::Map<String, Value> =
                r.checks().iter().map(|(name, ok)| (name.to_string(), Value::Bool(*ok))).collect();
            let body = json!({
                "n": n,
                "matrix": r.matrix.rows(),
                "solution": solution,
                "expected_solution": rationals_json(&r.expected_solution),
                "height": r.height.as_ref().map(wire::BigCount::from),
                "fib_n": wire::BigCount::from(&r.fib_n),
                "multicover": multicover,
                "checks": checks,
                "passed": r.passed(),
            });
            let mut text = format!("S_{n}:\n{}\n", r.matrix);
            text.push_str(&format!(
                "solution: ({})\n",
                r.expected_solution.iter().map(format_rational).collect::<Vec<_>>().join(", ")
            ));
            let mults: Vec<String> = r.multiplicities.iter().map(ToString::to_string).collect();
            text.push_str(&format!(
                "multicover: height {} multiplicities ({})\n",
                r.height.as_ref().map(ToString::to_string).unwrap_or_else(|| "-".into()),
                mults.join(", ")
            ));
            for (name, ok) in r.checks() {
                text.push_str(&format!("{} {name}\n", if ok { "PASS" } else { "FAIL" }));
            }
            text.push_str(if r.passed() { "all checks passed" } else { "some checks failed" });
            let data = serde_json::to_string_pretty(&body).expect("serializable");
            Ok(if r.passed() { Report::ok(text, body) } else { Report::negative(text, body) }.with_data(data))
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidMechanism(_)
        | Error::InvalidMixture(_)
        | Error::InvalidMulticover(_)
        | Error::NotPartition(_) => 1,
        _ => 2,
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let msg = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(msg.as_bytes()) } else { stderr.write_all(msg.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let written = emit(&cli, &report, stdout);
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
            if report.positive {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if cli.format == Format::Json {
                let _ = writeln!(stdout, "{}", json!({"error": e.to_string()}));
            }
            exit_code_for(&e)
        }
    }
}

fn emit(cli: &Cli, report: &Report, stdout: &mut dyn Write) -> Result<()> {
    match (&cli.out, &report.data) {
        (Some(path), Some(data)) => {
            let mut data = data.clone();
            if !data.ends_with('\n') {
                data.push('\n');
            }
            fs::write(path, data)?;
        }
        (Some(path), None) => {
            fs::write(path, format!("{}\n", serde_json::to_string_pretty(&report.json)?))?;
        }
        (None, Some(data)) if cli.format == Format::Text && matches!(cli.command, Command::Simulate { .. }) => {
            stdout.write_all(data.as_bytes())?;
            return Ok(());
        }
        _ => {}
    }
    match cli.format {
        Format::Text => writeln!(stdout, "{}", report.text)?,
        Format::Json => writeln!(stdout, "{}", serde_json::to_string(&report.json)?)?,
    }
    Ok(())
}
