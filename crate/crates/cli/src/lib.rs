//! Command-line front end: problem files, scenarios, and reports.
//!
//! Exit codes: 0 success, 1 a verdict is false or the paths disagree,
//! 2 input error, 3 numerical failure.

pub mod commands;
pub mod problem;
pub mod report;
pub mod scenario;

use std::ffi::OsString;
use std::io::Read;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use epr_core::doubles::PathSelection;
use epr_core::Tolerance;
use serde_json::{json, Value};

use commands::{Context, Failure};
use problem::parse_problem;
use scenario::{scenario, ScenarioParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Modular,
    Oracle,
    Both,
}

impl From<PathArg> for PathSelection {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Modular => PathSelection::Modular,
            PathArg::Oracle => PathSelection::Oracle,
            PathArg::Both => PathSelection::Both,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "epr", version, about = "Doubles of observables for bipartite states")]
pub struct Cli {
    /// Problem file (JSON); standard input when omitted.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Overrides `residual_tol`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "rank-tol", global = true)]
    pub rank_tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = PathArg::Both)]
    pub path: PathArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schmidt decomposition of a vector state.
    Schmidt,
    /// Commutant of the first algebra.
    Commutant,
    /// Centralizer of the first algebra for the state.
    Centralizer,
    /// Modular operator and conjugation of a cyclic and separating vector.
    Modular,
    /// Double of one observable.
    Double {
        /// JSON matrix or `expr ⊗ I` / `I ⊗ expr`.
        #[arg(long)]
        observable: String,
    },
    /// Algebra of all doubled observables with their doubles.
    DoublesAlgebra,
    /// Orbit and support projections used to reduce the problem.
    Reduce,
    /// Certify a candidate pair `{"a": ..., "a_prime": ...}`.
    Verify {
        #[arg(long)]
        pair: PathBuf,
    },
    /// Emit a built-in problem file.
    Scenario {
        /// One of max-entangled, schmidt, qubit-pairs, product-state, random-haar.
        name: String,
        #[arg(long = "d")]
        d: Option<usize>,
        #[arg(long = "n")]
        n: Option<usize>,
        /// Squared Schmidt coefficients, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coefficients: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Schmidt => "schmidt",
            Self::Commutant => "commutant",
            Self::Centralizer => "centralizer",
            Self::Modular => "modular",
            Self::Double { .. } => "double",
            Self::DoublesAlgebra => "doubles-algebra",
            Self::Reduce => "reduce",
            Self::Verify { .. } => "verify",
            Self::Scenario { .. } => "scenario",
        }
    }
}

/// What a run produced; `main` forwards it to the process.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn read_source(path: Option<&PathBuf>) -> Result<Vec<u8>, Failure> {
    match path {
        Some(p) => std::fs::read(p).map_err(|e| Failure::Io(format!("cannot read {}: {e}", p.display()))),
        None => {
            let mut buf = Vec::new();
            std::io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| Failure::Io(format!("cannot read standard input: {e}")))?;
            Ok(buf)
        }
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Execution { code, stdout: text, stderr: String::new() }
            } else {
                Execution { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();
    let (report, code) = build_report(&cli, echo);
    let mut report = report;
    if let Some(map) = report.as_object_mut() {
        if cli.command.name() != "scenario" {
            map.insert(
                "timings".into(),
                json!({ "total_ms": start.elapsed().as_secs_f64() * 1e3 }),
            );
        }
    }
    let rendered = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("reports are plain JSON values");
            s.push('\n');
            s
        }
        Format::Text => report::render_text(&report),
    };
    let stderr = report
        .get("error")
        .and_then(|e| e.get("message"))
        .and_then(Value::as_str)
        .map(|m| format!("epr: {m}\n"))
        .unwrap_or_default();
    match &cli.output {
        Some(path) => match std::fs::write(path, &rendered) {
            Ok(()) => Execution { code, stdout: String::new(), stderr },
            Err(e) => Execution {
                code: 2,
                stdout: String::new(),
                stderr: format!("{stderr}epr: cannot write {}: {e}\n", path.display()),
            },
        },
        None => Execution { code, stdout: rendered, stderr },
    }
}

fn build_report(cli: &Cli, echo: Vec<String>) -> (Value, i32) {
    let name = cli.command.name();
    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!({ "name": name, "argv": echo }));

    if let Command::Scenario { name: scen, d, n, coefficients, seed } = &cli.command {
        let params = ScenarioParams { d: *d, n: *n, coefficients: coefficients.clone(), seed: *seed };
        return match scenario(scen, &params) {
            Ok(spec) => (spec.to_json(), 0),
            Err(e) => {
                let f = Failure::Input(e);
                report.insert("error".into(), error_json(&f));
                (Value::Object(report), f.exit_code())
            }
        };
    }

    let outcome = execute(cli, &mut report);
    let code = match outcome {
        Ok((result, verdict)) => {
            report.insert("status".into(), json!(if verdict { "ok" } else { "verdict-false" }));
            report.insert("result".into(), result);
            if verdict { 0 } else { 1 }
        }
        Err(f) => {
            report.insert("status".into(), json!("error"));
            report.insert("error".into(), error_json(&f));
            f.exit_code()
        }
    };
    (Value::Object(report), code)
}

fn error_json(f: &Failure) -> Value {
    json!({ "kind": f.kind(), "exit_code": f.exit_code(), "message": f.message() })
}

fn execute(cli: &Cli, report: &mut serde_json::Map<String, Value>) -> commands::Outcome {
    let bytes = read_source(cli.input.as_ref())?;
    report.insert("input_digest".into(), json!(report::digest(&bytes)));
    let spec = parse_problem(&bytes)?;
    let mut tol = spec.tolerance.apply(Tolerance::default())?;
    if let Some(t) = cli.tol {
        tol = tol.with_residual_tol(t)?;
    }
    if let Some(t) = cli.rank_tol {
        tol = tol.with_rank_tol(t)?;
    }
    report.insert("tolerance".into(), report::tolerance_json(&tol));
    report.insert("path".into(), json!(format!("{:?}", cli.path).to_lowercase()));
    let ctx = Context { spec: &spec, tol, path: cli.path.into() };
    match &cli.command {
        Command::Schmidt => commands::schmidt_cmd(&ctx),
        Command::Commutant => commands::commutant_cmd(&ctx),
        Command::Centralizer => commands::centralizer_cmd(&ctx),
        Command::Modular => commands::modular_cmd(&ctx),
        Command::Double { observable } => commands::double_cmd(&ctx, observable),
        Command::DoublesAlgebra => commands::doubles_algebra_cmd(&ctx),
        Command::Reduce => commands::reduce_cmd(&ctx),
        Command::Verify { pair } => {
            let pair_bytes = read_source(Some(pair))?;
            report.insert("pair_digest".into(), json!(report::digest(&pair_bytes)));
            commands::verify_cmd(&ctx, &pair_bytes)
        }
        Command::Scenario { .. } => unreachable!("handled before input is read"),
    }
}
