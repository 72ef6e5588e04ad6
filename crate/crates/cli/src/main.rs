//! `fieldgeom`: run scenario documents and the self-test suite.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 parse error, 3 violated
//! precondition, 4 internal error.

mod scenario;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fieldgeom::selftest::{family_names, run_selftest, Scale, SelftestOptions};
use serde_json::{json, Value};

use scenario::{run_task, Scenario, SpecDoc, TASKS};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        CliError { code: 2, msg: msg.into() }
    }

    fn internal(msg: impl Into<String>) -> Self {
        CliError { code: 4, msg: msg.into() }
    }
}

#[derive(Parser)]
#[command(name = "fieldgeom", version, about = "Exact computations in the geometry of a function field")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario document (JSON); `-` reads standard input.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Seed for every random choice; overrides the scenario's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Self-test size: smoke or full.
    #[arg(long, global = true, default_value = "smoke")]
    scale: String,
}

#[derive(Subcommand)]
enum Command {
    /// Transcendence degree and a basis of a list of elements.
    Rank,
    /// Membership of an element in the closure of a list.
    Closure,
    /// Collinearity of plane points given by coefficient triples.
    Plane,
    /// Desargues configurations over the rationals.
    Desargues,
    /// j-tuples, the multiplication configuration and the psi conjuncts.
    Config,
    /// Recover a field map from the map on points induced by an automorphism.
    Reconstruct,
    /// Evaluate sentences, run the tower harness, find union witnesses.
    Logic,
    /// Run every property family.
    Selftest {
        /// Flip the first verdict of the named family.
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rank => "rank",
            Command::Closure => "closure",
            Command::Plane => "plane",
            Command::Desargues => "desargues",
            Command::Config => "config",
            Command::Reconstruct => "reconstruct",
            Command::Logic => "logic",
            Command::Selftest { .. } => "selftest",
        }
    }
}

fn write_report(out: Option<&PathBuf>, report: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| CliError::internal(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::internal(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::internal(e.to_string())),
    }
}

fn selftest(cli: &Cli, fault: Option<String>) -> Result<bool, CliError> {
    let scale = Scale::parse(&cli.scale).ok_or_else(|| CliError::parse(format!("unknown scale `{}`", cli.scale)))?;
    if let Some(f) = &fault {
        if !family_names().contains(&f.as_str()) {
            return Err(CliError::parse(format!("unknown family `{f}`")));
        }
    }
    let report = run_selftest(&SelftestOptions {
        seed: cli.seed.unwrap_or(1),
        scale,
        fault,
    });
    for f in &report.families {
        let status = if f.ok() { "pass" } else { "FAIL" };
        eprintln!("{status} [{}] {}: {}/{}", f.criterion, f.name, f.passed, f.instances);
        for msg in &f.failures {
            eprintln!("    {msg}");
        }
    }
    let value = serde_json::to_value(&report).map_err(|e| CliError::internal(e.to_string()))?;
    write_report(cli.out.as_ref(), &value)?;
    Ok(report.passed)
}

fn read_scenario(path: &PathBuf) -> Result<Scenario, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::parse(format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("scenario: {e}")))
}

fn run_scenario(cli: &Cli, task: &str) -> Result<(), CliError> {
    let path = cli
        .spec
        .as_ref()
        .ok_or_else(|| CliError::parse(format!("`{task}` needs --spec <scenario>")))?;
    let sc = read_scenario(path)?;
    if let Some(t) = &sc.task {
        if !TASKS.contains(&t.as_str()) {
            return Err(CliError::parse(format!("unknown task `{t}`")));
        }
        if t != task {
            return Err(CliError::parse(format!("scenario is for `{t}`, not `{task}`")));
        }
    }
    let spec = match &sc.spec {
        None | Some(Value::Null) => None,
        Some(v) => {
            let doc: SpecDoc =
                serde_json::from_value(v.clone()).map_err(|e| CliError::parse(format!("spec: {e}")))?;
            Some(doc.build()?)
        }
    };
    let seed = cli.seed.or(sc.seed).unwrap_or(1);
    let result = run_task(task, spec, &sc.inputs, seed)?;
    let report = json!({
        "task": task,
        "seed": seed,
        "spec": sc.spec,
        "inputs": sc.inputs,
        "result": result,
    });
    write_report(cli.out.as_ref(), &report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Selftest { inject_fault } => selftest(&cli, inject_fault.clone()).map(|ok| if ok { 0 } else { 1 }),
        cmd => run_scenario(&cli, cmd.name()).map(|()| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
