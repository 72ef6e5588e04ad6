//! Acceptance suite: two full-scale self-test runs with seed 1, then one
//! pass/fail line per criterion. Exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::Value;

struct Run {
    stdout: Vec<u8>,
    report: Value,
    elapsed: Duration,
}

fn full_run() -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_fieldgeom"))
        .args(["selftest", "--seed", "1", "--scale", "full"])
        .output()
        .expect("self-test binary runs");
    let elapsed = start.elapsed();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    Run {
        stdout: out.stdout,
        report,
        elapsed,
    }
}

/// `(passed, detail)` for one family: every instance passed and there
/// were at least `min` instances.
fn family(report: &Value, name: &str, min: u64) -> (bool, String) {
    let Some(f) = report["families"]
        .as_array()
        .and_then(|fs| fs.iter().find(|f| f["name"] == name))
    else {
        return (false, format!("{name} missing"));
    };
    let (n, p) = (f["instances"].as_u64().unwrap_or(0), f["passed"].as_u64().unwrap_or(0));
    (n >= min && p == n, format!("{name} {p}/{n}"))
}

fn all(parts: Vec<(bool, String)>) -> (bool, String) {
    let ok = parts.iter().all(|(ok, _)| *ok);
    let detail = parts.into_iter().map(|(_, d)| d).collect::<Vec<_>>().join(", ");
    (ok, detail)
}

fn main() -> ExitCode {
    let first = full_run();
    let second = full_run();
    let r = &first.report;
    let secs = |d: Duration| format!("{:.1}s", d.as_secs_f64());

    let mut rows: Vec<(u8, &str, (bool, String))> = Vec::new();
    let (ok1, d1) = all(vec![
        family(r, "pregeometry.exchange", 500),
        family(r, "pregeometry.monotone_idempotent", 1),
    ]);
    // the whole suite bounds the pregeometry families' runtime
    let fast = first.elapsed < Duration::from_secs(120);
    rows.push((1, "pregeometry axioms", (ok1 && fast, format!("{d1}, suite {}", secs(first.elapsed)))));
    rows.push((2, "Jacobian verdicts match the annihilator search", family(r, "pregeometry.oracle_agreement", 100)));
    rows.push((
        3,
        "coordinatization over Q and maximality probe",
        all(vec![
            family(r, "planes.coordinatization_additive", 200),
            family(r, "planes.coordinatization_multiplicative", 200),
            family(r, "planes.maximality_probe", 1),
        ]),
    ));
    rows.push((4, "Desargues configurations", family(r, "planes.desargues", 20)));
    rows.push((
        5,
        "Q, J and multiplication configurations",
        all(vec![
            family(r, "configurations.q_presentations", 50),
            family(r, "configurations.j_decomposition", 50),
            family(r, "configurations.mult_construct", 50),
        ]),
    ));
    let roundtrip = r["families"]
        .as_array()
        .and_then(|fs| fs.iter().find(|f| f["name"] == "reconstruction.roundtrip"))
        .map_or(0, |f| f["samples_per_instance"].as_u64().unwrap_or(0));
    let (ok6, d6) = all(vec![
        family(r, "reconstruction.mu_laws", 100),
        family(r, "reconstruction.roundtrip", 8),
    ]);
    rows.push((
        6,
        "field interpretation and map recovery",
        (ok6 && roundtrip >= 20, format!("{d6}, {roundtrip} samples per map")),
    ));
    rows.push((
        7,
        "one-quantifier agreement across towers",
        all(vec![
            family(r, "logic.tower_agreement", 100),
            family(r, "logic.counterexample", 1),
            family(r, "logic.criterion_vs_search", 1),
        ]),
    ));
    rows.push((8, "union-of-subfields witness", family(r, "logic.union_witness", 1)));
    let identical = !first.stdout.is_empty() && first.stdout == second.stdout;
    let limit = Duration::from_secs(15 * 60);
    rows.push((
        9,
        "deterministic full run",
        (
            identical && first.elapsed < limit && second.elapsed < limit,
            format!(
                "reports {}, runs {} and {}",
                if identical { "identical" } else { "differ" },
                secs(first.elapsed),
                secs(second.elapsed)
            ),
        ),
    ));

    let mut failed = 0;
    for (n, what, (ok, detail)) in &rows {
        let status = if *ok { "pass" } else { "FAIL" };
        println!("criterion {n} {status}: {what} ({detail})");
        failed += usize::from(!ok);
    }
    println!("{} of {} criteria pass", rows.len() - failed, rows.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
