//! Runs every acceptance criterion at its stated tolerance and runtime
//! budget, printing one PASS/FAIL line per criterion.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kc_cli::suites::{run_suite, Check, SuiteReport, SUITES};

struct Criterion {
    id: u32,
    title: &'static str,
    suite: &'static str,
    budget: Duration,
    /// Restricts the suite's checks to those relevant to this criterion.
    filter: fn(&Check) -> bool,
}

fn all(_: &Check) -> bool {
    true
}

fn linear_dr(c: &Check) -> bool {
    c.name.starts_with("PCA") || c.name.starts_with("MDS")
}

fn geometry(c: &Check) -> bool {
    !linear_dr(c)
}

const SEED: u64 = 0;

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, title: "SGNS optimum is shifted PMI", suite: "sgns-pmi", budget: secs(180), filter: all },
        Criterion { id: 2, title: "spectral loss equals factorization error", suite: "spectral-ey", budget: secs(30), filter: all },
        Criterion { id: 3, title: "InfoNCE optimum recovers K₊", suite: "infonce-kplus", budget: secs(120), filter: all },
        Criterion { id: 4, title: "NCE/logistic closed form", suite: "classification", budget: secs(10), filter: all },
        Criterion { id: 5, title: "Nyström", suite: "nystrom", budget: secs(10), filter: all },
        Criterion { id: 6, title: "random Fourier features", suite: "rff", budget: secs(30), filter: all },
        Criterion { id: 7, title: "manifold geometry", suite: "manifold", budget: secs(30), filter: geometry },
        Criterion { id: 8, title: "PCA and MDS", suite: "manifold", budget: secs(10), filter: linear_dr },
        Criterion { id: 9, title: "eigenfunction recovery", suite: "eigenfun", budget: secs(120), filter: all },
        Criterion { id: 10, title: "gradient checks", suite: "gradients", budget: secs(60), filter: all },
        Criterion { id: 11, title: "PSD battery", suite: "psd", budget: secs(10), filter: all },
    ];
    let mut failed = 0;
    let mut first_runs: Vec<(&str, String)> = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let result = run_suite(c.suite, SEED);
        let elapsed = start.elapsed();
        let line = match result {
            Ok(report) => {
                let checks: Vec<&Check> = report.checks.iter().filter(|k| (c.filter)(k)).collect();
                let bad: Vec<&&Check> = checks.iter().filter(|k| !k.passed).collect();
                let ok = !checks.is_empty() && bad.is_empty() && elapsed <= c.budget;
                if !first_runs.iter().any(|(s, _)| *s == c.suite) {
                    first_runs.push((c.suite, report.to_json()));
                }
                let mut line = format!(
                    "criterion {:>2} {}: {} ({}/{} checks, {:.2} s of {} s)",
                    c.id,
                    status(ok),
                    c.title,
                    checks.len() - bad.len(),
                    checks.len(),
                    elapsed.as_secs_f64(),
                    c.budget.as_secs()
                );
                for k in bad {
                    line.push_str(&format!("\n      failed: {} = {:e} (bound {:?} {:e})", k.name, k.observed, k.bound, k.tolerance));
                }
                ok.then_some(()).ok_or(()).map(|_| line.clone()).map_err(|_| line)
            }
            Err(e) => Err(format!("criterion {:>2} FAIL: {}: {e:#}", c.id, c.title)),
        };
        match line {
            Ok(l) => println!("{l}"),
            Err(l) => {
                failed += 1;
                println!("{l}");
            }
        }
    }

    let (ok, detail) = determinism(&first_runs);
    println!("criterion 12 {}: verify reports are byte-identical on re-run ({detail})", status(ok));
    if !ok {
        failed += 1;
    }

    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn status(ok: bool) -> &'static str {
    if ok { "PASS" } else { "FAIL" }
}

/// Every suite is re-run in process and compared with its first report;
/// the fast suites are also run twice through the binary.
fn determinism(first: &[(&str, String)]) -> (bool, String) {
    let mut mismatched = Vec::new();
    for suite in SUITES {
        let a = match first.iter().find(|(s, _)| s == suite) {
            Some((_, text)) => text.clone(),
            None => run_suite(suite, SEED).map(|r: SuiteReport| r.to_json()).unwrap_or_default(),
        };
        let b = run_suite(suite, SEED).map(|r| r.to_json()).unwrap_or_default();
        if a.is_empty() || a != b {
            mismatched.push(suite.to_string());
        }
    }
    let dir = tempfile::tempdir().expect("temp dir");
    for suite in ["nystrom", "rff", "psd", "gradients"] {
        let outs: Vec<Vec<u8>> = (0..2)
            .map(|i| {
                let path = dir.path().join(format!("{suite}-{i}.json"));
                let status = Command::new(env!("CARGO_BIN_EXE_kc"))
                    .args(["verify", suite, "--seed", "0", "--out"])
                    .arg(&path)
                    .status()
                    .expect("run kc");
                if status.success() { std::fs::read(&path).unwrap_or_default() } else { Vec::new() }
            })
            .collect();
        if outs[0].is_empty() || outs[0] != outs[1] {
            mismatched.push(format!("{suite} (binary)"));
        }
    }
    if mismatched.is_empty() {
        (true, format!("{} suites in process, 4 through the binary", SUITES.len()))
    } else {
        (false, format!("mismatched: {}", mismatched.join(", ")))
    }
}
