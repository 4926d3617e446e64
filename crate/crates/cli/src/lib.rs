//! Command implementations behind the `fedshare` binary.
//!
//! Each command writes human-readable output to the given writer and
//! returns the process exit code.

use std::fs;
use std::io::Write;
use std::path::Path;

use fedshare::reference::{check_cases, compatibility_table, ReferenceExpectations};
use fedshare::protocol::CaseTag;
use fedshare::report::Report;
use fedshare::scenario::{ConfigError, Scenario};
use fedshare::simnet::{run_scenario, SimError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_UNRECOVERABLE: i32 = 2;
pub const EXIT_FLAGGED: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

fn load(path: &Path) -> Result<Scenario, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    Scenario::from_json(&text)
}

/// Exit code for a finished run: unrecoverable outcomes outrank flags.
pub fn exit_code(report: &Report) -> i32 {
    if report.case_tag == CaseTag::Unrecoverable {
        EXIT_UNRECOVERABLE
    } else if report.any_flag() {
        EXIT_FLAGGED
    } else {
        EXIT_OK
    }
}

pub fn cmd_run(scenario_path: &Path, out_dir: &Path, seed: Option<u64>, out: &mut dyn Write) -> i32 {
    let scenario = match load(scenario_path) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(out, "error: invalid scenario: {e}");
            return EXIT_CONFIG;
        }
    };
    let seed = seed.unwrap_or(scenario.seed);
    let transcript = match run_scenario(&scenario, seed) {
        Ok(t) => t,
        Err(SimError::Config(e)) => {
            let _ = writeln!(out, "error: invalid scenario: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    let keys = scenario.derive_keys().expect("validated by the run");
    let report = Report::new(&scenario, seed, &keys, &transcript);
    let written = fs::create_dir_all(out_dir)
        .and_then(|_| fs::write(out_dir.join("transcript.json"), transcript.to_json()))
        .and_then(|_| fs::write(out_dir.join("report.json"), report.to_json()));
    if let Err(e) = written {
        let _ = writeln!(out, "error: cannot write to {}: {e}", out_dir.display());
        return EXIT_FAILURE;
    }
    let aggregate = report.aggregate.as_ref().map_or("none".to_string(), |a| a.to_string());
    let flagged: Vec<String> = report.flagged_clouds.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(
        out,
        "{:?}: aggregate {aggregate}, flagged [{}], {} messages",
        report.case_tag,
        flagged.join(", "),
        transcript.records.len()
    );
    exit_code(&report)
}

/// Reproduces the reference federation on `base` and prints the generator
/// compatibility table. Only the arithmetic assertions decide the exit code.
pub fn cmd_verify_reference(base: &Scenario, expect: &ReferenceExpectations, out: &mut dyn Write) -> i32 {
    let assertions = match check_cases(base, expect) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(out, "[FAIL] example did not run: {e}");
            return EXIT_FAILURE;
        }
    };
    for a in &assertions {
        let _ = writeln!(out, "{a}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "reference generators, checked independently:");
    let _ = writeln!(out, "{:<6} {:>6} {:>6} {:>6} {:>6} {:>10} {:>13}", "cloud", "np", "g", "ord", "phi", "primitive", "smallest root");
    for row in compatibility_table() {
        let order = row.order.map_or("n/a".to_string(), |o| o.to_string());
        let verdict = if row.primitive() { "yes" } else { "no" };
        let _ = writeln!(
            out,
            "{:<6} {:>6} {:>6} {:>6} {:>6} {:>10} {:>13}",
            row.cloud.to_string(),
            row.np,
            row.g,
            order,
            row.group_order,
            verdict,
            row.smallest_root
        );
    }
    if assertions.iter().all(|a| a.holds()) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

pub fn cmd_keygen(scenario_path: &Path, out: &mut dyn Write) -> i32 {
    let keys = match load(scenario_path).and_then(|s| s.derive_keys()) {
        Ok(k) => k,
        Err(e) => {
            let _ = writeln!(out, "error: invalid scenario: {e}");
            return EXIT_CONFIG;
        }
    };
    let _ = writeln!(out, "{:<6} {:>20} {:>21} {:>20}", "cloud", "cp", "np", "g");
    for k in keys {
        let _ = writeln!(out, "{:<6} {:>20} {:>21} {:>20}", k.cloud.to_string(), k.cp, k.np, k.g);
    }
    EXIT_OK
}
