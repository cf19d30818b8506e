//! Plain-text rendering of suite reports. The JSON form is the
//! serialization of `SuiteReport` itself and is byte-stable for a fixed
//! seed and flags.

use crate::suites::{CheckOutcome, Expected, SuiteReport};
use baxter_core::Verdict;

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
    }
}

fn expected_str(e: Expected) -> &'static str {
    match e {
        Expected::Holds => "holds",
        Expected::Fails => "fails",
    }
}

pub fn render_check(c: &CheckOutcome) -> String {
    let mut line = format!(
        "  [{}] {:<38} {} (expected {}; {} samples, order {}, seed {})",
        if c.ok { "ok" } else { "XX" },
        c.id,
        verdict_str(c.report.verdict),
        expected_str(c.expected),
        c.report.samples,
        c.report.order,
        c.report.seed,
    );
    if let Some(w) = &c.report.witness {
        line.push_str(&format!(
            "\n        witness: sample {} ({}) at {}: {} vs {}",
            w.sample, w.context, w.index, w.lhs, w.rhs
        ));
    }
    line
}

pub fn render_text(report: &SuiteReport) -> String {
    let mut out = format!("suite {} (seed {})\n", report.suite, report.seed);
    for c in &report.checks {
        out.push_str(&render_check(c));
        out.push('\n');
    }
    let failed = report.checks.iter().filter(|c| !c.ok).count();
    if failed == 0 {
        out.push_str(&format!(
            "result: ok ({} checks, every verdict as expected)\n",
            report.checks.len()
        ));
    } else {
        out.push_str(&format!(
            "result: FAILED ({} of {} checks off expectation)\n",
            failed,
            report.checks.len()
        ));
    }
    out
}

/// Summarizes a previously saved JSON report.
pub fn summarize_json(value: &serde_json::Value) -> Result<String, String> {
    let suite = value
        .get("suite")
        .and_then(|v| v.as_str())
        .ok_or("missing suite name")?;
    let seed = value.get("seed").and_then(|v| v.as_u64()).ok_or("missing seed")?;
    let ok = value.get("ok").and_then(|v| v.as_bool()).ok_or("missing ok flag")?;
    let checks = value
        .get("checks")
        .and_then(|v| v.as_array())
        .ok_or("missing checks")?;
    let mut out = format!("suite {} (seed {})\n", suite, seed);
    for c in checks {
        let id = c.get("id").and_then(|v| v.as_str()).unwrap_or("?");
        let cok = c.get("ok").and_then(|v| v.as_bool()).unwrap_or(false);
        let verdict = c
            .pointer("/report/verdict")
            .and_then(|v| v.as_str())
            .unwrap_or("?");
        let expected = c.get("expected").and_then(|v| v.as_str()).unwrap_or("?");
        out.push_str(&format!(
            "  [{}] {:<38} {} (expected {})\n",
            if cok { "ok" } else { "XX" },
            id,
            verdict,
            expected
        ));
    }
    out.push_str(&format!(
        "result: {} ({} checks)\n",
        if ok { "ok" } else { "FAILED" },
        checks.len()
    ));
    Ok(out)
}
