//! JSON and CSV reports of suite verdicts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kgpovm_core::harness::{HarnessConfig, SuiteVerdict, Verdict};
use serde::{Deserialize, Serialize};

/// Bumped whenever a field of [`Report`] changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub config: HarnessConfig,
    pub suites: Vec<SuiteVerdict>,
}

impl Report {
    pub fn new(config: &HarnessConfig, suites: Vec<SuiteVerdict>) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: "kgpovm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            suites,
        }
    }

    /// Every asserted suite passed.
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.verdict != Verdict::Fail)
    }

    pub fn load(path: &Path) -> Result<Report> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let report: Report =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        anyhow::ensure!(
            report.schema_version == SCHEMA_VERSION,
            "{} has schema version {}, expected {SCHEMA_VERSION}",
            path.display(),
            report.schema_version
        );
        Ok(report)
    }
}

/// One CSV row per case.
#[derive(Debug, Serialize)]
struct CaseRow<'a> {
    suite: &'a str,
    case: usize,
    label: &'a str,
    hash: &'a str,
    failed: bool,
    check: &'a str,
    anchor: &'a str,
    lhs: Option<f64>,
    rhs: Option<f64>,
    violation: Option<f64>,
    err_est: Option<f64>,
    allowance: Option<f64>,
    margin: Option<f64>,
    holds: Option<bool>,
    expect: &'a str,
    values: String,
    error: &'a str,
}

pub fn write_case_csv<W: std::io::Write>(suites: &[SuiteVerdict], w: W) -> Result<usize> {
    let mut out = csv::Writer::from_writer(w);
    let mut rows = 0;
    for s in suites {
        for c in &s.cases {
            let worst = c.worst();
            let expect = worst.map(|w| match w.expect {
                kgpovm_core::harness::Expect::Hold => "hold",
                kgpovm_core::harness::Expect::Violate => "violate",
                kgpovm_core::harness::Expect::Report => "report",
            });
            out.serialize(CaseRow {
                suite: s.suite.name(),
                case: c.index,
                label: &c.label,
                hash: &c.hash,
                failed: c.failed(),
                check: worst.map(|w| w.name.as_str()).unwrap_or(""),
                anchor: worst.map(|w| w.anchor.as_str()).unwrap_or(""),
                lhs: worst.map(|w| w.lhs),
                rhs: worst.map(|w| w.rhs),
                violation: worst.map(|w| w.violation),
                err_est: worst.map(|w| w.err_est),
                allowance: worst.map(|w| w.allowance),
                margin: worst.map(|w| w.margin),
                holds: worst.map(|w| w.holds),
                expect: expect.unwrap_or(""),
                values: serde_json::to_string(&c.values)?,
                error: c.error.as_deref().unwrap_or(""),
            })?;
            rows += 1;
        }
    }
    if rows == 0 {
        // keep the header so an empty table is still a valid table
        out.write_record([
            "suite",
            "case",
            "label",
            "hash",
            "failed",
            "check",
            "anchor",
            "lhs",
            "rhs",
            "violation",
            "err_est",
            "allowance",
            "margin",
            "holds",
            "expect",
            "values",
            "error",
        ])?;
    }
    out.flush()?;
    Ok(rows)
}

#[derive(Debug, Default, PartialEq)]
pub struct Written {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// Writes `report.json` and `cases.csv` into `dir`, creating it.
pub fn write_report(dir: &Path, report: &Report, json: bool, csv: bool) -> Result<Written> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Written::default();
    if json {
        let path = dir.join("report.json");
        let text = serde_json::to_string_pretty(report)?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        written.json = Some(path);
    }
    if csv {
        let path = dir.join("cases.csv");
        let file =
            fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
        write_case_csv(&report.suites, file)?;
        written.csv = Some(path);
    }
    Ok(written)
}

/// Human-readable summary, one line per suite.
pub fn summary(report: &Report) -> String {
    let mut s = String::new();
    for v in &report.suites {
        let verdict = match v.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NoVerdict => "REPORT",
        };
        s.push_str(&format!(
            "{:<18} {:<6} cases {:>4}  failures {:>3}  margin max {:>10.3e} median {:>10.3e}",
            v.suite.name(),
            verdict,
            v.cases_run,
            v.failures.len(),
            v.margin.max,
            v.margin.median
        ));
        if v.violations_found > 0 {
            s.push_str(&format!("  violations found {}", v.violations_found));
        }
        s.push('\n');
        for f in v.failures.iter().take(5) {
            let what = match (&f.error, f.worst()) {
                (Some(e), _) => e.clone(),
                (None, Some(w)) => format!("{} ({}): margin {:.3e}", w.name, w.anchor, w.margin),
                (None, None) => String::new(),
            };
            s.push_str(&format!(
                "    case {} [{}] {}: {what}\n",
                f.index, f.hash, f.label
            ));
        }
        for n in &v.notes {
            s.push_str(&format!("    note: {n}\n"));
        }
    }
    s
}
