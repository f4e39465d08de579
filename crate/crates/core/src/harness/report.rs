//! Report records and their JSON / CSV serializations.
//!
//! Both encodings are deterministic: records keep scenario order, named
//! values live in ordered maps, and non-finite numbers become `null` (JSON)
//! or an empty field (CSV).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::density::{DensityReport, RatioRow, Trend};

/// Report schema version, bumped on incompatible changes.
pub const REPORT_SCHEMA: u32 = 1;

/// Header of the CSV encoding.
pub const CSV_HEADER: &str = "check,level,point,radius,series,lower,upper,estimate";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "HYPOTHESES_NOT_MET")]
    HypothesesNotMet,
    /// Values recorded without an expectation to test.
    #[serde(rename = "INFO")]
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::HypothesesNotMet => "HYPOTHESES_NOT_MET",
            Verdict::Info => "INFO",
        }
    }

    /// FAIL dominates, then PASS, then not-met, then INFO.
    pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Info;
        for v in verdicts {
            out = match (out, v) {
                (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
                (Verdict::Pass, _) | (_, Verdict::Pass) => Verdict::Pass,
                (Verdict::HypothesesNotMet, _) | (_, Verdict::HypothesesNotMet) => {
                    Verdict::HypothesesNotMet
                }
                _ => Verdict::Info,
            };
        }
        out
    }
}

/// A ratio sequence with its tail summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub normalization: String,
    pub verdict: Trend,
    pub slope: Option<f64>,
    pub theta_lower: f64,
    pub theta_upper: f64,
    pub rows: Vec<RatioRow>,
}

impl Series {
    pub fn new(name: &str, normalization: impl Into<String>, report: &DensityReport) -> Self {
        Self {
            name: name.to_string(),
            normalization: normalization.into(),
            verdict: report.verdict,
            slope: report.slope,
            theta_lower: report.theta_lower,
            theta_upper: report.theta_upper,
            rows: report.rows.clone(),
        }
    }
}

/// Results at one query point (or one grid point).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub level: Option<usize>,
    pub point: Vec<f64>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub values: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub series: Vec<Series>,
}

impl PointRecord {
    pub fn new(level: Option<usize>, point: Vec<f64>) -> Self {
        Self {
            level,
            point,
            verdict: Verdict::Info,
            notes: Vec::new(),
            values: BTreeMap::new(),
            flags: BTreeMap::new(),
            series: Vec::new(),
        }
    }

    pub fn value(&mut self, name: &str, v: f64) {
        self.values.insert(name.to_string(), v);
    }

    pub fn flag(&mut self, name: &str, v: bool) {
        self.flags.insert(name.to_string(), v);
    }
}

/// Per-level summary of a mesh family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub label: String,
    pub mesh_size: Option<f64>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub verdict: Verdict,
    pub summary: String,
    pub parameters: BTreeMap<String, String>,
    pub values: BTreeMap<String, f64>,
    pub levels: Vec<LevelRecord>,
    pub points: Vec<PointRecord>,
}

impl CheckRecord {
    pub fn new(check: &str) -> Self {
        Self {
            check: check.to_string(),
            verdict: Verdict::Info,
            summary: String::new(),
            parameters: BTreeMap::new(),
            values: BTreeMap::new(),
            levels: Vec::new(),
            points: Vec::new(),
        }
    }

    pub fn param(&mut self, name: &str, v: impl ToString) {
        self.parameters.insert(name.to_string(), v.to_string());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub scenario: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn empty(scenario: &str, seed: u64) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            scenario: scenario.to_string(),
            seed,
            checks: Vec::new(),
        }
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::combine(self.checks.iter().map(|c| c.verdict))
    }

    pub fn has_failure(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}' (expected json or csv)")),
        }
    }
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        String::new()
    }
}

fn point_label(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
    format!("({})", parts.join(" "))
}

/// Long-format CSV: one row per (check, level, point, radius, series);
/// scalar values appear with an empty radius and equal bounds.
pub fn to_csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let level = |l: Option<usize>| l.map(|l| l.to_string()).unwrap_or_default();
    for c in &report.checks {
        for (name, v) in &c.values {
            let _ = writeln!(
                out,
                "{},,,,{},{},{},{}",
                c.check,
                name,
                num(*v),
                num(*v),
                num(*v)
            );
        }
        for l in &c.levels {
            for (name, v) in &l.values {
                let _ = writeln!(
                    out,
                    "{},{},,,{},{},{},{}",
                    c.check,
                    l.level,
                    name,
                    num(*v),
                    num(*v),
                    num(*v)
                );
            }
        }
        for p in &c.points {
            let label = point_label(&p.point);
            for (name, v) in &p.values {
                let _ = writeln!(
                    out,
                    "{},{},{},,{},{},{},{}",
                    c.check,
                    level(p.level),
                    label,
                    name,
                    num(*v),
                    num(*v),
                    num(*v)
                );
            }
            for s in &p.series {
                for r in &s.rows {
                    let est = if r.skipped {
                        String::new()
                    } else {
                        num(r.mid())
                    };
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        c.check,
                        level(p.level),
                        label,
                        num(r.radius),
                        s.name,
                        num(r.lower),
                        num(r.upper),
                        est
                    );
                }
            }
        }
    }
    out
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    }
}

pub fn emit(report: &Report, format: Format, path: &Path) -> io::Result<()> {
    std::fs::write(path, render(report, format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_combination() {
        use Verdict::*;
        assert_eq!(Verdict::combine([]), Info);
        assert_eq!(Verdict::combine([HypothesesNotMet, Pass]), Pass);
        assert_eq!(Verdict::combine([Pass, Fail, HypothesesNotMet]), Fail);
        assert_eq!(Verdict::combine([Info, HypothesesNotMet]), HypothesesNotMet);
    }

    #[test]
    fn empty_report_is_a_valid_document() {
        let r = Report::empty("nothing", 0);
        let v: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(v["checks"].as_array().unwrap().len(), 0);
        assert_eq!(to_csv(&r), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn non_finite_values_become_null_and_blank() {
        let mut r = Report::empty("x", 1);
        let mut c = CheckRecord::new("density");
        c.values.insert("theta".into(), f64::INFINITY);
        r.checks.push(c);
        assert!(to_json(&r).contains("\"theta\": null"));
        assert!(to_csv(&r).contains("density,,,,theta,,,"));
    }
}
