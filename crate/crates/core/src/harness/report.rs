//! Per-scenario reports: a deterministic text body, a timings trailer, JSON
//! and per-check CSV export.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Precondition of the check does not hold for the scenario.
    Skip,
    /// Reported, never gating.
    Info,
}

impl Status {
    pub fn tag(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
            Status::Info => "INFO",
        }
    }
}

/// One check outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    /// The identity or property being checked.
    pub law: String,
    pub residual: Option<f64>,
    /// Reported integration error behind `residual` (charted checks).
    pub error: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
    pub detail: String,
}

impl Record {
    pub fn new(name: &str, law: &str, status: Status) -> Self {
        Self {
            name: name.into(),
            law: law.into(),
            residual: None,
            error: None,
            tolerance: None,
            status,
            detail: String::new(),
        }
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn values(mut self, residual: f64, error: Option<f64>, tolerance: f64) -> Self {
        self.residual = Some(residual);
        self.error = error;
        self.tolerance = Some(tolerance);
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
    pub info: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub config: Vec<(String, String)>,
    pub space: String,
    pub records: Vec<Record>,
    /// Wall-clock seconds per stage; excluded from the body.
    pub timings: Vec<(String, f64)>,
}

fn sci(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3e}"),
        None => "-".into(),
    }
}

impl Report {
    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for r in &self.records {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Skip => s.skip += 1,
                Status::Info => s.info += 1,
            }
        }
        s
    }

    pub fn passed(&self) -> bool {
        self.summary().fail == 0
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    /// Deterministic body: identical for identical `(config, seed)`.
    pub fn body(&self) -> String {
        let mut out = String::new();
        writeln!(out, "scenario {}", self.scenario).unwrap();
        for (k, v) in &self.config {
            writeln!(out, "  {k} = {v}").unwrap();
        }
        writeln!(out, "space {}", self.space).unwrap();
        for r in &self.records {
            write!(
                out,
                "{} {:<30} residual={} error={} tol={}  [{}]",
                r.status.tag(),
                r.name,
                sci(r.residual),
                sci(r.error),
                sci(r.tolerance),
                r.law
            )
            .unwrap();
            if !r.detail.is_empty() {
                write!(out, "  {}", r.detail).unwrap();
            }
            out.push('\n');
        }
        let s = self.summary();
        writeln!(out, "summary pass={} fail={} skip={} info={}", s.pass, s.fail, s.skip, s.info).unwrap();
        out
    }

    /// Body followed by the timings trailer.
    pub fn render(&self) -> String {
        let mut out = self.body();
        out.push_str("--- timings ---\n");
        for (k, v) in &self.timings {
            writeln!(out, "{k} {v:.3}s").unwrap();
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct View<'a> {
            report: &'a Report,
            summary: Summary,
        }
        serde_json::to_string_pretty(&View { report: self, summary: self.summary() }).map_err(|e| Error::Io(e.to_string()))
    }

    /// Per-check rows `(scenario, check, residual, error, tolerance, status)`.
    pub fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        let f = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                self.scenario.as_str(),
                &r.name,
                &f(r.residual),
                &f(r.error),
                &f(r.tolerance),
                r.status.tag(),
            ])
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        Ok(())
    }
}

/// CSV writer with the header row already written.
pub fn csv_writer<W: Write>(inner: W) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(inner);
    w.write_record(["scenario", "check", "residual", "error", "tolerance", "status"])
        .map_err(|e| Error::Io(e.to_string()))?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            scenario: "demo".into(),
            config: vec![("seed".into(), "1".into())],
            space: "G=S3".into(),
            records: vec![
                Record::new("weil", "weil-type identity", Status::Pass).values(0.0, None, 1e-12),
                Record::new("literal", "printed form", Status::Info).detail("differs"),
            ],
            timings: vec![("total".into(), 0.25)],
        }
    }

    #[test]
    fn body_excludes_timings() {
        let r = sample();
        assert!(!r.body().contains("timings"));
        assert!(r.render().contains("--- timings ---\ntotal 0.250s"));
        assert!(r.passed());
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let r = sample();
        let mut w = csv_writer(Vec::new()).unwrap();
        r.write_csv(&mut w).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert_eq!(text.lines().count(), 3);
    }
}
