//! Check records and their deterministic rendering.

use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    fn label(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    /// Short name of the identity being checked.
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            records: Vec::new(),
        }
    }

    /// Passes iff `value ≤ tolerance`; NaN fails.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, tolerance: f64, tag: &str) -> &mut Record {
        self.push(name, value <= tolerance, Some(value), Some(tolerance), tag)
    }

    /// Passes iff `value ≥ tolerance`.
    pub fn at_least(&mut self, name: impl Into<String>, value: f64, tolerance: f64, tag: &str) -> &mut Record {
        self.push(name, value >= tolerance, Some(value), Some(tolerance), tag)
    }

    pub fn info(&mut self, name: impl Into<String>, value: Option<f64>, tag: &str) -> &mut Record {
        self.records.push(Record {
            name: name.into(),
            status: Status::Info,
            value,
            tolerance: None,
            tag: tag.to_string(),
            detail: None,
        });
        self.records.last_mut().unwrap()
    }

    fn push(&mut self, name: impl Into<String>, pass: bool, value: Option<f64>, tolerance: Option<f64>, tag: &str) -> &mut Record {
        self.records.push(Record {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            value,
            tolerance,
            tag: tag.to_string(),
            detail: None,
        });
        self.records.last_mut().unwrap()
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.status == Status::Fail).count()
    }

    /// 0 when no check failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures() == 0 { 0 } else { 1 }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "command: {}", self.command).unwrap();
        for r in &self.records {
            write!(s, "{} {}", r.status.label(), r.name).unwrap();
            if let Some(v) = r.value {
                write!(s, " value={v:.6e}").unwrap();
            }
            if let Some(t) = r.tolerance {
                write!(s, " tolerance={t:.1e}").unwrap();
            }
            if let Some(d) = &r.detail {
                write!(s, " ({d})").unwrap();
            }
            writeln!(s, " [{}]", r.tag).unwrap();
        }
        let checks = self.records.iter().filter(|r| r.status != Status::Info).count();
        writeln!(
            s,
            "summary: {} ({checks} checks, {} failed)",
            if self.failures() == 0 { "pass" } else { "fail" },
            self.failures()
        )
        .unwrap();
        s
    }
}

impl Record {
    pub fn detail(&mut self, d: impl Into<String>) -> &mut Self {
        self.detail = Some(d.into());
        self
    }
}
