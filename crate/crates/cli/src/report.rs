use std::time::Instant;

use goldfish_core::Status;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub status: Status,
    pub detail: String,
    /// Canonical residual expressions, for symbolic checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Vec<String>>,
    /// Largest numeric residual or discrepancy, for numeric checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_value: Option<f64>,
}

impl CheckLine {
    pub fn pass(name: &str, detail: String) -> Self {
        CheckLine {
            name: name.into(),
            status: Status::Pass,
            detail,
            residual: None,
            max_value: None,
        }
    }

    pub fn fail(name: &str, detail: String) -> Self {
        CheckLine {
            status: Status::Fail,
            ..CheckLine::pass(name, detail)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub status: Status,
    pub checks: Vec<CheckLine>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
    /// Wall-clock time; the only field that varies between identical runs.
    pub elapsed_ms: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport {
            command,
            status: Status::Pass,
            checks: Vec::new(),
            table: Vec::new(),
            data: None,
            elapsed_ms: 0.0,
            started: Some(Instant::now()),
        }
    }

    pub fn push(&mut self, line: CheckLine) {
        self.checks.push(line);
    }

    /// Overall status: fail if any check fails, else inconclusive if any
    /// check is, else pass.
    pub fn finish(&mut self) {
        let statuses = self.checks.iter().map(|c| c.status);
        self.status = if statuses.clone().any(|s| s == Status::Fail) {
            Status::Fail
        } else if statuses.into_iter().any(|s| s == Status::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        if let Some(t) = self.started {
            self.elapsed_ms = t.elapsed().as_secs_f64() * 1e3;
        }
    }

    pub fn emit(&self, json: bool) {
        if json {
            println!("{}", serde_json::to_string_pretty(self).expect("report serializes"));
            return;
        }
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Inconclusive => "INCONCLUSIVE",
            };
            println!("{tag:<5} {}: {}", c.name, c.detail);
        }
        for row in &self.table {
            println!("{row}");
        }
        if let Some(data) = &self.data {
            if self.table.is_empty() {
                println!("{}", serde_json::to_string_pretty(data).expect("data serializes"));
            }
        }
        let passed = self.checks.iter().filter(|c| c.status == Status::Pass).count();
        println!("{} ({passed}/{} checks passed)", self.status, self.checks.len());
    }
}
