use std::fmt::Write as _;
use std::time::Duration;

use doctrina::report::{Budget, Coverage, ValidationReport, Violation};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const REPORT_SCHEMA: &str = "doctrina-report/1";

#[derive(Debug, Serialize)]
pub struct Input {
    pub path: String,
    pub sha256: String,
}

impl Input {
    pub fn new(path: &str, bytes: &[u8]) -> Self {
        let digest = Sha256::digest(bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self { path: path.into(), sha256: hex }
    }
}

#[derive(Debug, Serialize)]
pub struct Section {
    pub name: String,
    pub verdict: &'static str,
    pub checked: u64,
    pub coverage: Coverage,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<Input>,
    pub budget: Budget,
    pub scope: Vec<String>,
    pub verdict: &'static str,
    pub sections: Vec<Section>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<serde_json::Value>,
}

impl Report {
    pub fn new(command: &str, input: Option<Input>, budget: Budget, scope: Vec<String>) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            tool: "doctrina",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            input,
            budget,
            scope,
            verdict: "pass",
            sections: vec![],
            certificates: vec![],
        }
    }

    pub fn push(&mut self, r: ValidationReport, elapsed: Option<Duration>) {
        let mut r = r.finish();
        let mut seen = std::collections::HashSet::new();
        r.notes.retain(|n| seen.insert(n.clone()));
        let verdict = if r.is_ok() { "pass" } else { "fail" };
        if !r.is_ok() {
            self.verdict = "fail";
        }
        self.sections.push(Section {
            name: r.subject,
            verdict,
            checked: r.checked,
            coverage: r.coverage,
            violations: r.violations,
            notes: r.notes,
            millis: elapsed.map(|d| d.as_millis() as u64),
        });
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.tool, self.version, self.command);
        if let Some(i) = &self.input {
            let _ = writeln!(out, "input: {} (sha256 {})", i.path, i.sha256);
        }
        let _ = writeln!(out, "budget: {} elements, seed {}", self.budget.max_enum, self.budget.seed);
        let _ = writeln!(out, "scope: {}", self.scope.join(", "));
        for s in &self.sections {
            let _ = write!(out, "{}: {} ({} instances)", s.name, s.verdict, s.checked);
            if let Some(ms) = s.millis {
                let _ = write!(out, " in {ms} ms");
            }
            out.push('\n');
            match &s.coverage {
                Coverage::Exhaustive => {}
                Coverage::UpToScope { skipped } => {
                    let _ = writeln!(out, "  verified up to scope; skipped: {}", skipped.join("; "));
                }
                Coverage::Sampled { seed, samples } => {
                    let _ = writeln!(out, "  sampled: {samples} samples, seed {seed}");
                }
            }
            for v in &s.violations {
                let _ = writeln!(out, "  {v}");
            }
            for n in &s.notes {
                let _ = writeln!(out, "  note: {n}");
            }
        }
        for c in &self.certificates {
            let _ = writeln!(out, "certificate: {c}");
        }
        let _ = writeln!(out, "verdict: {}", self.verdict);
        out
    }
}
