//! Report assembly and the exit-code contract.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use qab_core::io::{to_json, write_atomic};
use qab_core::VERSION;

/// Bad flags, unreadable or invalid configs, or failed preconditions.
/// Maps to exit code 2 and leaves no output behind.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<qab_core::Error> for UsageError {
    fn from(e: qab_core::Error) -> Self {
        Self(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: &'static str,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, relation: "<=", limit, pass: value <= limit }
    }
}

/// Everything a command produces. Files are written only once the whole
/// run has finished.
pub struct Outcome {
    pub command: &'static str,
    pub config: Value,
    pub checks: Vec<Check>,
    pub results: Value,
    pub error: Option<String>,
    /// Additional files as `(name, contents)`.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn new(command: &'static str, config: &impl Serialize) -> Self {
        Self {
            command,
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            checks: Vec::new(),
            results: Value::Null,
            error: None,
            files: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    fn report(&self) -> Value {
        let status = match (&self.error, self.passed()) {
            (Some(_), _) => "error",
            (None, true) => "pass",
            (None, false) => "fail",
        };
        serde_json::json!({
            "tool": VERSION,
            "command": self.command,
            "status": status,
            "error": self.error,
            "config": self.config,
            "checks": self.checks,
            "results": self.results,
        })
    }

    /// Writes `<command>_report.json` and the extra files into `out`.
    pub fn write(&self, out: &Path) -> std::io::Result<Vec<PathBuf>> {
        let report = to_json(&self.report()).map_err(std::io::Error::other)?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let p = out.join(name);
            write_atomic(&p, contents)?;
            written.push(p);
        }
        let p = out.join(format!("{}_report.json", self.command.replace('-', "_")));
        write_atomic(&p, &report)?;
        written.push(p);
        Ok(written)
    }
}
