//! Report container and JSON/CSV emission.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (json or csv)")),
        }
    }
}

/// A residual compared against its documented bound.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, pass: value <= bound }
    }

    /// A yes/no property reported as 1 (holds) or 0.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, bound: 1.0, pass: ok }
    }
}

/// Tabular view used for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }
}

pub struct Report {
    pub command: &'static str,
    pub body: Value,
    pub table: Table,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self, seed: u64) -> String {
        let doc = serde_json::json!({
            "command": self.command,
            "seed": seed,
            "report": self.body,
            "checks": self.checks,
            "all_checks_pass": self.failed_checks().is_empty(),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report values are finite JSON");
        s.push('\n');
        s
    }

    /// The table when there is one, otherwise the checks.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.table.header.is_empty() {
            w.write_record(["check", "value", "bound", "pass"]).unwrap();
            for c in &self.checks {
                w.write_record([c.name.clone(), fmt_f(c.value), fmt_f(c.bound), c.pass.to_string()]).unwrap();
            }
        } else {
            w.write_record(&self.table.header).unwrap();
            for r in &self.table.rows {
                w.write_record(r).unwrap();
            }
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn render(&self, format: Format, seed: u64) -> String {
        match format {
            Format::Json => self.to_json(seed),
            Format::Csv => self.to_csv(),
        }
    }

    /// Prints to stdout and, with an output directory, writes `<command>.<ext>`.
    pub fn emit(&self, format: Format, seed: u64, out_dir: Option<&Path>) -> std::io::Result<()> {
        let text = self.render(format, seed);
        std::io::stdout().write_all(text.as_bytes())?;
        if let Some(dir) = out_dir {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{}.{}", self.command, format.extension())), text)?;
        }
        Ok(())
    }
}

/// Plain notation for moderate magnitudes, scientific otherwise.
pub fn fmt_f(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Non-finite floats become `null` in JSON; keep them visible as strings.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else {
        Value::from(v.to_string())
    }
}
