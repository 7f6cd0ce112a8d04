use std::path::PathBuf;

use serde_json::Value;
use tordisc_core::{Rational, Scalar};

/// What a subcommand hands back to `main`.
pub struct Outcome {
    pub results: Value,
    pub table: Option<Table>,
    pub passed: bool,
    /// Overrides the reported numeric mode (float-only methods).
    pub mode: Option<&'static str>,
    pub files: Vec<(PathBuf, String)>,
}

impl Outcome {
    pub fn new(results: Value) -> Self {
        Self {
            results,
            table: None,
            passed: true,
            mode: None,
            files: Vec::new(),
        }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

pub fn exact(v: &Rational) -> Value {
    Value::String(v.render())
}

pub fn float(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn scalar<S: Scalar>(v: &S) -> Value {
    if S::EXACT {
        Value::String(v.render())
    } else {
        float(v.to_f64())
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Top-level scalar fields of a JSON object as a single row.
    pub fn from_value(v: &Value) -> Self {
        let mut header = Vec::new();
        let mut row = Vec::new();
        if let Value::Object(map) = v {
            for (k, v) in map {
                let cell = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.to_string(),
                    Value::Bool(b) => b.to_string(),
                    Value::Null => String::new(),
                    _ => continue,
                };
                header.push(k.clone());
                row.push(cell);
            }
        }
        Self { header, rows: vec![row] }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| cells.iter().map(|c| quote(c)).collect::<Vec<_>>().join(",");
        out.push_str(&line(&self.header));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}
