use std::fmt::Write as _;

use ionstring::sweep::format_value;
use serde_json::{json, Map, Value};

pub const TOOL: &str = "ionstring";

/// One command's result, renderable as CSV or as a JSON envelope.
pub struct Report {
    pub command: &'static str,
    /// Echo of the effective inputs, in flag order.
    pub config: Vec<(&'static str, Value)>,
    pub payload: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(x) => f.write_str(&format_value(*x)),
            Cell::Int(x) => write!(f, "{x}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

fn config_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            config: Vec::new(),
            payload: Value::Null,
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.config.push((key, value.into()));
        self
    }

    pub fn columns<I, S>(mut self, columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.columns = columns.into_iter().map(Into::into).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# tool={TOOL} version={} command={}",
            ionstring::VERSION,
            self.command
        );
        for (k, v) in &self.config {
            let _ = write!(out, " {k}={}", config_text(v));
        }
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Keys are emitted sorted, so re-serializing parsed output reproduces it.
    pub fn to_json(&self) -> String {
        let config: Map<String, Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        let envelope = json!({
            "tool": TOOL,
            "version": ionstring::VERSION,
            "command": self.command,
            "deterministic": true,
            "config": config,
            "payload": self.payload,
        });
        let mut s = serde_json::to_string_pretty(&envelope).expect("JSON values serialize");
        s.push('\n');
        s
    }
}
