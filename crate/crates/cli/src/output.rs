//! Output formatting: CSV and JSON emission with a fixed significant-digit
//! precision, byte-stable across runs.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl OutputSpec {
    pub fn write(&self, content: &str) -> io::Result<()> {
        match &self.path {
            Some(p) => fs::write(p, content),
            None => io::stdout().write_all(content.as_bytes()),
        }
    }
}

/// Number rounded to `digits` significant digits. Both CSV and JSON render
/// it in shortest form, so parsing the output reproduces the rounded value
/// exactly.
pub fn num(v: f64, digits: usize) -> Value {
    if v == 0.0 {
        return Value::from(0.0);
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), v).parse().unwrap();
    Value::from(rounded)
}

/// A rectangular record set with a fixed column order, renderable as CSV
/// (header row always present) or as a JSON array of objects under
/// optional top-level metadata.
pub struct Records {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Records {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_rows(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row.iter())
                    .map(|(c, v)| (c.to_string(), v.clone()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => format!("{n}"),
        other => other.to_string(),
    }
}

/// Pretty JSON with a trailing newline (stable field order comes from the
/// callers building `serde_json::Map` in insertion order).
pub fn json_to_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON serialization cannot fail");
    s.push('\n');
    s
}
