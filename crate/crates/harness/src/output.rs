//! File writers. Every float goes out with 17 significant digits so
//! results round-trip bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Number, Value};
use twostep::numerics::Mat;

/// `x` with 17 significant digits (`d.dddddddddddddddde±x`).
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// JSON number carrying exactly the digits of [`fmt17`]; `null` if non-finite.
pub fn json_num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    fmt17(x).parse::<Number>().map_or(Value::Null, Value::Number)
}

pub fn json_vec(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| json_num(x)).collect())
}

pub fn json_mat(m: &Mat<f64>) -> Value {
    Value::Array((0..m.rows()).map(|i| json_vec(m.row(i))).collect())
}

/// Minimal CSV table: a header and rows of pre-formatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// One CSV cell.
pub enum Cell<'a> {
    Text(&'a str),
    Int(u64),
    Float(f64),
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: &[Cell<'_>]) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(
            cells
                .iter()
                .map(|c| match c {
                    Cell::Text(s) => s.to_string(),
                    Cell::Int(i) => i.to_string(),
                    Cell::Float(x) => fmt17(*x),
                })
                .collect(),
        );
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.render())
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}
