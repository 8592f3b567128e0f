//! Minimal CSV emission with round-trip-safe floats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// An in-memory CSV table: mandatory header, `\n` line endings.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    body: String,
    rows: usize,
}

/// A single CSV cell.
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(i64),
    Float(f64),
    /// Written verbatim; must not contain commas or newlines.
    Text(&'static str),
}

impl From<&'static str> for Cell {
    fn from(v: &'static str) -> Self {
        Cell::Text(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            body: String::new(),
            rows: 0,
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    /// Appends a row. Panics if the arity disagrees with the header.
    pub fn push(&mut self, cells: &[Cell]) {
        assert_eq!(cells.len(), self.header.len(), "row arity mismatch");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            match c {
                Cell::Int(v) => write!(self.body, "{v}").unwrap(),
                Cell::Float(v) => self.body.push_str(&fmt_f64(*v)),
                Cell::Text(v) => {
                    assert!(!v.contains([',', '\n']), "text cell `{v}` needs quoting");
                    self.body.push_str(v)
                }
            }
        }
        self.body.push('\n');
        self.rows += 1;
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        s.push_str(&self.body);
        s
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}
