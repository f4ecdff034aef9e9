use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Parse one value per line. A first line that is not a number is taken as
/// a header; blank lines are skipped.
pub fn parse_series(text: &str) -> CliResult<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => return Err(CliError::data(format!("line {}: non-finite value '{field}'", i + 1))),
            Err(_) if i == 0 && !field.contains(',') => continue,
            Err(_) => return Err(CliError::data(format!("line {}: cannot parse '{field}' as a number", i + 1))),
        }
    }
    if values.is_empty() {
        return Err(CliError::data("input holds no values"));
    }
    Ok(values)
}

pub fn read_series(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    parse_series(&text).map_err(|e| match e {
        CliError::Data(m) => CliError::data(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_float(*v).unwrap_or_default(),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
                    Cell::Text(s) => s.clone(),
                    Cell::Missing => String::new(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> String {
        let keys: Vec<String> = self.columns.iter().map(|c| json_string(c)).collect();
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (k, (key, cell)) in keys.iter().zip(row).enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                let value = match cell {
                    Cell::Num(v) => format_float(*v).unwrap_or_else(|| "null".into()),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(s) => json_string(s),
                    Cell::Missing => "null".into(),
                };
                out.push_str(key);
                out.push_str(": ");
                out.push_str(&value);
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Write to `path`, or to stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::config(format!("cannot write {}: {e}", p.display()))),
        None => match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                Err(CliError::config(format!("cannot write to stdout: {e}")))
            }
            _ => Ok(()),
        },
    }
}
