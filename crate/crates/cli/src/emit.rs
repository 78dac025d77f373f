//! CSV and JSON output of result tables.

use std::io::Write;

use serde_json::{Map, Number, Value as Json};

use crate::error::RunError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Null,
}

impl Cell {
    /// `Null` for non-finite numbers.
    pub fn num(v: f64) -> Self {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Null
        }
    }

    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(v) => Some(v),
            Cell::Int(v) => Some(v as f64),
            _ => None,
        }
    }

    fn text(&self) -> String {
        match self {
            // Both forms print the shortest digits that round-trip.
            Cell::Num(v) if *v != 0.0 && (v.abs() < 1e-5 || v.abs() >= 1e16) => format!("{v:e}"),
            Cell::Num(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Json {
        match *self {
            Cell::Num(v) => Number::from_f64(v).map_or(Json::Null, Json::Number),
            Cell::Int(v) => Json::Number(v.into()),
            Cell::Bool(b) => Json::Bool(b),
            Cell::Null => Json::Null,
        }
    }
}

/// One result row as ordered named cells.
pub type Record = Vec<(String, Cell)>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// All records must share the column list of the first.
    pub fn from_records(records: Vec<Record>) -> Table {
        let columns: Vec<String> = records.first().map(|r| r.iter().map(|(k, _)| k.clone()).collect()).unwrap_or_default();
        let rows = records
            .into_iter()
            .map(|r| {
                debug_assert!(r.iter().map(|(k, _)| k).eq(columns.iter()));
                r.into_iter().map(|(_, v)| v).collect()
            })
            .collect();
        Table { columns, rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn to_csv(table: &Table) -> Result<Vec<u8>, RunError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::text))?;
    }
    w.into_inner().map_err(|e| RunError::Io(e.into_error()))
}

pub fn to_json(table: &Table) -> Vec<u8> {
    let rows: Vec<Json> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Json> = table.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
            Json::Object(obj)
        })
        .collect();
    let mut out = serde_json::to_vec_pretty(&Json::Array(rows)).expect("table serialises");
    out.push(b'\n');
    out
}

pub fn render(table: &Table, format: Format) -> Result<Vec<u8>, RunError> {
    if table.rows.is_empty() {
        return Err(RunError::EmptyTable);
    }
    match format {
        Format::Csv => to_csv(table),
        Format::Json => Ok(to_json(table)),
    }
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(table: &Table, format: Format, path: Option<&std::path::Path>) -> Result<(), RunError> {
    let bytes = render(table, format)?;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| RunError::Write { path: p.to_path_buf(), source: e }),
        None => std::io::stdout().lock().write_all(&bytes).map_err(RunError::Io),
    }
}
