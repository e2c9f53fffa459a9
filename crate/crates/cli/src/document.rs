//! Tabular result documents with a metadata block, emitted as CSV or JSON.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // Display is the shortest string that parses back to the same f64
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Float(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultDocument {
    pub metadata: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultDocument {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for (key, value) in &self.metadata {
            let text = match value {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            writeln!(out, "# {key}={text}")?;
        }
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.columns)?;
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::to_csv))?;
            }
            w.flush()?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let metadata: Map<String, Value> = self.metadata.iter().cloned().collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Cell::to_json))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("metadata".into(), Value::Object(metadata));
        doc.insert("rows".into(), Value::Array(rows));
        let mut out = serde_json::to_vec_pretty(&Value::Object(doc))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Writes to standard output, or to `path` via a temporary file in the same
/// directory followed by a rename.
pub fn emit(bytes: &[u8], path: Option<&str>) -> Result<()> {
    match path {
        None | Some("-") => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
        Some(path) => {
            let target = Path::new(path);
            let dir = match target.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(target).map_err(|e| e.error)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultDocument {
        let mut d = ResultDocument::new(&["lag", "estimate", "lower"]);
        d.meta("seed", 7u64);
        d.meta("tail", "upper");
        d.push_row(vec![Cell::from(0usize), Cell::from(1.0), Cell::Empty]);
        d.push_row(vec![Cell::from(1usize), Cell::from(0.1 + 0.2), Cell::from(1.0 / 3.0)]);
        d
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(sample().to_csv().unwrap()).unwrap();
        assert_eq!(
            text,
            "# seed=7\n# tail=upper\nlag,estimate,lower\n0,1,\n1,0.30000000000000004,0.3333333333333333\n"
        );
    }

    #[test]
    fn csv_and_json_carry_identical_numbers() {
        let d = sample();
        let csv_text = String::from_utf8(d.to_csv().unwrap()).unwrap();
        let json: Value = serde_json::from_slice(&d.to_json().unwrap()).unwrap();
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(csv_text.as_bytes());
        for (rec, row) in rdr.records().zip(json["rows"].as_array().unwrap()) {
            let rec = rec.unwrap();
            for (field, col) in rec.iter().zip(&d.columns) {
                let j = &row[col];
                if field.is_empty() {
                    assert!(j.is_null());
                } else {
                    let a: f64 = field.parse().unwrap();
                    assert_eq!(a.to_bits(), j.as_f64().unwrap().to_bits());
                    assert_eq!(format!("{a:.16e}"), format!("{:.16e}", j.as_f64().unwrap()));
                }
            }
        }
        assert_eq!(json["metadata"]["seed"], 7);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        std::fs::write(&path, "old").unwrap();
        emit(b"new", Some(path.to_str().unwrap())).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "new");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
