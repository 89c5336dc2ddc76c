//! Tables and their CSV / JSON renderings.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value as Json};

use super::config::Format;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Null,
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format!("{x:?}"),
            Value::Text(s) => s.clone(),
            Value::Null => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(i) => json!(i),
            Value::Float(x) => json!(x),
            Value::Text(s) => json!(s),
            Value::Null => Json::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(i) => Some(i as f64),
            Value::Float(x) => Some(x),
            _ => None,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(i: usize) -> Self {
        Value::Int(i as i64)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Null, Value::Float)
    }
}

/// Long-format table. The first `key_columns` columns identify a series; in
/// JSON each distinct key becomes one object.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub key_columns: usize,
    pub rows: Vec<Vec<Value>>,
    /// Extra `key=value` metadata for this table only.
    pub meta: Vec<(String, String)>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str], key_columns: usize) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            key_columns,
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column by name, `None` where a cell is not numeric.
    pub fn floats(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.column(name)?;
        Some(self.rows.iter().map(|r| r[c].as_f64()).collect())
    }
}

/// Metadata carried by every table of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunHeader {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
}

impl RunHeader {
    fn pairs<'a>(&'a self, table: &'a Table) -> Vec<(&'a str, String)> {
        let mut out = vec![
            ("experiment", self.experiment.clone()),
            ("config_hash", self.config_hash.clone()),
            ("seed", self.seed.to_string()),
            ("code_version", self.code_version.clone()),
            ("table", table.name.clone()),
        ];
        out.extend(table.meta.iter().map(|(k, v)| (k.as_str(), v.clone())));
        out
    }
}

/// `# key=value` comment lines, then a header row and one record per row.
pub fn render_csv(header: &RunHeader, table: &Table) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for (k, v) in header.pairs(table) {
        buf.extend_from_slice(format!("# {k}={v}\n").as_bytes());
    }
    let mut w = csv::WriterBuilder::new().quote_style(csv::QuoteStyle::Necessary).from_writer(buf);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Value::csv_field))?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// An array with one `{meta, data}` object per series.
pub fn render_json(header: &RunHeader, table: &Table) -> Result<Vec<u8>> {
    let base: Map<String, Json> = header.pairs(table).into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let k = table.key_columns;
    let mut series: Vec<(Vec<Value>, Vec<Json>)> = Vec::new();
    for row in &table.rows {
        let key = row[..k].to_vec();
        let record: Map<String, Json> =
            table.columns[k..].iter().cloned().zip(row[k..].iter().map(Value::json)).collect();
        match series.last_mut() {
            Some((last, data)) if *last == key => data.push(Json::Object(record)),
            _ => series.push((key, vec![Json::Object(record)])),
        }
    }
    let objects: Vec<Json> = series
        .into_iter()
        .map(|(key, data)| {
            let mut meta = base.clone();
            for (c, v) in table.columns[..k].iter().zip(&key) {
                meta.insert(c.clone(), v.json());
            }
            json!({ "meta": meta, "data": data })
        })
        .collect();
    let mut bytes = serde_json::to_vec_pretty(&objects)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn render(header: &RunHeader, table: &Table, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => render_csv(header, table),
        Format::Json => render_json(header, table),
    }
}

/// Writes every table as `<dir>/<table>.<ext>`, creating `dir` if needed.
pub fn write_tables(header: &RunHeader, tables: &[Table], dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    tables
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.{}", t.name, format.extension()));
            fs::write(&path, render(header, t, format)?)?;
            Ok(path)
        })
        .collect()
}
