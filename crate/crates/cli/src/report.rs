use std::io::Write;

use clap::ValueEnum;
use serde_json::{Map, Number};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("schema mismatch: {0}")]
    Schema(String),
}

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

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Num(x) => format_num(*x),
            Value::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Int(i) => (*i).into(),
            Value::Num(x) if x.is_finite() => serde_json::Value::Number(
                format_num(*x)
                    .parse::<Number>()
                    .expect("formatted float is a JSON number"),
            ),
            Value::Num(_) => serde_json::Value::Null,
            Value::Text(s) => s.clone().into(),
        }
    }
}

/// Rows sharing one column schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the schema");
        self.rows.push(row);
    }

    pub fn append(&mut self, other: Table) -> Result<(), ReportError> {
        if other.columns != self.columns {
            return Err(ReportError::Schema(format!(
                "{:?} vs {:?}",
                self.columns, other.columns
            )));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn from_trace(trace: &sqvar::SolveTrace) -> Self {
        let mut cols = vec!["iteration"];
        cols.extend(&trace.columns);
        let mut t = Table::new(&cols);
        for r in &trace.rows {
            let mut row = vec![Value::from(r.iteration)];
            row.extend(r.values.iter().map(|v| Value::Num(*v)));
            t.push(row);
        }
        t
    }

    pub fn write(&self, mut out: impl Write, format: Format) -> Result<(), ReportError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Value::render))?;
                }
                w.flush()?;
            }
            Format::Json => {
                let objects: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .cloned()
                            .zip(row.iter().map(Value::to_json))
                            .collect();
                        obj.into()
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut out, &objects)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}
