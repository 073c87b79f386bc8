//! Result tables with a fixed text representation.
//!
//! Numbers are rounded to 12 significant digits on output, so reading a
//! written table and writing it again reproduces the same bytes.

use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown output format '{other}' (csv | json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

/// `x` in scientific notation with 12 significant digits; `inf`, `-inf`, `nan` otherwise.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.11e}")
    }
}

fn rounded(x: f64) -> f64 {
    format_number(x).parse().unwrap_or(x)
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    fn to_text(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse_text(s: &str) -> Cell {
        if let Ok(v) = s.parse::<i64>() {
            return Cell::Int(v);
        }
        match s {
            "true" => return Cell::Bool(true),
            "false" => return Cell::Bool(false),
            _ => {}
        }
        let numeric = s.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.')
            || matches!(s, "inf" | "nan");
        match s.parse::<f64>() {
            Ok(v) if numeric => Cell::Num(v),
            _ => Cell::Text(s.to_string()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => Number::from_f64(rounded(*v)).map(Value::Number).unwrap_or_else(|| Value::String(format_number(*v))),
            Cell::Int(v) => Value::Number((*v).into()),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }

    fn from_json(v: &Value) -> Result<Cell> {
        Ok(match v {
            Value::Number(n) => match n.as_i64() {
                Some(i) => Cell::Int(i),
                None => Cell::Num(n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}")))?),
            },
            Value::String(s) if matches!(s.as_str(), "inf" | "-inf" | "nan") => Cell::Num(s.parse().expect("literal")),
            Value::String(s) => Cell::Text(s.clone()),
            Value::Bool(b) => Cell::Bool(*b),
            other => return Err(Error::Parse(format!("unsupported JSON value {other}"))),
        })
    }
}

/// Named columns and rows of cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        ResultTable { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; non-numeric cells become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn parse(text: &str, format: Format) -> Result<Self> {
        match format {
            Format::Csv => Self::from_csv(text),
            Format::Json => Self::from_json(text),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_text)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 output")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns: Vec<String> = r
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let mut table = ResultTable { columns, rows: Vec::new() };
        for record in r.records() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if record.len() != table.columns.len() {
                return Err(Error::Parse(format!("row width {} != header width {}", record.len(), table.columns.len())));
            }
            table.rows.push(record.iter().map(Cell::parse_text).collect());
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                Value::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&Value::Array(records)).expect("serializable");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let Value::Array(records) = value else {
            return Err(Error::Parse("expected a JSON array of records".into()));
        };
        let mut table = ResultTable::default();
        for (i, rec) in records.iter().enumerate() {
            let Value::Object(obj) = rec else {
                return Err(Error::Parse(format!("record {i} is not an object")));
            };
            if i == 0 {
                table.columns = obj.keys().cloned().collect();
            }
            if obj.len() != table.columns.len() || !obj.keys().zip(&table.columns).all(|(a, b)| a == b) {
                return Err(Error::Parse(format!("record {i} has different keys")));
            }
            table.rows.push(obj.values().map(Cell::from_json).collect::<Result<_>>()?);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new(["n", "value", "curve", "accepted"]);
        t.push(vec![16usize.into(), 39.47841760435743.into(), "ellipse(2,1)".into(), true.into()]);
        t.push(vec![32usize.into(), f64::INFINITY.into(), "circle".into(), false.into()]);
        t.push(vec![64usize.into(), (-1.25e-7).into(), "torus_knot(2,3,2,0.5)".into(), true.into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,value,curve,accepted"));
        assert_eq!(lines.next(), Some("16,3.94784176044e1,\"ellipse(2,1)\",true"));
        assert_eq!(lines.next(), Some("32,inf,circle,false"));
    }

    #[test]
    fn round_trips_are_byte_identical() {
        for format in [Format::Csv, Format::Json] {
            let text = sample().render(format);
            let back = ResultTable::parse(&text, format).unwrap();
            assert_eq!(back.render(format), text, "{format}");
            assert_eq!(back.columns, sample().columns);
        }
    }

    #[test]
    fn malformed_input() {
        assert!(ResultTable::from_json("{}").is_err());
        assert!(ResultTable::from_csv("a,b\n1\n").is_err());
        assert!("xml".parse::<Format>().is_err());
    }

    proptest! {
        #[test]
        fn numbers_round_trip(xs in proptest::collection::vec(-1e12f64..1e12, 1..20), e in -30i32..30) {
            let mut t = ResultTable::new(["x"]);
            for x in xs {
                t.push(vec![(x * 10f64.powi(e)).into()]);
            }
            for format in [Format::Csv, Format::Json] {
                let text = t.render(format);
                let back = ResultTable::parse(&text, format).unwrap();
                prop_assert_eq!(back.render(format), text);
            }
        }
    }
}
