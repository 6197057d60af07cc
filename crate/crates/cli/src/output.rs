use crate::config::Format;
use serde_json::{Map, Value};
use wickgraph::report::sig;

pub const DIGITS: usize = 9;

#[derive(Debug, Clone)]
pub enum Cell {
    Str(String),
    Num(f64),
    Int(u64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Str(s) => s.clone(),
            Cell::Num(x) => sig(*x, DIGITS),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Str(s) => Value::String(s.clone()),
            Cell::Num(x) => sig(*x, DIGITS)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or_else(|| Value::String(sig(*x, DIGITS)), Value::Number),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.into())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}
impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}
impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub failed: usize,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Report { columns: columns.to_vec(), rows: Vec::new(), failed: 0 }
    }

    pub fn checks() -> Self {
        Report::new(&["check", "pass", "measured", "expected", "tolerance", "detail"])
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Record a check; `tolerance` is in the units of `|measured - expected|`.
    pub fn check(&mut self, name: impl Into<String>, measured: f64, expected: f64, tolerance: f64, detail: impl Into<String>) {
        let pass = (measured - expected).abs() <= tolerance;
        self.check_flag(name, pass, measured, expected, tolerance, detail);
    }

    pub fn check_flag(
        &mut self,
        name: impl Into<String>,
        pass: bool,
        measured: f64,
        expected: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) {
        if !pass {
            self.failed += 1;
        }
        self.push(vec![
            Cell::Str(name.into()),
            pass.into(),
            measured.into(),
            expected.into(),
            tolerance.into(),
            Cell::Str(detail.into()),
        ]);
    }

    pub fn render(&self, format: Format, meta: &Value) -> String {
        match format {
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&r.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
                s.push_str("# ");
                s.push_str(&meta.to_string());
                s.push('\n');
                s
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let m: Map<String, Value> =
                            self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                        Value::Object(m)
                    })
                    .collect();
                let mut doc = Map::new();
                doc.insert("metadata".into(), meta.clone());
                doc.insert("rows".into(), Value::Array(rows));
                doc.insert("failed".into(), Value::from(self.failed));
                let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
                s.push('\n');
                s
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_checks_are_counted() {
        let mut r = Report::checks();
        r.check("a", 1.0, 1.0, 0.0, "");
        r.check("b", 1.0, 2.0, 0.5, "");
        assert_eq!(r.failed, 1);
        let csv = r.render(Format::Csv, &serde_json::json!({}));
        assert!(csv.contains("b,false,1,2,0.5,"));
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(Cell::from("poly:0,1").csv(), "\"poly:0,1\"");
        assert_eq!(Cell::Num(1.0 / 3.0).csv(), "0.333333333");
    }
}
