//! Everything an experiment produces, and how it lands on disk.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use burgers_lab::export::{fmt_f64, to_json_string};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::svg::Plot;

pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Text(v.to_string())
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

pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// `t` in the first column, one column per series; series share their time grid.
    pub fn from_series(name: &str, labels: &[String], series: &[&[(f64, f64)]]) -> Self {
        let mut headers = vec!["t".to_string()];
        headers.extend(labels.iter().cloned());
        let rows = series.first().map_or(0, |s| s.len());
        let rows = (0..rows)
            .map(|i| {
                let mut row = vec![Cell::Num(series[0][i].0)];
                row.extend(series.iter().map(|s| s.get(i).map_or(Cell::Text(String::new()), |p| Cell::Num(p.1))));
                row
            })
            .collect();
        Self {
            name: name.to_string(),
            headers,
            rows,
        }
    }

    pub fn write(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "{}", self.headers.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => fmt_f64(*v),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// One failed assertion, as written to `failures.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub case: String,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    pub message: String,
}

#[derive(Default)]
pub struct Artifacts {
    pub results: Map<String, Value>,
    pub tables: Vec<Table>,
    pub plots: Vec<(String, Plot)>,
    pub failures: Vec<Failure>,
    /// Printed to stdout after the run.
    pub summary: Vec<String>,
}

impl Artifacts {
    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.results.insert(key.to_string(), v);
    }

    /// Records a failure unless `ok`.
    pub fn check(&mut self, ok: bool, check: &str, case: &str, value: Option<f64>, limit: Option<f64>, message: impl Into<String>) {
        if !ok {
            self.failures.push(Failure {
                check: check.to_string(),
                case: case.to_string(),
                value,
                limit,
                message: message.into(),
            });
        }
    }

    /// `value < limit`, with NaN counting as a failure.
    pub fn check_below(&mut self, check: &str, case: &str, value: f64, limit: f64) {
        self.check(value < limit, check, case, Some(value), Some(limit), format!("{check} = {value:e} is not below {limit:e}"));
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Serializes a report and drops the named keys from the resulting object.
pub fn without<T: Serialize>(value: &T, drop: &[&str]) -> Value {
    let mut v = serde_json::to_value(value).expect("report values serialize");
    if let Value::Object(m) = &mut v {
        for k in drop {
            m.remove(*k);
        }
    }
    v
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> io::Error {
    io::Error::other(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Writes `report.json`, `failures.json`, the CSV tables and SVG plots.
pub fn write_all(dir: &Path, header: Map<String, Value>, art: &Artifacts, stamp: Option<&str>) -> io::Result<()> {
    let mut report = header;
    report.insert("passed".into(), Value::Bool(art.passed()));
    report.insert("failures".into(), serde_json::to_value(&art.failures)?);
    report.insert("results".into(), Value::Object(art.results.clone()));
    report.insert(
        "files".into(),
        Value::Array(
            art.tables
                .iter()
                .map(|t| format!("{}.csv", t.name))
                .chain(art.plots.iter().map(|(n, _)| format!("{n}.svg")))
                .map(Value::String)
                .collect(),
        ),
    );
    let report = to_json_string(&report).map_err(io::Error::other)?;
    write_file(&dir.join("report.json"), report.as_bytes())?;
    write_failures(dir, &art.failures)?;
    for t in &art.tables {
        let path = dir.join(format!("{}.csv", t.name));
        let mut buf = Vec::new();
        t.write(&mut buf)?;
        write_file(&path, &buf)?;
    }
    for (name, plot) in &art.plots {
        write_file(&dir.join(format!("{name}.svg")), plot.render(stamp).as_bytes())?;
    }
    Ok(())
}

/// Writes only `failures.json` (used when a run aborts before producing results).
pub fn write_failures(dir: &Path, failures: &[Failure]) -> io::Result<()> {
    let text = to_json_string(failures).map_err(io::Error::other)?;
    write_file(&dir.join("failures.json"), text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_use_lf_and_full_precision() {
        let mut t = Table::new("x", &["case", "q"]);
        t.push(vec!["a".into(), 0.1.into()]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "case,q\na,1.0000000000000001e-1\n");
    }

    #[test]
    fn nan_fails_a_below_check() {
        let mut a = Artifacts::default();
        a.check_below("q", "pair", 0.5, 1.0);
        assert!(a.passed());
        a.check_below("q", "pair", f64::NAN, 1.0);
        assert_eq!(a.failures.len(), 1);
    }
}
