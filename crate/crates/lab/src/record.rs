//! Persisted outcome of one experiment run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
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

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|c| c.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metric {
    Real(f64),
    Complex { re: f64, im: f64 },
    Text(String),
    Table(Table),
}

impl From<Complex64> for Metric {
    fn from(z: Complex64) -> Self {
        Metric::Complex { re: z.re, im: z.im }
    }
}

/// One pass/fail check; `pass` is decided by the experiment that emits it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    #[serde(with = "lenient_float")]
    pub tolerance: f64,
    #[serde(with = "lenient_float")]
    pub observed: f64,
    pub pass: bool,
}

/// Non-finite values travel as the strings `"inf"`, `"-inf"`, `"nan"`.
mod lenient_float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("expected a number, got `{other}`"))),
            },
        }
    }
}

impl Assertion {
    pub fn at_most(name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Assertion { name: name.into(), tolerance, observed, pass: observed <= tolerance }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Assertion { name: name.into(), tolerance, observed, pass: observed >= tolerance }
    }

    pub fn holds(name: impl Into<String>, observed: f64, tolerance: f64, pass: bool) -> Self {
        Assertion { name: name.into(), tolerance, observed, pass }
    }
}

/// Metrics and assertions produced by an experiment body.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub metrics: BTreeMap<String, Metric>,
    pub assertions: Vec<Assertion>,
}

impl Outcome {
    pub fn real(&mut self, name: impl Into<String>, v: f64) {
        self.metrics.insert(name.into(), Metric::Real(v));
    }

    pub fn complex(&mut self, name: impl Into<String>, z: Complex64) {
        self.metrics.insert(name.into(), z.into());
    }

    pub fn text(&mut self, name: impl Into<String>, s: impl Into<String>) {
        self.metrics.insert(name.into(), Metric::Text(s.into()));
    }

    pub fn table(&mut self, name: impl Into<String>, t: Table) {
        self.metrics.insert(name.into(), Metric::Table(t));
    }

    pub fn check(&mut self, a: Assertion) {
        self.assertions.push(a);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, Metric>,
    pub assertions: Vec<Assertion>,
    pub runtime_seconds: f64,
    pub version: String,
}

impl ResultRecord {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.pass)
    }

    pub fn tables(&self) -> impl Iterator<Item = (&String, &Table)> {
        self.metrics.iter().filter_map(|(k, m)| match m {
            Metric::Table(t) => Some((k, t)),
            _ => None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        for (name, m) in &self.metrics {
            let finite = match m {
                Metric::Real(v) => v.is_finite(),
                Metric::Complex { re, im } => re.is_finite() && im.is_finite(),
                Metric::Text(_) => true,
                Metric::Table(t) => t.rows.iter().flatten().all(|c| !matches!(c, Cell::Num(v) if !v.is_finite())),
            };
            if !finite {
                return Err(LabError::NonFinite(name.clone()));
            }
        }
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Writes `<stem>.<table>.csv` next to `path` for every table; returns the files written.
    pub fn save_tables(&self, path: &Path) -> Result<Vec<PathBuf>> {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("result");
        let dir = path.parent().unwrap_or(Path::new("."));
        let mut written = Vec::new();
        for (name, table) in self.tables() {
            let file = dir.join(format!("{stem}.{}.csv", name.replace('/', "_")));
            table.write_csv(std::fs::File::create(&file)?)?;
            written.push(file);
        }
        Ok(written)
    }
}
