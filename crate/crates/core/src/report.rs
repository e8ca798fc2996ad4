//! CSV tables with a provenance header.
//!
//! Every table starts with `#`-prefixed lines naming the tool version, the
//! command, any run parameters and the fully resolved configuration as one
//! line of JSON, so a run can be reproduced from its outputs alone.

use crate::config::NetworkConfig;
use crate::error::{invalid, Result};

pub const TOOL: &str = "hetassoc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub params: Vec<(String, String)>,
    pub config: NetworkConfig,
}

impl Provenance {
    pub fn new(command: &str, config: &NetworkConfig) -> Self {
        Provenance {
            command: command.to_string(),
            params: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn header(&self) -> String {
        let mut out = format!("# {TOOL} {VERSION}\n# command: {}\n", self.command);
        for (k, v) in &self.params {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let config = serde_json::to_string(&self.config).expect("config serializes");
        out.push_str(&format!("# config: {config}\n"));
        out
    }

    /// The same information as a JSON object, for summaries.
    pub fn to_json(&self) -> serde_json::Value {
        let params: serde_json::Map<String, serde_json::Value> = self
            .params
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        serde_json::json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "params": params,
            "config": self.config,
        })
    }
}

/// A rectangular table of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(invalid(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Parsed numeric values of one column; empty cells become `None`.
    pub fn numbers(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.column(name)?;
        Some(self.rows.iter().map(|r| r[c].parse().ok()).collect())
    }

    pub fn to_csv(&self, provenance: &Provenance) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory");
        }
        let body = String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 cells");
        provenance.header() + &body
    }
}

/// Shortest representation that parses back to the same value; empty for
/// missing values.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
