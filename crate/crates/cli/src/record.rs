//! JSON-lines result records.
//!
//! Field names and types are fixed by `schema/record.schema.json`. Maps are
//! ordered, so identical runs produce byte-identical lines apart from
//! `wall_time_s`.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use locc_trace::apps::BudgetItem;
use locc_trace::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub label: String,
    pub allotted: f64,
    pub achieved: f64,
}

impl From<&BudgetItem> for Budget {
    fn from(b: &BudgetItem) -> Self {
        Self { label: b.label.clone(), allotted: b.allotted, achieved: b.achieved }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub schema_version: u32,
    pub command: String,
    pub label: String,
    pub seed: u64,
    pub spec: Value,
    /// SHA-256 over the canonical JSON of the resolved inputs.
    pub inputs_hash: String,
    pub estimate: Value,
    /// Exact value when the desk-scale oracle can compute it.
    pub oracle: Value,
    pub error: Option<f64>,
    pub queries: u64,
    pub eps_budget: Vec<Budget>,
    pub wall_time_s: f64,
    pub meta: BTreeMap<String, Value>,
}

impl Record {
    pub fn to_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| CliError::config("record", e.to_string()))
    }
}

pub fn complex(z: Complex64) -> Value {
    serde_json::json!({ "re": z.re, "im": z.im })
}

pub fn complex_vec(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|z| serde_json::json!([z.re, z.im])).collect())
}

pub fn inputs_hash(inputs: &Value) -> String {
    let canonical = serde_json::to_vec(inputs).unwrap_or_default();
    Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
}

/// Appends records to `path`, or writes them to stdout.
pub fn emit(records: &[Record], path: Option<&Path>) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&r.to_line()?);
        text.push('\n');
    }
    match path {
        Some(p) => {
            let mut f = OpenOptions::new().create(true).append(true).open(p).map_err(|e| CliError::io(p, e))?;
            f.write_all(text.as_bytes()).map_err(|e| CliError::io(p, e))
        }
        None => io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}
