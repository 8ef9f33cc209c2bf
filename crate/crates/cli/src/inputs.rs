//! Resolution of matrix- and vector-valued parameters.
//!
//! A value may be a file path, an inline `json-dense` array, or
//! `fixture:<name>` for a generated input of dimension `d`:
//!
//! | name                 | matrix                                        |
//! |----------------------|-----------------------------------------------|
//! | `pure-state`         | `|+⟩⟨+|`, the uniform superposition            |
//! | `maximally-mixed`    | `I/d`                                         |
//! | `identity`           | `I`                                           |
//! | `projector`          | `|0⟩⟨0|`                                      |
//! | `random-state`       | full-rank density matrix, eigenvalues ≥ 1/(2d) |
//! | `random-contraction` | Ginibre matrix scaled to norm 0.9             |
//! | `random-hermitian`   | Hermitian matrix scaled to norm 1             |
//!
//! Vector fixtures: `basis0` (`|0⟩`), `uniform`, `random-unit`. Random
//! fixtures are seeded from the run seed and the parameter name.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;

use locc_trace::numkit::{
    haar_state, random_contraction, random_density_matrix, random_hermitian, ComplexMatrix, RngStream,
};
use locc_trace::Complex64;
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::matrix_io::{from_json_value, load_matrix, load_vector, to_json_rows, vector_from_json, MatrixFormat};
use crate::spec::Params;

const FIXTURE_STREAM: u64 = 0x4649_5854;

fn key_label(key: &str) -> u64 {
    key.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub struct Inputs<'p, 'a> {
    params: &'p Params<'a>,
    d: usize,
    format: Option<MatrixFormat>,
    resolved: RefCell<BTreeMap<String, Value>>,
}

impl<'p, 'a> Inputs<'p, 'a> {
    /// Reads `d` (default 2) and `format` up front.
    pub fn new(params: &'p Params<'a>) -> Result<Self> {
        let d = params.positive_usize("d")?.unwrap_or(2);
        if !d.is_power_of_two() {
            return Err(CliError::config("d", format!("{d} is not a power of two")));
        }
        let format = match params.opt_str("format")? {
            Some(s) => Some(s.parse().map_err(|e: String| CliError::config("format", e))?),
            None => None,
        };
        Ok(Self { params, d, format, resolved: RefCell::new(BTreeMap::new()) })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn stream(&self, key: &str) -> RngStream {
        RngStream::new(self.params.seed()).child(FIXTURE_STREAM).child(key_label(key))
    }

    fn fixture_matrix(&self, key: &str, name: &str) -> Result<ComplexMatrix> {
        let d = self.d;
        let s = self.stream(key);
        Ok(match name {
            "pure-state" => ComplexMatrix::from_fn(d, d, |_, _| Complex64::new(1.0 / d as f64, 0.0)),
            "maximally-mixed" => ComplexMatrix::identity(d).scale(1.0 / d as f64),
            "identity" => ComplexMatrix::identity(d),
            "projector" => {
                let mut diag = vec![0.0; d];
                diag[0] = 1.0;
                ComplexMatrix::from_diagonal_real(&diag)
            }
            "random-state" => random_density_matrix(d, d, 0.5 / d as f64, &s)?,
            "random-contraction" => random_contraction(d, 0.9, &s)?,
            "random-hermitian" => random_hermitian(d, 1.0, &s)?,
            other => return Err(CliError::config(key, format!("unknown matrix fixture '{other}'"))),
        })
    }

    fn fixture_vector(&self, key: &str, name: &str) -> Result<Vec<Complex64>> {
        let d = self.d;
        Ok(match name {
            "basis0" => (0..d).map(|i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)).collect(),
            "uniform" => vec![Complex64::new(1.0 / (d as f64).sqrt(), 0.0); d],
            "random-unit" => {
                let mut v = Vec::new();
                haar_state(d, &mut self.stream(key).rng(), &mut v);
                v
            }
            other => return Err(CliError::config(key, format!("unknown vector fixture '{other}'"))),
        })
    }

    fn path_format(&self, path: &Path) -> MatrixFormat {
        self.format.unwrap_or_else(|| MatrixFormat::from_path(path))
    }

    fn record(&self, key: &str, value: Value) {
        self.resolved.borrow_mut().insert(key.to_string(), value);
    }

    fn resolve_matrix(&self, key: &str, value: &Value) -> Result<ComplexMatrix> {
        let m = match value {
            Value::String(s) => match s.strip_prefix("fixture:") {
                Some(name) => self.fixture_matrix(key, name)?,
                None => {
                    let path = self.params.base(key).join(s);
                    load_matrix(&path, self.path_format(&path))?
                }
            },
            Value::Array(_) => from_json_value(value.clone(), Path::new(key))?,
            other => {
                return Err(CliError::config(key, format!("expected a path, fixture or inline matrix, got {other}")))
            }
        };
        self.record(key, serde_json::to_value(to_json_rows(&m)).unwrap_or(Value::Null));
        Ok(m)
    }

    pub fn matrix(&self, key: &str) -> Result<ComplexMatrix> {
        match self.params.raw(key) {
            Some(v) => self.resolve_matrix(key, v),
            None => Err(CliError::config(key, "missing required matrix parameter")),
        }
    }

    pub fn matrix_or(&self, key: &str, default: &str) -> Result<ComplexMatrix> {
        match self.params.raw(key) {
            Some(v) => self.resolve_matrix(key, v),
            None => self.resolve_matrix(key, &Value::String(default.to_string())),
        }
    }

    pub fn vector(&self, key: &str) -> Result<Vec<Complex64>> {
        let v = match self.params.raw(key) {
            Some(Value::String(s)) => match s.strip_prefix("fixture:") {
                Some(name) => self.fixture_vector(key, name)?,
                None => {
                    let path = self.params.base(key).join(s);
                    load_vector(&path, self.path_format(&path))?
                }
            },
            Some(v @ Value::Array(_)) => vector_from_json(v.clone(), Path::new(key))?,
            Some(other) => {
                return Err(CliError::config(key, format!("expected a path, fixture or inline vector, got {other}")))
            }
            None => return Err(CliError::config(key, "missing required vector parameter")),
        };
        self.record(key, Value::Array(v.iter().map(|z| serde_json::json!([z.re, z.im])).collect()));
        Ok(v)
    }

    /// Resolved inputs, for hashing.
    pub fn resolved(&self) -> Value {
        Value::Object(self.resolved.borrow().clone().into_iter().collect())
    }
}
