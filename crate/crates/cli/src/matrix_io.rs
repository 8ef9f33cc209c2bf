//! Dense matrix files.
//!
//! `json-dense`: an array of rows, each an array of entries; an entry is
//! `[re, im]` or a bare real number.
//!
//! `csv-complex`: one line per row holding `re,im` pairs side by side, so a
//! row of `n` entries has `2n` fields. Lines starting with `#` are ignored.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use locc_trace::numkit::ComplexMatrix;
use locc_trace::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    JsonDense,
    CsvComplex,
}

impl MatrixFormat {
    /// `.csv` files are `csv-complex`, everything else `json-dense`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::CsvComplex,
            _ => MatrixFormat::JsonDense,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json-dense" | "json" => Ok(MatrixFormat::JsonDense),
            "csv-complex" | "csv" => Ok(MatrixFormat::CsvComplex),
            other => Err(format!("unknown matrix format '{other}' (expected json-dense or csv-complex)")),
        }
    }
}

impl fmt::Display for MatrixFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixFormat::JsonDense => "json-dense",
            MatrixFormat::CsvComplex => "csv-complex",
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum Entry {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Builds a matrix from rows, rejecting ragged input.
pub(crate) fn from_rows(rows: Vec<Vec<Complex64>>, origin: &Path) -> Result<ComplexMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err(CliError::format(origin, "matrix is empty"));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(CliError::format(
            origin,
            format!("ragged rows: row {i} has {} entries, row 0 has {cols}", row.len()),
        ));
    }
    let n = rows.len();
    let entries = rows.into_iter().flatten().collect();
    Ok(ComplexMatrix::from_row_major(n, cols, entries)?)
}

/// Parses the `json-dense` layout from an already decoded value.
pub(crate) fn from_json_value(value: serde_json::Value, origin: &Path) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<Entry>> = serde_json::from_value(value)
        .map_err(|e| CliError::format(origin, format!("expected an array of rows of [re, im] entries: {e}")))?;
    from_rows(rows.into_iter().map(|r| r.into_iter().map(Complex64::from).collect()).collect(), origin)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn csv_rows(text: &str, path: &Path) -> Result<Vec<Vec<Complex64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| CliError::format(path, format!("row {i}: {e}")))?;
            if rec.len() % 2 != 0 {
                return Err(CliError::format(path, format!("row {i} has {} fields; expected re,im pairs", rec.len())));
            }
            let nums = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| CliError::format(path, format!("row {i}: '{f}': {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            Ok(nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
        })
        .collect()
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<ComplexMatrix> {
    let text = read(path)?;
    match format {
        MatrixFormat::JsonDense => {
            let value = serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))?;
            from_json_value(value, path)
        }
        MatrixFormat::CsvComplex => from_rows(csv_rows(&text, path)?, path),
    }
}

/// Loads a vector stored as a single row or a single column.
pub fn load_vector(path: &Path, format: MatrixFormat) -> Result<Vec<Complex64>> {
    let text = read(path)?;
    let entries = match format {
        MatrixFormat::JsonDense => {
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))?;
            return vector_from_json(value, path);
        }
        MatrixFormat::CsvComplex => csv_rows(&text, path)?,
    };
    let m = from_rows(entries, path)?;
    as_vector(&m, path)
}

pub(crate) fn vector_from_json(value: serde_json::Value, origin: &Path) -> Result<Vec<Complex64>> {
    if let Ok(flat) = serde_json::from_value::<Vec<Entry>>(value.clone()) {
        return Ok(flat.into_iter().map(Complex64::from).collect());
    }
    as_vector(&from_json_value(value, origin)?, origin)
}

fn as_vector(m: &ComplexMatrix, origin: &Path) -> Result<Vec<Complex64>> {
    match (m.rows(), m.cols()) {
        (1, _) => Ok(m.to_row_major()),
        (_, 1) => Ok(m.col_vec(0)),
        (r, c) => Err(CliError::format(origin, format!("expected a vector, found a {r}x{c} matrix"))),
    }
}

/// `[[[re, im], ...], ...]`.
pub fn to_json_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j)).map(|z| [z.re, z.im]).collect()).collect()
}

/// Writes `m`; shortest round-trip float formatting makes load(save(m))
/// bit-identical.
pub fn save_matrix(path: &Path, m: &ComplexMatrix, format: MatrixFormat) -> Result<()> {
    let text = match format {
        MatrixFormat::JsonDense => {
            let mut s = serde_json::to_string(&to_json_rows(m)).map_err(|e| CliError::format(path, e.to_string()))?;
            s.push('\n');
            s
        }
        MatrixFormat::CsvComplex => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            for i in 0..m.rows() {
                let fields: Vec<String> = (0..m.cols())
                    .flat_map(|j| {
                        let z = m.get(i, j);
                        [z.re.to_string(), z.im.to_string()]
                    })
                    .collect();
                w.write_record(&fields).map_err(|e| CliError::format(path, e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::format(path, e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::format(path, e.to_string()))?
        }
    };
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
