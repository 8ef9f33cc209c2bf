//! Run specifications: a config file merged with command-line overrides.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Trace,
    RelEntropy,
    Renyi,
    Linsolve,
    Hamsim,
    VerifyPolys,
    VarianceSweep,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Trace,
        Command::RelEntropy,
        Command::Renyi,
        Command::Linsolve,
        Command::Hamsim,
        Command::VerifyPolys,
        Command::VarianceSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Trace => "trace",
            Command::RelEntropy => "rel-entropy",
            Command::Renyi => "renyi",
            Command::Linsolve => "linsolve",
            Command::Hamsim => "hamsim",
            Command::VerifyPolys => "verify-polys",
            Command::VarianceSweep => "variance-sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command '{s}'"))
    }
}

/// Config file contents. Keys other than `command`, `seed`, `output_path`
/// and the `params` table are treated as parameters too.
#[derive(Debug, Default)]
struct ConfigFile {
    command: Option<String>,
    seed: Option<u64>,
    output_path: Option<PathBuf>,
    params: BTreeMap<String, Value>,
}

/// A fully merged run request.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    /// Directory against which relative paths in each parameter resolve.
    pub bases: BTreeMap<String, PathBuf>,
}

/// Values supplied on the command line; they take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub params: Vec<(String, Value)>,
}

fn parse_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let syntax = |msg: String| CliError::config(path.display().to_string(), format!("unparseable config: {msg}"));
    let root: Value = if is_json {
        serde_json::from_str(&text).map_err(|e| syntax(e.to_string()))?
    } else {
        let table: toml::Table = toml::from_str(&text).map_err(|e| syntax(e.to_string()))?;
        serde_json::to_value(table).map_err(|e| syntax(e.to_string()))?
    };
    let Value::Object(map) = root else {
        return Err(syntax("top level must be a table".into()));
    };
    let mut file = ConfigFile::default();
    for (key, value) in map {
        match key.as_str() {
            "command" => match value {
                Value::String(s) => file.command = Some(s),
                other => return Err(CliError::config(key, format!("expected a command name, got {other}"))),
            },
            "seed" => match value.as_u64() {
                Some(s) => file.seed = Some(s),
                None => return Err(CliError::config(key, format!("expected a non-negative integer, got {value}"))),
            },
            "output_path" => match value {
                Value::String(s) => file.output_path = Some(PathBuf::from(s)),
                other => return Err(CliError::config(key, format!("expected a path, got {other}"))),
            },
            "params" => match value {
                Value::Object(params) => file.params.extend(params),
                other => return Err(CliError::config(key, format!("expected a table, got {other}"))),
            },
            _ => {
                file.params.insert(key, value);
            }
        }
    }
    Ok(file)
}

impl RunSpec {
    pub fn build(command: Command, config: Option<&Path>, overrides: Overrides) -> Result<Self> {
        let cwd = PathBuf::from(".");
        let mut spec =
            RunSpec { command, params: BTreeMap::new(), seed: DEFAULT_SEED, output_path: None, bases: BTreeMap::new() };
        if let Some(path) = config {
            let file = parse_config(path)?;
            if let Some(name) = file.command {
                let declared: Command = name.parse().map_err(|e| CliError::config("command", e))?;
                if declared != command {
                    return Err(CliError::config(
                        "command",
                        format!("config is for '{declared}' but '{command}' was requested"),
                    ));
                }
            }
            let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| cwd.clone());
            spec.seed = file.seed.unwrap_or(DEFAULT_SEED);
            spec.output_path = file.output_path.map(|p| if p.is_relative() { base.join(p) } else { p });
            for (k, v) in file.params {
                spec.bases.insert(k.clone(), base.clone());
                spec.params.insert(k, v);
            }
        }
        if let Some(seed) = overrides.seed {
            spec.seed = seed;
        }
        if overrides.output_path.is_some() {
            spec.output_path = overrides.output_path;
        }
        for (k, v) in overrides.params {
            spec.bases.insert(k.clone(), cwd.clone());
            spec.params.insert(k, v);
        }
        Ok(spec)
    }

    /// Parameter echo written into every record.
    pub fn echo(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("command".into(), Value::from(self.command.name()));
        map.insert("seed".into(), Value::from(self.seed));
        map.insert("params".into(), Value::Object(self.params.clone().into_iter().collect()));
        Value::Object(map)
    }
}

/// Parses `key=value`; the value is read as JSON when possible, else as a string.
pub fn parse_assignment(s: &str) -> Result<(String, Value), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    let key = k.trim();
    if key.is_empty() {
        return Err(format!("empty key in '{s}'"));
    }
    let value = serde_json::from_str(v.trim()).unwrap_or_else(|_| Value::String(v.trim().to_string()));
    Ok((key.to_string(), value))
}

/// Typed, tracked access to a spec's parameters.
///
/// Every getter validates the value and reports the key on failure;
/// [`Params::finish`] rejects keys that no getter asked for.
pub struct Params<'a> {
    spec: &'a RunSpec,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Params<'a> {
    pub fn new(spec: &'a RunSpec) -> Self {
        Self { spec, used: RefCell::new(BTreeSet::new()) }
    }

    pub fn spec(&self) -> &'a RunSpec {
        self.spec
    }

    pub fn seed(&self) -> u64 {
        self.spec.seed
    }

    pub fn raw(&self, key: &str) -> Option<&'a Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.spec.params.get(key)
    }

    pub fn base(&self, key: &str) -> &'a Path {
        self.spec.bases.get(key).map(PathBuf::as_path).unwrap_or(Path::new("."))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => n
                .as_f64()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| CliError::config(key, "not a finite number")),
            Some(Value::String(s)) => s
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| CliError::config(key, format!("'{s}' is not a number"))),
            Some(other) => Err(CliError::config(key, format!("expected a number, got {other}"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn required_f64(&self, key: &str) -> Result<f64> {
        self.opt_f64(key)?.ok_or_else(|| CliError::config(key, "missing required parameter"))
    }

    /// A number with `lo < x < hi`.
    pub fn open_interval(&self, key: &str, x: f64, lo: f64, hi: f64) -> Result<f64> {
        if x > lo && x < hi {
            Ok(x)
        } else {
            Err(CliError::config(key, format!("{x} outside ({lo}, {hi})")))
        }
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.raw(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => n
                .as_u64()
                .map(|v| Some(v as usize))
                .ok_or_else(|| CliError::config(key, format!("{n} is not a non-negative integer"))),
            Some(Value::String(s)) => {
                s.parse().map(Some).map_err(|_| CliError::config(key, format!("'{s}' is not a non-negative integer")))
            }
            Some(other) => Err(CliError::config(key, format!("expected an integer, got {other}"))),
        }
    }

    pub fn positive_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.opt_usize(key)? {
            Some(0) => Err(CliError::config(key, "must be positive")),
            v => Ok(v),
        }
    }

    pub fn usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.raw(key) {
            None | Some(Value::Null) => Ok(default.to_vec()),
            Some(Value::Array(items)) if !items.is_empty() => items
                .iter()
                .map(|v| {
                    v.as_u64()
                        .filter(|&x| x > 0)
                        .map(|x| x as usize)
                        .ok_or_else(|| CliError::config(key, format!("{v} is not a positive integer")))
                })
                .collect(),
            Some(Value::Number(n)) => n
                .as_u64()
                .filter(|&x| x > 0)
                .map(|x| vec![x as usize])
                .ok_or_else(|| CliError::config(key, format!("{n} is not a positive integer"))),
            Some(other) => Err(CliError::config(key, format!("expected a list of positive integers, got {other}"))),
        }
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<&'a str>> {
        match self.raw(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(other) => Err(CliError::config(key, format!("expected a string, got {other}"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None | Some(Value::Null) => Ok(default),
            Some(Value::Bool(b)) => Ok(*b),
            Some(other) => Err(CliError::config(key, format!("expected true or false, got {other}"))),
        }
    }

    /// Parses a string parameter through `FromStr`.
    pub fn parsed<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.opt_str(key)? {
            None => Ok(default),
            Some(s) => s.parse().map_err(|e: T::Err| CliError::config(key, e.to_string())),
        }
    }

    /// Rejects parameters that the command does not understand.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.spec.params.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(CliError::config(k.as_str(), format!("unknown parameter for '{}'", self.spec.command))),
            None => Ok(()),
        }
    }
}
