//! Command-line front-end for `locc-trace`.
//!
//! Every command reads an optional TOML/JSON config, merges command-line
//! overrides, and writes one JSON object per line (see
//! `schema/record.schema.json`) to stdout or the configured output file.

pub mod commands;
pub mod error;
pub mod inputs;
pub mod matrix_io;
pub mod record;
pub mod spec;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::Value;

pub use error::{CliError, Result};
pub use record::Record;
pub use spec::{Command, Overrides, RunSpec};

#[derive(Debug, Parser)]
#[command(name = "locc-trace", version, about = "Simulated LOCC estimation of Tr(f(A) g(B)) and its applications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CliCommand {
    /// Estimate Tr(f(A) g(B)).
    Trace,
    /// Estimate the relative entropy D(rho||sigma).
    RelEntropy,
    /// Estimate the Petz-Rényi divergence D_alpha(rho||sigma).
    Renyi,
    /// Solve A x = b componentwise.
    Linsolve,
    /// Estimate Tr(M e^{-iHt} rho e^{iHt}) for H = H1 + H2.
    Hamsim,
    /// Check the polynomial approximations on a fresh grid.
    VerifyPolys,
    /// Measure the estimator variance across (d, m, N).
    VarianceSweep,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Trace => Command::Trace,
            CliCommand::RelEntropy => Command::RelEntropy,
            CliCommand::Renyi => Command::Renyi,
            CliCommand::Linsolve => Command::Linsolve,
            CliCommand::Hamsim => Command::Hamsim,
            CliCommand::VerifyPolys => Command::VerifyPolys,
            CliCommand::VarianceSweep => Command::VarianceSweep,
        }
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct GlobalArgs {
    /// TOML or JSON run specification.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Append records to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub d: Option<u64>,
    /// Fixed number of protocol iterations.
    #[arg(long = "N", global = true)]
    pub n: Option<u64>,
    /// Fixed shots per iteration.
    #[arg(long, global = true)]
    pub m: Option<u64>,
    /// Extra parameter; the value is parsed as JSON when possible.
    #[arg(short = 'p', long = "param", value_name = "KEY=VALUE", global = true, value_parser = spec::parse_assignment)]
    pub params: Vec<(String, Value)>,
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        let mut params = Vec::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                params.push((k.to_string(), v));
            }
        };
        put("eps", self.eps.map(Value::from));
        put("delta", self.delta.map(Value::from));
        put("d", self.d.map(Value::from));
        put("N", self.n.map(Value::from));
        put("m", self.m.map(Value::from));
        params.extend(self.params.iter().cloned());
        Overrides { seed: self.seed, output_path: self.out.clone(), params }
    }
}

/// Builds the run specification for parsed arguments.
pub fn build_spec(cli: &Cli) -> Result<RunSpec> {
    RunSpec::build(cli.command.into(), cli.global.config.as_deref(), cli.global.overrides())
}

/// Parses, runs, and emits; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match build_spec(&cli).and_then(|spec| {
        let records = commands::execute(&spec)?;
        record::emit(&records, spec.output_path.as_deref())
    }) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
