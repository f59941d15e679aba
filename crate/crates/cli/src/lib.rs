//! Batch experiment driver for the `nctorus` library.

pub mod commands;
pub mod config;
pub mod expr;
pub mod metric_spec;
pub mod report;
pub mod symbol;

use std::path::Path;

use clap::ValueEnum;
use thiserror::Error;

pub use commands::run;
pub use config::ExperimentConfig;
pub use report::{Gate, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("gate failed: {stage}: {message}")]
    Numerical { stage: String, message: String },
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical { .. } => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    AlgebraSelftest,
    Weyl,
    TraceTheorem,
    Density,
    Integration,
    Curvature,
    Volumes,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::AlgebraSelftest => "algebra-selftest",
            Subcommand::Weyl => "weyl",
            Subcommand::TraceTheorem => "trace-theorem",
            Subcommand::Density => "density",
            Subcommand::Integration => "integration",
            Subcommand::Curvature => "curvature",
            Subcommand::Volumes => "volumes",
        }
    }
}

/// Write `<dir>/<subcommand>.json` and, when present, one CSV per table.
pub fn write_outputs(rep: &Report, doc: &serde_json::Value, dir: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let text = serde_json::to_string_pretty(doc).expect("report serializes");
    std::fs::write(dir.join(format!("{}.json", rep.subcommand)), text + "\n").map_err(io)?;
    for t in &rep.tables {
        let path = dir.join(format!("{}_{}.csv", rep.subcommand, t.name));
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let csv_err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        w.write_record(&t.header).map_err(csv_err)?;
        for row in &t.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
    }
    Ok(())
}
