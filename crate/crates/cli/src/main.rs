use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use nctorus_cli::{run, write_outputs, CliError, ExperimentConfig, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "nctorus", version, about = "Spectral experiments on curved noncommutative tori")]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// JSON experiment configuration; subcommand defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the JSON report and CSV dumps.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Write sequence dumps as CSV next to the report.
    #[arg(long)]
    csv: bool,
}

fn execute(args: &Args) -> Result<bool, CliError> {
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default_for(args.subcommand.name()),
    };
    if args.csv {
        cfg.output.csv = true;
    }
    if let Some(dir) = &args.out {
        cfg.output.dir = Some(dir.display().to_string());
    }
    let rep = run(args.subcommand, &cfg)?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let doc = rep.document(stamp);
    println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
    if let Some(dir) = &cfg.output.dir {
        write_outputs(&rep, &doc, dir.as_ref())?;
    }
    for name in rep.failed() {
        eprintln!("gate failed: {name}");
    }
    Ok(rep.pass())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
