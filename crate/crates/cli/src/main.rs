//! `nyman-lab`: command-line runner for the numerical experiments.
//!
//! Every command writes its payload files into `--out-dir` together with a
//! `manifest.json` describing the resolved configuration. Payloads are
//! byte-identical across runs with the same configuration; the timestamp
//! lives only in the manifest.

mod commands;
mod errors;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde::Serialize;

use crate::commands::Command;
use crate::errors::CliError;

pub const DEFAULT_ZERO_TABLE: &str = "data/zeros_1e5.txt";

#[derive(Debug, Parser, Serialize)]
#[command(name = "nyman-lab", version, about = "Numerical laboratory for the Nyman-Beurling distance d_N")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Directory receiving the report files and the manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Seed for sampled grids.
    #[arg(long, global = true, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Zero table, one ordinate per line.
    #[arg(long, global = true, env = "NYMAN_ZERO_TABLE", default_value = DEFAULT_ZERO_TABLE)]
    pub zero_table: PathBuf,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    outputs: Vec<String>,
    timestamp_unix: u64,
}

/// A payload file produced by a command.
pub struct Output {
    pub name: String,
    pub contents: Vec<u8>,
}

fn write_outputs(config: &RunConfig, outputs: &[Output]) -> Result<(), CliError> {
    std::fs::create_dir_all(&config.out_dir)?;
    for o in outputs {
        std::fs::write(config.out_dir.join(&o.name), &o.contents)?;
    }
    let manifest = Manifest {
        tool: "nyman-lab",
        version: env!("CARGO_PKG_VERSION"),
        config,
        outputs: outputs.iter().map(|o| o.name.clone()).collect(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    std::fs::write(config.out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

fn report_error(out_dir: &Path, err: &CliError) {
    let payload = serde_json::json!({ "error": { "code": err.code(), "message": err.to_string() } });
    let text = serde_json::to_string_pretty(&payload).unwrap_or_default();
    eprintln!("{text}");
    if std::fs::create_dir_all(out_dir).is_ok() {
        let _ = std::fs::write(out_dir.join("error.json"), text + "\n");
    }
}

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let result = commands::run(&config).and_then(|(outputs, summary)| {
        write_outputs(&config, &outputs)?;
        print!("{summary}");
        for o in &outputs {
            println!("wrote {}", config.out_dir.join(&o.name).display());
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&config.out_dir, &e);
            ExitCode::from(2)
        }
    }
}
