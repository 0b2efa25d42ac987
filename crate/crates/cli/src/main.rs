//! `fmt-engine` — reproducible batch driver for hard-convex-particle
//! fundamental-measure calculations.
//!
//! ```text
//! fmt-engine <task> --config run.toml [--out dir] [--threads n]
//! ```
//!
//! Exit codes are stable: 0 success, 2 configuration error (parse, schema,
//! task mismatch, bad thread count), 3 validation error (body geometry,
//! domain limits, failed identity checks), 4 numeric failure
//! (non-convergence, packing overflow), 5 I/O error. All randomness comes
//! from config seeds; identical configs produce byte-identical artifacts
//! regardless of thread count.

mod config;
mod manifest;
mod tasks;

use clap::Parser;
use config::{RunConfig, TaskKind, SCHEMA_VERSION};
use manifest::{digest_string, Manifest, OutputRecord};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "fmt-engine",
    version,
    about = "Batch engine for hard-convex-particle fundamental-measure calculations",
    after_help = "Exit codes: 0 success, 2 config error, 3 validation error, \
                  4 numeric failure, 5 I/O error."
)]
struct Cli {
    /// Task to run; must match the `task` key in the config file.
    #[arg(value_enum)]
    task: TaskKind,
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker thread count; overrides the FMT_ENGINE_THREADS environment
    /// variable. Defaults to all available cores. Results do not depend on
    /// this setting.
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve_threads(cli_threads: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = cli_threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".to_string()));
        }
        return Ok(Some(n));
    }
    match std::env::var("FMT_ENGINE_THREADS") {
        Ok(value) => {
            let n: usize = value.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "FMT_ENGINE_THREADS must be a positive integer, got '{value}'"
                ))
            })?;
            if n == 0 {
                return Err(CliError::Config(
                    "FMT_ENGINE_THREADS must be at least 1".to_string(),
                ));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config_text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", cli.config.display())))?;
    let config = RunConfig::from_toml(&config_text)?;
    config.validate_for_task(cli.task)?;

    let threads = resolve_threads(cli.threads)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Io(format!("cannot build thread pool: {e}")))?;

    let base_dir = cli
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();

    let started = Instant::now();
    let outcome = pool.install(|| tasks::execute(cli.task, &config, &base_dir))?;
    let wall_time_ms = started.elapsed().as_millis() as u64;

    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cli.out.display())))?;
    let mut records = Vec::new();
    for (name, bytes) in &outcome.files {
        let path = cli.out.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        records.push(OutputRecord {
            file: name.clone(),
            bytes: bytes.len() as u64,
            digest: digest_string(bytes),
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "fmt-engine".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        task: cli.task.to_string(),
        config_digest: digest_string(config_text.as_bytes()),
        threads: pool.current_num_threads(),
        wall_time_ms,
        outputs: records,
        config_toml: config_text,
    };
    let manifest_path = cli.out.join("manifest.json");
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
    manifest_bytes.push(b'\n');
    std::fs::write(&manifest_path, manifest_bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", manifest_path.display())))?;

    for record in &manifest.outputs {
        println!(
            "wrote {} ({} bytes)",
            cli.out.join(&record.file).display(),
            record.bytes
        );
    }
    println!(
        "task '{}' complete in {:.3} s (threads: {})",
        cli.task,
        wall_time_ms as f64 / 1e3,
        manifest.threads
    );

    if let Some(message) = outcome.failure {
        return Err(CliError::Validation(message));
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
