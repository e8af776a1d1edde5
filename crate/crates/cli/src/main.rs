//! `qrflow`: run QR flow experiments and print result tables.
//!
//! Exit codes: 0 success, 2 integration failure, 3 bad configuration.

mod experiment;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use experiment::{run_experiment, ExperimentArgs, ExperimentConfig, RunRecord};

const EXIT_FAILED: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "qrflow", version, about = "Orthonormal QR flow benchmarks")]
struct Cli {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Run every experiment listed in a manifest, one per line. With --csv,
    /// the per-run summary is written there.
    #[arg(long)]
    suite: Option<PathBuf>,
}

/// One manifest line, parsed with the same flags as the command line.
#[derive(Debug, Parser)]
#[command(no_binary_name = true)]
struct ManifestLine {
    #[command(flatten)]
    exp: ExperimentArgs,
}

fn parse_manifest(path: &Path) -> anyhow::Result<Vec<ExperimentConfig>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ctx = || format!("{}:{}", path.display(), k + 1);
        let parsed = ManifestLine::try_parse_from(line.split_whitespace()).with_context(ctx)?;
        out.push(ExperimentConfig::from_args(&parsed.exp).with_context(ctx)?);
    }
    Ok(out)
}

fn config_error(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::from(EXIT_CONFIG)
}

fn finish(records: &[RunRecord]) -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = report::write_table(&mut stdout, records) {
        eprintln!("error: {e}");
    }
    let _ = report::write_failures(&mut std::io::stderr().lock(), records);
    if records.iter().any(|r| r.outcome.is_err()) {
        ExitCode::from(EXIT_FAILED)
    } else {
        ExitCode::SUCCESS
    }
}

fn run_suite(manifest: &Path, summary: Option<&Path>) -> ExitCode {
    let configs = match parse_manifest(manifest) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let mut records = Vec::new();
    for exp in &configs {
        match run_experiment(exp) {
            Ok(r) => records.push(r),
            Err(e) => return config_error(e),
        }
    }
    if let Some(path) = summary {
        if let Err(e) = report::write_summary(path, &records) {
            return config_error(e);
        }
    }
    finish(&records)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(manifest) = &cli.suite {
        if cli.exp.problem.is_some() || cli.exp.method.is_some() {
            return config_error(anyhow::anyhow!(
                "--suite takes its experiments from the manifest"
            ));
        }
        return run_suite(manifest, cli.exp.csv.as_deref());
    }
    let exp = match ExperimentConfig::from_args(&cli.exp) {
        Ok(e) => e,
        Err(e) => return config_error(e),
    };
    match run_experiment(&exp) {
        Ok(r) => finish(&[r]),
        Err(e) => config_error(e),
    }
}
