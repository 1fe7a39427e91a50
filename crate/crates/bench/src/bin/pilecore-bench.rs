use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pilecore_bench::replay::{write_csv, RunError};
use pilecore_bench::{run, to_canonical_json, DatasetSpec, RunOptions, Script};

/// Replays an interaction script against the piling engine and reports
/// per-command latency as JSON on stdout.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Script file, one `<timestampMs> <verb> <args...>` command per line.
    #[arg(long)]
    script: PathBuf,
    /// `matrix:N` or `points:N`. Overrides the script's `%dataset`.
    #[arg(long)]
    dataset: Option<DatasetSpec>,
    /// Overrides the script's `%seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the script's `%repeat`.
    #[arg(long)]
    repeat: Option<u32>,
    /// Also write per-class statistics as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the final state as canonical JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cluster on a worker thread and commit through the epoch check.
    #[arg(long)]
    off_thread_clustering: bool,
}

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_COMMAND: u8 = 3;

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("pilecore-bench: {message}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.script) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_IO, format!("{}: {e}", args.script.display())),
    };
    let script = match Script::parse(&text) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_PARSE, format!("{}: {e}", args.script.display())),
    };
    let Some(dataset) = args.dataset.or(script.dataset) else {
        return fail(EXIT_PARSE, "no dataset given: pass --dataset or add a %dataset line");
    };
    let opts = RunOptions {
        dataset,
        seed: args.seed.or(script.seed).unwrap_or(0),
        repeat: args.repeat.or(script.repeat).unwrap_or(1),
        off_thread_clustering: args.off_thread_clustering,
    };
    let (report, state) = match run(&script, &opts) {
        Ok(r) => r,
        Err(e @ RunError::Command { .. }) => return fail(EXIT_COMMAND, e),
        Err(e) => return fail(EXIT_IO, e),
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if let Some(path) = &args.csv {
        if let Err(e) = write_csv(&report, path) {
            return fail(EXIT_IO, format!("{}: {e}", path.display()));
        }
    }
    if let Some(path) = &args.out {
        let json = match to_canonical_json(&state) {
            Ok(j) => j,
            Err(e) => return fail(EXIT_IO, e),
        };
        if let Err(e) = std::fs::write(path, json) {
            return fail(EXIT_IO, format!("{}: {e}", path.display()));
        }
    }
    ExitCode::SUCCESS
}
