use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lzeros_cli::{execute, exit_code, Command, Options};

/// Zeros of the complex-time survival amplitude of quenched spin models.
#[derive(Debug, Parser)]
#[command(name = "lzeros", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Run recipe (TOML, or JSON by extension).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `outputs.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Finder seed, overriding `window.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Plot `-beta` on the heatmap's horizontal axis.
    #[arg(long)]
    mirror_beta: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let opts = Options {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        mirror_beta: cli.mirror_beta,
    };
    match execute(cli.command, &opts) {
        Ok(report) => {
            let counts: Vec<String> = report
                .zero_counts
                .iter()
                .map(|(k, v)| format!("{v} {k}"))
                .collect();
            println!("{}: {} files", report.command, report.files.len() + 1);
            if !counts.is_empty() {
                println!("zeros: {}", counts.join(", "));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
