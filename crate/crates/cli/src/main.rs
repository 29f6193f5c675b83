//! `tfdvqa` command-line front-end.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 config or input schema violation,
//! 3 numerical failure.

mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "tfdvqa", version, about = "Variational thermofield-dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.directory`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        verbose: bool,
    },
    /// Write a seeded synthetic monomer file.
    SynthMonomers {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_IO: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn run(config_path: &Path, output_dir: Option<&Path>, verbose: bool) -> ExitCode {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(EXIT_SCHEMA);
        }
    };
    let base = config_path.parent().unwrap_or(Path::new("."));
    let resolved = match config::parse_config(&text).and_then(|c| config::resolve(&c, base, output_dir)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SCHEMA);
        }
    };
    match run::execute(&resolved, verbose) {
        Ok(files) => {
            if verbose {
                for f in files {
                    eprintln!("wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                run::RunError::Numerical(tfdvqa::Error::Config(_)) => ExitCode::from(EXIT_SCHEMA),
                run::RunError::Numerical(_) => ExitCode::from(EXIT_NUMERICAL),
                run::RunError::Io(_) => ExitCode::from(EXIT_IO),
            }
        }
    }
}

fn synth(seed: u64, count: usize, out: &Path) -> ExitCode {
    let monomers = match tfdvqa::models::synth_monomers(seed, count) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SCHEMA);
        }
    };
    if let Err(e) = std::fs::write(out, tfdvqa::models::monomers_to_json(&monomers)) {
        eprintln!("error: cannot write {}: {e}", out.display());
        return ExitCode::from(EXIT_IO);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run { config, output_dir, verbose } => run(&config, output_dir.as_deref(), verbose),
        Cmd::SynthMonomers { seed, count, out } => synth(seed, count, &out),
    }
}
