//! Configuration-driven experiment runner. Exit codes: 0 success,
//! 1 configuration error, 2 runtime/estimation error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use satlink::config::{run_command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "satlink", about = "Multibeam satellite link analysis toolkit")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, short = 'c')]
    config: PathBuf,

    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory for the generated CSV/text artifacts.
    #[arg(long, short = 'o', default_value = "out")]
    out: PathBuf,

    /// Worker thread count (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Achievable information-rate sweep per strategy.
    Ir,
    /// Detector/decoder EXIT curves at one operating point.
    Exit,
    /// Heuristic degree-distribution search.
    Design,
    /// PEG code construction to the sparse text format.
    BuildCode,
    /// Iterative-receiver BER sweep.
    Ber,
    /// Export a joint constellation labeling as CSV.
    ExportMapping,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ir => "ir",
            Command::Exit => "exit",
            Command::Design => "design",
            Command::BuildCode => "build-code",
            Command::Ber => "ber",
            Command::ExportMapping => "export-mapping",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(t) = cli.threads {
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }

    // configuration phase: any failure here is a config error (exit 1)
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let mut cfg = match ExperimentConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    // execution phase: failures are runtime/estimation errors (exit 2)
    let outputs = match run_command(&cfg, cli.command.name()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if matches!(e, satlink::Error::Config(_)) { 1 } else { 2 });
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }
    for (name, contents) in &outputs {
        let path = cli.out.join(name);
        if let Err(e) = std::fs::write(&path, contents) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
        println!("{}", path.display());
    }
    ExitCode::SUCCESS
}
