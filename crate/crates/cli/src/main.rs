use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spd_core::experiment::{self, CommandOutput, RunConfig};

/// Gated APD single-photon detector simulator.
#[derive(Parser, Debug)]
#[command(name = "spd", version, about)]
struct Cli {
    /// Run configuration (`key=value` lines). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for the artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Recorded gates for metric commands.
    #[arg(long, global = true)]
    gates: Option<u64>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", short = 's', global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tune trim and fine delay on an event-free reference.
    Tune,
    /// Tune on the synthetic test signal and measure its suppression.
    Testsignal,
    /// Laser and dark runs reduced to efficiency, dark count, afterpulsing and jitter.
    Characterize,
    /// Sweep the laser across the gate to measure the active time.
    Scan,
    /// Linear-mode detection of a bit string.
    Linear { bits: String },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn from_core(e: spd_core::Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim()).map_err(Failure::from_core)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(gates) = cli.gates {
        cfg.n_gates = gates;
    }
    if let Some(out) = &cli.out {
        cfg.outputs = out.clone();
    }
    cfg.validate().map_err(Failure::from_core)?;
    Ok(cfg)
}

fn write_artifacts(dir: &Path, out: &CommandOutput) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    for a in &out.artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let out = match &cli.command {
        Command::Tune => experiment::cmd_tune(&cfg),
        Command::Testsignal => experiment::cmd_testsignal(&cfg),
        Command::Characterize => experiment::cmd_characterize(&cfg),
        Command::Scan => experiment::cmd_scan(&cfg),
        Command::Linear { bits } => experiment::cmd_linear(bits, &cfg),
    }
    .map_err(Failure::from_core)?;
    write_artifacts(&cfg.outputs, &out)?;
    for line in &out.summary {
        println!("{line}");
    }
    println!("wrote {} files to {}", out.artifacts.len(), cfg.outputs.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
