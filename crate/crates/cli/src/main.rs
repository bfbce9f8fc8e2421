//! `ejj <command> --config <path> [--out <dir>] [--threads N]`

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Level spectrum against inverse junction length.
    Spectrum,
    /// Mode frequencies and Kerr coefficients against inverse junction length.
    Kerr,
    /// Junction-resonator form factors and couplings.
    Coupling,
    /// Two-qubit phase gate simulation.
    Gate,
    /// Mean-field cross-Kerr characterization scans.
    Characterize,
    /// Two-junction plaquette spectrum against flux.
    Lattice,
    /// Thermal soliton nucleation estimate.
    Soliton,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Kerr => "kerr",
            Command::Coupling => "coupling",
            Command::Gate => "gate",
            Command::Characterize => "characterize",
            Command::Lattice => "lattice",
            Command::Soliton => "soliton",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ejj", version, about = "Extended Josephson junction simulations")]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `out`, default `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, env = "EJJ_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(ejj_core::Error),
    Numerical(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<ejj_core::Error> for CliError {
    fn from(e: ejj_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numerical() => 4,
            CliError::Core(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = config::load(&cli.config)?;
    let resolved = cfg.resolve()?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))?;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut writer = output::ArtifactWriter::new(&dir, cli.command.name(), resolved.explicit.clone())?;
    commands::run(cli.command, &resolved, &mut writer)?;
    for path in &writer.written {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ejj {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
