//! `fraccx`: run one experiment from a JSON configuration and write its
//! artifacts as `<command>_<hash>.{json,csv}`.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fraccx_core::FracError;
use serde_json::json;

use config::{Command, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(FracError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<FracError> for CliError {
    fn from(e: FracError) -> Self {
        match e {
            FracError::Domain(m) | FracError::Config(m) => CliError::Config(m),
            FracError::ShapeMismatch { .. } => CliError::Config(e.to_string()),
            FracError::Io(m) => CliError::Io(m),
            other => CliError::Solver(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Solver(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    Constants,
    Profile,
    Solve,
    Branch,
    LambdaStar,
    SecondSolution,
    Crosscheck,
    Pohozaev,
    TraceCheck,
    Supercritical,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Constants => Command::Constants,
            CommandArg::Profile => Command::Profile,
            CommandArg::Solve => Command::Solve,
            CommandArg::Branch => Command::Branch,
            CommandArg::LambdaStar => Command::LambdaStar,
            CommandArg::SecondSolution => Command::SecondSolution,
            CommandArg::Crosscheck => Command::Crosscheck,
            CommandArg::Pohozaev => Command::Pohozaev,
            CommandArg::TraceCheck => Command::TraceCheck,
            CommandArg::Supercritical => Command::Supercritical,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fraccx",
    version,
    about = "Concave-convex fractional Dirichlet problems"
)]
struct Args {
    command: CommandArg,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to the config, then $FRACCX_OUT, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for data-parallel stages.
    #[arg(long)]
    threads: Option<usize>,
}

fn output_dir(args: &Args, cfg: &RunConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os("FRACCX_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(feature = "parallel")]
fn init_threads(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn init_threads(_n: Option<usize>) -> Result<(), CliError> {
    Ok(())
}

fn write_artifacts(
    dir: &Path,
    cmd: Command,
    cfg: &RunConfig,
    out: &commands::Output,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let hash = cfg.hash();
    let stem = format!("{}_{hash}", cmd.name());
    let mut doc = json!({
        "command": cmd.name(),
        "config_hash": hash,
        "config": cfg,
        "converged": out.converged,
        "result": out.json,
    });
    doc["config"]
        .as_object_mut()
        .expect("config is an object")
        .retain(|k, _| k != "output_dir" && k != "threads");
    let mut text = serde_json::to_string_pretty(&doc).expect("artifact serializes");
    text.push('\n');
    std::fs::write(dir.join(format!("{stem}.json")), text)?;
    if let Some(csv) = &out.csv {
        let body = format!("# fraccx {} config={hash}\n{csv}", cmd.name());
        std::fs::write(dir.join(format!("{stem}.csv")), body)?;
    }
    Ok(())
}

fn run(args: &Args) -> Result<bool, CliError> {
    let cmd = Command::from(args.command);
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = RunConfig::parse(&text)?;
    if args.threads == Some(0) {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    cfg.validate(cmd)?;
    init_threads(args.threads.or(cfg.threads))?;
    let out = commands::run(cmd, &cfg)?;
    write_artifacts(&output_dir(args, &cfg), cmd, &cfg, &out)?;
    Ok(out.converged)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("fraccx: solver did not converge; artifacts written");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("fraccx: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
