use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zoh::{CliError, ExperimentConfig, Outcome, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "zoh", version, about = "Zeroth-order descent under bounded oracle noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Replace the config's seed list with this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key=value` patches to the config; dotted keys reach nested fields.
    #[arg(long = "override", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Print the step size, budget and noise ceiling for a config.
    Plan,
    /// Run one descent per seed and evaluate it.
    Run,
    /// Monte-Carlo check of the smoothing inequalities.
    Verify,
    /// First-hit step counts across an eps or n axis, with fitted slopes.
    Sweep,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::usage("--config is required"))?;
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seeds=[{s}]"));
    }
    if let Some(o) = &cli.out {
        overrides.push(format!("out={}", serde_json::Value::String(o.display().to_string())));
    }
    ExperimentConfig::load(path, &overrides)
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("ZOH_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| CliError::usage(format!("ZOH_THREADS must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(CliError::usage("ZOH_THREADS must be positive"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Io(e.to_string()))
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    threads()?;
    let cfg = load(cli)?;
    match cli.command {
        Command::Plan => zoh::plan::cmd_plan(&cfg),
        Command::Run => zoh::run::cmd_run(&cfg),
        Command::Verify => zoh::verify::cmd_verify(&cfg),
        Command::Sweep => zoh::sweep::cmd_sweep(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(o) => ExitCode::from(o.exit_code as u8),
        Err(e) => {
            eprintln!("zoh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
