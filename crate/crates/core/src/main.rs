use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use ergodyn::config::{Command, ExperimentConfig};
use ergodyn::presets::preset;
use ergodyn::runner::{self, EXIT_CONFIG};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Simulate,
    Check,
    Lyapunov,
    Dependence,
    Clt,
    Coalescence,
    Counterexample,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::Check => Command::Check,
            Cmd::Lyapunov => Command::Lyapunov,
            Cmd::Dependence => Command::Dependence,
            Cmd::Clt => Command::Clt,
            Cmd::Coalescence => Command::Coalescence,
            Cmd::Counterexample => Command::Counterexample,
        }
    }
}

/// Simulate and certify stationary autoregressions with exogenous covariates.
#[derive(Debug, Parser)]
#[command(name = "ergodyn", version)]
struct Cli {
    command: Cmd,
    /// Experiment configuration file.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a shipped preset instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory for the report and tables.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "ERGODYN_THREADS")]
    threads: Option<usize>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("ergodyn: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}

fn run(cli: Cli) -> ergodyn::Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ergodyn::Error::config("threads", "must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ergodyn::Error::config("threads", e.to_string()))?;
    }
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => ExperimentConfig::from_file(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => unreachable!("clap requires one of --config and --preset"),
    };
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    let command = Command::from(cli.command);
    if cli.print_config {
        cfg.run.command = Some(command);
        print!("{}", cfg.serialize());
        return Ok(0);
    }
    let outcome = runner::run(&cfg, command, &cli.out)?;
    print!("{}", outcome.report);
    Ok(outcome.exit_code)
}
