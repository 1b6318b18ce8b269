use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nullwave::checks::{admissible_check, null_check, read_nonlinearity, read_obstacle, CheckReport};
use nullwave::{compare_null_vs_nonnull, converge, exit, parse_config, run_scenario, sweep, CliError, RunSummary, ScenarioConfig};

#[derive(Parser)]
#[command(name = "nullwave", version, about = "Quasilinear Neumann-wave scenarios outside convex obstacles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the null condition of a nonlinearity file.
    CheckNull { spec: PathBuf },
    /// Check the admissible boundary condition of a nonlinearity on an obstacle.
    CheckAdmissible { spec: PathBuf, obstacle: PathBuf },
    /// Run a radial scenario once per amplitude.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario at several radial spacings and report observed orders.
    Converge {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        dr: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the null and non-null nonlinearity on identical data.
    Contrast {
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 100.0)]
        t_final: f64,
    },
}

fn load(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let mut config = parse_config(path)?;
    if let Some(out) = out {
        config.output.dir = out;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn summary(s: RunSummary) -> i32 {
    print_json(&s);
    s.exit_status
}

fn check(r: CheckReport) -> i32 {
    print_json(&r);
    if r.holds {
        exit::SUCCESS
    } else {
        exit::CHECK_FAILED
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    Ok(match command {
        Command::Run { config, out, seed } => summary(run_scenario(&load(&config, out, seed)?)?),
        Command::CheckNull { spec } => check(null_check(&read_nonlinearity(&spec)?)?),
        Command::CheckAdmissible { spec, obstacle } => {
            check(admissible_check(&read_nonlinearity(&spec)?, &read_obstacle(&obstacle)?)?)
        }
        Command::Sweep { config, epsilons, out } => summary(sweep(&load(&config, out, None)?, &epsilons)?),
        Command::Converge { config, dr, out } => summary(converge(&load(&config, out, None)?, &dr)?),
        Command::Contrast { epsilon, t_final } => {
            print_json(&compare_null_vs_nonnull(epsilon, t_final)?);
            exit::SUCCESS
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = dispatch(cli.command).unwrap_or_else(|e| {
        eprintln!("nullwave: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
