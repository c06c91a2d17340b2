use std::path::{Path, PathBuf};
use std::process::ExitCode;

use casimir_cli::commands::{self, DEFAULT_POINTS};
use casimir_cli::config::load_config;
use casimir_cli::grid::Grid;
use casimir_cli::output::to_json;
use casimir_cli::CliError;
use clap::{Parser, Subcommand};

/// Photon generation in a cavity with a modulated mirror or a pumped
/// χ⁽²⁾ crystal.
#[derive(Debug, Parser)]
#[command(name = "casimir", version)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving the output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Accepted for scripting; the engine has no random state.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derived parameters; writes derive.json.
    Derive,
    /// Closed-form curves on a time grid; writes analytic.csv.
    Analytic {
        /// Last time of the grid, s (default 6/γ).
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
    },
    /// One engine run; writes series.csv, spectrum.csv and summary.json.
    Simulate,
    /// Engine runs over a grid such as `m=1,2,3;beta_rel=0.1`; writes sweep.csv.
    Sweep {
        #[arg(long)]
        grid: String,
    },
    /// Stationary and damped-squeezing predictions side by side; writes compare.json.
    Compare,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Parse("--config <path> is required".into()))?;
    let config = load_config(&path)?;
    let out = &cli.out_dir;
    match cli.command {
        Command::Derive => {
            let json = to_json(&commands::derive_report(&config)?);
            write(out, "derive.json", &json)?;
            print!("{json}");
        }
        Command::Analytic { t_max, points } => {
            write(
                out,
                "analytic.csv",
                &commands::analytic_table(&config, t_max, points)?.render(),
            )?;
        }
        Command::Simulate => {
            let a = commands::simulate(&config)?;
            write(out, "series.csv", &a.series.render())?;
            write(out, "spectrum.csv", &a.spectrum.render())?;
            let json = a.summary_json();
            write(out, "summary.json", &json)?;
            print!("{json}");
        }
        Command::Sweep { grid } => {
            let grid = Grid::parse(&grid)?;
            write(
                out,
                "sweep.csv",
                &commands::sweep_table(&config, &grid, cli.workers)?.render(),
            )?;
        }
        Command::Compare => {
            let json = to_json(&commands::compare_report(&config)?);
            write(out, "compare.json", &json)?;
            print!("{json}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ");
            eprintln!(
                "{}",
                serde_json::json!({ "category": "usage", "message": first })
            );
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
