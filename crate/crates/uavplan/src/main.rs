use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uavplan::commands::{
    cmd_compare, cmd_ingest_demand, cmd_plan, cmd_size, cmd_sweep, Overrides, ReservationDims,
};
use uavplan::error::CliError;
use uavplan_core::evaluator::SweepParam;

#[derive(Parser)]
#[command(name = "uavplan", version, about = "Two-phase stochastic planner for coded UAV offloading")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the solver node limit.
    #[arg(long, global = true)]
    node_limit: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

fn parse_param(s: &str) -> Result<SweepParam, String> {
    SweepParam::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = SweepParam::ALL.iter().map(|p| p.name()).collect();
        format!("unknown parameter `{s}`; expected one of {}", names.join(", "))
    })
}

#[derive(Subcommand)]
enum Command {
    /// Solve the reservation and task-allocation models and write both plans.
    Plan,
    /// Re-solve over a parameter grid and write sweep_<param>.csv.
    Sweep {
        #[arg(long, value_parser = parse_param)]
        param: Option<SweepParam>,
        /// Comma-separated, strictly increasing values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        grid: Option<Vec<f64>>,
    },
    /// Exact expected cost of the stochastic, expected-value and random plans.
    Compare,
    /// Print model dimensions as variables/constraints.
    Size {
        #[arg(long, requires_all = ["stations", "types", "weather"])]
        slots: Option<u64>,
        #[arg(long, requires = "slots")]
        stations: Option<u64>,
        #[arg(long, requires = "slots")]
        types: Option<u64>,
        #[arg(long, requires = "slots")]
        weather: Option<u64>,
    },
    /// Histogram of square matrix dimensions from a CSV with rows,cols columns.
    IngestDemand {
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let flags = Overrides { config: cli.config, out: cli.out, seed: cli.seed, node_limit: cli.node_limit };
    match cli.command {
        Command::Plan => cmd_plan(&flags),
        Command::Sweep { param, grid } => cmd_sweep(&flags, param, grid),
        Command::Compare => cmd_compare(&flags),
        Command::Size { slots, stations, types, weather } => {
            let dims = match (slots, stations, types, weather) {
                (Some(slots), Some(stations), Some(types), Some(weather)) => {
                    Some(ReservationDims { slots, stations, types, weather })
                }
                _ => None,
            };
            cmd_size(&flags, dims)
        }
        Command::IngestDemand { csv } => cmd_ingest_demand(&flags, csv),
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.record());
            e.kind.code()
        }
    };
    ExitCode::from(code as u8)
}
