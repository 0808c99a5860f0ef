use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;
mod svg;

use commands::{CurveArg, MethodArg};
use config::ConfigError;
use output::Sink;

#[derive(Debug, Parser)]
#[command(name = "qubit-scatter", version, about = "Light-scattering decoherence of a trapped-ion qubit")]
struct Cli {
    /// JSON config; keys not given keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one config leaf, e.g. `--set laser.rabi=6.3e6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write an SVG plot next to the output file (sweep, stark).
    #[arg(long, global = true)]
    svg: bool,

    /// Trajectory seed, overriding `trajectories.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Level energies, qubit splitting, and resonance detunings from the cycling line.
    Levels,
    /// Scattering rates on a detuning grid, as CSV.
    Sweep,
    /// Run the configured pulse sequence; JSON result.
    Sequence,
    /// Fit a decay rate to a two-column (time, population) CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "raman-d")]
        curve: CurveArg,
        #[arg(long, value_enum, default_value = "full-exponential")]
        method: MethodArg,
    },
    /// Differential Stark shift against polarization angle, and its null.
    Stark,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = config::load(cli.config.as_deref(), &cli.sets, cli.seed)?;
    let sink = Sink { path: cli.out };
    if cli.svg && sink.path.is_none() {
        return Err(ConfigError("--svg needs --out so the plot has somewhere to go".into()).into());
    }
    match cli.command {
        Command::Levels => commands::levels(&cfg, &sink),
        Command::Sweep => commands::sweep_cmd(&cfg, &sink, cli.svg),
        Command::Sequence => commands::sequence(&cfg, &sink),
        Command::Fit { input, curve, method } => commands::fit(&cfg, &sink, &input, curve, method),
        Command::Stark => commands::stark(&cfg, &sink, cli.svg),
    }
}

/// 2 for bad config or input, 3 for I/O, 4 for domain failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    use qubit_scatter::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::NoNull { .. } | E::NoUsablePoints(_) | E::OnResonance { .. } | E::NotConverged { .. } => 4,
                _ => 2,
            };
        }
        if cause.is::<ConfigError>() {
            return 2;
        }
        if cause.is::<std::io::Error>() {
            return 3;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
