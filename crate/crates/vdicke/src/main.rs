use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vdicke::config::{self, Source, TaskKind};
use vdicke::recipes::{self, RECIPES};
use vdicke::{execute, prepare, Invocation, RunError};

const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Phase diagrams, trajectories and dark-state fidelities of the V-type
/// Dicke model.
#[derive(Parser)]
#[command(name = "vdicke", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-system phase classification over a parameter grid.
    SweepClosed(RunArgs),
    /// Open-system steady states, stability and oscillation over a grid.
    SweepOpen(RunArgs),
    /// Mean-field trajectories with attractor classification.
    Evolve(RunArgs),
    /// Stable region of the inverted states and its area.
    InvertedRegion(RunArgs),
    /// Fidelity of the long-time state with the dark state.
    FidelityScan(RunArgs),
    /// Excitation spectra of the normal and superradiant states.
    Spectrum(RunArgs),
    /// List the bundled recipes, or print one.
    Recipes(RecipesArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Use a bundled recipe instead of a config file.
    #[arg(long, value_name = "NAME")]
    recipe: Option<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (overrides `workers`).
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Override a config field, e.g. `--set params.kappa=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RecipesArgs {
    /// Print the config of this recipe.
    #[arg(long, value_name = "NAME")]
    show: Option<String>,
}

fn run(task: TaskKind, a: RunArgs) -> ExitCode {
    let inv = Invocation {
        task,
        config: a.config,
        recipe: a.recipe,
        out: a.out,
        workers: a.workers,
        set: a.set,
    };
    let validated = match prepare(&inv) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match execute(&validated) {
        Ok(s) => {
            eprintln!(
                "{task}: {} points, {} failed, wrote {} file(s) and {}",
                s.points,
                s.failed,
                s.outputs.len(),
                s.manifest.display()
            );
            if s.failed > 0 {
                ExitCode::from(EXIT_PARTIAL)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn list_recipes(a: RecipesArgs) -> ExitCode {
    if let Some(name) = a.show {
        return match recipes::find(&name) {
            Some(r) => {
                print!("{}", r.source);
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("unknown recipe `{name}`");
                ExitCode::from(EXIT_CONFIG)
            }
        };
    }
    for r in RECIPES {
        let source = Source::inline(format!("recipe {}", r.name), r.source);
        match config::load(&source, &[]) {
            Ok(cfg) => println!(
                "{:<14} {:<16} {}",
                r.name,
                cfg.task.map(|t| t.as_str()).unwrap_or("-"),
                cfg.description.unwrap_or_default()
            ),
            Err(e) => println!("{:<14} invalid: {e}", r.name),
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::SweepClosed(a) => run(TaskKind::SweepClosed, a),
        Command::SweepOpen(a) => run(TaskKind::SweepOpen, a),
        Command::Evolve(a) => run(TaskKind::Evolve, a),
        Command::InvertedRegion(a) => run(TaskKind::InvertedRegion, a),
        Command::FidelityScan(a) => run(TaskKind::FidelityScan, a),
        Command::Spectrum(a) => run(TaskKind::Spectrum, a),
        Command::Recipes(a) => list_recipes(a),
    }
}
