//! Command-line front end: scenario files in, CSV tables out.

mod run;
mod scenario;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use run::CliError;
use scenario::{CmsScenario, Scenario};

#[derive(Parser)]
#[command(
    name = "cmsquad",
    about = "Quadratic-payoff and CMS convexity pricing: expansions, comparators, validation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Random seed; required whenever a Monte Carlo comparator runs.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's Monte Carlo path count.
    #[arg(long)]
    paths: Option<usize>,
    /// Override the scenario's Monte Carlo steps per year.
    #[arg(long)]
    steps_per_year: Option<usize>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Price a single product with its per-order breakdown and comparators.
    Price(ScenarioArgs),
    /// Price a strike grid and emit the comparison CSV.
    Smile(ScenarioArgs),
    /// Run a named self-check suite (parity, reductions, appendix, oracles).
    Validate {
        /// Suite name.
        #[arg(long)]
        suite: String,
        /// Random seed for the suite's draws and simulations.
        #[arg(long)]
        seed: u64,
        /// Path count for the Monte Carlo based suites.
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Emit the CMS convexity-adjustment table for a strike grid.
    Cms(ScenarioArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Price(args) => {
            let scenario = load_scenario(&args)?;
            let rows = run::price_scenario(&scenario, args.seed)?;
            emit(&args.out, scenario.output.as_deref(), &run::render_price(&rows))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Smile(args) => {
            let scenario = load_scenario(&args)?;
            let rows = run::price_scenario(&scenario, args.seed)?;
            emit(
                &args.out,
                scenario.output.as_deref(),
                &run::render_smile(&scenario, &rows),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { suite, seed, paths } => {
            let (report, all_pass) = run::run_validate(&suite, seed, paths)?;
            print!("{report}");
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Cms(args) => {
            let text = read_scenario_file(&args.scenario)?;
            let mut scenario = CmsScenario::parse(&text).map_err(CliError::Scenario)?;
            apply_mc_overrides_cms(&mut scenario, &args);
            let rows = run::run_cms(&scenario, args.seed)?;
            emit(&args.out, scenario.output.as_deref(), &run::render_cms(&rows))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read_scenario_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Scenario(format!("scenario: cannot read {}: {e}", path.display())))
}

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario, CliError> {
    let text = read_scenario_file(&args.scenario)?;
    let mut scenario = Scenario::parse(&text).map_err(CliError::Scenario)?;
    if let Some(paths) = args.paths {
        scenario.mc.n_paths = paths;
    }
    if let Some(spy) = args.steps_per_year {
        scenario.mc.steps_per_year = spy;
    }
    Ok(scenario)
}

fn apply_mc_overrides_cms(scenario: &mut CmsScenario, args: &ScenarioArgs) {
    if let Some(paths) = args.paths {
        scenario.mc.n_paths = paths;
    }
    if let Some(spy) = args.steps_per_year {
        scenario.mc.steps_per_year = spy;
    }
}

fn emit(flag_out: &Option<PathBuf>, scenario_out: Option<&str>, content: &str) -> Result<(), CliError> {
    let target = flag_out
        .clone()
        .or_else(|| scenario_out.map(PathBuf::from));
    match target {
        Some(path) => {
            let mut file = std::fs::File::create(&path).map_err(|e| {
                CliError::Scenario(format!("out: cannot write {}: {e}", path.display()))
            })?;
            file.write_all(content.as_bytes())
                .map_err(|e| CliError::Scenario(format!("out: write failed: {e}")))?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
