//! `wellgrid`: survey fit, sensor ingest, microgrid simulation, policy sweep
//! and value-type coupling from one configuration file.

mod config;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::LoadedConfig;
use crate::stages::{Pipeline, Stage};

const EXIT_STAGE_FAILURE: u8 = 1;
const EXIT_CONFIG_INVALID: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "wellgrid", version, about)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, env = "WELLGRID_CONFIG", default_value = "config/default.toml")]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the configuration.
    #[arg(long, global = true, env = "WELLGRID_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Sweep worker threads (0: all cores).
    #[arg(long, global = true, env = "WELLGRID_WORKERS")]
    workers: Option<usize>,
    /// Seed for synthetic fixtures.
    #[arg(long, global = true, env = "WELLGRID_SEED")]
    seed: Option<u64>,
    /// Value types to couple, e.g. `A,B,C`.
    #[arg(long, global = true, env = "WELLGRID_TYPES", value_delimiter = ',')]
    types: Option<Vec<String>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every stage in order.
    Run,
    /// Screen survey items and fit the wellbeing regression.
    SurveyFit,
    /// Cleanse sensor series and build hourly profiles.
    Ingest,
    /// Simulate the status quo and the configured policies.
    Simulate,
    /// Evaluate every candidate on the sweep grid.
    Sweep,
    /// Select the best candidate for each value type.
    Couple,
    /// Render the ternary plot and the selection summary.
    Report,
    /// Check the configuration and list every violation.
    Validate,
    /// Write the synthetic survey and sensor fixtures.
    Fixtures,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Fixtures => fixtures(&cli),
        Command::Validate => validate(&cli),
        Command::Run => run_stages(&cli, &Stage::ALL),
        Command::SurveyFit => run_stages(&cli, &[Stage::SurveyFit]),
        Command::Ingest => run_stages(&cli, &[Stage::Ingest]),
        Command::Simulate => run_stages(&cli, &[Stage::Simulate]),
        Command::Sweep => run_stages(&cli, &[Stage::Sweep]),
        Command::Couple => run_stages(&cli, &[Stage::Couple]),
        Command::Report => run_stages(&cli, &[Stage::Report]),
    }
}

fn fixtures(cli: &Cli) -> ExitCode {
    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("fixtures"));
    let seed = cli.seed.unwrap_or(wellgrid::fixtures::DEFAULT_SEED);
    match wellgrid::fixtures::write_fixtures(&dir, seed) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[fixtures]: {e}");
            ExitCode::from(EXIT_STAGE_FAILURE)
        }
    }
}

fn load(cli: &Cli) -> Result<LoadedConfig, ExitCode> {
    config::load(&cli.config).map_err(|e| {
        eprintln!("error[config]: {e}");
        ExitCode::from(EXIT_CONFIG_INVALID)
    })
}

fn selected_types(cli: &Cli, loaded: &LoadedConfig) -> Vec<String> {
    cli.types
        .clone()
        .unwrap_or_else(|| loaded.config.coupling.types.clone())
        .into_iter()
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

fn validate(cli: &Cli) -> ExitCode {
    let loaded = match load(cli) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let types = selected_types(cli, &loaded);
    let diags = loaded.config.diagnostics(Some(&loaded), &types);
    if diags.is_empty() {
        println!("ok: {} is valid", cli.config.display());
        ExitCode::SUCCESS
    } else {
        for d in &diags {
            println!("{d}");
        }
        eprintln!(
            "error[config]: {} violation(s) in {}",
            diags.len(),
            cli.config.display()
        );
        ExitCode::from(EXIT_CONFIG_INVALID)
    }
}

fn run_stages(cli: &Cli, stages: &[Stage]) -> ExitCode {
    let loaded = match load(cli) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let types = selected_types(cli, &loaded);
    let diags = loaded.config.diagnostics(None, &types);
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("error[config]: {d}");
        }
        return ExitCode::from(EXIT_CONFIG_INVALID);
    }
    let out_dir = match &cli.out_dir {
        Some(d) => d.clone(),
        None => loaded.resolve(&loaded.config.out_dir),
    };
    let workers = match cli.workers.unwrap_or(loaded.config.workers) {
        0 => None,
        n => Some(n),
    };
    let pipeline = Pipeline {
        seed: cli.seed.unwrap_or(loaded.config.seed),
        loaded,
        out_dir,
        workers,
        types,
    };
    for &stage in stages {
        if let Err(e) = pipeline.run_stage(stage) {
            eprintln!("error[{stage}]: {e:#}");
            return ExitCode::from(EXIT_STAGE_FAILURE);
        }
        eprintln!("{stage}: ok");
    }
    ExitCode::SUCCESS
}
