use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use oofdm_cli::config::{load_config, Scenario, ScenarioConfig};
use oofdm_cli::run::{format_table, run_scenario, RunError};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const DEFAULT_OUT: &str = "results";

/// Hybrid optical OFDM / OFDM-IM link simulator.
#[derive(Parser, Debug)]
#[command(name = "oofdm", version)]
struct Args {
    /// Scenario config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed; overrides `[run] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `[run] out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides `[run] jobs`.
    #[arg(long)]
    jobs: Option<usize>,
    /// se-sweep, se-ee, ber-curve or selftest; overrides `[run] scenario`.
    #[arg(long)]
    scenario: Option<String>,
    /// Validate the config, print every problem and exit.
    #[arg(long)]
    check: bool,
}

fn config_error(lines: impl IntoIterator<Item = String>, path: Option<&PathBuf>) -> ExitCode {
    for line in lines {
        match path {
            Some(p) => eprintln!("{}: {line}", p.display()),
            None => eprintln!("error: {line}"),
        }
    }
    ExitCode::from(EXIT_CONFIG)
}

fn main() -> ExitCode {
    let args = Args::parse();

    let mut cfg = match &args.config {
        Some(path) => match load_config(path) {
            Ok(cfg) => cfg,
            Err(diags) => return config_error(diags.iter().map(|d| d.to_string()), Some(path)),
        },
        None => ScenarioConfig::empty(),
    };
    if args.check {
        println!("config ok");
        return ExitCode::SUCCESS;
    }

    let scenario = match &args.scenario {
        Some(name) => match Scenario::parse(name) {
            Some(s) => s,
            None => {
                return config_error(
                    [format!(
                    "unknown scenario '{name}', expected se-sweep, se-ee, ber-curve or selftest"
                )],
                    None,
                )
            }
        },
        None => match cfg.scenario {
            Some(s) => s,
            None => {
                return config_error(
                    ["no scenario given (--scenario or [run] scenario)".into()],
                    None,
                )
            }
        },
    };
    if args.config.is_none() && scenario != Scenario::Selftest {
        return config_error([format!("scenario {scenario} needs --config")], None);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return config_error(["--jobs must be at least 1".into()], None);
        }
        cfg.jobs = jobs;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    match run_scenario(scenario, &cfg, &out) {
        Ok(summary) => {
            print!("{}", format_table(&summary));
            if let Some(p) = &summary.csv_path {
                println!("wrote {}", p.display());
            }
            if let Some(p) = &summary.plot_path {
                println!("wrote {}", p.display());
            }
            if summary.all_checks_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
        Err(RunError::Config(m)) => config_error([m], args.config.as_ref()),
        Err(e @ RunError::Runtime(_)) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
