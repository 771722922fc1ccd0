//! Scenario execution.

use std::fmt;
use std::path::PathBuf;

use oofdm_core::metrics::{
    ber_curve, se_ee_tradeoff, se_sweep, spectral_efficiency_with, MonteCarloSettings,
};
use oofdm_core::selftest::{run_selftest, CheckOutcome};
use oofdm_core::transmitter::ModemConfig;

use crate::config::{Scenario, ScenarioConfig};
use crate::output::{plot_script, write_csv_file, Row};

#[derive(Debug)]
pub enum RunError {
    /// Problem with the requested run that only shows up once the scenario
    /// is known (for instance no modem sections).
    Config(String),
    Runtime(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<oofdm_core::Error> for RunError {
    fn from(e: oofdm_core::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub rows: Vec<Row>,
    pub checks: Vec<CheckOutcome>,
    pub csv_path: Option<PathBuf>,
    pub plot_path: Option<PathBuf>,
    /// Mean bias per row for scenarios that measure it (same order as `rows`).
    pub mean_bias: Vec<Option<f64>>,
}

impl RunSummary {
    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn settings(cfg: &ScenarioConfig) -> MonteCarloSettings {
    MonteCarloSettings {
        jobs: cfg.jobs,
        ..Default::default()
    }
}

fn row(scenario: Scenario, m: &ModemConfig, cfg: &ScenarioConfig, se: f64) -> Row {
    Row {
        scenario,
        scheme: m.scheme.name().to_string(),
        n: m.n,
        l: m.l,
        m1: m.pair.m1,
        m2: m.pair.m2,
        kappa: m.kappa,
        alpha: m.filter_alpha,
        channel: cfg.channel.label(),
        ebn0_db: None,
        ber: None,
        se,
        seed: cfg.seed,
        status: "ok".into(),
    }
}

/// Runs `scenario` and writes `<out>/<scenario>.csv` plus a plot script
/// next to it. `selftest` writes nothing.
pub fn run_scenario(
    scenario: Scenario,
    cfg: &ScenarioConfig,
    out: &std::path::Path,
) -> Result<RunSummary, RunError> {
    let mut summary = RunSummary::default();
    if scenario == Scenario::Selftest {
        summary.checks = run_selftest(cfg.seed)?;
        return Ok(summary);
    }
    if cfg.modems.is_empty() {
        return Err(RunError::Config(format!(
            "scenario {scenario} needs at least one [[modem]] section"
        )));
    }
    if scenario == Scenario::BerCurve && cfg.ebn0_points.is_empty() {
        return Err(RunError::Config(
            "scenario ber-curve needs [ebn0] points_db".into(),
        ));
    }

    for spec in &cfg.modems {
        match scenario {
            Scenario::SeSweep => {
                for rec in se_sweep(
                    &spec.base,
                    &spec.sweep_kappas(),
                    &spec.alphas,
                    cfg.bandwidth,
                )? {
                    let mut m = spec.base.clone();
                    m.kappa = rec.kappa;
                    m.filter_alpha = rec.alpha;
                    summary.rows.push(row(scenario, &m, cfg, rec.se));
                    summary.mean_bias.push(None);
                }
            }
            Scenario::SeEe => {
                let cfgs = spec.configs();
                let recs = se_ee_tradeoff(
                    &cfgs,
                    &cfg.channel,
                    cfg.target_ber,
                    &cfg.search,
                    settings(cfg),
                    cfg.seed,
                )?;
                for (m, rec) in cfgs.iter().zip(recs) {
                    let mut r = row(
                        scenario,
                        m,
                        cfg,
                        spectral_efficiency_with(m, cfg.bandwidth)?,
                    );
                    match rec.status {
                        None => {
                            r.ebn0_db = rec.ebn0_db;
                            r.ber = Some(cfg.target_ber);
                        }
                        Some(status) => r.status = status,
                    }
                    summary.rows.push(r);
                    summary.mean_bias.push(rec.mean_bias);
                }
            }
            Scenario::BerCurve => {
                for m in spec.configs() {
                    let se = spectral_efficiency_with(&m, cfg.bandwidth)?;
                    let points = ber_curve(
                        &m,
                        &cfg.channel,
                        &cfg.ebn0_points,
                        cfg.search.stop,
                        settings(cfg),
                        cfg.seed,
                    )?;
                    for (_, result) in points {
                        let mut r = row(scenario, &m, cfg, se);
                        r.ebn0_db = Some(result.ebn0_db);
                        r.ber = Some(result.ber);
                        if result.bit_errors < cfg.search.stop.min_errors {
                            // Bit budget ran out first; the estimate is loose.
                            r.status = "capped".into();
                        }
                        summary.rows.push(r);
                        summary.mean_bias.push(Some(result.mean_bias));
                    }
                }
            }
            Scenario::Selftest => unreachable!("handled above"),
        }
    }

    std::fs::create_dir_all(out)?;
    let csv_name = format!("{}.csv", scenario.name());
    let csv_path = out.join(&csv_name);
    write_csv_file(&summary.rows, &csv_path)?;
    if let Some(script) = plot_script(scenario, &csv_name) {
        let plot_path = out.join(format!("plot_{}.py", scenario.name()));
        std::fs::write(&plot_path, script)?;
        summary.plot_path = Some(plot_path);
    }
    summary.csv_path = Some(csv_path);
    Ok(summary)
}

/// Human-readable table of the rows.
pub fn format_table(summary: &RunSummary) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    if !summary.checks.is_empty() {
        for c in &summary.checks {
            let _ = writeln!(
                s,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        return s;
    }
    let _ = writeln!(
        s,
        "{:<11} {:>3} {:>2} {:>4} {:>3} {:>5} {:>5} {:>9} {:>10} {:>7} {:>8}  status",
        "scheme", "N", "L", "M1", "M2", "kappa", "alpha", "Eb/N0 dB", "BER", "SE", "beta"
    );
    for (r, bias) in summary.rows.iter().zip(&summary.mean_bias) {
        let _ = writeln!(
            s,
            "{:<11} {:>3} {:>2} {:>4} {:>3} {:>5} {:>5} {:>9} {:>10} {:>7.4} {:>8}  {}",
            r.scheme,
            r.n,
            r.l,
            r.m1,
            r.m2,
            r.kappa,
            r.alpha,
            r.ebn0_db
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "-".into()),
            r.ber
                .map(|v| format!("{v:.3e}"))
                .unwrap_or_else(|| "-".into()),
            r.se,
            bias.map(|v| format!("{v:.4}"))
                .unwrap_or_else(|| "-".into()),
            r.status
        );
    }
    s
}
