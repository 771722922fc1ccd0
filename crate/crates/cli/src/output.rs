//! CSV rows and the generated plot scripts.

use std::io::Write;
use std::path::Path;

use crate::config::Scenario;

/// Column order of every CSV this tool writes. `status` follows the fixed
/// columns: `ok`, `capped` (bit budget hit before the error target) or
/// `unreachable` (no Eb/N0 in the search range met the target BER).
pub const CSV_HEADER: [&str; 14] = [
    "scenario",
    "scheme",
    "N",
    "L",
    "M1",
    "M2",
    "kappa",
    "alpha",
    "channel",
    "ebn0_db",
    "ber",
    "se_bits_per_s_per_hz",
    "seed",
    "status",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub scenario: Scenario,
    pub scheme: String,
    pub n: usize,
    pub l: usize,
    pub m1: usize,
    pub m2: usize,
    pub kappa: usize,
    pub alpha: usize,
    pub channel: String,
    pub ebn0_db: Option<f64>,
    pub ber: Option<f64>,
    pub se: f64,
    pub seed: u64,
    pub status: String,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Row {
    fn record(&self) -> [String; 14] {
        [
            self.scenario.name().to_string(),
            self.scheme.clone(),
            self.n.to_string(),
            self.l.to_string(),
            self.m1.to_string(),
            self.m2.to_string(),
            self.kappa.to_string(),
            self.alpha.to_string(),
            self.channel.clone(),
            opt(self.ebn0_db),
            opt(self.ber),
            self.se.to_string(),
            self.seed.to_string(),
            self.status.clone(),
        ]
    }
}

pub fn write_csv<W: Write>(rows: &[Row], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[Row], path: &Path) -> csv::Result<()> {
    write_csv(rows, std::fs::File::create(path)?)
}

const PLOT_PRELUDE: &str = r#"#!/usr/bin/env python3
"""Generated by oofdm. Plots CSV_NAME; rerun the simulator only to change the data."""
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
with open(here / "CSV_NAME", newline="") as f:
    rows = [r for r in csv.DictReader(f) if r["status"] in ("ok", "capped")]


def label(r):
    text = f'{r["scheme"]} M1={r["M1"]} M2={r["M2"]}'
    if r["scheme"] == "HYBRID-ACO":
        text += f' alpha={r["alpha"]}'
    return text


fig, ax = plt.subplots(figsize=(6, 4.5))
"#;

const SE_SWEEP_BODY: &str = r#"series = defaultdict(list)
for r in rows:
    series[label(r)].append((int(r["kappa"]), float(r["se_bits_per_s_per_hz"])))
for name, pts in series.items():
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
ax.set_xlabel("active subcarriers kappa")
ax.set_ylabel("SE (bit/s/Hz)")
"#;

const SE_EE_BODY: &str = r#"series = defaultdict(list)
for r in rows:
    key = f'{r["scheme"]} M1={r["M1"]} M2={r["M2"]}'
    series[key].append((float(r["ebn0_db"]), float(r["se_bits_per_s_per_hz"]), r["alpha"]))
for name, pts in series.items():
    pts.sort(key=lambda p: p[1])
    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
    if name.startswith("HYBRID-ACO"):
        for x, y, a in pts:
            ax.annotate(f"alpha={a}", (x, y), textcoords="offset points", xytext=(4, 4), fontsize=7)
ax.set_xlabel("required Eb/N0 (dB)")
ax.set_ylabel("SE (bit/s/Hz)")
"#;

const BER_BODY: &str = r#"series = defaultdict(list)
for r in rows:
    if float(r["ber"]) > 0:
        series[(label(r), r["channel"])].append((float(r["ebn0_db"]), float(r["ber"])))
for (name, channel), pts in series.items():
    pts.sort()
    ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"{name} ({channel})")
ax.set_xlabel("Eb/N0 (dB)")
ax.set_ylabel("BER")
"#;

const PLOT_EPILOGUE: &str = r#"ax.grid(True, which="both", alpha=0.3)
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(here / "PNG_NAME", dpi=150)
print("wrote", here / "PNG_NAME")
"#;

/// Python script that plots `csv_name` (a sibling file) for `scenario`.
pub fn plot_script(scenario: Scenario, csv_name: &str) -> Option<String> {
    let body = match scenario {
        Scenario::SeSweep => SE_SWEEP_BODY,
        Scenario::SeEe => SE_EE_BODY,
        Scenario::BerCurve => BER_BODY,
        Scenario::Selftest => return None,
    };
    let png = format!("{}.png", scenario.name());
    Some(
        [PLOT_PRELUDE, body, PLOT_EPILOGUE]
            .concat()
            .replace("CSV_NAME", csv_name)
            .replace("PNG_NAME", &png),
    )
}
