//! Always-on property suite.
//!
//! Each check is cheap enough to run on every invocation; the whole suite
//! finishes in a few seconds in release builds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    add_awgn_in_place, ceiling_bounce_taps, rms_delay_spread, CeilingBounceParams,
};
use crate::constellation::{build_lut, ConstellationPair};
use crate::mapping::{
    bit_budget, int_to_bits, rank_subset, sap_decode, sap_encode, unrank_subset, ImConfig,
};
use crate::metrics::random_bits;
use crate::receiver::Receiver;
use crate::transmitter::{lowpass_filter, ModemConfig, Scheme, Transmitter};
use crate::{Complex64, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

const SYMBOLS_PER_CONFIG: usize = 24;

/// Every scheme over `N in {16, 32, 64}`, `L in {1, 2, 4}`, and for the
/// hybrid `alpha in {0, N/4, N/2}`.
pub fn selftest_grid() -> Result<Vec<ModemConfig>> {
    let mut grid = Vec::new();
    for n in [16, 32, 64] {
        for l in [1, 2, 4] {
            for scheme in Scheme::ALL {
                let base = ModemConfig::new(scheme, n, l, 4, 4)?;
                if scheme.is_filtered() {
                    for alpha in [0, n / 4, n / 2] {
                        grid.push(base.clone().with_alpha(alpha)?);
                    }
                } else {
                    grid.push(base);
                }
            }
        }
    }
    Ok(grid)
}

/// Runs every check. Errors are reserved for broken invariants in the
/// library itself; failed checks are reported in the outcomes.
pub fn run_selftest(seed: u64) -> Result<Vec<CheckOutcome>> {
    let grid = selftest_grid()?;
    Ok(vec![
        round_trip(&grid, seed)?,
        anti_symmetry(&grid, seed)?,
        unit_energy(&grid, seed)?,
        clipping_halving(&grid, seed)?,
        filter_idempotence(&grid, seed)?,
        sap_bijection()?,
        lut_reference()?,
        awgn_variance(seed),
        ceiling_bounce_rms()?,
    ])
}

fn symbols(
    cfg: &ModemConfig,
    seed: u64,
) -> Result<Vec<(Vec<bool>, crate::transmitter::TimeSymbol)>> {
    let tx = Transmitter::new(cfg.clone())?;
    let lambda = cfg.bit_budget()?.total();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..SYMBOLS_PER_CONFIG)
        .map(|_| {
            let bits = random_bits(&mut rng, lambda);
            let symbol = tx.transmit(&bits)?;
            Ok((bits, symbol))
        })
        .collect()
}

fn label(cfg: &ModemConfig) -> String {
    format!(
        "{} N={} L={} alpha={}",
        cfg.scheme, cfg.n, cfg.l, cfg.filter_alpha
    )
}

fn round_trip(grid: &[ModemConfig], seed: u64) -> Result<CheckOutcome> {
    let mut failures = Vec::new();
    let mut bits_total = 0;
    for cfg in grid {
        let rx = Receiver::new(cfg.clone(), None)?;
        let mut errors = 0;
        for (bits, symbol) in symbols(cfg, seed)? {
            let decided = rx.receive(&symbol.unipolar)?;
            errors += bits
                .iter()
                .zip(&decided.bits)
                .filter(|(a, b)| a != b)
                .count();
            bits_total += bits.len();
        }
        if errors > 0 {
            failures.push(format!("{} ({errors} errors)", label(cfg)));
        }
    }
    Ok(CheckOutcome::new(
        "noiseless round trip",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} configs, {bits_total} bits, 0 errors", grid.len())
        } else {
            failures.join("; ")
        },
    ))
}

fn anti_symmetry(grid: &[ModemConfig], seed: u64) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for cfg in grid.iter().filter(|c| c.scheme.is_aco_family()) {
        let half = cfg.total_bins() / 2;
        for (_, symbol) in symbols(cfg, seed)? {
            let x = &symbol.bipolar;
            for n in 0..half {
                worst = worst.max((x[n] + x[n + half]).abs());
            }
        }
    }
    Ok(CheckOutcome::new(
        "anti-symmetry",
        worst <= 1e-12,
        format!("max |x[n] + x[n + LN/2]| = {worst:.2e}"),
    ))
}

fn unit_energy(grid: &[ModemConfig], seed: u64) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for cfg in grid {
        for (_, symbol) in symbols(cfg, seed)? {
            let energy: f64 = symbol.bipolar.iter().map(|v| v * v).sum();
            worst = worst.max((energy - 1.0).abs());
        }
    }
    Ok(CheckOutcome::new(
        "unit-energy normalization",
        worst <= 1e-12,
        format!("max |sum x^2 - 1| = {worst:.2e}"),
    ))
}

fn clipping_halving(grid: &[ModemConfig], seed: u64) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for cfg in grid.iter().filter(|c| c.scheme.is_aco_family()) {
        let tx = Transmitter::new(cfg.clone())?;
        for (_, symbol) in symbols(cfg, seed)? {
            let clipped = symbol.clipped.as_ref().expect("ACO family clips");
            let before = tx.plan().forward_real(&symbol.bipolar);
            let after = tx.plan().forward_real(clipped);
            for g in cfg.gammas() {
                if before[g].norm() > 1e-9 {
                    worst = worst.max((after[g] / before[g] - Complex64::new(0.5, 0.0)).norm());
                }
            }
        }
    }
    Ok(CheckOutcome::new(
        "clipping halves data bins",
        worst <= 1e-9,
        format!("max |ratio - 0.5| = {worst:.2e}"),
    ))
}

fn filter_idempotence(grid: &[ModemConfig], seed: u64) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for cfg in grid.iter().filter(|c| c.scheme.is_filtered()) {
        let tx = Transmitter::new(cfg.clone())?;
        let bins = cfg.bins()?;
        for (_, symbol) in symbols(cfg, seed)? {
            let once = symbol.filtered.as_ref().expect("hybrid filters");
            let twice = lowpass_filter(once, cfg.filter_alpha, &bins, tx.plan())?;
            for (a, b) in once.iter().zip(&twice) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(CheckOutcome::new(
        "filter idempotence",
        worst <= 1e-12,
        format!("max |F(F(x)) - F(x)| = {worst:.2e}"),
    ))
}

fn sap_bijection() -> Result<CheckOutcome> {
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for omega in 1..=16 {
        for kappa in 1..=omega {
            let im = ImConfig::new(omega, kappa, 2, 2)?;
            let lambda1 = bit_budget(&im)?.lambda1;
            let mut seen = std::collections::HashSet::new();
            for rank in 0..(1u128 << lambda1) {
                let sap = unrank_subset(rank, omega, kappa)?;
                let bits = int_to_bits(rank, lambda1);
                let ok = rank_subset(&sap, omega)? == rank
                    && sap_encode(&bits, &im)? == sap
                    && sap_decode(&sap, &im)? == bits
                    && seen.insert(sap);
                checked += 1;
                if !ok {
                    failures.push(format!("omega={omega} kappa={kappa} rank={rank}"));
                }
            }
        }
    }
    Ok(CheckOutcome::new(
        "activation-pattern bijection",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{checked} code words over omega <= 16")
        } else {
            failures.join("; ")
        },
    ))
}

/// Reference QPSK superposition table, rows `X2 = +1, +j, -j, -1`, columns
/// `X1 = +3, +3j, -3j, -3`.
const REFERENCE_TABLE: [[(f64, f64); 4]; 4] = [
    [(4., 0.), (1., 1.), (1., -3.), (-2., 0.)],
    [(3., 1.), (0., 4.), (0., -2.), (-3., 1.)],
    [(3., -1.), (0., 2.), (0., -4.), (-3., -1.)],
    [(2., 0.), (-1., 3.), (-1., -3.), (-4., 0.)],
];

/// The one cell whose listed value is not the sum of its row and column.
const INCONSISTENT_CELL: (usize, usize) = (0, 1);

fn lut_reference() -> Result<CheckOutcome> {
    let lut = build_lut(&ConstellationPair::default())?;
    let mut matched = 0;
    let mut failures = Vec::new();
    for (x2, row) in REFERENCE_TABLE.iter().enumerate() {
        for (x1, &(re, im)) in row.iter().enumerate() {
            let point = lut.get(x1, x2).point;
            if (x2, x1) == INCONSISTENT_CELL {
                // Listed as 1 + j; the sum +3j + 1 is 1 + 3j.
                if point != Complex64::new(1.0, 3.0) {
                    failures.push(format!("(x1={x1}, x2={x2}) = {point}"));
                }
            } else if point == Complex64::new(re, im) {
                matched += 1;
            } else {
                failures.push(format!(
                    "(x1={x1}, x2={x2}) = {point}, expected {re}{im:+}j"
                ));
            }
        }
    }
    Ok(CheckOutcome::new(
        "LUT matches reference table",
        failures.is_empty() && matched == 15,
        if failures.is_empty() {
            format!("{matched} cells exact, inconsistent cell equals its sum")
        } else {
            failures.join("; ")
        },
    ))
}

const AWGN_DRAWS: usize = 1_000_000;

fn awgn_variance(seed: u64) -> CheckOutcome {
    let variance = 0.37;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut y = vec![0.0; AWGN_DRAWS];
    add_awgn_in_place(&mut y, variance, &mut rng);
    let mean = y.iter().sum::<f64>() / AWGN_DRAWS as f64;
    let measured = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / AWGN_DRAWS as f64;
    let rel = (measured / variance - 1.0).abs();
    CheckOutcome::new(
        "AWGN variance",
        rel <= 0.01,
        format!("{AWGN_DRAWS} draws, relative error {rel:.2e}"),
    )
}

fn ceiling_bounce_rms() -> Result<CheckOutcome> {
    let target = 10e-9;
    let sample_period = 0.25e-9;
    let params = CeilingBounceParams::new(target)?;
    let taps = ceiling_bounce_taps(&params, sample_period)?;
    let rel = (rms_delay_spread(&taps, sample_period) / target - 1.0).abs();
    Ok(CheckOutcome::new(
        "ceiling-bounce RMS delay spread",
        rel <= 0.01,
        format!("10 ns target, relative error {rel:.2e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_size() {
        // 3 N x 3 L x (4 unfiltered + 3 alphas).
        assert_eq!(selftest_grid().unwrap().len(), 63);
    }

    #[test]
    fn reference_table_has_one_inconsistent_cell() {
        let lut = build_lut(&ConstellationPair::default()).unwrap();
        let mismatched: Vec<_> = (0..4)
            .flat_map(|x2| (0..4).map(move |x1| (x2, x1)))
            .filter(|&(x2, x1)| {
                let (re, im) = REFERENCE_TABLE[x2][x1];
                lut.get(x1, x2).point != Complex64::new(re, im)
            })
            .collect();
        assert_eq!(mismatched, vec![INCONSISTENT_CELL]);
    }
}
