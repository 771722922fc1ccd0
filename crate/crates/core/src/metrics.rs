//! Spectral efficiency, Monte-Carlo BER and the sweeps built on them.
//!
//! Monte-Carlo runs are split into fixed batches, each with its own ChaCha
//! stream derived from the root seed. Batches are evaluated in waves of a
//! fixed size and the stop rule is checked between waves, so the result for
//! a given seed does not depend on the number of worker threads.
//!
//! Every Eb/N0 point of a search reuses the same seeds, so payloads and
//! noise shapes are common across points and only the noise level moves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{channel_frequency_response, ChannelModel, LinkChannel};
use crate::receiver::Receiver;
use crate::transmitter::{ModemConfig, Scheme, Transmitter};
use crate::{Error, Result};

/// Which baseband bandwidth the filtered hybrid is charged for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BandwidthConvention {
    /// Half the filter's two-sided width: `(N + 2 alpha - 1) / (2 T_s)`.
    #[default]
    FilterHalfWidth,
    /// `(N/2 + alpha) / T_s`.
    Nominal,
}

/// Baseband bandwidths of a config, all in Hz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandwidthModel {
    /// Bandwidth the scheme occupies.
    pub bandwidth: f64,
    /// Subcarrier spacing `1 / T_s`.
    pub subcarrier_spacing: f64,
    /// Clipped-signal bandwidth `N / T_s`.
    pub clipped: f64,
    /// Bipolar-tone bandwidth `N / (2 T_s)`.
    pub optimum: f64,
}

impl BandwidthModel {
    pub fn for_config(cfg: &ModemConfig, convention: BandwidthConvention) -> Self {
        let ts = cfg.symbol_period;
        let n = cfg.n as f64;
        let alpha = cfg.filter_alpha as f64;
        let bandwidth = match cfg.scheme {
            Scheme::Dco | Scheme::DcoIm => n / (2.0 * ts),
            Scheme::Aco | Scheme::AcoIm => n / ts,
            Scheme::HybridAco => match convention {
                BandwidthConvention::FilterHalfWidth => (n + 2.0 * alpha - 1.0) / (2.0 * ts),
                BandwidthConvention::Nominal => (n / 2.0 + alpha) / ts,
            },
        };
        Self {
            bandwidth,
            subcarrier_spacing: 1.0 / ts,
            clipped: n / ts,
            optimum: n / (2.0 * ts),
        }
    }
}

/// Bits/s/Hz under the default bandwidth convention.
pub fn spectral_efficiency(cfg: &ModemConfig) -> Result<f64> {
    spectral_efficiency_with(cfg, BandwidthConvention::default())
}

pub fn spectral_efficiency_with(cfg: &ModemConfig, convention: BandwidthConvention) -> Result<f64> {
    let lambda = cfg.bit_budget()?.total() as f64;
    let b = BandwidthModel::for_config(cfg, convention).bandwidth;
    Ok(lambda / (b * cfg.symbol_period))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_bits: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_errors: 200,
            max_bits: 10_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BerResult {
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub symbols: u64,
    pub ber: f64,
    pub ebn0_db: f64,
    /// Binomial standard error of `ber`.
    pub std_error: f64,
    /// Mean `sum |x+|^2` over the symbols of this run.
    pub mean_symbol_energy: f64,
    /// Mean unipolar bias over the symbols of this run.
    pub mean_bias: f64,
}

impl BerResult {
    fn from_tally(t: Tally, ebn0_db: f64) -> Self {
        let ber = if t.bits == 0 {
            0.0
        } else {
            t.errors as f64 / t.bits as f64
        };
        let std_error = if t.bits == 0 {
            0.0
        } else {
            (ber * (1.0 - ber) / t.bits as f64).sqrt()
        };
        Self {
            bits_sent: t.bits,
            bit_errors: t.errors,
            symbols: t.symbols,
            ber,
            ebn0_db,
            std_error,
            mean_symbol_energy: t.energy / t.symbols.max(1) as f64,
            mean_bias: t.bias / t.symbols.max(1) as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    bits: u64,
    errors: u64,
    symbols: u64,
    energy: f64,
    bias: f64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            bits: self.bits + o.bits,
            errors: self.errors + o.errors,
            symbols: self.symbols + o.symbols,
            energy: self.energy + o.energy,
            bias: self.bias + o.bias,
        }
    }
}

/// Batch and parallelism knobs of the Monte-Carlo engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarloSettings {
    pub batch_symbols: usize,
    pub wave_batches: usize,
    /// Symbols used to estimate the mean electrical symbol energy.
    pub calibration_symbols: usize,
    /// Worker threads; 1 runs serially.
    pub jobs: usize,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        Self {
            batch_symbols: 128,
            wave_batches: 8,
            calibration_symbols: 4096,
            jobs: 1,
        }
    }
}

const CALIBRATION_STREAM: u64 = u64::MAX;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A modem and channel ready for repeated BER evaluations.
#[derive(Debug)]
pub struct LinkSimulator {
    cfg: ModemConfig,
    channel: ChannelModel,
    tx: Transmitter,
    rx: Receiver,
    taps: Vec<f64>,
    cp_length: usize,
    lambda: usize,
    mean_energy: f64,
    settings: MonteCarloSettings,
    pool: Option<rayon::ThreadPool>,
}

impl LinkSimulator {
    pub fn new(cfg: ModemConfig, channel: ChannelModel, seed: u64) -> Result<Self> {
        Self::with_settings(cfg, channel, seed, MonteCarloSettings::default())
    }

    pub fn with_settings(
        cfg: ModemConfig,
        channel: ChannelModel,
        seed: u64,
        settings: MonteCarloSettings,
    ) -> Result<Self> {
        cfg.validate()?;
        if settings.batch_symbols == 0 || settings.wave_batches == 0 || settings.jobs == 0 {
            return Err(Error::Config(
                "Monte-Carlo settings must be positive".into(),
            ));
        }
        let sample_period = cfg.symbol_period / cfg.total_bins() as f64;
        let (taps, cp_length) = channel.realize(sample_period)?;
        let response = channel_frequency_response(&taps, cfg.total_bins())?;
        let tx = Transmitter::new(cfg.clone())?;
        let rx = Receiver::new(cfg.clone(), Some(response))?;
        let lambda = cfg.bit_budget()?.total();
        let pool = if settings.jobs > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(settings.jobs)
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        let mut sim = Self {
            cfg,
            channel,
            tx,
            rx,
            taps,
            cp_length,
            lambda,
            mean_energy: 0.0,
            settings,
            pool,
        };
        sim.mean_energy = sim.measure_energy(seed)?;
        Ok(sim)
    }

    fn measure_energy(&self, seed: u64) -> Result<f64> {
        let mut rng = stream_rng(seed, CALIBRATION_STREAM);
        let count = self.settings.calibration_symbols.max(1);
        let mut total = 0.0;
        for _ in 0..count {
            let bits = random_bits(&mut rng, self.lambda);
            total += self.tx.transmit(&bits)?.electrical_energy;
        }
        Ok(total / count as f64)
    }

    pub fn config(&self) -> &ModemConfig {
        &self.cfg
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn cp_length(&self) -> usize {
        self.cp_length
    }

    /// Calibrated mean `sum |x+|^2`.
    pub fn mean_symbol_energy(&self) -> f64 {
        self.mean_energy
    }

    /// `E_b = T_c * mean(sum |x+|^2) / lambda`.
    pub fn energy_per_bit(&self) -> f64 {
        let tc = self.cfg.symbol_period / self.cfg.total_bins() as f64;
        tc * self.mean_energy / self.lambda as f64
    }

    /// Per-sample noise variance `N0 / (2 T_c)` at the given `Eb/N0`.
    pub fn noise_variance(&self, ebn0_db: f64) -> f64 {
        let ebn0 = 10f64.powf(ebn0_db / 10.0);
        self.mean_energy / (2.0 * self.lambda as f64 * ebn0)
    }

    pub fn ber(&self, ebn0_db: f64, stop: StopRule, seed: u64) -> Result<BerResult> {
        self.run(Some(self.noise_variance(ebn0_db)), ebn0_db, stop, seed)
    }

    /// Loopback without noise.
    pub fn ber_noiseless(&self, stop: StopRule, seed: u64) -> Result<BerResult> {
        self.run(None, f64::INFINITY, stop, seed)
    }

    fn run(
        &self,
        variance: Option<f64>,
        ebn0_db: f64,
        stop: StopRule,
        seed: u64,
    ) -> Result<BerResult> {
        if stop.min_errors == 0 || stop.max_bits == 0 {
            return Err(Error::Config("stop criteria must be positive".into()));
        }
        let mut total = Tally::default();
        let mut next_batch = 0u64;
        while total.errors < stop.min_errors && total.bits < stop.max_bits {
            let wave: Vec<u64> =
                (next_batch..next_batch + self.settings.wave_batches as u64).collect();
            next_batch += wave.len() as u64;
            let results: Vec<Result<Tally>> = match &self.pool {
                Some(pool) => pool.install(|| {
                    wave.par_iter()
                        .map(|&b| self.run_batch(b, variance, seed))
                        .collect()
                }),
                None => wave
                    .iter()
                    .map(|&b| self.run_batch(b, variance, seed))
                    .collect(),
            };
            for r in results {
                total = total.merge(r?);
            }
        }
        Ok(BerResult::from_tally(total, ebn0_db))
    }

    fn run_batch(&self, batch: u64, variance: Option<f64>, seed: u64) -> Result<Tally> {
        let mut data_rng = stream_rng(seed, 2 * batch);
        let mut noise_rng = stream_rng(seed, 2 * batch + 1);
        let block = self.cfg.total_bins();
        let mut link = LinkChannel::new(self.taps.clone(), self.cp_length, block)?;
        let memory = self.taps.len() - 1;
        if memory > 0 {
            // Fill the channel memory with earlier symbols.
            let priming = memory.div_ceil(block + self.cp_length);
            for _ in 0..priming {
                let bits = random_bits(&mut data_rng, self.lambda);
                link.transmit(&self.tx.transmit(&bits)?.unipolar);
            }
        }
        let sigma = variance.map(f64::sqrt);
        let mut tally = Tally::default();
        for _ in 0..self.settings.batch_symbols {
            let bits = random_bits(&mut data_rng, self.lambda);
            let symbol = self.tx.transmit(&bits)?;
            let mut y = link.transmit(&symbol.unipolar);
            if let Some(sigma) = sigma {
                for v in y.iter_mut() {
                    let z: f64 = noise_rng.sample(StandardNormal);
                    *v += sigma * z;
                }
            }
            let decided = self.rx.receive(&y)?;
            tally.errors += bits
                .iter()
                .zip(&decided.bits)
                .filter(|(a, b)| a != b)
                .count() as u64;
            tally.bits += bits.len() as u64;
            tally.symbols += 1;
            tally.energy += symbol.electrical_energy;
            tally.bias += symbol.bias;
        }
        Ok(tally)
    }

    /// Mean bias over `symbols` random symbols.
    pub fn mean_bias(&self, symbols: usize, seed: u64) -> Result<f64> {
        let mut rng = stream_rng(seed, CALIBRATION_STREAM - 1);
        let mut total = 0.0;
        for _ in 0..symbols {
            let bits = random_bits(&mut rng, self.lambda);
            total += self.tx.transmit(&bits)?.bias;
        }
        Ok(total / symbols.max(1) as f64)
    }
}

pub(crate) fn random_bits<R: Rng>(rng: &mut R, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random()).collect()
}

pub fn ber_monte_carlo(
    cfg: &ModemConfig,
    channel: &ChannelModel,
    ebn0_db: f64,
    stop: StopRule,
    seed: u64,
) -> Result<BerResult> {
    LinkSimulator::new(cfg.clone(), *channel, seed)?.ber(ebn0_db, stop, seed)
}

/// Search grid for [`required_ebn0`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
    pub resolution_db: f64,
    pub stop: StopRule,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            start_db: -20.0,
            stop_db: 60.0,
            step_db: 1.0,
            resolution_db: 0.1,
            stop: StopRule::default(),
        }
    }
}

/// Eb/N0 (dB) at which the BER crosses `target`: a coarse upward scan
/// brackets the crossing, then bisection narrows it to the grid's
/// resolution. Returns the bracket midpoint.
pub fn required_ebn0_with(
    sim: &LinkSimulator,
    target_ber: f64,
    grid: &SearchGrid,
    seed: u64,
) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 0.5) {
        return Err(Error::Domain(format!(
            "target BER {target_ber} outside (0, 0.5)"
        )));
    }
    let mut lo: Option<f64> = None;
    let mut hi: Option<f64> = None;
    let mut best = (f64::INFINITY, grid.start_db);
    let mut db = grid.start_db;
    while db <= grid.stop_db + 1e-9 {
        let r = sim.ber(db, grid.stop, seed)?;
        if r.ber < best.0 {
            best = (r.ber, db);
        }
        if r.ber <= target_ber {
            hi = Some(db);
            break;
        }
        lo = Some(db);
        db += grid.step_db;
    }
    let Some(mut hi) = hi else {
        return Err(Error::Unreachable {
            target: target_ber,
            best_ber: best.0,
            best_db: best.1,
        });
    };
    let Some(mut lo) = lo else {
        // Already below target at the bottom of the grid.
        return Ok(hi);
    };
    while hi - lo > grid.resolution_db {
        let mid = 0.5 * (lo + hi);
        if sim.ber(mid, grid.stop, seed)?.ber <= target_ber {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn required_ebn0(
    cfg: &ModemConfig,
    channel: &ChannelModel,
    target_ber: f64,
    seed: u64,
) -> Result<f64> {
    let sim = LinkSimulator::new(cfg.clone(), *channel, seed)?;
    required_ebn0_with(&sim, target_ber, &SearchGrid::default(), seed)
}

/// One row of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub scheme: Scheme,
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
    pub mean_bias: Option<f64>,
    /// `None` on success, otherwise why the point has no value.
    pub status: Option<String>,
}

impl SweepRecord {
    pub fn for_config(cfg: &ModemConfig, channel: &ChannelModel) -> Result<Self> {
        Ok(Self {
            scheme: cfg.scheme,
            n: cfg.n,
            l: cfg.l,
            m1: cfg.pair.m1,
            m2: cfg.pair.m2,
            kappa: cfg.kappa,
            alpha: cfg.filter_alpha,
            channel: channel.label(),
            ebn0_db: None,
            ber: None,
            se: spectral_efficiency(cfg)?,
            mean_bias: None,
            status: None,
        })
    }
}

/// SE over `kappas` (and `alphas` for the hybrid), ordered by alpha then
/// kappa. Schemes without index modulation yield one row per alpha.
pub fn se_sweep(
    template: &ModemConfig,
    kappas: &[usize],
    alphas: &[usize],
    convention: BandwidthConvention,
) -> Result<Vec<SweepRecord>> {
    let alphas: Vec<usize> = if template.scheme.is_filtered() && !alphas.is_empty() {
        alphas.to_vec()
    } else {
        vec![template.filter_alpha]
    };
    let mut kappas: Vec<usize> = if template.scheme.has_im_branch() {
        kappas.to_vec()
    } else {
        vec![0]
    };
    kappas.sort_unstable();
    kappas.dedup();
    let mut out = Vec::new();
    for &alpha in &alphas {
        for &kappa in &kappas {
            let mut cfg = template.clone();
            cfg.kappa = kappa;
            cfg.filter_alpha = alpha;
            cfg.validate()?;
            let mut rec = SweepRecord::for_config(&cfg, &ChannelModel::Los)?;
            rec.se = spectral_efficiency_with(&cfg, convention)?;
            out.push(rec);
        }
    }
    Ok(out)
}

/// Pairs SE with the Eb/N0 required for `target_ber` for each config.
/// Unreachable targets become status rows instead of errors.
pub fn se_ee_tradeoff(
    cfgs: &[ModemConfig],
    channel: &ChannelModel,
    target_ber: f64,
    grid: &SearchGrid,
    settings: MonteCarloSettings,
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    let mut out = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let sim = LinkSimulator::with_settings(cfg.clone(), *channel, seed, settings)?;
        let mut rec = SweepRecord::for_config(cfg, channel)?;
        rec.ber = Some(target_ber);
        rec.mean_bias = Some(sim.mean_bias(settings.calibration_symbols, seed)?);
        match required_ebn0_with(&sim, target_ber, grid, seed) {
            Ok(db) => rec.ebn0_db = Some(db),
            Err(Error::Unreachable { .. }) => rec.status = Some("unreachable".into()),
            Err(e) => return Err(e),
        }
        out.push(rec);
    }
    Ok(out)
}

/// BER at each Eb/N0 point of `grid_db`.
pub fn ber_curve(
    cfg: &ModemConfig,
    channel: &ChannelModel,
    grid_db: &[f64],
    stop: StopRule,
    settings: MonteCarloSettings,
    seed: u64,
) -> Result<Vec<(SweepRecord, BerResult)>> {
    let sim = LinkSimulator::with_settings(cfg.clone(), *channel, seed, settings)?;
    grid_db
        .iter()
        .map(|&db| {
            let r = sim.ber(db, stop, seed)?;
            let mut rec = SweepRecord::for_config(cfg, channel)?;
            rec.ebn0_db = Some(db);
            rec.ber = Some(r.ber);
            rec.mean_bias = Some(r.mean_bias);
            Ok((rec, r))
        })
        .collect()
}
