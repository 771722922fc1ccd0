//! Optical wireless channel: line-of-sight or ceiling-bounce dispersion,
//! cyclic prefix, and additive white Gaussian noise.
//!
//! Noise convention: real AWGN with per-sample variance `N0 / (2 T_c)` where
//! `T_c = T_s / (L N)` is the sample period, and symbol energy
//! `E_s = T_c * sum |x+|^2`. Under that convention `T_c` cancels and
//! `sigma^2 = mean(sum |x+|^2) / (2 lambda Eb/N0)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dsp::DftPlan;
use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Fraction of the impulse-response integral kept when truncating taps.
pub const TAP_TRUNCATION: f64 = 0.9999;

/// Fraction of tap energy the default cyclic prefix must cover.
pub const CP_ENERGY_FRACTION: f64 = 0.999;

/// Ceiling-bounce impulse response `h(t) = mu 6 rho^6 / (t + rho)^7 u(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CeilingBounceParams {
    /// RMS delay spread of the power-delay profile, seconds.
    pub rms_delay_spread: f64,
    /// DC gain; taps are normalized to sum to this value.
    pub path_loss: f64,
}

impl CeilingBounceParams {
    pub fn new(rms_delay_spread: f64) -> Result<Self> {
        if !(rms_delay_spread > 0.0 && rms_delay_spread.is_finite()) {
            return Err(Error::Domain(format!(
                "rms delay spread {rms_delay_spread} must be positive"
            )));
        }
        Ok(Self {
            rms_delay_spread,
            path_loss: 1.0,
        })
    }

    /// Parameters for a ceiling `height` metres above the link,
    /// `rho = 2 H / c`.
    pub fn from_ceiling_height(height: f64) -> Result<Self> {
        let rho = 2.0 * height / SPEED_OF_LIGHT;
        Self::new(rho / 12.0 * (13.0f64 / 11.0).sqrt())
    }

    /// `rho = 12 delta_tau / sqrt(13/11)`.
    pub fn rho(&self) -> f64 {
        12.0 * self.rms_delay_spread / (13.0f64 / 11.0).sqrt()
    }

    /// Unnormalized shape, integrating to one over `t >= 0`.
    pub fn impulse_response(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let rho = self.rho();
        6.0 * rho.powi(6) / (t + rho).powi(7)
    }
}

/// Sampled ceiling-bounce taps `h(i T_c) T_c`, truncated once the running
/// sum reaches [`TAP_TRUNCATION`] of the analytic integral, then scaled to
/// sum to the path loss.
pub fn ceiling_bounce_taps(params: &CeilingBounceParams, sample_period: f64) -> Result<Vec<f64>> {
    if !(params.rms_delay_spread > 0.0) {
        return Err(Error::Domain("rms delay spread must be positive".into()));
    }
    if !(sample_period > 0.0 && sample_period.is_finite()) {
        return Err(Error::Domain(format!(
            "sample period {sample_period} must be positive"
        )));
    }
    let mut taps = Vec::new();
    let mut sum = 0.0;
    while sum < TAP_TRUNCATION {
        let h = params.impulse_response(taps.len() as f64 * sample_period) * sample_period;
        sum += h;
        taps.push(h);
    }
    let scale = params.path_loss / sum;
    taps.iter_mut().for_each(|h| *h *= scale);
    Ok(taps)
}

/// RMS delay spread of a tap vector, weighting delays by tap power `h^2`.
pub fn rms_delay_spread(taps: &[f64], sample_period: f64) -> f64 {
    let power: f64 = taps.iter().map(|h| h * h).sum();
    let (m1, m2) = taps.iter().enumerate().fold((0.0, 0.0), |(a, b), (i, h)| {
        let t = i as f64 * sample_period;
        (a + h * h * t, b + h * h * t * t)
    });
    let mean = m1 / power;
    (m2 / power - mean * mean).max(0.0).sqrt()
}

/// Shortest prefix length whose taps `0..=cp` hold `fraction` of the
/// channel energy.
pub fn cp_length_for_energy(taps: &[f64], fraction: f64) -> usize {
    let total: f64 = taps.iter().map(|h| h * h).sum();
    let mut acc = 0.0;
    for (i, h) in taps.iter().enumerate() {
        acc += h * h;
        if acc >= fraction * total {
            return i;
        }
    }
    taps.len().saturating_sub(1)
}

/// Sends one block through the channel with nothing transmitted before it:
/// prepend the last `cp_length` samples, convolve, drop the prefix.
///
/// With `cp_length >= taps.len() - 1` the result is the circular
/// convolution of `x` with the taps.
pub fn apply_channel(x: &[f64], taps: &[f64], cp_length: usize) -> Vec<f64> {
    let cp = cp_length;
    let block: Vec<f64> = cyclic_prefix(x, cp).chain(x.iter().copied()).collect();
    (cp..block.len())
        .map(|n| {
            taps.iter()
                .enumerate()
                .take(n + 1)
                .map(|(k, h)| h * block[n - k])
                .sum()
        })
        .collect()
}

/// Last `cp` samples of the cyclic extension of `x`; a prefix longer than
/// the block wraps around it.
fn cyclic_prefix(x: &[f64], cp: usize) -> impl Iterator<Item = f64> + '_ {
    let n = x.len();
    let cp = if n == 0 { 0 } else { cp };
    (0..cp).map(move |i| x[(i + n * cp.div_ceil(n) - cp) % n])
}

/// Frequency response on `len` bins: the taps' DTFT sampled at `k / len`.
/// Taps longer than `len` are folded first, which samples the same DTFT.
pub fn channel_frequency_response(taps: &[f64], len: usize) -> Result<Vec<Complex64>> {
    if taps.is_empty() {
        return Err(Error::Domain("empty tap vector".into()));
    }
    let plan = DftPlan::new(len)?;
    let mut folded = vec![0.0; len];
    for (i, h) in taps.iter().enumerate() {
        folded[i % len] += h;
    }
    Ok(plan.forward_real(&folded))
}

/// Spectral level and sampling of the additive noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    /// One-sided noise spectral density `N0`.
    pub n0: f64,
    /// Sample period `T_c`.
    pub sample_period: f64,
}

impl NoiseModel {
    pub fn variance(&self) -> f64 {
        self.n0 / (2.0 * self.sample_period)
    }
}

/// Adds seeded white Gaussian noise.
pub fn add_awgn(y: &[f64], noise: &NoiseModel, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = y.to_vec();
    add_awgn_in_place(&mut out, noise.variance(), &mut rng);
    out
}

pub fn add_awgn_in_place<R: Rng + ?Sized>(y: &mut [f64], variance: f64, rng: &mut R) {
    if variance <= 0.0 {
        return;
    }
    let sigma = variance.sqrt();
    for v in y {
        let z: f64 = rng.sample(StandardNormal);
        *v += sigma * z;
    }
}

/// Channel between transmitter and receiver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelModel {
    Los,
    CeilingBounce {
        params: CeilingBounceParams,
        /// Prefix length in samples; `None` covers [`CP_ENERGY_FRACTION`]
        /// of the tap energy.
        cp_length: Option<usize>,
    },
}

impl ChannelModel {
    pub fn ceiling_bounce(rms_delay_spread: f64) -> Result<Self> {
        Ok(ChannelModel::CeilingBounce {
            params: CeilingBounceParams::new(rms_delay_spread)?,
            cp_length: None,
        })
    }

    pub fn label(&self) -> String {
        match self {
            ChannelModel::Los => "los".into(),
            ChannelModel::CeilingBounce { params, .. } => {
                format!("ceiling-bounce-{}ns", params.rms_delay_spread * 1e9)
            }
        }
    }

    /// Taps and prefix for a given sample period.
    pub fn realize(&self, sample_period: f64) -> Result<(Vec<f64>, usize)> {
        match self {
            ChannelModel::Los => Ok((vec![1.0], 0)),
            ChannelModel::CeilingBounce { params, cp_length } => {
                let taps = ceiling_bounce_taps(params, sample_period)?;
                let cp =
                    cp_length.unwrap_or_else(|| cp_length_for_energy(&taps, CP_ENERGY_FRACTION));
                Ok((taps, cp))
            }
        }
    }
}

/// Streaming channel: consecutive blocks share the channel memory, so a
/// prefix shorter than the impulse response leaks the previous block.
#[derive(Clone, Debug)]
pub struct LinkChannel {
    taps: Vec<f64>,
    cp_length: usize,
    history: Vec<f64>,
    conv: Option<FftConvolver>,
}

#[derive(Clone, Debug)]
struct FftConvolver {
    plan: DftPlan,
    taps_spectrum: Vec<Complex64>,
}

impl LinkChannel {
    pub fn new(taps: Vec<f64>, cp_length: usize, block_len: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Domain("empty tap vector".into()));
        }
        let memory = taps.len() - 1;
        let conv = if memory == 0 {
            None
        } else {
            let len = (memory + cp_length + block_len + memory).next_power_of_two();
            let plan = DftPlan::new(len)?;
            let mut padded = taps.clone();
            padded.resize(len, 0.0);
            let taps_spectrum = plan.forward_real(&padded);
            Some(FftConvolver {
                plan,
                taps_spectrum,
            })
        };
        Ok(Self {
            history: vec![0.0; memory],
            taps,
            cp_length,
            conv,
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn cp_length(&self) -> usize {
        self.cp_length
    }

    /// Forgets earlier blocks.
    pub fn reset(&mut self) {
        self.history.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Transmits one block with its prefix and returns the samples the
    /// receiver keeps after dropping the prefix.
    pub fn transmit(&mut self, x: &[f64]) -> Vec<f64> {
        let cp = self.cp_length;
        let Some(conv) = &self.conv else {
            return x.iter().map(|v| v * self.taps[0]).collect();
        };
        let memory = self.history.len();
        let len = conv.plan.len();
        let mut segment: Vec<Complex64> = Vec::with_capacity(len);
        segment.extend(self.history.iter().map(|&v| Complex64::new(v, 0.0)));
        segment.extend(cyclic_prefix(x, cp).map(|v| Complex64::new(v, 0.0)));
        segment.extend(x.iter().map(|&v| Complex64::new(v, 0.0)));
        let used = segment.len();
        segment.resize(len, Complex64::new(0.0, 0.0));
        conv.plan.forward_in_place(&mut segment);
        for (v, h) in segment.iter_mut().zip(&conv.taps_spectrum) {
            *v *= h;
        }
        conv.plan.inverse_in_place(&mut segment);
        let start = memory + cp;
        let out = segment[start..start + x.len()]
            .iter()
            .map(|v| v.re)
            .collect();

        // Keep the most recent `memory` transmitted samples.
        let mut stream: Vec<f64> = Vec::with_capacity(used);
        stream.extend_from_slice(&self.history);
        stream.extend(cyclic_prefix(x, cp));
        stream.extend_from_slice(x);
        self.history
            .copy_from_slice(&stream[stream.len() - memory..]);
        out
    }
}
