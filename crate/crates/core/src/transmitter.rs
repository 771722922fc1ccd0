//! Transmit chain: bits -> frequency frame -> Hermitian spectrum ->
//! unit-energy bipolar signal -> nonnegative intensity signal.
//!
//! ACO-family schemes load only odd subcarriers so the bipolar signal is
//! anti-symmetric and zero-clipping is enough. DCO-family schemes load every
//! positive subcarrier and need a DC bias. The hybrid scheme additionally
//! low-pass filters the clipped signal and re-biases it by the negative peak
//! that filtering brings back.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::constellation::{psk_ring, ConstellationPair};
use crate::dsp::{BinIndexSet, DftPlan};
use crate::mapping::{
    bit_budget, bits_to_int, kappa_approx, kappa_exhaustive, log2_exact, sap_encode, BitBudget,
    ImConfig, Sap,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// DC-biased optical OFDM.
    Dco,
    /// Asymmetrically clipped optical OFDM.
    Aco,
    /// DCO-OFDM with index modulation.
    DcoIm,
    /// ACO-OFDM with index modulation, unfiltered.
    AcoIm,
    /// ACO-OFDM superposed with ACO-OFDM-IM, low-pass filtered and biased.
    HybridAco,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Dco,
        Scheme::Aco,
        Scheme::DcoIm,
        Scheme::AcoIm,
        Scheme::HybridAco,
    ];

    pub fn is_aco_family(self) -> bool {
        matches!(self, Scheme::Aco | Scheme::AcoIm | Scheme::HybridAco)
    }

    /// Whether the index-modulated branch (ring P1 on active subcarriers) is on.
    pub fn has_im_branch(self) -> bool {
        matches!(self, Scheme::DcoIm | Scheme::AcoIm | Scheme::HybridAco)
    }

    /// Whether every eligible subcarrier carries an O-OFDM point (ring P2).
    pub fn has_ofdm_branch(self) -> bool {
        matches!(self, Scheme::Dco | Scheme::Aco | Scheme::HybridAco)
    }

    pub fn is_filtered(self) -> bool {
        self == Scheme::HybridAco
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Dco => "DCO",
            Scheme::Aco => "ACO",
            Scheme::DcoIm => "DCO-IM",
            Scheme::AcoIm => "ACO-IM",
            Scheme::HybridAco => "HYBRID-ACO",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DCO" | "DCO-OFDM" => Ok(Scheme::Dco),
            "ACO" | "ACO-OFDM" => Ok(Scheme::Aco),
            "DCO-IM" | "DCO-OFDM-IM" => Ok(Scheme::DcoIm),
            "ACO-IM" | "ACO-OFDM-IM" => Ok(Scheme::AcoIm),
            "HYBRID-ACO" | "HYBRID" => Ok(Scheme::HybridAco),
            _ => Err(Error::Config(format!("unknown scheme `{s}`"))),
        }
    }
}

/// How the default active-subcarrier count is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KappaRule {
    /// `floor(M1 * Omega / (M1 + 1))`.
    #[default]
    Approx,
    /// Exact maximiser of the index-modulation bit count.
    Exhaustive,
}

pub const DEFAULT_DCO_BIAS_FACTOR: f64 = 3.0;

/// Full parameterization of one modem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ModemConfig {
    /// Subcarrier count `N`.
    pub n: usize,
    /// Oversampling factor `L`.
    pub l: usize,
    pub scheme: Scheme,
    /// Active subcarriers; zero for schemes without index modulation.
    pub kappa: usize,
    pub pair: ConstellationPair,
    /// Low-pass filter excess `alpha` in `[0, N/2]` (hybrid only).
    pub filter_alpha: usize,
    /// DCO bias in units of the bipolar signal's standard deviation.
    pub dco_bias_factor: f64,
    /// Symbol period `T_s` in seconds.
    pub symbol_period: f64,
}

impl ModemConfig {
    /// Builds a config with `kappa` from the closed-form rule, `alpha = 0`,
    /// the default DCO bias and `T_s = 1 s`.
    pub fn new(scheme: Scheme, n: usize, l: usize, m1: usize, m2: usize) -> Result<Self> {
        let mut cfg = Self {
            n,
            l,
            scheme,
            kappa: 0,
            pair: ConstellationPair::new(m1, m2),
            filter_alpha: 0,
            dco_bias_factor: DEFAULT_DCO_BIAS_FACTOR,
            symbol_period: 1.0,
        };
        cfg.bins()?;
        cfg.kappa = cfg.default_kappa(KappaRule::Approx)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_kappa(mut self, kappa: usize) -> Result<Self> {
        self.kappa = kappa;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kappa_rule(mut self, rule: KappaRule) -> Result<Self> {
        self.kappa = self.default_kappa(rule)?;
        self.validate()?;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: usize) -> Result<Self> {
        self.filter_alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dco_bias_factor(mut self, k: f64) -> Result<Self> {
        self.dco_bias_factor = k;
        self.validate()?;
        Ok(self)
    }

    /// Sets `T_s = lambda / R_b` for a bit rate `R_b` in bit/s.
    pub fn with_data_rate(mut self, bits_per_second: f64) -> Result<Self> {
        if !(bits_per_second > 0.0 && bits_per_second.is_finite()) {
            return Err(Error::Config(format!(
                "data rate {bits_per_second} must be positive"
            )));
        }
        self.symbol_period = self.bit_budget()?.total() as f64 / bits_per_second;
        Ok(self)
    }

    fn default_kappa(&self, rule: KappaRule) -> Result<usize> {
        if !self.scheme.has_im_branch() {
            return Ok(0);
        }
        let omega = self.omega();
        match rule {
            KappaRule::Approx => Ok(kappa_approx(self.pair.m1, omega)),
            KappaRule::Exhaustive => kappa_exhaustive(self.pair.m1, omega),
        }
    }

    pub fn bins(&self) -> Result<BinIndexSet> {
        BinIndexSet::new(self.n, self.l)
    }

    pub fn total_bins(&self) -> usize {
        self.n * self.l
    }

    /// Eligible subcarriers: `N/2 - 1` (DCO family) or `N/4` (ACO family).
    pub fn omega(&self) -> usize {
        if self.scheme.is_aco_family() {
            self.n / 4
        } else {
            self.n / 2 - 1
        }
    }

    /// Subcarrier index `gamma` of eligible position `zeta` (both 0-based
    /// positions here; `gamma` is the physical bin).
    pub fn gamma(&self, zeta: usize) -> usize {
        if self.scheme.is_aco_family() {
            2 * zeta + 1
        } else {
            zeta + 1
        }
    }

    pub fn gammas(&self) -> Vec<usize> {
        (0..self.omega()).map(|z| self.gamma(z)).collect()
    }

    pub fn im_config(&self) -> Option<ImConfig> {
        self.scheme.has_im_branch().then(|| ImConfig {
            omega: self.omega(),
            kappa: self.kappa,
            m1: self.pair.m1,
            m2: self.pair.m2,
        })
    }

    /// Bits per symbol for this scheme; absent branches carry nothing.
    pub fn bit_budget(&self) -> Result<BitBudget> {
        let omega = self.omega();
        match self.scheme {
            Scheme::Dco | Scheme::Aco => Ok(BitBudget {
                lambda3: omega * log2_exact(self.pair.m2),
                ..BitBudget::default()
            }),
            Scheme::DcoIm | Scheme::AcoIm => {
                let full = bit_budget(&self.im_config().expect("im branch"))?;
                Ok(BitBudget { lambda3: 0, ..full })
            }
            Scheme::HybridAco => bit_budget(&self.im_config().expect("im branch")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bins = self.bins()?;
        self.pair.validate()?;
        if self.omega() == 0 {
            return Err(Error::Config(format!(
                "N = {} leaves no eligible subcarriers",
                self.n
            )));
        }
        if let Some(im) = self.im_config() {
            im.validate().map_err(|e| Error::Config(e.to_string()))?;
        } else if self.kappa != 0 {
            return Err(Error::Config(format!(
                "{} has no index-modulation branch but kappa = {}",
                self.scheme, self.kappa
            )));
        }
        if self.filter_alpha > self.n / 2 {
            return Err(Error::Config(format!(
                "alpha = {} outside [0, N/2 = {}]",
                self.filter_alpha,
                self.n / 2
            )));
        }
        if !self.scheme.is_filtered() && self.filter_alpha != 0 {
            return Err(Error::Config(format!(
                "alpha is only meaningful for {}",
                Scheme::HybridAco
            )));
        }
        if !(self.dco_bias_factor >= 0.0 && self.dco_bias_factor.is_finite()) {
            return Err(Error::Config(format!(
                "DCO bias factor {} must be finite and >= 0",
                self.dco_bias_factor
            )));
        }
        if !(self.symbol_period > 0.0 && self.symbol_period.is_finite()) {
            return Err(Error::Config(format!(
                "symbol period {} must be positive",
                self.symbol_period
            )));
        }
        debug_assert!(bins.total_bins().is_power_of_two());
        self.bit_budget()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// Frequency-domain content of one symbol, indexed by physical bin `gamma`
/// in `0..N/2` (bin 0 is always empty).
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyFrame {
    pub x1: Vec<Complex64>,
    pub x2: Vec<Complex64>,
    pub combined: Vec<Complex64>,
    pub sap: Option<Sap>,
    /// Ring-P1 labels in ascending activation-pattern order.
    pub im_labels: Vec<usize>,
    /// Ring-P2 labels in ascending `zeta`.
    pub ofdm_labels: Vec<usize>,
}

fn take_symbols(bits: &[bool], count: usize, width: usize) -> Vec<usize> {
    (0..count)
        .map(|i| bits_to_int(&bits[i * width..(i + 1) * width]) as usize)
        .collect()
}

/// Splits `lambda` bits into activation pattern, ring-P1 and ring-P2 labels
/// and places them on the scheme's subcarriers.
pub fn assemble_frame(bits: &[bool], cfg: &ModemConfig) -> Result<FrequencyFrame> {
    let budget = cfg.bit_budget()?;
    if bits.len() != budget.total() {
        return Err(Error::BitLength {
            expected: budget.total(),
            got: bits.len(),
        });
    }
    let half = cfg.n / 2;
    let omega = cfg.omega();
    let zero = Complex64::new(0.0, 0.0);
    let mut x1 = vec![zero; half];
    let mut x2 = vec![zero; half];

    let (sap_bits, rest) = bits.split_at(budget.lambda1);
    let (im_bits, ofdm_bits) = rest.split_at(budget.lambda2);

    let mut sap = None;
    let mut im_labels = Vec::new();
    if let Some(im) = cfg.im_config() {
        let pattern = sap_encode(sap_bits, &im)?;
        let ring = psk_ring(cfg.pair.m1, cfg.pair.r1())?;
        im_labels = take_symbols(im_bits, cfg.kappa, log2_exact(cfg.pair.m1));
        for (&zeta, &label) in pattern.indices().iter().zip(&im_labels) {
            x1[cfg.gamma(zeta)] = ring[label];
        }
        sap = Some(pattern);
    }

    let mut ofdm_labels = Vec::new();
    if cfg.scheme.has_ofdm_branch() {
        let ring = psk_ring(cfg.pair.m2, cfg.pair.r2)?;
        ofdm_labels = take_symbols(ofdm_bits, omega, log2_exact(cfg.pair.m2));
        for (zeta, &label) in ofdm_labels.iter().enumerate() {
            x2[cfg.gamma(zeta)] = ring[label];
        }
    }

    let combined = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
    Ok(FrequencyFrame {
        x1,
        x2,
        combined,
        sap,
        im_labels,
        ofdm_labels,
    })
}

/// Places the frame on `sigma+`, its conjugate on `sigma-`, zeros elsewhere.
pub fn hermitian_zero_pad(frame: &FrequencyFrame, cfg: &ModemConfig) -> Result<Vec<Complex64>> {
    let bins = cfg.bins()?;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); bins.total_bins()];
    for sigma in bins.positive_bins() {
        let v = frame.combined[sigma];
        spectrum[sigma] = v;
        spectrum[bins.mirror(sigma)] = v.conj();
    }
    Ok(spectrum)
}

/// Stages of one transmitted symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSymbol {
    /// Unit-energy bipolar signal.
    pub bipolar: Vec<f64>,
    /// Zero-clipped signal (ACO family).
    pub clipped: Option<Vec<f64>>,
    /// Low-pass filtered clipped signal (hybrid).
    pub filtered: Option<Vec<f64>>,
    /// Nonnegative intensity signal.
    pub unipolar: Vec<f64>,
    /// DC level added during unipolar conversion.
    pub bias: f64,
    /// Factor applied to the Hermitian spectrum to reach unit energy.
    pub scale: f64,
    /// `sum |x+|^2`.
    pub electrical_energy: f64,
}

/// Inverse transform scaled so that `sum |x_bp|^2 = 1`. Returns the signal
/// and the scale factor applied to `spectrum`.
pub fn modulate(spectrum: &[Complex64], plan: &DftPlan) -> Result<(Vec<f64>, f64)> {
    let x = plan.inverse_real(spectrum);
    let energy: f64 = x.iter().map(|v| v * v).sum();
    if !(energy > 0.0) {
        return Err(Error::Domain(
            "all-zero frame cannot be energy-normalized".into(),
        ));
    }
    let scale = energy.sqrt().recip();
    Ok((x.into_iter().map(|v| v * scale).collect(), scale))
}

pub fn unipolar_aco(bipolar: &[f64]) -> Vec<f64> {
    bipolar.iter().map(|&v| v.max(0.0)).collect()
}

/// Adds `k` standard deviations of bias and clips what is still negative.
/// Returns the signal and the bias level.
pub fn unipolar_dco(bipolar: &[f64], k: f64) -> (Vec<f64>, f64) {
    let len = bipolar.len() as f64;
    let mean = bipolar.iter().sum::<f64>() / len;
    let var = bipolar.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len;
    let bias = k * var.sqrt();
    (bipolar.iter().map(|&v| (v + bias).max(0.0)).collect(), bias)
}

/// Pass-band of the clipping-harmonic filter: DC plus bins up to
/// `N/2 + alpha - 1` and their mirrors, `N + 2 alpha - 1` bins in total.
pub fn filter_mask(bins: &BinIndexSet, alpha: usize) -> Result<Vec<bool>> {
    let n = bins.subcarriers();
    if alpha > n / 2 {
        return Err(Error::Domain(format!(
            "alpha = {alpha} outside [0, N/2 = {}]",
            n / 2
        )));
    }
    let edge = n / 2 + alpha - 1;
    let total = bins.total_bins();
    Ok((0..total)
        .map(|s| s <= edge || s >= total.saturating_sub(edge))
        .collect())
}

pub fn lowpass_filter(
    clipped: &[f64],
    alpha: usize,
    bins: &BinIndexSet,
    plan: &DftPlan,
) -> Result<Vec<f64>> {
    let mask = filter_mask(bins, alpha)?;
    let mut spectrum = plan.forward_real(clipped);
    for (v, keep) in spectrum.iter_mut().zip(mask) {
        if !keep {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    Ok(plan.inverse_real(&spectrum))
}

/// Lifts the signal by its negative peak so it is nonnegative.
pub fn add_bias(filtered: &[f64]) -> (Vec<f64>, f64) {
    let min = filtered.iter().copied().fold(f64::INFINITY, f64::min);
    let bias = if min < 0.0 { -min } else { 0.0 };
    (
        filtered.iter().map(|&v| (v + bias).max(0.0)).collect(),
        bias,
    )
}

/// Reusable transmit chain for one config.
#[derive(Clone, Debug)]
pub struct Transmitter {
    cfg: ModemConfig,
    bins: BinIndexSet,
    plan: DftPlan,
}

impl Transmitter {
    pub fn new(cfg: ModemConfig) -> Result<Self> {
        cfg.validate()?;
        let bins = cfg.bins()?;
        let plan = DftPlan::new(bins.total_bins())?;
        Ok(Self { cfg, bins, plan })
    }

    pub fn config(&self) -> &ModemConfig {
        &self.cfg
    }

    pub fn plan(&self) -> &DftPlan {
        &self.plan
    }

    pub fn transmit(&self, bits: &[bool]) -> Result<TimeSymbol> {
        let frame = assemble_frame(bits, &self.cfg)?;
        self.transmit_frame(&frame)
    }

    pub fn transmit_frame(&self, frame: &FrequencyFrame) -> Result<TimeSymbol> {
        let spectrum = hermitian_zero_pad(frame, &self.cfg)?;
        let (bipolar, scale) = modulate(&spectrum, &self.plan)?;
        let (clipped, filtered, unipolar, bias) = match self.cfg.scheme {
            Scheme::Dco | Scheme::DcoIm => {
                let (x, bias) = unipolar_dco(&bipolar, self.cfg.dco_bias_factor);
                (None, None, x, bias)
            }
            Scheme::Aco | Scheme::AcoIm => {
                let clipped = unipolar_aco(&bipolar);
                (Some(clipped.clone()), None, clipped, 0.0)
            }
            Scheme::HybridAco => {
                let clipped = unipolar_aco(&bipolar);
                let filtered =
                    lowpass_filter(&clipped, self.cfg.filter_alpha, &self.bins, &self.plan)?;
                let (x, bias) = add_bias(&filtered);
                (Some(clipped), Some(filtered), x, bias)
            }
        };
        let electrical_energy = unipolar.iter().map(|v| v * v).sum();
        Ok(TimeSymbol {
            bipolar,
            clipped,
            filtered,
            unipolar,
            bias,
            scale,
            electrical_energy,
        })
    }
}

/// One-shot transmit of `bits` under `cfg`.
pub fn transmit_symbol(bits: &[bool], cfg: &ModemConfig) -> Result<TimeSymbol> {
    Transmitter::new(cfg.clone())?.transmit(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
        (0..n).map(|_| rng.random()).collect()
    }

    fn hybrid() -> ModemConfig {
        ModemConfig::new(Scheme::HybridAco, 32, 4, 4, 4).unwrap()
    }

    #[test]
    fn default_hybrid_parameters() {
        let cfg = hybrid();
        assert_eq!(cfg.omega(), 8);
        assert_eq!(cfg.kappa, 6);
        assert_eq!(cfg.bit_budget().unwrap().total(), 32);
        assert_eq!(cfg.gammas(), vec![1, 3, 5, 7, 9, 11, 13, 15]);
        let dco = ModemConfig::new(Scheme::Dco, 32, 4, 4, 4).unwrap();
        assert_eq!(dco.omega(), 15);
        assert_eq!(dco.kappa, 0);
        assert_eq!(dco.gamma(0), 1);
    }

    #[test]
    fn config_rejections() {
        assert!(ModemConfig::new(Scheme::Aco, 24, 4, 4, 4).is_err());
        assert!(ModemConfig::new(Scheme::Aco, 32, 3, 4, 4).is_err());
        assert!(hybrid().with_alpha(17).is_err());
        assert!(hybrid().with_kappa(9).is_err());
        let aco = ModemConfig::new(Scheme::Aco, 32, 4, 4, 4).unwrap();
        assert!(aco.clone().with_alpha(2).is_err());
        assert!(aco.with_kappa(2).is_err());
    }

    #[test]
    fn scheme_names_roundtrip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("hybrid".parse::<Scheme>().unwrap(), Scheme::HybridAco);
        assert!("QAM".parse::<Scheme>().is_err());
    }

    #[test]
    fn hybrid_frame_layout() {
        let cfg = hybrid();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bits = random_bits(&mut rng, 32);
        let frame = assemble_frame(&bits, &cfg).unwrap();
        let sap = frame.sap.clone().unwrap();
        for gamma in 0..16 {
            let v = frame.combined[gamma];
            if gamma % 2 == 0 {
                assert_eq!(v.norm(), 0.0);
                continue;
            }
            let zeta = (gamma - 1) / 2;
            let mag = v.norm();
            if sap.contains(zeta) {
                assert!(
                    [2.0, 10f64.sqrt(), 4.0]
                        .iter()
                        .any(|m| (mag - m).abs() < 1e-12),
                    "active bin magnitude {mag}"
                );
            } else {
                assert!((mag - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_frames() {
        let aco = ModemConfig::new(Scheme::Aco, 32, 4, 4, 4).unwrap();
        assert_eq!(aco.bit_budget().unwrap().total(), 16);
        let frame = assemble_frame(&[true; 16], &aco).unwrap();
        assert!(frame.sap.is_none());
        for g in (1..16).step_by(2) {
            assert!((frame.combined[g].norm() - 1.0).abs() < 1e-12);
        }

        let full = ModemConfig::new(Scheme::AcoIm, 32, 4, 4, 4)
            .unwrap()
            .with_kappa(8)
            .unwrap();
        let b = full.bit_budget().unwrap();
        assert_eq!((b.lambda1, b.lambda2, b.lambda3), (0, 16, 0));
        let frame = assemble_frame(&[false; 16], &full).unwrap();
        for g in (1..16).step_by(2) {
            assert!((frame.combined[g].norm() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bit_length_mismatch() {
        assert_eq!(
            assemble_frame(&[true; 31], &hybrid()),
            Err(Error::BitLength {
                expected: 32,
                got: 31
            })
        );
    }

    #[test]
    fn padded_spectrum_support() {
        let cfg = hybrid();
        let frame = assemble_frame(&[false; 32], &cfg).unwrap();
        let spec = hermitian_zero_pad(&frame, &cfg).unwrap();
        assert_eq!(spec.len(), 128);
        let nonzero: Vec<usize> = (0..128).filter(|&s| spec[s].norm() > 0.0).collect();
        assert!(nonzero.len() <= 30);
        for s in nonzero {
            assert!(s % 2 == 1);
            assert!(!(16..=112).contains(&s));
        }
    }

    #[test]
    fn all_zero_frame_is_rejected() {
        let plan = DftPlan::new(16).unwrap();
        assert!(matches!(
            modulate(&vec![Complex64::new(0.0, 0.0); 16], &plan),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn single_tone_has_unit_energy() {
        let plan = DftPlan::new(64).unwrap();
        let mut spec = vec![Complex64::new(0.0, 0.0); 64];
        spec[3] = Complex64::new(1.0, 0.0);
        spec[61] = Complex64::new(1.0, 0.0);
        let (x, _) = modulate(&spec, &plan).unwrap();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        assert!((energy - 1.0).abs() < 1e-12);
        let amp = (2.0f64 / 64.0).sqrt();
        for (n, v) in x.iter().enumerate() {
            let expected = amp * (2.0 * std::f64::consts::PI * 3.0 * n as f64 / 64.0).cos();
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn dco_bias_paths() {
        let x = [0.5, -0.5, 0.2, -0.2];
        let (y, bias) = unipolar_dco(&x, 0.0);
        assert_eq!(bias, 0.0);
        assert_eq!(y, vec![0.5, 0.0, 0.2, 0.0]);
        let (y, bias) = unipolar_dco(&x, 10.0);
        for (a, b) in y.iter().zip(x) {
            assert!((a - bias - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bias_examples() {
        let (y, b) = add_bias(&[0.1, 0.2]);
        assert_eq!((y, b), (vec![0.1, 0.2], 0.0));
        let (y, b) = add_bias(&[0.1, -0.3, 0.0]);
        assert!((b - 0.3).abs() < 1e-15);
        assert!(y.iter().copied().fold(f64::INFINITY, f64::min).abs() < 1e-15);
    }

    #[test]
    fn aco_clip_keeps_nonnegative_input() {
        assert_eq!(unipolar_aco(&[0.0, 1.0, 2.5]), vec![0.0, 1.0, 2.5]);
    }

    #[test]
    fn filter_kept_bins() {
        for (n, l) in [(32usize, 4usize), (16, 2), (64, 4)] {
            let bins = BinIndexSet::new(n, l).unwrap();
            for alpha in 0..=n / 2 {
                let kept = filter_mask(&bins, alpha)
                    .unwrap()
                    .iter()
                    .filter(|&&k| k)
                    .count();
                if l >= 2 {
                    assert_eq!(kept, n + 2 * alpha - 1, "n={n} l={l} alpha={alpha}");
                }
            }
            assert!(filter_mask(&bins, n / 2 + 1).is_err());
        }
    }
}
