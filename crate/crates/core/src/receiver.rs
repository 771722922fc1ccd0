//! Receive chain: transform, zero-forcing, extraction, energy-detector
//! activation pattern estimate, then LUT / PSK decisions and bit reassembly.
//!
//! Bits come back in the transmitter's parse order `lambda1 | lambda2 |
//! lambda3`: ring-P1 labels by ascending active position, ring-P2 labels by
//! ascending `zeta`.
//!
//! Each symbol is normalized to unit energy before clipping, so the
//! extracted values are `s * X` with `s^2 * sum |X|^2 = LN / 2`. When the
//! frame energy depends on the data (the hybrid scheme) the receiver tries
//! each feasible frame energy, and keeps the decisions whose implied
//! `s * X` lies closest to the received values.

use num_complex::Complex64;

use crate::constellation::{build_lut, detect_lut, nearest_psk, psk_point, SuperpositionLut};
use crate::dsp::{BinIndexSet, DftPlan};
use crate::mapping::{int_to_bits, log2_exact, sap_decode, Sap};
use crate::transmitter::{ModemConfig, Scheme};
use crate::{Error, Result};

/// Magnitude below which a channel bin is treated as a null.
pub const SINGULAR_CHANNEL: f64 = 1e-12;

const MAX_EXACT_ENERGIES: usize = 4096;
const ENERGY_GRID_POINTS: usize = 64;

/// Extraction gain and the eligible-position -> bin map.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionMap {
    /// 2 for the ACO family (undoes clipping's halving of data bins), 1 for
    /// the DCO family.
    pub gain: f64,
    pub gammas: Vec<usize>,
}

impl ExtractionMap {
    pub fn for_config(cfg: &ModemConfig) -> Self {
        Self {
            gain: if cfg.scheme.is_aco_family() { 2.0 } else { 1.0 },
            gammas: cfg.gammas(),
        }
    }
}

/// Receiver decisions for one symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct DemodResult {
    pub sap_hat: Option<Sap>,
    pub bits: Vec<bool>,
    /// Ring-P1 labels, ascending active position.
    pub im_labels: Vec<usize>,
    /// Ring-P2 labels, ascending `zeta`.
    pub ofdm_labels: Vec<usize>,
}

/// Divides the data bins of `y` by the channel response; other bins pass
/// through untouched.
pub fn equalize_zf(y: &[Complex64], h: &[Complex64], bins: &BinIndexSet) -> Result<Vec<Complex64>> {
    let mut out = y.to_vec();
    for sigma in bins.positive_bins() {
        let mag = h[sigma].norm();
        if mag < SINGULAR_CHANNEL {
            return Err(Error::SingularChannel {
                bin: sigma,
                magnitude: mag,
            });
        }
        out[sigma] = y[sigma] / h[sigma];
    }
    Ok(out)
}

/// `Y_dot[zeta] = g * Y_hat[gamma(zeta)]`.
pub fn extract(equalized: &[Complex64], map: &ExtractionMap) -> Vec<Complex64> {
    map.gammas
        .iter()
        .map(|&g| equalized[g] * map.gain)
        .collect()
}

/// The `kappa` positions with the largest `|Y|^2`, ascending; equal
/// energies favour the lower position.
pub fn detect_sap_energy(values: &[Complex64], kappa: usize) -> Sap {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .norm_sqr()
            .total_cmp(&values[a].norm_sqr())
            .then(a.cmp(&b))
    });
    let mut picked = order[..kappa.min(values.len())].to_vec();
    picked.sort_unstable();
    Sap::new(picked, values.len()).expect("sorted distinct positions")
}

/// Symbol decisions on values already rescaled to the nominal geometry.
pub fn demodulate(
    values: &[Complex64],
    sap_hat: Option<&Sap>,
    cfg: &ModemConfig,
    lut: &SuperpositionLut,
) -> Result<DemodResult> {
    let pair = &cfg.pair;
    let omega = cfg.omega();
    let mut im_labels = Vec::new();
    let mut ofdm_labels = Vec::new();
    match cfg.scheme {
        Scheme::Dco | Scheme::Aco => {
            ofdm_labels = values
                .iter()
                .map(|&y| nearest_psk(y, pair.m2, pair.r2))
                .collect();
        }
        Scheme::DcoIm | Scheme::AcoIm => {
            let sap = sap_hat.ok_or_else(|| Error::Domain("missing activation pattern".into()))?;
            im_labels = sap
                .indices()
                .iter()
                .map(|&z| nearest_psk(values[z], pair.m1, pair.r1()))
                .collect();
        }
        Scheme::HybridAco => {
            let sap = sap_hat.ok_or_else(|| Error::Domain("missing activation pattern".into()))?;
            let active = sap.mask(omega);
            ofdm_labels = vec![0; omega];
            for (zeta, &y) in values.iter().enumerate() {
                if active[zeta] {
                    let (x1, x2) = detect_lut(y, lut);
                    im_labels.push(x1);
                    ofdm_labels[zeta] = x2;
                } else {
                    ofdm_labels[zeta] = nearest_psk(y, pair.m2, pair.r2);
                }
            }
        }
    }

    let mut bits = Vec::with_capacity(cfg.bit_budget()?.total());
    if let (Some(im), Some(sap)) = (cfg.im_config(), sap_hat) {
        bits.extend(sap_decode(sap, &im)?);
    }
    let w1 = log2_exact(pair.m1);
    for &label in &im_labels {
        bits.extend(int_to_bits(label as u128, w1));
    }
    let w2 = log2_exact(pair.m2);
    for &label in &ofdm_labels {
        bits.extend(int_to_bits(label as u128, w2));
    }
    Ok(DemodResult {
        sap_hat: sap_hat.cloned(),
        bits,
        im_labels,
        ofdm_labels,
    })
}

/// Reusable receive chain with known channel response.
#[derive(Clone, Debug)]
pub struct Receiver {
    cfg: ModemConfig,
    bins: BinIndexSet,
    plan: DftPlan,
    lut: SuperpositionLut,
    map: ExtractionMap,
    response: Vec<Complex64>,
    /// Frame energy `sum |X|^2` when it does not depend on the data.
    fixed_energy: Option<f64>,
    /// Frame energies the hybrid receiver tests when it does.
    energy_candidates: Vec<f64>,
    /// `|H|^2` at each extracted position; post-ZF noise scales with its inverse.
    weights: Vec<f64>,
}

impl Receiver {
    /// `response` is the channel's frequency response over `LN` bins; `None`
    /// means a flat unit channel.
    pub fn new(cfg: ModemConfig, response: Option<Vec<Complex64>>) -> Result<Self> {
        cfg.validate()?;
        let bins = cfg.bins()?;
        let total = bins.total_bins();
        let response = response.unwrap_or_else(|| vec![Complex64::new(1.0, 0.0); total]);
        if response.len() != total {
            return Err(Error::Config(format!(
                "channel response has {} bins, expected {total}",
                response.len()
            )));
        }
        for sigma in bins.positive_bins() {
            let magnitude = response[sigma].norm();
            if magnitude < SINGULAR_CHANNEL {
                return Err(Error::SingularChannel {
                    bin: sigma,
                    magnitude,
                });
            }
        }
        let pair = cfg.pair;
        let fixed_energy = match cfg.scheme {
            Scheme::Dco | Scheme::Aco => Some(cfg.omega() as f64 * pair.r2 * pair.r2),
            Scheme::DcoIm | Scheme::AcoIm => Some(cfg.kappa as f64 * pair.r1() * pair.r1()),
            Scheme::HybridAco => None,
        };
        let lut = build_lut(&pair)?;
        let energy_candidates = if fixed_energy.is_none() {
            hybrid_energy_candidates(&cfg, &lut)
        } else {
            Vec::new()
        };
        let map = ExtractionMap::for_config(&cfg);
        let weights = map.gammas.iter().map(|&g| response[g].norm_sqr()).collect();
        Ok(Self {
            plan: DftPlan::new(total)?,
            weights,
            lut,
            energy_candidates,
            map,
            bins,
            response,
            fixed_energy,
            cfg,
        })
    }

    pub fn config(&self) -> &ModemConfig {
        &self.cfg
    }

    pub fn lut(&self) -> &SuperpositionLut {
        &self.lut
    }

    /// Transform, equalize and extract: the per-position values `Y_dot`.
    pub fn extract_values(&self, y: &[f64]) -> Result<Vec<Complex64>> {
        if y.len() != self.bins.total_bins() {
            return Err(Error::Domain(format!(
                "received block has {} samples, expected {}",
                y.len(),
                self.bins.total_bins()
            )));
        }
        let spectrum = self.plan.forward_real(y);
        let equalized = equalize_zf(&spectrum, &self.response, &self.bins)?;
        Ok(extract(&equalized, &self.map))
    }

    pub fn receive(&self, y: &[f64]) -> Result<DemodResult> {
        let values = self.extract_values(y)?;
        let sap_hat = self
            .cfg
            .scheme
            .has_im_branch()
            .then(|| detect_sap_energy(&values, self.cfg.kappa));
        let half_len = self.bins.total_bins() as f64 / 2.0;

        if let Some(energy) = self.fixed_energy {
            let scaled = rescale(&values, (half_len / energy).sqrt());
            return demodulate(&scaled, sap_hat.as_ref(), &self.cfg, &self.lut);
        }

        let sap = sap_hat.as_ref().expect("hybrid has an activation pattern");
        let mut best: Option<(f64, DemodResult)> = None;
        let consider = |energy: f64, best: &mut Option<(f64, DemodResult)>| -> Result<()> {
            let scale = (half_len / energy).sqrt();
            let result = demodulate(&rescale(&values, scale), Some(sap), &self.cfg, &self.lut)?;
            let points = self.decided_points(&result, sap)?;
            let cost: f64 = values
                .iter()
                .zip(&points)
                .zip(&self.weights)
                .map(|((y, x), w)| w * (y - x * scale).norm_sqr())
                .sum();
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                *best = Some((cost, result));
            }
            Ok(())
        };
        for &energy in &self.energy_candidates {
            consider(energy, &mut best)?;
        }
        let (_, chosen) = best.clone().expect("at least one candidate");
        // Candidates may be a grid; the chosen decisions pin the energy exactly.
        let decided = self.frame_energy(&self.decided_points(&chosen, sap)?);
        consider(decided, &mut best)?;
        Ok(best.expect("at least one candidate").1)
    }

    /// Frame values implied by a set of decisions, indexed by `zeta`.
    fn decided_points(&self, result: &DemodResult, sap: &Sap) -> Result<Vec<Complex64>> {
        let pair = &self.cfg.pair;
        let mut points = result
            .ofdm_labels
            .iter()
            .map(|&x2| psk_point(x2, pair.m2, pair.r2))
            .collect::<Result<Vec<_>>>()?;
        for (&zeta, &x1) in sap.indices().iter().zip(&result.im_labels) {
            points[zeta] += psk_point(x1, pair.m1, pair.r1())?;
        }
        Ok(points)
    }

    fn frame_energy(&self, points: &[Complex64]) -> f64 {
        points.iter().map(|p| p.norm_sqr()).sum()
    }
}

/// Possible values of `sum |X|^2` for a hybrid frame: `Omega - kappa`
/// ring-P2 points plus `kappa` LUT points. Falls back to an even grid over
/// the feasible range when the exact set is too large to search.
fn hybrid_energy_candidates(cfg: &ModemConfig, lut: &SuperpositionLut) -> Vec<f64> {
    const TOL: f64 = 1e-9;
    let dedup = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < TOL);
    };
    let mut per_bin: Vec<f64> = lut.entries().iter().map(|e| e.point.norm_sqr()).collect();
    dedup(&mut per_bin);
    let base = (cfg.omega() - cfg.kappa) as f64 * cfg.pair.r2.powi(2);
    let mut sums = vec![base];
    for _ in 0..cfg.kappa {
        if sums.len() > MAX_EXACT_ENERGIES {
            break;
        }
        let mut next: Vec<f64> = sums
            .iter()
            .flat_map(|s| per_bin.iter().map(move |v| s + v))
            .collect();
        dedup(&mut next);
        sums = next;
    }
    if sums.len() <= ENERGY_GRID_POINTS {
        return sums;
    }
    let lo = base + cfg.kappa as f64 * per_bin[0];
    let hi = base + cfg.kappa as f64 * per_bin[per_bin.len() - 1];
    (0..ENERGY_GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (ENERGY_GRID_POINTS - 1) as f64)
        .collect()
}

fn rescale(values: &[Complex64], scale: f64) -> Vec<Complex64> {
    values.iter().map(|v| v / scale).collect()
}

/// One-shot receive over a known channel response.
pub fn receive_symbol(
    y: &[f64],
    cfg: &ModemConfig,
    response: Option<Vec<Complex64>>,
) -> Result<DemodResult> {
    Receiver::new(cfg.clone(), response)?.receive(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transmitter::{assemble_frame, Transmitter};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zf_identity_and_inverse() {
        let bins = BinIndexSet::new(8, 2).unwrap();
        let y: Vec<Complex64> = (0..16).map(|i| c(i as f64, 1.0)).collect();
        let ones = vec![c(1.0, 0.0); 16];
        assert_eq!(equalize_zf(&y, &ones, &bins).unwrap(), y);
        let h: Vec<Complex64> = (0..16).map(|i| c(0.5, 0.1 * i as f64)).collect();
        let x: Vec<Complex64> = (0..16).map(|i| c(1.0, -(i as f64))).collect();
        let hy: Vec<Complex64> = h.iter().zip(&x).map(|(a, b)| a * b).collect();
        let eq = equalize_zf(&hy, &h, &bins).unwrap();
        for s in bins.positive_bins() {
            assert!((eq[s] - x[s]).norm() < 1e-12);
        }
    }

    #[test]
    fn zf_rejects_null() {
        let bins = BinIndexSet::new(8, 2).unwrap();
        let mut h = vec![c(1.0, 0.0); 16];
        h[2] = c(0.0, 0.0);
        assert!(matches!(
            equalize_zf(&[c(1.0, 0.0); 16], &h, &bins),
            Err(Error::SingularChannel { bin: 2, .. })
        ));
    }

    #[test]
    fn energy_detector_ties_and_full() {
        let v = [c(1.0, 0.0), c(2.0, 0.0), c(0.0, 2.0), c(0.5, 0.0)];
        assert_eq!(detect_sap_energy(&v, 1).indices(), &[1]);
        assert_eq!(detect_sap_energy(&v, 2).indices(), &[1, 2]);
        assert_eq!(detect_sap_energy(&v, 4).indices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn dco_extraction_passthrough() {
        let cfg = ModemConfig::new(Scheme::Dco, 16, 2, 4, 4).unwrap();
        let map = ExtractionMap::for_config(&cfg);
        assert_eq!(map.gain, 1.0);
        let eq: Vec<Complex64> = (0..32).map(|i| c(i as f64, 0.0)).collect();
        let vals = extract(&eq, &map);
        assert_eq!(vals.len(), 7);
        assert_eq!(vals[0], c(1.0, 0.0));
    }

    #[test]
    fn aco_extraction_undoes_clipping() {
        let cfg = ModemConfig::new(Scheme::HybridAco, 32, 4, 4, 4).unwrap();
        let tx = Transmitter::new(cfg.clone()).unwrap();
        let rx = Receiver::new(cfg.clone(), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let bits: Vec<bool> = (0..32).map(|_| rng.random()).collect();
            let frame = assemble_frame(&bits, &cfg).unwrap();
            let sym = tx.transmit_frame(&frame).unwrap();
            let vals = rx.extract_values(&sym.unipolar).unwrap();
            for (z, v) in vals.iter().enumerate() {
                let sent = frame.combined[cfg.gamma(z)] * sym.scale;
                assert!((v - sent).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn hybrid_loopback() {
        let cfg = ModemConfig::new(Scheme::HybridAco, 32, 4, 4, 4).unwrap();
        let tx = Transmitter::new(cfg.clone()).unwrap();
        let rx = Receiver::new(cfg, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let bits: Vec<bool> = (0..32).map(|_| rng.random()).collect();
            let sym = tx.transmit(&bits).unwrap();
            assert_eq!(rx.receive(&sym.unipolar).unwrap().bits, bits);
        }
    }

    #[test]
    fn wrong_block_length() {
        let cfg = ModemConfig::new(Scheme::Aco, 16, 2, 4, 4).unwrap();
        assert!(receive_symbol(&[0.0; 16], &cfg, None).is_err());
    }
}
