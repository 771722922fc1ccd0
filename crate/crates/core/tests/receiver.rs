use oofdm_core::channel::{apply_channel, channel_frequency_response};
use oofdm_core::constellation::build_lut;
use oofdm_core::mapping::{bit_budget, int_to_bits};
use oofdm_core::receiver::*;
use oofdm_core::transmitter::*;
use oofdm_core::{Complex64, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random()).collect()
}

fn values_of(frame: &FrequencyFrame, cfg: &ModemConfig) -> Vec<Complex64> {
    cfg.gammas().iter().map(|&g| frame.combined[g]).collect()
}

#[test]
fn hybrid_round_trip_ten_thousand_symbols() {
    let cfg = ModemConfig::new(Scheme::HybridAco, 32, 4, 4, 4).unwrap();
    let tx = Transmitter::new(cfg.clone()).unwrap();
    let rx = Receiver::new(cfg, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10_000 {
        let bits = random_bits(&mut rng, 32);
        let s = tx.transmit(&bits).unwrap();
        assert_eq!(rx.receive(&s.unipolar).unwrap().bits, bits);
    }
}

#[test]
fn energy_detector_recovers_every_pattern_at_n16() {
    // Omega = 4, kappa = 3, lambda1 = 2: every code word with every
    // combination of ring labels.
    let cfg = ModemConfig::new(Scheme::HybridAco, 16, 4, 4, 4).unwrap();
    let budget = cfg.bit_budget().unwrap();
    assert_eq!((cfg.omega(), cfg.kappa, budget.lambda1), (4, 3, 2));
    let tx = Transmitter::new(cfg.clone()).unwrap();
    let rx = Receiver::new(cfg.clone(), None).unwrap();
    let payload = budget.lambda2 + budget.lambda3;
    for code in 0..4u128 {
        for rest in 0..1u128 << payload {
            let mut bits = int_to_bits(code, 2);
            bits.extend(int_to_bits(rest, payload));
            let frame = assemble_frame(&bits, &cfg).unwrap();
            let s = tx.transmit_frame(&frame).unwrap();
            let values = rx.extract_values(&s.unipolar).unwrap();
            assert_eq!(Some(detect_sap_energy(&values, 3)), frame.sap);
            assert_eq!(rx.receive(&s.unipolar).unwrap().bits, bits);
        }
    }
}

#[test]
fn aco_extraction_returns_scaled_frame() {
    for scheme in [Scheme::Aco, Scheme::AcoIm, Scheme::HybridAco] {
        let cfg = ModemConfig::new(scheme, 32, 4, 4, 4).unwrap();
        let tx = Transmitter::new(cfg.clone()).unwrap();
        let rx = Receiver::new(cfg.clone(), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bits = random_bits(&mut rng, cfg.bit_budget().unwrap().total());
        let frame = assemble_frame(&bits, &cfg).unwrap();
        let s = tx.transmit_frame(&frame).unwrap();
        let got = rx.extract_values(&s.clipped.clone().unwrap()).unwrap();
        for (y, x) in got.iter().zip(values_of(&frame, &cfg)) {
            assert!((y - x * s.scale).norm() < 1e-9);
        }
    }
}

#[test]
fn dispersive_loopback_with_full_prefix() {
    let taps = vec![0.5, 0.25, 0.125, 0.0625, 0.0625];
    for scheme in Scheme::ALL {
        let cfg = ModemConfig::new(scheme, 32, 4, 4, 4).unwrap();
        let h = channel_frequency_response(&taps, cfg.total_bins()).unwrap();
        let tx = Transmitter::new(cfg.clone()).unwrap();
        let rx = Receiver::new(cfg.clone(), Some(h)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let bits = random_bits(&mut rng, cfg.bit_budget().unwrap().total());
            let y = apply_channel(&tx.transmit(&bits).unwrap().unipolar, &taps, taps.len() - 1);
            assert_eq!(rx.receive(&y).unwrap().bits, bits, "{scheme}");
        }
    }
}

#[test]
fn zero_forcing() {
    let bins = oofdm_core::dsp::BinIndexSet::new(8, 1).unwrap();
    let x: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, 1.0)).collect();
    let h: Vec<Complex64> = (0..8)
        .map(|i| Complex64::from_polar(0.5 + i as f64, i as f64))
        .collect();
    let y: Vec<Complex64> = x.iter().zip(&h).map(|(a, b)| a * b).collect();
    let eq = equalize_zf(&y, &h, &bins).unwrap();
    for sigma in bins.positive_bins() {
        assert!((eq[sigma] - x[sigma]).norm() < 1e-12);
    }
    let mut null = h.clone();
    null[2] = Complex64::new(0.0, 0.0);
    assert!(matches!(
        equalize_zf(&y, &null, &bins),
        Err(Error::SingularChannel { bin: 2, .. })
    ));
    let cfg = ModemConfig::new(Scheme::HybridAco, 8, 1, 4, 4).unwrap();
    assert!(Receiver::new(cfg, Some(null)).is_err());
}

#[test]
fn energy_detector_rules() {
    let v = [1.0, 2.0, 2.0, 0.5].map(|r| Complex64::new(r, 0.0));
    assert_eq!(detect_sap_energy(&v, 1).indices(), &[1]);
    assert_eq!(detect_sap_energy(&v, 3).indices(), &[0, 1, 2]);
    assert_eq!(detect_sap_energy(&v, 4).indices(), &[0, 1, 2, 3]);
}

proptest! {
    #[test]
    fn demodulate_inverts_bit_parsing(seed in any::<u64>(), scheme_idx in 0usize..5, n_log in 3u32..7) {
        let scheme = Scheme::ALL[scheme_idx];
        let cfg = ModemConfig::new(scheme, 1 << n_log, 1, 4, 4).unwrap();
        let lut = build_lut(&cfg.pair).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = random_bits(&mut rng, cfg.bit_budget().unwrap().total());
        let frame = assemble_frame(&bits, &cfg).unwrap();
        let values = values_of(&frame, &cfg);
        let sap = scheme.has_im_branch().then(|| detect_sap_energy(&values, cfg.kappa));
        prop_assert_eq!(sap.clone(), frame.sap.clone());
        let out = demodulate(&values, sap.as_ref(), &cfg, &lut).unwrap();
        prop_assert_eq!(out.bits, bits);
    }

    #[test]
    fn corrupting_one_active_bin_stays_local(seed in any::<u64>(), which in any::<usize>(), entry in 0usize..16) {
        let cfg = ModemConfig::new(Scheme::HybridAco, 32, 4, 4, 4).unwrap();
        let lut = build_lut(&cfg.pair).unwrap();
        let budget = bit_budget(&cfg.im_config().unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = random_bits(&mut rng, 32);
        let frame = assemble_frame(&bits, &cfg).unwrap();
        let sap = frame.sap.clone().unwrap();
        let k = which % cfg.kappa;
        let zeta = sap.indices()[k];
        let mut values = values_of(&frame, &cfg);
        // Move the bin onto another table point; magnitude stays >= 2, so the
        // activation pattern is still detected.
        values[zeta] = lut.entries()[entry].point;
        let detected = detect_sap_energy(&values, cfg.kappa);
        prop_assert_eq!(&detected, &sap);
        let out = demodulate(&values, Some(&detected), &cfg, &lut).unwrap();
        let im_bits = budget.lambda1 + 2 * k..budget.lambda1 + 2 * k + 2;
        let ofdm_start = budget.lambda1 + budget.lambda2 + 2 * zeta;
        for (i, (a, b)) in bits.iter().zip(&out.bits).enumerate() {
            if a != b {
                prop_assert!(im_bits.contains(&i) || (ofdm_start..ofdm_start + 2).contains(&i), "bit {} flipped", i);
            }
        }
    }
}
