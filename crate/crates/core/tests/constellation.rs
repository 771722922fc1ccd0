use std::f64::consts::PI;

use oofdm_core::constellation::*;
use oofdm_core::Complex64;
use proptest::prelude::*;

fn brute_lut(y: Complex64, lut: &SuperpositionLut) -> usize {
    let d: Vec<f64> = lut
        .entries()
        .iter()
        .map(|e| (y - e.point).norm_sqr())
        .collect();
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    d.iter().position(|&v| v == min).unwrap()
}

#[test]
fn qpsk_lut_geometry() {
    let pair = ConstellationPair::default();
    assert_eq!(pair.r1(), 3.0);
    let lut = build_lut(&pair).unwrap();
    // Closest pair: e.g. +2 and 3 - j or 3 + j, at sqrt(2).
    assert!((lut.min_distance() - 2f64.sqrt()).abs() < 1e-12);
    let magnitudes: Vec<f64> = lut.entries().iter().map(|e| e.point.norm()).collect();
    for m in magnitudes {
        assert!(
            [2.0, 10f64.sqrt(), 4.0]
                .iter()
                .any(|v| (m - v).abs() < 1e-12),
            "{m}"
        );
    }
}

#[test]
fn origin_tie_goes_to_first_entry() {
    let lut = build_lut(&ConstellationPair::default()).unwrap();
    let first = brute_lut(Complex64::new(0.0, 0.0), &lut);
    let e = lut.entries()[first];
    assert_eq!((e.x1, e.x2), detect_lut(Complex64::new(0.0, 0.0), &lut));
    assert_eq!(e.point, Complex64::new(-2.0, 0.0));
}

proptest! {
    #[test]
    fn lut_detector_matches_brute_force(re in -6.0..6.0f64, im in -6.0..6.0f64, m1_log in 1u32..5, m2_log in 1u32..5) {
        let pair = ConstellationPair::new(1 << m1_log, 1 << m2_log);
        let lut = build_lut(&pair).unwrap();
        let y = Complex64::new(re, im);
        let e = lut.entries()[brute_lut(y, &lut)];
        prop_assert_eq!(detect_lut(y, &lut), (e.x1, e.x2));
    }

    #[test]
    fn lut_noise_margin(x1 in 0usize..4, x2 in 0usize..4, r in 0.0..0.7f64, phi in 0.0..2.0 * PI) {
        // Any perturbation below half the minimum distance keeps the decision.
        let lut = build_lut(&ConstellationPair::default()).unwrap();
        let y = lut.get(x1, x2).point + Complex64::from_polar(r * 2f64.sqrt() / 2.0 / 0.7 * 0.999, phi);
        prop_assert_eq!(detect_lut(y, &lut), (x1, x2));
    }

    #[test]
    fn psk_round_trip(m_log in 1u32..9, label in any::<usize>(), radius in 0.1..10.0f64, r in 0.0..1.0f64, phi in 0.0..2.0 * PI) {
        let m = 1usize << m_log;
        let label = label % m;
        let p = psk_point(label, m, radius).unwrap();
        prop_assert!((p.norm() - radius).abs() < 1e-9);
        let margin = radius * (PI / m as f64).sin() * 0.999;
        let y = p + Complex64::from_polar(r * margin, phi);
        prop_assert_eq!(detect_psk(y, m, radius).unwrap(), label);
    }

    #[test]
    fn gray_is_a_permutation(m_log in 1u32..12) {
        let m = 1usize << m_log;
        let mut seen = vec![false; m];
        for i in 0..m {
            let g = gray(i);
            prop_assert!(g < m && !seen[g]);
            seen[g] = true;
            prop_assert_eq!(inverse_gray(g), i);
        }
    }
}
