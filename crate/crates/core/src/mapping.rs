//! Bit budget per symbol and the bits <-> subcarrier activation pattern code.
//!
//! The activation code book is the first `2^lambda1` `kappa`-subsets of the
//! `Omega` eligible subcarriers, taken in lexicographic order of the sorted
//! index sets (combinadic ranking).

use crate::{Error, Result};

/// Parameters of the index-modulation branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImConfig {
    /// Subcarriers eligible for index modulation.
    pub omega: usize,
    /// Active subcarriers per symbol.
    pub kappa: usize,
    /// Alphabet size on the active (index-modulated) subcarriers.
    pub m1: usize,
    /// Alphabet size of the plain O-OFDM branch.
    pub m2: usize,
}

impl ImConfig {
    pub fn new(omega: usize, kappa: usize, m1: usize, m2: usize) -> Result<Self> {
        let cfg = Self {
            omega,
            kappa,
            m1,
            m2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega == 0 {
            return Err(Error::Domain("omega must be positive".into()));
        }
        if self.kappa == 0 || self.kappa > self.omega {
            return Err(Error::Domain(format!(
                "kappa = {} outside [1, omega = {}]",
                self.kappa, self.omega
            )));
        }
        for (name, m) in [("m1", self.m1), ("m2", self.m2)] {
            if m < 2 || !m.is_power_of_two() {
                return Err(Error::Domain(format!(
                    "{name} = {m} is not a power of two >= 2"
                )));
            }
        }
        Ok(())
    }
}

/// Bits carried per symbol by each branch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BitBudget {
    /// Bits selecting the activation pattern.
    pub lambda1: usize,
    /// Bits on the active subcarriers' scaled alphabet.
    pub lambda2: usize,
    /// Bits on the O-OFDM branch.
    pub lambda3: usize,
}

impl BitBudget {
    pub fn total(&self) -> usize {
        self.lambda1 + self.lambda2 + self.lambda3
    }
}

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc is C(n-k+i-1, i-1) here; the product is divisible by i.
        acc = acc.checked_mul((n - k + i) as u128)? / i as u128;
    }
    Some(acc)
}

fn floor_log2(v: u128) -> usize {
    debug_assert!(v > 0);
    (127 - v.leading_zeros()) as usize
}

pub(crate) fn log2_exact(m: usize) -> usize {
    debug_assert!(m.is_power_of_two());
    m.trailing_zeros() as usize
}

fn lambda1(omega: usize, kappa: usize) -> Result<usize> {
    let c = binomial(omega, kappa).ok_or_else(|| {
        Error::Domain(format!("C({omega}, {kappa}) overflows 128-bit arithmetic"))
    })?;
    Ok(floor_log2(c))
}

/// Bits per symbol of the full superposed frame.
pub fn bit_budget(cfg: &ImConfig) -> Result<BitBudget> {
    cfg.validate()?;
    Ok(BitBudget {
        lambda1: lambda1(cfg.omega, cfg.kappa)?,
        lambda2: cfg.kappa * log2_exact(cfg.m1),
        lambda3: cfg.omega * log2_exact(cfg.m2),
    })
}

/// Closed-form active-subcarrier count `floor(M1 * Omega / (M1 + 1))`,
/// clamped to `[1, Omega]`.
pub fn kappa_approx(m1: usize, omega: usize) -> usize {
    let k = (m1 * omega) / (m1 + 1);
    k.clamp(1, omega.max(1))
}

/// Exact maximiser of `lambda1 + lambda2` over `kappa`; ties go to the
/// smaller `kappa`.
pub fn kappa_exhaustive(m1: usize, omega: usize) -> Result<usize> {
    if m1 < 2 || !m1.is_power_of_two() || omega == 0 {
        return Err(Error::Domain(format!(
            "invalid (m1 = {m1}, omega = {omega})"
        )));
    }
    let bits_per_symbol = log2_exact(m1);
    let mut best = (1, 0);
    for kappa in 1..=omega {
        let value = lambda1(omega, kappa)? + kappa * bits_per_symbol;
        if kappa == 1 || value > best.1 {
            best = (kappa, value);
        }
    }
    Ok(best.0)
}

/// A subcarrier activation pattern: sorted, distinct, zero-based positions
/// within the `Omega` eligible subcarriers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sap(Vec<usize>);

impl Sap {
    /// Validates a zero-based index set against `omega`.
    pub fn new(indices: Vec<usize>, omega: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "activation pattern {indices:?} is not strictly increasing"
            )));
        }
        if indices.last().is_some_and(|&i| i >= omega) {
            return Err(Error::Domain(format!(
                "activation pattern {indices:?} exceeds omega = {omega}"
            )));
        }
        Ok(Self(indices))
    }

    /// Builds a pattern from 1-based subcarrier labels.
    pub fn from_one_based(labels: &[usize], omega: usize) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::Domain("1-based label 0".into()));
        }
        Self::new(labels.iter().map(|&l| l - 1).collect(), omega)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// Membership mask over `0..omega`.
    pub fn mask(&self, omega: usize) -> Vec<bool> {
        let mut m = vec![false; omega];
        for &i in &self.0 {
            m[i] = true;
        }
        m
    }
}

/// Packs bits MSB-first into an integer.
pub fn bits_to_int(bits: &[bool]) -> u128 {
    assert!(bits.len() <= 128, "at most 128 bits fit the integer");
    bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128)
}

/// Unpacks the low `width` bits of `value`, MSB-first.
pub fn int_to_bits(value: u128, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// The `rank`-th `kappa`-subset of `0..omega` in lexicographic order.
pub fn unrank_subset(mut rank: u128, omega: usize, kappa: usize) -> Result<Sap> {
    let total = binomial(omega, kappa).ok_or_else(|| Error::Domain("binomial overflow".into()))?;
    if kappa > omega || rank >= total {
        return Err(Error::Domain(format!(
            "rank {rank} outside the C({omega}, {kappa}) = {total} subsets"
        )));
    }
    let mut out = Vec::with_capacity(kappa);
    let mut candidate = 0;
    for slot in 0..kappa {
        loop {
            // Subsets whose `slot`-th element is `candidate`.
            let count = binomial(omega - candidate - 1, kappa - slot - 1).unwrap_or(u128::MAX);
            if rank < count {
                out.push(candidate);
                candidate += 1;
                break;
            }
            rank -= count;
            candidate += 1;
        }
    }
    Ok(Sap(out))
}

/// Lexicographic rank of a `kappa`-subset of `0..omega`.
pub fn rank_subset(sap: &Sap, omega: usize) -> Result<u128> {
    let kappa = sap.len();
    let mut rank = 0u128;
    let mut start = 0;
    for (slot, &idx) in sap.indices().iter().enumerate() {
        if idx >= omega {
            return Err(Error::Domain(format!("index {idx} >= omega = {omega}")));
        }
        for skipped in start..idx {
            rank += binomial(omega - skipped - 1, kappa - slot - 1)
                .ok_or_else(|| Error::Domain("binomial overflow".into()))?;
        }
        start = idx + 1;
    }
    Ok(rank)
}

/// Maps `lambda1` bits onto an activation pattern.
pub fn sap_encode(bits: &[bool], cfg: &ImConfig) -> Result<Sap> {
    let budget = bit_budget(cfg)?;
    if bits.len() != budget.lambda1 {
        return Err(Error::BitLength {
            expected: budget.lambda1,
            got: bits.len(),
        });
    }
    unrank_subset(bits_to_int(bits), cfg.omega, cfg.kappa)
}

/// Recovers the `lambda1` bits of a detected pattern.
///
/// Patterns ranked beyond the code book clamp to the last code word.
pub fn sap_decode(sap: &Sap, cfg: &ImConfig) -> Result<Vec<bool>> {
    let budget = bit_budget(cfg)?;
    if sap.len() != cfg.kappa {
        return Err(Error::Domain(format!(
            "pattern has {} indices, expected kappa = {}",
            sap.len(),
            cfg.kappa
        )));
    }
    let sap = Sap::new(sap.indices().to_vec(), cfg.omega)?;
    let rank = rank_subset(&sap, cfg.omega)?;
    let last = (1u128 << budget.lambda1) - 1;
    Ok(int_to_bits(rank.min(last), budget.lambda1))
}
