//! Gray-labelled PSK rings and the superposition look-up table.
//!
//! The O-OFDM branch uses a ring of radius `r2`; the index-modulated branch
//! uses a ring of radius `r1 = r2 + d_min`, so that a subcarrier carrying
//! both is distinguishable from one carrying only the O-OFDM point.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

pub fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

pub fn inverse_gray(mut g: usize) -> usize {
    let mut i = 0;
    while g != 0 {
        i ^= g;
        g >>= 1;
    }
    i
}

/// `radius * exp(2 pi j position / m)`, exact at multiples of a quarter turn.
fn ring_point(position: usize, m: usize, radius: f64) -> Complex64 {
    let position = position % m;
    if (4 * position).is_multiple_of(m) {
        return match 4 * position / m {
            0 => Complex64::new(radius, 0.0),
            1 => Complex64::new(0.0, radius),
            2 => Complex64::new(-radius, 0.0),
            _ => Complex64::new(0.0, -radius),
        };
    }
    Complex64::from_polar(radius, 2.0 * PI * position as f64 / m as f64)
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::Domain(format!(
            "PSK order {m} is not a power of two >= 2"
        )));
    }
    Ok(())
}

/// Point carrying label `symbol_index` on an `m`-PSK ring.
///
/// Angular position `p` carries label `gray(p)`, so neighbours differ in one
/// bit. For QPSK the labels 0..4 land on `+r, +rj, -rj, -r`.
pub fn psk_point(symbol_index: usize, m: usize, radius: f64) -> Result<Complex64> {
    check_m(m)?;
    if symbol_index >= m {
        return Err(Error::Domain(format!(
            "symbol index {symbol_index} out of range for {m}-PSK"
        )));
    }
    Ok(ring_point(inverse_gray(symbol_index), m, radius))
}

/// All `m` ring points indexed by label.
pub fn psk_ring(m: usize, radius: f64) -> Result<Vec<Complex64>> {
    (0..m).map(|i| psk_point(i, m, radius)).collect()
}

/// Nearest ring point by label; ties resolve to the lowest label.
pub fn detect_psk(y: Complex64, m: usize, radius: f64) -> Result<usize> {
    check_m(m)?;
    Ok(nearest_psk(y, m, radius))
}

pub(crate) fn nearest_psk(y: Complex64, m: usize, radius: f64) -> usize {
    // The nearest point is one of the two positions bracketing arg(y); test
    // both so exact boundary ties follow the label order.
    let step = 2.0 * PI / m as f64;
    let angle = y.arg().rem_euclid(2.0 * PI);
    let lower = ((angle / step).floor() as usize) % m;
    let upper = (lower + 1) % m;
    let point = |p: usize| ring_point(p, m, radius);
    let (dl, du) = ((y - point(lower)).norm_sqr(), (y - point(upper)).norm_sqr());
    let (ll, lu) = (gray(lower), gray(upper));
    if dl < du || (dl == du && ll < lu) {
        ll
    } else {
        lu
    }
}

/// Radii and orders of the two rings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstellationPair {
    pub m1: usize,
    pub m2: usize,
    /// Radius of the O-OFDM ring.
    pub r2: f64,
    /// Gap added to `r2` to obtain the index-modulation ring radius.
    pub d_min: f64,
}

impl Default for ConstellationPair {
    fn default() -> Self {
        Self {
            m1: 4,
            m2: 4,
            r2: 1.0,
            d_min: 2.0,
        }
    }
}

impl ConstellationPair {
    pub fn new(m1: usize, m2: usize) -> Self {
        Self {
            m1,
            m2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_m(self.m1)?;
        check_m(self.m2)?;
        if !(self.r2 > 0.0 && self.r2.is_finite()) {
            return Err(Error::Domain(format!("r2 = {} must be positive", self.r2)));
        }
        if !(self.d_min > 0.0 && self.d_min.is_finite()) {
            return Err(Error::Domain(format!(
                "d_min = {} must be positive",
                self.d_min
            )));
        }
        Ok(())
    }

    /// Radius of the index-modulation ring.
    pub fn r1(&self) -> f64 {
        self.r2 + self.d_min
    }

    pub fn p1(&self) -> Result<Vec<Complex64>> {
        psk_ring(self.m1, self.r1())
    }

    pub fn p2(&self) -> Result<Vec<Complex64>> {
        psk_ring(self.m2, self.r2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LutEntry {
    pub x1: usize,
    pub x2: usize,
    pub point: Complex64,
}

/// Every sum `P1[x1] + P2[x2]`, stored row-major with `x2` as the row.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperpositionLut {
    m1: usize,
    entries: Vec<LutEntry>,
}

impl SuperpositionLut {
    pub fn entries(&self) -> &[LutEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x1: usize, x2: usize) -> &LutEntry {
        &self.entries[x2 * self.m1 + x1]
    }

    /// Smallest distance between two distinct entries.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.entries.iter().enumerate() {
            for b in &self.entries[i + 1..] {
                best = best.min((a.point - b.point).norm());
            }
        }
        best
    }
}

pub fn build_lut(pair: &ConstellationPair) -> Result<SuperpositionLut> {
    pair.validate()?;
    let p1 = pair.p1()?;
    let p2 = pair.p2()?;
    let entries = p2
        .iter()
        .enumerate()
        .flat_map(|(x2, &b)| {
            p1.iter().enumerate().map(move |(x1, &a)| LutEntry {
                x1,
                x2,
                point: a + b,
            })
        })
        .collect();
    Ok(SuperpositionLut {
        m1: pair.m1,
        entries,
    })
}

/// Entry closest to `y`; the first entry in table order wins ties.
pub fn detect_lut(y: Complex64, lut: &SuperpositionLut) -> (usize, usize) {
    let mut best = &lut.entries[0];
    let mut best_d = (y - best.point).norm_sqr();
    for e in &lut.entries[1..] {
        let d = (y - e.point).norm_sqr();
        if d < best_d {
            best = e;
            best_d = d;
        }
    }
    (best.x1, best.x2)
}
