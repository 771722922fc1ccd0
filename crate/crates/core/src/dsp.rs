//! Spectral kernels shared by every pipeline stage.
//!
//! Convention: the forward transform is unscaled,
//! `X[k] = sum_n x[n] exp(-2 pi j k n / len)`, and the inverse carries the
//! `1/len` factor. Clipping-halving and the extraction gain are stated
//! under this convention.

use std::cell::RefCell;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

fn check_len(len: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::Config("transform length must be positive".into()));
    }
    if !len.is_power_of_two() {
        return Err(Error::Config(format!(
            "transform length {len} is not a power of two"
        )));
    }
    Ok(())
}

/// Pre-planned forward and inverse transforms of one length.
///
/// Cheap to clone; the underlying plans are shared.
#[derive(Clone)]
pub struct DftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DftPlan").field("len", &self.len).finish()
    }
}

impl DftPlan {
    pub fn new(len: usize) -> Result<Self> {
        check_len(len)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        self.forward.process(buf);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        self.inverse.process(buf);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectrum.to_vec();
        self.inverse_in_place(&mut buf);
        buf
    }

    /// Forward transform of a real sequence.
    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real(&self, spectrum: &[Complex64]) -> Vec<f64> {
        self.inverse(spectrum).into_iter().map(|v| v.re).collect()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform(x: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    check_len(x.len())?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Domain("non-finite sample in transform input".into()));
    }
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(x.len())
        } else {
            p.plan_fft_forward(x.len())
        }
    });
    let mut buf = x.to_vec();
    plan.process(&mut buf);
    if inverse {
        let scale = 1.0 / x.len() as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(buf)
}

/// Unscaled forward DFT.
pub fn forward_dft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    transform(x, false)
}

/// Inverse DFT with the `1/len` factor.
pub fn inverse_dft(spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
    transform(spectrum, true)
}

/// Bin bookkeeping for an `N`-subcarrier symbol oversampled by `L`.
///
/// Positive data bins are `1..N/2` and their Hermitian mirrors sit at
/// `LN-N/2+1..LN`. Everything else (DC, the band between, Nyquist) is a
/// zero-padding bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinIndexSet {
    n: usize,
    total: usize,
}

impl BinIndexSet {
    pub fn new(n: usize, oversampling: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "subcarrier count {n} must be a power of two >= 4"
            )));
        }
        if oversampling == 0 {
            return Err(Error::Config("oversampling factor must be positive".into()));
        }
        let total = n * oversampling;
        check_len(total)?;
        Ok(Self { n, total })
    }

    pub const DC: usize = 0;

    pub fn subcarriers(&self) -> usize {
        self.n
    }

    pub fn total_bins(&self) -> usize {
        self.total
    }

    /// The positive-frequency bins `{1, .., N/2-1}`.
    pub fn positive_bins(&self) -> Range<usize> {
        1..self.n / 2
    }

    /// The negative-frequency bins `{LN-N/2+1, .., LN-1}`.
    pub fn negative_bins(&self) -> Range<usize> {
        self.total - self.n / 2 + 1..self.total
    }

    /// Bin holding the conjugate of `bin`.
    pub fn mirror(&self, bin: usize) -> usize {
        (self.total - bin) % self.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn impulse_transforms_to_ones() {
        let mut x = vec![c(0.0); 8];
        x[0] = c(1.0);
        let spec = forward_dft(&x).unwrap();
        for v in spec {
            assert!((v - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn ones_transform_to_dc() {
        let spec = forward_dft(&[c(1.0); 8]).unwrap();
        assert!((spec[0] - c(8.0)).norm() < 1e-12);
        assert!(spec[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn dc_inverse_is_constant() {
        let mut spec = vec![c(0.0); 4];
        spec[0] = c(1.0);
        let x = inverse_dft(&spec).unwrap();
        assert!(x.iter().all(|v| (v - c(0.25)).norm() < 1e-15));
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(matches!(forward_dft(&[]), Err(Error::Config(_))));
        assert!(matches!(forward_dft(&[c(1.0); 6]), Err(Error::Config(_))));
        assert!(DftPlan::new(12).is_err());
    }

    #[test]
    fn bin_sets_are_disjoint_mirrors() {
        let bins = BinIndexSet::new(32, 4).unwrap();
        assert_eq!(bins.positive_bins(), 1..16);
        assert_eq!(bins.negative_bins(), 113..128);
        for b in bins.positive_bins() {
            let m = bins.mirror(b);
            assert!(bins.negative_bins().contains(&m));
        }
        assert_eq!(bins.mirror(0), 0);
    }
}
