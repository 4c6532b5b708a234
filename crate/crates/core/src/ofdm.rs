//! DFT conventions and rate metrics.
//!
//! The forward transform is unnormalized (`Σ_k h_k e^{-j2πnk/N}`) and the
//! inverse carries the `1/N`, so `Σ_n |H_n|² = N ‖h‖²`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::allocation::PowerAllocation;
use crate::error::{Error, Result};

/// Planned forward/inverse transforms of one size.
#[derive(Clone)]
pub struct Dft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Dft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dft").field("len", &self.len).finish()
    }
}

impl Dft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unnormalized forward transform.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        self.forward.process(buf);
    }

    /// In-place inverse transform including the `1/N` factor.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        self.inverse.process(buf);
        let s = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|x| *x *= s);
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(x.len())?;
        let mut buf = x.to_vec();
        self.forward_in_place(&mut buf);
        Ok(buf)
    }

    pub fn inverse(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(x.len())?;
        let mut buf = x.to_vec();
        self.inverse_in_place(&mut buf);
        Ok(buf)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                actual: len,
            });
        }
        Ok(())
    }
}

/// Per-subcarrier gains `f_n^H h`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub gains: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn from_time(dft: &Dft, h: &[Complex64]) -> Result<Self> {
        Ok(Self {
            gains: dft.forward(h)?,
        })
    }

    pub fn power_gains(&self) -> Vec<f64> {
        self.gains.iter().map(|g| g.norm_sqr()).collect()
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

pub fn frequency_response(h: &[Complex64]) -> Result<FrequencyResponse> {
    if h.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: 0,
        });
    }
    FrequencyResponse::from_time(&Dft::new(h.len()), h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Bits per second per hertz, CP overhead included.
    pub rate: f64,
    pub snr: Vec<f64>,
    pub cp_penalty: f64,
}

/// `(1/(N+N_CP)) Σ_n log2(1 + g_n p_n / σ²)` on power gains `g_n = |H_n|²`.
pub fn rate_from_power_gains(gains: &[f64], powers: &[f64], noise: f64, cp_length: usize) -> f64 {
    debug_assert_eq!(gains.len(), powers.len());
    let sum: f64 = gains
        .iter()
        .zip(powers)
        .map(|(g, p)| (g * p / noise).ln_1p())
        .sum();
    sum / std::f64::consts::LN_2 / (gains.len() + cp_length) as f64
}

pub fn achievable_rate(
    freq: &FrequencyResponse,
    alloc: &PowerAllocation,
    noise: f64,
    cp_length: usize,
) -> Result<RateReport> {
    let n = freq.len();
    if alloc.powers.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: alloc.powers.len(),
        });
    }
    if let Some((index, &value)) = alloc.powers.iter().enumerate().find(|(_, p)| !(**p >= 0.0)) {
        return Err(Error::NegativePower { index, value });
    }
    let snr: Vec<f64> = freq
        .gains
        .iter()
        .zip(&alloc.powers)
        .map(|(g, p)| g.norm_sqr() * p / noise)
        .collect();
    let cp_penalty = n as f64 / (n + cp_length) as f64;
    let rate = snr.iter().map(|s| s.ln_1p()).sum::<f64>()
        / std::f64::consts::LN_2
        / (n + cp_length) as f64;
    Ok(RateReport {
        rate,
        snr,
        cp_penalty,
    })
}

/// Rate discounted by the training fraction, clamped at zero once `τ ≥ T`.
pub fn effective_rate(rate: f64, training: f64, coherence: f64) -> f64 {
    assert!(coherence > 0.0, "coherence time must be positive");
    assert!(training >= 0.0, "training length must be nonnegative");
    (1.0 - training / coherence).max(0.0) * rate
}
