//! Uplink pilot training and channel estimation.
//!
//! The composite estimator inverts `y = √P X F h + z` by least squares and
//! keeps the first `L_r` taps. The separate estimator sounds `M + 1` DFT
//! reflection patterns and unmixes the direct and cascaded channels.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_gaussian, unit_phasor};
use crate::error::{Error, Result};
use crate::ofdm::Dft;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Frequency-domain pilot with unit total energy and no zero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotVector(Vec<Complex64>);

impl PilotVector {
    pub fn new(x: Vec<Complex64>) -> Result<Self> {
        if let Some(index) = x.iter().position(|v| v.norm_sqr() == 0.0) {
            return Err(Error::ZeroPilotEntry { index });
        }
        let energy: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        if (energy - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "pilot energy must be 1, got {energy}"
            )));
        }
        Ok(Self(x))
    }

    /// `x_n = e^{jθ_n}/√N` with random phases.
    pub fn constant_modulus<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let a = 1.0 / (n as f64).sqrt();
        Self((0..n).map(|_| unit_phasor(rng) * a).collect())
    }

    pub fn flat(n: usize) -> Self {
        Self(vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// LS estimate of one composite channel, truncated to the known order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeEstimate {
    pub slot: usize,
    pub order: usize,
    /// Length `N`; entries past `order` are zero.
    pub taps: Vec<Complex64>,
}

/// Estimated direct channel and cascaded columns, each of length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparateEstimate {
    pub direct: Vec<Complex64>,
    pub cascaded: Vec<Vec<Complex64>>,
}

impl SeparateEstimate {
    /// Zeroes taps beyond the known orders.
    pub fn truncate(&mut self, direct_taps: usize, cascaded_taps: usize) {
        self.direct[direct_taps..].fill(ZERO);
        for col in &mut self.cascaded {
            col[cascaded_taps..].fill(ZERO);
        }
    }
}

/// Pilot, power and noise shared by every training slot of a trial.
#[derive(Debug, Clone)]
pub struct UplinkTraining<'a> {
    pub dft: &'a Dft,
    pub pilot: &'a PilotVector,
    pub pilot_power: f64,
    /// Zero disables the noise draw entirely.
    pub noise: f64,
}

impl UplinkTraining<'_> {
    /// Received frequency-domain samples `√P X F h + z`.
    pub fn observe<R: Rng + ?Sized>(&self, h: &[Complex64], rng: &mut R) -> Vec<Complex64> {
        let mut y = h.to_vec();
        self.dft.forward_in_place(&mut y);
        let amp = self.pilot_power.sqrt();
        for (yn, xn) in y.iter_mut().zip(self.pilot.values()) {
            *yn *= xn * amp;
            if self.noise > 0.0 {
                *yn += complex_gaussian(rng, self.noise);
            }
        }
        y
    }

    /// `(1/(N√P)) F^H X^{-1} y`, truncated to `order` taps.
    pub fn estimate(&self, y: &[Complex64], order: usize, slot: usize) -> CompositeEstimate {
        let mut taps = self.ls_raw(y);
        taps[order..].fill(ZERO);
        CompositeEstimate { slot, order, taps }
    }

    fn ls_raw(&self, y: &[Complex64]) -> Vec<Complex64> {
        let amp = self.pilot_power.sqrt();
        let mut buf: Vec<Complex64> = y
            .iter()
            .zip(self.pilot.values())
            .map(|(yn, xn)| yn / (xn * amp))
            .collect();
        // inverse_in_place applies the 1/N, so F^H/N overall.
        self.dft.inverse_in_place(&mut buf);
        buf
    }
}

pub fn simulate_uplink_training<R: Rng + ?Sized>(
    h: &[Complex64],
    pilot: &PilotVector,
    pilot_power: f64,
    noise: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    check_len(pilot.len(), h.len())?;
    let dft = Dft::new(h.len());
    let t = UplinkTraining {
        dft: &dft,
        pilot,
        pilot_power,
        noise,
    };
    Ok(t.observe(h, rng))
}

/// Untruncated LS estimate `h̃`.
pub fn ls_estimate_raw(
    y: &[Complex64],
    pilot: &PilotVector,
    pilot_power: f64,
) -> Result<Vec<Complex64>> {
    check_len(pilot.len(), y.len())?;
    let dft = Dft::new(y.len());
    let t = UplinkTraining {
        dft: &dft,
        pilot,
        pilot_power,
        noise: 0.0,
    };
    Ok(t.ls_raw(y))
}

pub fn ls_estimate(
    y: &[Complex64],
    pilot: &PilotVector,
    pilot_power: f64,
    order: usize,
) -> Result<CompositeEstimate> {
    if order > y.len() {
        return Err(Error::LengthOverflow {
            taps: order,
            len: y.len(),
        });
    }
    let mut taps = ls_estimate_raw(y, pilot, pilot_power)?;
    taps[order..].fill(ZERO);
    Ok(CompositeEstimate {
        slot: 0,
        order,
        taps,
    })
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Columns of the `(M+1)`-point DFT matrix, `ψ_q[i] = e^{-j2π iq/(M+1)}`.
///
/// Entry 0 of every column is 1 and multiplies the direct channel; entries
/// `1..=M` are the reflection coefficients of slot `q`.
pub fn dft_training_patterns(num_elements: usize) -> Vec<Vec<Complex64>> {
    let k = num_elements + 1;
    (0..k)
        .map(|q| {
            (0..k)
                .map(|i| {
                    let e = (i * q) % k;
                    Complex64::from_polar(1.0, -std::f64::consts::TAU * e as f64 / k as f64)
                })
                .collect()
        })
        .collect()
}

/// Recovers `[d, R]` from composite estimates `ĥ_q = [d, R] ψ_q`.
///
/// DFT-orthogonal patterns use `Ψ^H/(M+1)`; any other invertible pattern set
/// falls back to Gauss-Jordan inversion.
pub fn estimate_separate_channels(
    estimates: &[Vec<Complex64>],
    patterns: &[Vec<Complex64>],
) -> Result<SeparateEstimate> {
    let k = patterns.len();
    if estimates.len() != k {
        return Err(Error::PatternCountMismatch {
            expected: k,
            actual: estimates.len(),
        });
    }
    if k < 2 {
        return Err(Error::PatternCountMismatch {
            expected: 2,
            actual: k,
        });
    }
    if let Some(bad) = patterns.iter().find(|p| p.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: bad.len(),
        });
    }
    let n = estimates[0].len();
    if let Some(bad) = estimates.iter().find(|e| e.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bad.len(),
        });
    }

    // inv[q][i]: (Ψ^{-1})_{q,i}, where Ψ[i][q] = patterns[q][i].
    let inv = if is_scaled_unitary(patterns) {
        let s = 1.0 / k as f64;
        (0..k)
            .map(|q| (0..k).map(|i| patterns[q][i].conj() * s).collect())
            .collect()
    } else {
        invert(patterns)?
    };

    let rows = estimates
        .iter()
        .map(|e| e.iter().rposition(|x| *x != ZERO).map_or(0, |i| i + 1))
        .max()
        .unwrap_or(0);
    // out[i][t] = Σ_q Ĥ[t][q] inv[q][i]
    let mut out = vec![vec![ZERO; n]; k];
    for (q, est) in estimates.iter().enumerate() {
        for (i, col) in out.iter_mut().enumerate() {
            let w = inv[q][i];
            for (o, h) in col[..rows].iter_mut().zip(&est[..rows]) {
                *o += h * w;
            }
        }
    }
    let mut it = out.into_iter();
    let direct = it.next().expect("k >= 2");
    Ok(SeparateEstimate {
        direct,
        cascaded: it.collect(),
    })
}

fn is_scaled_unitary(patterns: &[Vec<Complex64>]) -> bool {
    let k = patterns.len();
    let tol = 1e-9 * k as f64;
    for a in 0..k {
        for b in a..k {
            let dot: Complex64 = patterns[a]
                .iter()
                .zip(&patterns[b])
                .map(|(x, y)| x * y.conj())
                .sum();
            let want = if a == b { k as f64 } else { 0.0 };
            if (dot - want).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Returns `inv[q][i] = (Ψ^{-1})_{q,i}` for `Ψ[i][q] = patterns[q][i]`.
fn invert(patterns: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let k = patterns.len();
    // a = [Ψ | I], row-major in i.
    let mut a: Vec<Vec<Complex64>> = (0..k)
        .map(|i| {
            let mut row: Vec<Complex64> = (0..k).map(|q| patterns[q][i]).collect();
            row.extend((0..k).map(|j| {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    ZERO
                }
            }));
            row
        })
        .collect();
    let scale = a
        .iter()
        .flat_map(|r| r[..k].iter())
        .map(|x| x.norm())
        .fold(0.0, f64::max);
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .expect("nonempty");
        if a[pivot][col].norm() <= 1e-12 * scale {
            return Err(Error::SingularPatterns);
        }
        a.swap(col, pivot);
        let p = a[col][col];
        a[col].iter_mut().for_each(|x| *x /= p);
        for r in 0..k {
            if r != col {
                let f = a[r][col];
                if f != ZERO {
                    for c in 0..2 * k {
                        let v = a[col][c];
                        a[r][c] -= f * v;
                    }
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[k..].to_vec()).collect())
}
