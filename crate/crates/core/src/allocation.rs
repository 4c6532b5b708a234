//! Water-filling power allocation over subcarriers.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// Per-subcarrier power, watts.
    pub powers: Vec<f64>,
    /// Water level `c` with `p_n = max(c - σ²/g_n, 0)`.
    pub water_level: f64,
    pub total_used: f64,
    /// Every gain was zero; no power was placed.
    pub degenerate: bool,
}

impl PowerAllocation {
    pub fn uniform(n: usize, total: f64) -> Self {
        Self {
            powers: vec![total / n as f64; n],
            water_level: f64::NAN,
            total_used: total,
            degenerate: false,
        }
    }
}

const REL_TOL: f64 = 1e-9;

/// KKT-optimal allocation of `total` watts maximizing `Σ log2(1 + g_n p_n / σ²)`.
///
/// The active set is solved exactly from the sorted noise-to-gain thresholds.
/// Bisection on the water level takes over if rounding leaves the budget
/// off by more than `1e-9` relative. Subcarriers with `g_n = 0` get no power.
pub fn water_fill(gains: &[f64], noise: f64, total: f64) -> Result<PowerAllocation> {
    if !(noise > 0.0 && noise.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise power must be positive, got {noise}"
        )));
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "power budget must be positive, got {total}"
        )));
    }
    if let Some((index, &value)) = gains
        .iter()
        .enumerate()
        .find(|(_, g)| !(g.is_finite() && **g >= 0.0))
    {
        return Err(Error::InvalidGain { index, value });
    }

    let mut thresholds: Vec<f64> = gains
        .iter()
        .filter(|g| **g > 0.0)
        .map(|g| noise / g)
        .collect();
    if thresholds.is_empty() {
        return Ok(PowerAllocation {
            powers: vec![0.0; gains.len()],
            water_level: 0.0,
            total_used: 0.0,
            degenerate: true,
        });
    }
    thresholds.sort_by(f64::total_cmp);

    let mut prefix = 0.0;
    let mut level = f64::NAN;
    for (k, t) in thresholds.iter().enumerate() {
        let candidate = (total + prefix + t) / (k + 1) as f64;
        if k > 0 && candidate <= *t {
            break;
        }
        prefix += t;
        level = candidate;
    }

    let powers = fill(gains, noise, level);
    let used: f64 = powers.iter().sum();
    if (used - total).abs() <= REL_TOL * total {
        return Ok(PowerAllocation {
            powers,
            water_level: level,
            total_used: used,
            degenerate: false,
        });
    }
    Ok(bisect(gains, noise, total, &thresholds))
}

fn fill(gains: &[f64], noise: f64, level: f64) -> Vec<f64> {
    gains
        .iter()
        .map(|&g| {
            if g > 0.0 {
                (level - noise / g).max(0.0)
            } else {
                0.0
            }
        })
        .collect()
}

fn bisect(gains: &[f64], noise: f64, total: f64, sorted: &[f64]) -> PowerAllocation {
    let mut lo = sorted[0];
    let mut hi = sorted[sorted.len() - 1] + total;
    let mut level = 0.5 * (lo + hi);
    for _ in 0..200 {
        level = 0.5 * (lo + hi);
        let used: f64 = fill(gains, noise, level).iter().sum();
        if (used - total).abs() <= 0.25 * REL_TOL * total {
            break;
        }
        if used > total {
            hi = level;
        } else {
            lo = level;
        }
    }
    let powers = fill(gains, noise, level);
    let used = powers.iter().sum();
    PowerAllocation {
        powers,
        water_level: level,
        total_used: used,
        degenerate: false,
    }
}
