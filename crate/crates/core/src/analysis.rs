//! Closed-form scaling law of the best-of-Q composite gain, order-statistics
//! oracles, and analytic real-multiplication counts.
//!
//! For `Q` i.i.d. unit exponentials, `E[max] = H_Q = Σ_{j≤Q} 1/j`, which
//! approaches `ln Q + C` (Euler-Mascheroni). The bound on the expected best
//! gain scales the LoS tap variance by that factor and adds the scattered power.
//!
//! The LoS scale is `κ_d ρ_d² + M κ_r ρ_r²`, the tap-1 variance of the
//! composite channel. A squared-κ form of the same scale also circulates; the
//! two only agree when every κ is 0 or 1.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::config::{LinkStatisticsSet, SystemConfig};

pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

pub fn harmonic_number(q: usize) -> f64 {
    // Summed smallest-first for accuracy.
    (1..=q).rev().map(|j| 1.0 / j as f64).sum()
}

/// Which expectation of the best-of-Q exponential to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    /// `ln Q + C`.
    Asymptotic,
    /// `H_Q`, exact for finite `Q`.
    Harmonic,
}

impl BoundVariant {
    pub fn factor(self, q: usize) -> f64 {
        match self {
            Self::Asymptotic => (q as f64).ln() + EULER_MASCHERONI,
            Self::Harmonic => harmonic_number(q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop1Inputs {
    pub los_direct: f64,
    pub los_cascaded: f64,
    pub power_direct: f64,
    pub power_cascaded: f64,
    pub num_elements: usize,
    pub training_slots: usize,
    pub num_subcarriers: usize,
    pub cp_length: usize,
    pub downlink_power: f64,
    pub noise_ue: f64,
}

impl Prop1Inputs {
    pub fn from_config(cfg: &SystemConfig, stats: &LinkStatisticsSet, q: usize) -> Self {
        Self {
            los_direct: stats.direct.los_fraction,
            los_cascaded: stats.cascaded.los_fraction,
            power_direct: stats.direct.avg_power,
            power_cascaded: stats.cascaded.avg_power,
            num_elements: cfg.num_elements,
            training_slots: q,
            num_subcarriers: cfg.num_subcarriers,
            cp_length: cfg.cp_length,
            downlink_power: cfg.downlink_power,
            noise_ue: cfg.noise_ue,
        }
    }

    /// Variance of composite tap 1, `κ_d ρ_d² + M κ_r ρ_r²`.
    pub fn los_scale(&self) -> f64 {
        self.los_direct * self.power_direct
            + self.num_elements as f64 * self.los_cascaded * self.power_cascaded
    }

    /// Scattered power on taps `2..=L_r`, `(1-κ_d)ρ_d² + M(1-κ_r)ρ_r²`.
    pub fn scattered_power(&self) -> f64 {
        (1.0 - self.los_direct) * self.power_direct
            + self.num_elements as f64 * (1.0 - self.los_cascaded) * self.power_cascaded
    }
}

/// Expected best-of-Q composite gain `E[max_q ‖h_q‖²]`.
pub fn prop1_gain_bound(inputs: &Prop1Inputs, variant: BoundVariant) -> f64 {
    assert!(
        inputs.training_slots >= 1,
        "need at least one training slot"
    );
    inputs.los_scale() * variant.factor(inputs.training_slots) + inputs.scattered_power()
}

/// Equal-power rate of the bounded gain, an upper bound on the ergodic rate.
pub fn prop1_rate_bound(inputs: &Prop1Inputs, variant: BoundVariant) -> f64 {
    gain_to_rate(inputs, prop1_gain_bound(inputs, variant))
}

/// `(N/(N+N_CP)) log2(1 + P G / (N σ²))`.
pub fn gain_to_rate(inputs: &Prop1Inputs, gain: f64) -> f64 {
    let n = inputs.num_subcarriers as f64;
    let snr = inputs.downlink_power * gain / (n * inputs.noise_ue);
    n / (n + inputs.cp_length as f64) * snr.log2_1p()
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

/// Max of `q` i.i.d. exponentials with mean `variance`, sampled directly.
pub fn sample_max_direct<R: Rng + ?Sized>(q: usize, variance: f64, rng: &mut R) -> f64 {
    (0..q).map(|_| Exp1.sample(rng)).fold(0.0f64, f64::max) * variance
}

/// The same maximum via the spacing representation `Σ_j γ_j / (Q - j + 1)`.
pub fn sample_max_spacings<R: Rng + ?Sized>(q: usize, variance: f64, rng: &mut R) -> f64 {
    (1..=q)
        .map(|j| {
            let g: f64 = Exp1.sample(rng);
            g / (q - j + 1) as f64
        })
        .sum::<f64>()
        * variance
}

/// Empirical `E[max]` over `trials` draws of `q` scaled exponentials.
pub fn order_statistic_oracle<R: Rng + ?Sized>(
    q: usize,
    variance: f64,
    trials: usize,
    rng: &mut R,
) -> f64 {
    assert!(trials >= 1, "need at least one trial");
    let sum: f64 = (0..trials)
        .map(|_| sample_max_direct(q, variance, rng))
        .sum();
    sum / trials as f64
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic KS rejection threshold at level `alpha`.
pub fn ks_critical_value(alpha: f64, na: usize, nb: usize) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    let (na, nb) = (na as f64, nb as f64);
    c * ((na + nb) / (na * nb)).sqrt()
}

/// Real-valued multiplication counts per coherence block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityReport {
    /// `2N(M+1)`.
    pub conventional_estimation: u64,
    /// `2NQ`.
    pub proposed_estimation: u64,
    /// `N_i M (4 M L_r + N(6 L_r + 2) + 4)`.
    pub ao_optimization: u64,
    /// `Q N (6 L_r + 2)`.
    pub proposed_optimization: u64,
}

impl ComplexityReport {
    pub fn conventional_total(&self) -> u64 {
        self.conventional_estimation + self.ao_optimization
    }

    pub fn proposed_total(&self) -> u64 {
        self.proposed_estimation + self.proposed_optimization
    }
}

pub fn complexity_report(
    num_elements: u64,
    num_subcarriers: u64,
    training_slots: u64,
    cascaded_taps: u64,
    ao_iterations: u64,
) -> ComplexityReport {
    let (m, n, q, lr, ni) = (
        num_elements,
        num_subcarriers,
        training_slots,
        cascaded_taps,
        ao_iterations,
    );
    ComplexityReport {
        conventional_estimation: 2 * n * (m + 1),
        proposed_estimation: 2 * n * q,
        ao_optimization: ni * m * (4 * m * lr + n * (6 * lr + 2) + 4),
        proposed_optimization: q * n * (6 * lr + 2),
    }
}
