//! Alternating-optimization baseline: water-filling for a fixed reflection
//! vector, then one closed-form phase update per element with the others held
//! fixed, repeated for a fixed number of iterations.

use num_complex::Complex64;
use rand::Rng;

use crate::allocation::{water_fill, PowerAllocation};
use crate::channel::ChannelRealization;
use crate::config::{AoUpdateRule, SystemConfig};
use crate::error::{Error, Result};
use crate::estimation::{dft_training_patterns, estimate_separate_channels, SeparateEstimate};
use crate::link::LinkSimulator;
use crate::ofdm::{rate_from_power_gains, Dft};
use crate::reflection::{realized_rate, ReflectionVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoSettings {
    pub noise: f64,
    pub total_power: f64,
    pub cp_length: usize,
    pub iterations: usize,
    pub rule: AoUpdateRule,
}

impl AoSettings {
    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self {
            noise: cfg.noise_ue,
            total_power: cfg.downlink_power,
            cp_length: cfg.cp_length,
            iterations: cfg.ao_iterations,
            rule: cfg.ao_update,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoResult {
    pub reflection: ReflectionVector,
    pub allocation: PowerAllocation,
    /// Rate on the channels given to the optimizer: the initial point, then
    /// after every iteration's sweep and re-allocation.
    pub trajectory: Vec<f64>,
    pub iterations: usize,
}

impl AoResult {
    pub fn final_rate(&self) -> f64 {
        *self.trajectory.last().expect("trajectory is never empty")
    }
}

const EXACT_GRID: usize = 72;

/// Optimizes `(φ, p)` for the channel `d + Rφ` given by `direct` and the
/// columns of `cascaded` (all of length `N`).
pub fn ao_optimize(
    direct: &[Complex64],
    cascaded: &[Vec<Complex64>],
    settings: &AoSettings,
    initial: &ReflectionVector,
) -> Result<AoResult> {
    let n = direct.len();
    let m = cascaded.len();
    if initial.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: initial.len(),
        });
    }
    if let Some(col) = cascaded.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: col.len(),
        });
    }
    if settings.iterations == 0 {
        return Err(Error::InvalidConfig(
            "AO needs at least one iteration".into(),
        ));
    }
    let dft = Dft::new(n);
    let d_freq = dft.forward(direct)?;
    let b: Vec<Vec<Complex64>> = cascaded
        .iter()
        .map(|c| dft.forward(c))
        .collect::<Result<_>>()?;

    let mut phi: Vec<Complex64> = initial.coeffs().to_vec();
    let mut h = d_freq.clone();
    for (col, p) in b.iter().zip(&phi) {
        for (hn, bn) in h.iter_mut().zip(col) {
            *hn += p * bn;
        }
    }

    let rate_of = |h: &[Complex64], powers: &[f64]| -> f64 {
        let g: Vec<f64> = h.iter().map(|x| x.norm_sqr()).collect();
        rate_from_power_gains(&g, powers, settings.noise, settings.cp_length)
    };
    let allocate = |h: &[Complex64]| -> Result<PowerAllocation> {
        let g: Vec<f64> = h.iter().map(|x| x.norm_sqr()).collect();
        water_fill(&g, settings.noise, settings.total_power)
    };

    let mut alloc = allocate(&h)?;
    let mut trajectory = vec![rate_of(&h, &alloc.powers)];
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    let mut trial = vec![Complex64::new(0.0, 0.0); n];

    for _ in 0..settings.iterations {
        let mut current = rate_of(&h, &alloc.powers);
        for k in 0..m {
            let bk = &b[k];
            for ((an, hn), bn) in a.iter_mut().zip(&h).zip(bk) {
                *an = hn - phi[k] * bn;
            }
            let candidate = match settings.rule {
                AoUpdateRule::RateGradient | AoUpdateRule::PowerWeighted => {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        let p = alloc.powers[i];
                        let w = match settings.rule {
                            AoUpdateRule::RateGradient => {
                                p / (settings.noise + h[i].norm_sqr() * p)
                            }
                            _ => p,
                        };
                        acc += bk[i] * a[i].conj() * w;
                    }
                    if acc.norm_sqr() == 0.0 {
                        continue;
                    }
                    Complex64::from_polar(1.0, -acc.arg())
                }
                AoUpdateRule::ExactSearch => {
                    exact_phase(&a, bk, &alloc.powers, settings, &mut trial)
                }
            };
            for ((t, an), bn) in trial.iter_mut().zip(&a).zip(bk) {
                *t = an + candidate * bn;
            }
            let r = rate_of(&trial, &alloc.powers);
            // Surrogate updates are not guaranteed ascent steps; keep monotone.
            if r >= current {
                phi[k] = candidate;
                h.copy_from_slice(&trial);
                current = r;
            }
        }
        alloc = allocate(&h)?;
        trajectory.push(rate_of(&h, &alloc.powers));
    }

    Ok(AoResult {
        reflection: ReflectionVector::new(phi)?,
        allocation: alloc,
        trajectory,
        iterations: settings.iterations,
    })
}

/// Grid search over the element phase followed by golden-section refinement.
fn exact_phase(
    a: &[Complex64],
    b: &[Complex64],
    powers: &[f64],
    settings: &AoSettings,
    scratch: &mut [Complex64],
) -> Complex64 {
    let mut eval = |theta: f64| -> f64 {
        let p = Complex64::from_polar(1.0, theta);
        let mut s = 0.0;
        for i in 0..a.len() {
            scratch[i] = a[i] + p * b[i];
            s += (scratch[i].norm_sqr() * powers[i] / settings.noise).ln_1p();
        }
        s
    };
    let step = std::f64::consts::TAU / EXACT_GRID as f64;
    let (mut best_t, mut best_v) = (0.0, f64::MIN);
    for i in 0..EXACT_GRID {
        let t = i as f64 * step;
        let v = eval(t);
        if v > best_v {
            best_t = t;
            best_v = v;
        }
    }
    let (mut lo, mut hi) = (best_t - step, best_t + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    for _ in 0..40 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = eval(x1);
        }
    }
    let t = if f1.max(f2) >= best_v {
        if f1 > f2 {
            x1
        } else {
            x2
        }
    } else {
        best_t
    };
    Complex64::from_polar(1.0, t)
}

/// Which channel knowledge the AO baseline works from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AoCsi {
    Perfect,
    /// Separate estimation from `M + 1` DFT-pattern pilot slots.
    Estimated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoOutcome {
    pub result: AoResult,
    /// Rate of the optimizer's `(φ, p)` on the true channel.
    pub realized_rate: f64,
    pub estimate: Option<SeparateEstimate>,
}

/// Sounds the `M + 1` DFT reflection patterns and unmixes `d̂` and `R̂`.
pub fn estimate_separately<R: Rng + ?Sized>(
    sim: &LinkSimulator,
    real: &ChannelRealization,
    noise_enabled: bool,
    rng: &mut R,
) -> Result<SeparateEstimate> {
    let cfg = sim.config();
    let patterns = dft_training_patterns(real.num_elements());
    let training = sim.training(noise_enabled);
    let lr = real.cascaded_taps();
    let estimates: Vec<Vec<Complex64>> = patterns
        .iter()
        .enumerate()
        .map(|(q, psi)| {
            let h = real.composite(&psi[1..]);
            let y = training.observe(&h, rng);
            training.estimate(&y, lr, q).taps
        })
        .collect();
    let mut sep = estimate_separate_channels(&estimates, &patterns)?;
    if cfg.truncate_separate_estimates {
        sep.truncate(cfg.taps_direct, lr);
    }
    Ok(sep)
}

pub fn run_ao_scheme<R: Rng + ?Sized>(
    sim: &LinkSimulator,
    real: &ChannelRealization,
    csi: AoCsi,
    noise_enabled: bool,
    rng: &mut R,
) -> Result<AoOutcome> {
    let settings = AoSettings::from_config(sim.config());
    let init = ReflectionVector::ones(real.num_elements());
    let (result, estimate) = match csi {
        AoCsi::Perfect => {
            let cols: Vec<Vec<Complex64>> = (0..real.num_elements())
                .map(|m| real.cascaded_column(m))
                .collect();
            (ao_optimize(real.direct(), &cols, &settings, &init)?, None)
        }
        AoCsi::Estimated => {
            let sep = estimate_separately(sim, real, noise_enabled, rng)?;
            let res = ao_optimize(&sep.direct, &sep.cascaded, &settings, &init)?;
            (res, Some(sep))
        }
    };
    let realized = realized_rate(sim, real, &result.reflection, &result.allocation.powers)?;
    Ok(AoOutcome {
        result,
        realized_rate: realized,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::config::{Purpose, SeedPolicy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn settings(rule: AoUpdateRule) -> AoSettings {
        AoSettings {
            noise: 1.0,
            total_power: 4.0,
            cp_length: 0,
            iterations: 3,
            rule,
        }
    }

    fn random_instance(
        rng: &mut ChaCha8Rng,
        n: usize,
        m: usize,
        lr: usize,
    ) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        for t in d.iter_mut().take(lr) {
            *t = complex_gaussian(rng, 1.0);
        }
        let r = (0..m)
            .map(|_| {
                let mut c = vec![Complex64::new(0.0, 0.0); n];
                for t in c.iter_mut().take(lr) {
                    *t = complex_gaussian(rng, 1.0);
                }
                c
            })
            .collect();
        (d, r)
    }

    #[test]
    fn single_element_single_carrier_aligns_phases() {
        let d = vec![Complex64::from_polar(1.3, 0.7)];
        let r = vec![vec![Complex64::from_polar(0.4, -2.1)]];
        for rule in [
            AoUpdateRule::RateGradient,
            AoUpdateRule::PowerWeighted,
            AoUpdateRule::ExactSearch,
        ] {
            let out = ao_optimize(&d, &r, &settings(rule), &ReflectionVector::ones(1)).unwrap();
            let want = Complex64::from_polar(1.0, 0.7 - (-2.1));
            assert!(
                (out.reflection.coeffs()[0] - want).norm() < 1e-6,
                "{rule:?}"
            );
        }
    }

    #[test]
    fn trajectory_is_nondecreasing_and_unit_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for rule in [
            AoUpdateRule::RateGradient,
            AoUpdateRule::PowerWeighted,
            AoUpdateRule::ExactSearch,
        ] {
            for _ in 0..10 {
                let (d, r) = random_instance(&mut rng, 16, 8, 4);
                let out = ao_optimize(&d, &r, &settings(rule), &ReflectionVector::ones(8)).unwrap();
                assert_eq!(out.trajectory.len(), 4);
                for w in out.trajectory.windows(2) {
                    assert!(w[1] >= w[0] - 1e-12, "{rule:?} {:?}", out.trajectory);
                }
                assert!(out
                    .reflection
                    .coeffs()
                    .iter()
                    .all(|c| (c.norm() - 1.0).abs() < 1e-12));
                let sum: f64 = out.allocation.powers.iter().sum();
                assert!((sum - 4.0).abs() < 1e-9 * 4.0);
            }
        }
    }

    #[test]
    fn dimension_checks() {
        let d = vec![Complex64::new(1.0, 0.0); 4];
        let r = vec![vec![Complex64::new(1.0, 0.0); 4]; 2];
        assert!(ao_optimize(
            &d,
            &r,
            &settings(AoUpdateRule::RateGradient),
            &ReflectionVector::ones(3)
        )
        .is_err());
        let bad = vec![vec![Complex64::new(1.0, 0.0); 3]; 2];
        assert!(ao_optimize(
            &d,
            &bad,
            &settings(AoUpdateRule::RateGradient),
            &ReflectionVector::ones(2)
        )
        .is_err());
    }

    #[test]
    fn noiseless_separate_estimation_is_exact() {
        let cfg = SystemConfig {
            num_elements: 8,
            ..SystemConfig::default()
        };
        let seeds = SeedPolicy::new(9);
        let sim = LinkSimulator::new(cfg, &seeds).unwrap();
        let real = sim
            .sample_channel(&mut seeds.rng(0, Purpose::Channel))
            .unwrap();
        let sep = estimate_separately(
            &sim,
            &real,
            false,
            &mut seeds.rng(0, Purpose::SeparateNoise),
        )
        .unwrap();
        let err = |a: &[Complex64], b: &[Complex64]| {
            let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
            let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
            (num / den).sqrt()
        };
        assert!(err(&sep.direct, real.direct()) < 1e-8);
        for m in 0..8 {
            assert!(err(&sep.cascaded[m], &real.cascaded_column(m)) < 1e-8);
        }
    }

    #[test]
    fn perfect_csi_ao_beats_its_starting_point() {
        let cfg = SystemConfig {
            num_elements: 32,
            ..SystemConfig::default()
        };
        let seeds = SeedPolicy::new(10);
        let sim = LinkSimulator::new(cfg, &seeds).unwrap();
        for trial in 0..5 {
            let real = sim
                .sample_channel(&mut seeds.rng(trial, Purpose::Channel))
                .unwrap();
            let out = run_ao_scheme(
                &sim,
                &real,
                AoCsi::Perfect,
                true,
                &mut seeds.rng(trial, Purpose::SeparateNoise),
            )
            .unwrap();
            assert!(out.estimate.is_none());
            assert!(
                (out.realized_rate - out.result.final_rate()).abs() < 1e-12 * out.realized_rate
            );
            assert!(out.result.final_rate() >= out.result.trajectory[0]);
        }
    }
}
