//! Training-set reflection selection and the random-phase baseline.
//!
//! Each training slot configures the RIS with one candidate vector, estimates
//! only the composite channel, water-fills on the estimate and scores the
//! slot by its expected rate. The highest-scoring slot is kept.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::{water_fill, PowerAllocation};
use crate::channel::{unit_phasor, ChannelRealization};
use crate::error::{Error, Result};
use crate::link::LinkSimulator;
use crate::ofdm::rate_from_power_gains;

/// Unit-modulus RIS reflection coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionVector(Vec<Complex64>);

impl ReflectionVector {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if let Some(m) = coeffs.iter().position(|c| (c.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::InvalidConfig(format!(
                "reflection coefficient {m} is not unit modulus"
            )));
        }
        Ok(Self(coeffs))
    }

    pub fn from_phases(phases: &[f64]) -> Self {
        Self(
            phases
                .iter()
                .map(|t| Complex64::from_polar(1.0, *t))
                .collect(),
        )
    }

    pub fn ones(m: usize) -> Self {
        Self(vec![Complex64::new(1.0, 0.0); m])
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        Self((0..m).map(|_| unit_phasor(rng)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub vectors: Vec<ReflectionVector>,
    /// Seed the set was generated from, when known.
    pub seed: Option<u64>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn from_seed(q: usize, m: usize, seed: u64) -> Self {
        let mut set = generate_training_set(q, m, &mut ChaCha8Rng::seed_from_u64(seed));
        set.seed = Some(seed);
        set
    }
}

/// `q` i.i.d. vectors with uniform phases, drawn element by element so that a
/// shorter set is always a prefix of a longer one from the same stream.
pub fn generate_training_set<R: Rng + ?Sized>(q: usize, m: usize, rng: &mut R) -> TrainingSet {
    TrainingSet {
        vectors: (0..q).map(|_| ReflectionVector::random(m, rng)).collect(),
        seed: None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: usize,
    /// Truncated LS estimate `ĥ_q`.
    pub estimate: Vec<Complex64>,
    pub allocation: PowerAllocation,
    /// Rate on the estimate, used for selection.
    pub expected_rate: f64,
    /// Rate of the same allocation on the true composite channel.
    pub realized_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub chosen: usize,
    pub reflection: ReflectionVector,
    pub allocation: PowerAllocation,
    pub expected_rate: f64,
    pub realized_rate: f64,
    pub slots: Vec<SlotRecord>,
}

impl SchemeOutcome {
    /// Slot a scheme restricted to the first `q` slots would pick.
    pub fn best_of_prefix(slots: &[SlotRecord], q: usize) -> Option<&SlotRecord> {
        argmax(slots[..q.min(slots.len())].iter().map(|s| s.expected_rate)).map(|i| &slots[i])
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Runs one training slot: pilot, LS estimate, water-filling, and both rates.
pub fn evaluate_slot<R: Rng + ?Sized>(
    sim: &LinkSimulator,
    real: &ChannelRealization,
    phi: &ReflectionVector,
    slot: usize,
    noise_enabled: bool,
    rng: &mut R,
) -> Result<SlotRecord> {
    let cfg = sim.config();
    let h = real.composite(phi.coeffs());
    let training = sim.training(noise_enabled);
    let y = training.observe(&h, rng);
    let est = training.estimate(&y, real.cascaded_taps(), slot);
    let est_gains = sim.power_gains(&est.taps);
    let allocation = water_fill(&est_gains, cfg.noise_ue, cfg.downlink_power)?;
    let expected_rate =
        rate_from_power_gains(&est_gains, &allocation.powers, cfg.noise_ue, cfg.cp_length);
    let true_gains = sim.power_gains(&h);
    let realized_rate =
        rate_from_power_gains(&true_gains, &allocation.powers, cfg.noise_ue, cfg.cp_length);
    Ok(SlotRecord {
        slot,
        estimate: est.taps,
        allocation,
        expected_rate,
        realized_rate,
    })
}

/// Scores every candidate of `set` in slot order and keeps the best.
pub fn run_proposed_scheme<R: Rng + ?Sized>(
    sim: &LinkSimulator,
    real: &ChannelRealization,
    set: &TrainingSet,
    noise_enabled: bool,
    rng: &mut R,
) -> Result<SchemeOutcome> {
    if set.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let slots = set
        .vectors
        .iter()
        .enumerate()
        .map(|(q, phi)| evaluate_slot(sim, real, phi, q, noise_enabled, rng))
        .collect::<Result<Vec<_>>>()?;
    let chosen = argmax(slots.iter().map(|s| s.expected_rate)).expect("nonempty");
    let best = &slots[chosen];
    Ok(SchemeOutcome {
        chosen,
        reflection: set.vectors[chosen].clone(),
        allocation: best.allocation.clone(),
        expected_rate: best.expected_rate,
        realized_rate: best.realized_rate,
        slots,
    })
}

/// One random reflection vector, one pilot slot.
pub fn run_random_phase<R1, R2>(
    sim: &LinkSimulator,
    real: &ChannelRealization,
    phase_rng: &mut R1,
    noise_enabled: bool,
    noise_rng: &mut R2,
) -> Result<SchemeOutcome>
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    let phi = ReflectionVector::random(real.num_elements(), phase_rng);
    let slot = evaluate_slot(sim, real, &phi, 0, noise_enabled, noise_rng)?;
    Ok(SchemeOutcome {
        chosen: 0,
        reflection: phi,
        allocation: slot.allocation.clone(),
        expected_rate: slot.expected_rate,
        realized_rate: slot.realized_rate,
        slots: vec![slot],
    })
}

/// Rate of `(φ, p)` on the true composite channel.
pub fn realized_rate(
    sim: &LinkSimulator,
    real: &ChannelRealization,
    phi: &ReflectionVector,
    powers: &[f64],
) -> Result<f64> {
    let cfg = sim.config();
    if powers.len() != cfg.num_subcarriers {
        return Err(Error::DimensionMismatch {
            expected: cfg.num_subcarriers,
            actual: powers.len(),
        });
    }
    if let Some((index, &value)) = powers.iter().enumerate().find(|(_, p)| !(**p >= 0.0)) {
        return Err(Error::NegativePower { index, value });
    }
    let gains = sim.power_gains(&real.composite(phi.coeffs()));
    Ok(rate_from_power_gains(
        &gains,
        powers,
        cfg.noise_ue,
        cfg.cp_length,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Purpose, SeedPolicy, SystemConfig};
    use crate::ofdm::{achievable_rate, FrequencyResponse};

    fn small_sim(noise_dbm_shift: f64) -> LinkSimulator {
        let mut cfg = SystemConfig {
            num_elements: 16,
            ..SystemConfig::default()
        };
        cfg.uplink_pilot_power *= 10f64.powf(noise_dbm_shift / 10.0);
        LinkSimulator::new(cfg, &SeedPolicy::new(1)).unwrap()
    }

    #[test]
    fn unit_modulus_enforced() {
        assert!(ReflectionVector::new(vec![Complex64::new(0.5, 0.0)]).is_err());
        assert!(ReflectionVector::new(vec![Complex64::from_polar(1.0, 2.0)]).is_ok());
    }

    #[test]
    fn training_set_determinism_and_modulus() {
        let a = TrainingSet::from_seed(8, 10, 42);
        let b = TrainingSet::from_seed(8, 10, 42);
        let c = TrainingSet::from_seed(8, 10, 43);
        assert_eq!(a, b);
        assert_ne!(a.vectors, c.vectors);
        assert!(a
            .vectors
            .iter()
            .flat_map(|v| v.coeffs())
            .all(|x| (x.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn shorter_set_is_prefix() {
        let long = TrainingSet::from_seed(20, 6, 5);
        let short = TrainingSet::from_seed(7, 6, 5);
        assert_eq!(&long.vectors[..7], &short.vectors[..]);
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax([1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax(Vec::<f64>::new()), None);
    }

    #[test]
    fn empty_set_is_error() {
        let sim = small_sim(0.0);
        let seeds = SeedPolicy::new(2);
        let real = sim
            .sample_channel(&mut seeds.rng(0, Purpose::Channel))
            .unwrap();
        let set = TrainingSet {
            vectors: vec![],
            seed: None,
        };
        assert!(matches!(
            run_proposed_scheme(
                &sim,
                &real,
                &set,
                true,
                &mut seeds.rng(0, Purpose::UplinkNoise)
            ),
            Err(Error::EmptyTrainingSet)
        ));
    }

    #[test]
    fn noiseless_selection_matches_exhaustive_search() {
        let sim = small_sim(0.0);
        let cfg = sim.config().clone();
        let seeds = SeedPolicy::new(3);
        for trial in 0..5 {
            let real = sim
                .sample_channel(&mut seeds.rng(trial, Purpose::Channel))
                .unwrap();
            let set = generate_training_set(
                12,
                cfg.num_elements,
                &mut seeds.rng(trial, Purpose::TrainingSet),
            );
            let out = run_proposed_scheme(
                &sim,
                &real,
                &set,
                false,
                &mut seeds.rng(trial, Purpose::UplinkNoise),
            )
            .unwrap();
            assert!((out.realized_rate - out.expected_rate).abs() <= 1e-12 * out.expected_rate);
            let brute: Vec<f64> = set
                .vectors
                .iter()
                .map(|phi| {
                    let g = sim.power_gains(&real.composite(phi.coeffs()));
                    let p = water_fill(&g, cfg.noise_ue, cfg.downlink_power).unwrap();
                    rate_from_power_gains(&g, &p.powers, cfg.noise_ue, cfg.cp_length)
                })
                .collect();
            let best = brute.iter().cloned().fold(f64::MIN, f64::max);
            assert!((out.realized_rate - best).abs() <= 1e-12 * best);
        }
    }

    #[test]
    fn prefix_best_rate_is_nondecreasing() {
        let sim = small_sim(0.0);
        let seeds = SeedPolicy::new(4);
        let real = sim
            .sample_channel(&mut seeds.rng(0, Purpose::Channel))
            .unwrap();
        let set = generate_training_set(40, 16, &mut seeds.rng(0, Purpose::TrainingSet));
        let out = run_proposed_scheme(
            &sim,
            &real,
            &set,
            true,
            &mut seeds.rng(0, Purpose::UplinkNoise),
        )
        .unwrap();
        let mut last = f64::MIN;
        for q in 1..=40 {
            let r = SchemeOutcome::best_of_prefix(&out.slots, q)
                .unwrap()
                .expected_rate;
            assert!(r >= last);
            last = r;
        }
        assert_eq!(last, out.expected_rate);
    }

    #[test]
    fn single_slot_equals_random_phase() {
        let sim = small_sim(-5.0);
        let seeds = SeedPolicy::new(5);
        for trial in 0..10 {
            let real = sim
                .sample_channel(&mut seeds.rng(trial, Purpose::Channel))
                .unwrap();
            let set = generate_training_set(1, 16, &mut seeds.rng(trial, Purpose::TrainingSet));
            let a = run_proposed_scheme(
                &sim,
                &real,
                &set,
                true,
                &mut seeds.rng(trial, Purpose::UplinkNoise),
            )
            .unwrap();
            let b = run_random_phase(
                &sim,
                &real,
                &mut seeds.rng(trial, Purpose::TrainingSet),
                true,
                &mut seeds.rng(trial, Purpose::UplinkNoise),
            )
            .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn realized_rate_cases() {
        let sim = small_sim(0.0);
        let cfg = sim.config().clone();
        let seeds = SeedPolicy::new(6);
        let real = sim
            .sample_channel(&mut seeds.rng(0, Purpose::Channel))
            .unwrap();
        let phi = ReflectionVector::random(16, &mut seeds.rng(0, Purpose::TrainingSet));
        let h = real.composite(phi.coeffs());
        let g = sim.power_gains(&h);
        let wf = water_fill(&g, cfg.noise_ue, cfg.downlink_power).unwrap();
        let direct = achievable_rate(
            &FrequencyResponse::from_time(sim.dft(), &h).unwrap(),
            &wf,
            cfg.noise_ue,
            cfg.cp_length,
        )
        .unwrap()
        .rate;
        let r = realized_rate(&sim, &real, &phi, &wf.powers).unwrap();
        assert!((r - direct).abs() <= 1e-12 * direct);

        let other = ReflectionVector::random(16, &mut seeds.rng(1, Purpose::TrainingSet));
        let g2 = sim.power_gains(&real.composite(other.coeffs()));
        let mismatched = water_fill(&g2, cfg.noise_ue, cfg.downlink_power).unwrap();
        assert!(realized_rate(&sim, &real, &phi, &mismatched.powers).unwrap() <= r + 1e-15);
        assert_eq!(
            realized_rate(&sim, &real, &phi, &vec![0.0; 128]).unwrap(),
            0.0
        );
    }
}
