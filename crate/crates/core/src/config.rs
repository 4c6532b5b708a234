//! System parameters, geometry-derived link statistics and the seeding policy.
//!
//! The on-disk config carries dB / dBm quantities; [`ConfigFile::into_system`]
//! converts them once, after which every quantity in [`SystemConfig`] is linear
//! (watts, power ratios, meters).

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// AP, RIS and UE placement. The UE sits on the ground directly below the RIS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    pub ap_height: f64,
    pub ris_height: f64,
    pub ap_ris_horizontal: f64,
    /// Elements per row of the rectangular array. Recorded, not used by the
    /// far-field channel model.
    pub elements_per_row: usize,
    /// Element spacing in wavelengths. Recorded, not used.
    pub element_spacing_wavelengths: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            ap_height: 10.0,
            ris_height: 10.0,
            ap_ris_horizontal: 50.0,
            elements_per_row: 10,
            element_spacing_wavelengths: 0.125,
        }
    }
}

impl Geometry {
    pub fn ap_ris_distance(&self) -> f64 {
        self.ap_ris_horizontal
            .hypot(self.ap_height - self.ris_height)
    }

    pub fn ris_ue_distance(&self) -> f64 {
        self.ris_height
    }

    pub fn ap_ue_distance(&self) -> f64 {
        self.ap_ris_horizontal.hypot(self.ap_height)
    }
}

/// Weighting used by the per-element phase update of the AO baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AoUpdateRule {
    /// `w_n = p_n / (σ² + |H_n|² p_n)`, the derivative of the per-carrier rate.
    #[default]
    RateGradient,
    /// `w_n = p_n`, the power-weighted channel gain surrogate.
    PowerWeighted,
    /// One-dimensional search of the exact rate over the element phase.
    ExactSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub num_subcarriers: usize,
    pub cp_length: usize,
    pub num_elements: usize,
    pub taps_direct: usize,
    pub taps_ap_ris: usize,
    pub taps_ris_ue: usize,
    /// Watts.
    pub downlink_power: f64,
    /// Watts.
    pub uplink_pilot_power: f64,
    /// Noise power per subcarrier at the AP, watts.
    pub noise_ap: f64,
    /// Noise power per subcarrier at the UE, watts.
    pub noise_ue: f64,
    pub rician_direct: f64,
    pub rician_ap_ris: f64,
    pub rician_ris_ue: f64,
    pub pathloss_exp_direct: f64,
    pub pathloss_exp_ap_ris: f64,
    pub pathloss_exp_ris_ue: f64,
    /// Path loss at 1 m, linear.
    pub reference_loss: f64,
    pub geometry: Geometry,
    pub ao_iterations: usize,
    pub ao_update: AoUpdateRule,
    /// Truncate separately estimated direct/cascaded channels to their known orders.
    pub truncate_separate_estimates: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        ConfigFile::default()
            .into_system()
            .expect("default configuration is valid")
    }
}

impl SystemConfig {
    /// Delay spread of every cascaded channel, `L_u + L_v - 1`.
    pub fn cascaded_taps(&self) -> usize {
        self.taps_ap_ris + self.taps_ris_ue - 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_subcarriers == 0 || self.num_elements == 0 {
            return bad("subcarrier and element counts must be positive".into());
        }
        if self.taps_direct == 0 || self.taps_ap_ris == 0 || self.taps_ris_ue == 0 {
            return bad("tap counts must be at least 1".into());
        }
        if self.ao_iterations == 0 {
            return bad("ao_iterations must be at least 1".into());
        }
        let lr = self.cascaded_taps();
        if lr > self.num_subcarriers {
            return bad(format!(
                "cascaded taps {lr} exceed {} subcarriers",
                self.num_subcarriers
            ));
        }
        if self.cp_length < lr {
            return bad(format!(
                "cyclic prefix {} shorter than delay spread {lr}",
                self.cp_length
            ));
        }
        if self.taps_direct > lr {
            return bad(format!(
                "direct taps {} exceed cascaded taps {lr}",
                self.taps_direct
            ));
        }
        let positive = [
            ("downlink_power", self.downlink_power),
            ("uplink_pilot_power", self.uplink_pilot_power),
            ("noise_ap", self.noise_ap),
            ("noise_ue", self.noise_ue),
            ("reference_loss", self.reference_loss),
            ("rician_direct", self.rician_direct),
            ("rician_ap_ris", self.rician_ap_ris),
            ("rician_ris_ue", self.rician_ris_ue),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and positive, got {v}"));
            }
        }
        let exps = [
            self.pathloss_exp_direct,
            self.pathloss_exp_ap_ris,
            self.pathloss_exp_ris_ue,
        ];
        if exps.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return bad("path loss exponents must be finite and nonnegative".into());
        }
        Ok(())
    }
}

/// Serialized form of [`SystemConfig`] with the usual engineering units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub num_subcarriers: usize,
    pub cp_length: usize,
    pub num_elements: usize,
    pub taps_direct: usize,
    pub taps_ap_ris: usize,
    pub taps_ris_ue: usize,
    pub downlink_power_dbm: f64,
    pub uplink_pilot_power_dbm: f64,
    pub noise_ap_dbm: f64,
    pub noise_ue_dbm: f64,
    pub rician_direct_db: f64,
    pub rician_ap_ris_db: f64,
    pub rician_ris_ue_db: f64,
    pub pathloss_exp_direct: f64,
    pub pathloss_exp_ap_ris: f64,
    pub pathloss_exp_ris_ue: f64,
    pub reference_loss_db: f64,
    pub geometry: Geometry,
    pub ao_iterations: usize,
    pub ao_update: AoUpdateRule,
    pub truncate_separate_estimates: bool,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            num_subcarriers: 128,
            cp_length: 8,
            num_elements: 100,
            taps_direct: 3,
            taps_ap_ris: 1,
            taps_ris_ue: 5,
            downlink_power_dbm: 10.0,
            uplink_pilot_power_dbm: -5.0,
            noise_ap_dbm: -100.0,
            noise_ue_dbm: -90.0,
            rician_direct_db: 0.0,
            rician_ap_ris_db: 5.0,
            rician_ris_ue_db: 3.0,
            pathloss_exp_direct: 3.5,
            pathloss_exp_ap_ris: 2.2,
            pathloss_exp_ris_ue: 2.8,
            reference_loss_db: -30.0,
            geometry: Geometry::default(),
            ao_iterations: 3,
            ao_update: AoUpdateRule::default(),
            truncate_separate_estimates: true,
        }
    }
}

impl ConfigFile {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn into_system(self) -> Result<SystemConfig> {
        let cfg = SystemConfig {
            num_subcarriers: self.num_subcarriers,
            cp_length: self.cp_length,
            num_elements: self.num_elements,
            taps_direct: self.taps_direct,
            taps_ap_ris: self.taps_ap_ris,
            taps_ris_ue: self.taps_ris_ue,
            downlink_power: dbm_to_watts(self.downlink_power_dbm),
            uplink_pilot_power: dbm_to_watts(self.uplink_pilot_power_dbm),
            noise_ap: dbm_to_watts(self.noise_ap_dbm),
            noise_ue: dbm_to_watts(self.noise_ue_dbm),
            rician_direct: db_to_linear(self.rician_direct_db),
            rician_ap_ris: db_to_linear(self.rician_ap_ris_db),
            rician_ris_ue: db_to_linear(self.rician_ris_ue_db),
            pathloss_exp_direct: self.pathloss_exp_direct,
            pathloss_exp_ap_ris: self.pathloss_exp_ap_ris,
            pathloss_exp_ris_ue: self.pathloss_exp_ris_ue,
            reference_loss: db_to_linear(self.reference_loss_db),
            geometry: self.geometry,
            ao_iterations: self.ao_iterations,
            ao_update: self.ao_update,
            truncate_separate_estimates: self.truncate_separate_estimates,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStatistics {
    pub distance: f64,
    /// Average power gain `ρ²`.
    pub avg_power: f64,
    /// Fraction of `ρ²` carried by the LoS tap.
    pub los_fraction: f64,
    pub taps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStatisticsSet {
    pub direct: LinkStatistics,
    pub ap_ris: LinkStatistics,
    pub ris_ue: LinkStatistics,
    /// Per-element cascade; `distance` is the reflected path length.
    pub cascaded: LinkStatistics,
}

/// LoS fraction under a uniform power delay profile: `γ / (γ + L - 1)`.
pub fn los_fraction(rician: f64, taps: usize) -> f64 {
    rician / (rician + (taps as f64 - 1.0))
}

fn link(
    name: &'static str,
    distance: f64,
    exponent: f64,
    rician: f64,
    taps: usize,
    c0: f64,
) -> Result<LinkStatistics> {
    if !(distance > 0.0) {
        return Err(Error::ZeroDistance { link: name });
    }
    let kappa = los_fraction(rician, taps);
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::LosFractionOutOfRange { link: name, kappa });
    }
    Ok(LinkStatistics {
        distance,
        avg_power: c0 * distance.powf(-exponent),
        los_fraction: kappa,
        taps,
    })
}

pub fn derive_link_statistics(cfg: &SystemConfig) -> Result<LinkStatisticsSet> {
    let g = &cfg.geometry;
    let c0 = cfg.reference_loss;
    let direct = link(
        "direct",
        g.ap_ue_distance(),
        cfg.pathloss_exp_direct,
        cfg.rician_direct,
        cfg.taps_direct,
        c0,
    )?;
    let ap_ris = link(
        "ap-ris",
        g.ap_ris_distance(),
        cfg.pathloss_exp_ap_ris,
        cfg.rician_ap_ris,
        cfg.taps_ap_ris,
        c0,
    )?;
    let ris_ue = link(
        "ris-ue",
        g.ris_ue_distance(),
        cfg.pathloss_exp_ris_ue,
        cfg.rician_ris_ue,
        cfg.taps_ris_ue,
        c0,
    )?;
    let cascaded = LinkStatistics {
        distance: ap_ris.distance + ris_ue.distance,
        avg_power: ap_ris.avg_power * ris_ue.avg_power,
        los_fraction: ap_ris.los_fraction * ris_ue.los_fraction,
        taps: cfg.cascaded_taps(),
    };
    Ok(LinkStatisticsSet {
        direct,
        ap_ris,
        ris_ue,
        cascaded,
    })
}

/// What a random stream is used for. Each purpose gets its own stream per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Channel = 0,
    TrainingSet = 1,
    UplinkNoise = 2,
    SeparateNoise = 3,
    Pilot = 4,
    Oracle = 5,
}

/// Derives independent ChaCha streams from one master seed.
///
/// Stream id is `trial << 4 | purpose`, so identical `(seed, trial, purpose)`
/// triples always reproduce the same draws regardless of which worker runs them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl SeedPolicy {
    pub const MAX_TRIALS: u64 = 1 << 59;

    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn rng(&self, trial: u64, purpose: Purpose) -> ChaCha8Rng {
        assert!(trial < Self::MAX_TRIALS, "trial index {trial} out of range");
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream((trial << 4) | purpose as u64);
        rng
    }

    /// Scenario-wide stream (not tied to a trial), used for the uplink pilot.
    pub fn scenario_rng(&self, purpose: Purpose) -> ChaCha8Rng {
        self.rng(Self::MAX_TRIALS - 1, purpose)
    }
}
