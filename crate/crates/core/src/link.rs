use num_complex::Complex64;
use rand::Rng;

use crate::channel::{sample_channel_realization, ChannelRealization};
use crate::config::{derive_link_statistics, LinkStatisticsSet, Purpose, SeedPolicy, SystemConfig};
use crate::error::Result;
use crate::estimation::{PilotVector, UplinkTraining};
use crate::ofdm::Dft;

/// Immutable per-scenario state shared by every trial: configuration, link
/// statistics, the planned DFT and the uplink pilot.
#[derive(Debug, Clone)]
pub struct LinkSimulator {
    cfg: SystemConfig,
    stats: LinkStatisticsSet,
    dft: Dft,
    pilot: PilotVector,
}

impl LinkSimulator {
    /// Draws the constant-modulus pilot from the scenario-wide pilot stream.
    pub fn new(cfg: SystemConfig, seeds: &SeedPolicy) -> Result<Self> {
        let pilot = PilotVector::constant_modulus(
            cfg.num_subcarriers,
            &mut seeds.scenario_rng(Purpose::Pilot),
        );
        Self::with_pilot(cfg, pilot)
    }

    pub fn with_pilot(cfg: SystemConfig, pilot: PilotVector) -> Result<Self> {
        cfg.validate()?;
        let stats = derive_link_statistics(&cfg)?;
        let dft = Dft::new(cfg.num_subcarriers);
        if pilot.len() != cfg.num_subcarriers {
            return Err(crate::Error::DimensionMismatch {
                expected: cfg.num_subcarriers,
                actual: pilot.len(),
            });
        }
        Ok(Self {
            cfg,
            stats,
            dft,
            pilot,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &LinkStatisticsSet {
        &self.stats
    }

    pub fn dft(&self) -> &Dft {
        &self.dft
    }

    pub fn pilot(&self) -> &PilotVector {
        &self.pilot
    }

    pub fn sample_channel<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChannelRealization> {
        sample_channel_realization(&self.stats, &self.cfg, rng)
    }

    pub fn training(&self, noise_enabled: bool) -> UplinkTraining<'_> {
        UplinkTraining {
            dft: &self.dft,
            pilot: &self.pilot,
            pilot_power: self.cfg.uplink_pilot_power,
            noise: if noise_enabled {
                self.cfg.noise_ap
            } else {
                0.0
            },
        }
    }

    /// `|f_n^H h|²` for every subcarrier.
    pub fn power_gains(&self, h: &[Complex64]) -> Vec<f64> {
        let mut buf = h.to_vec();
        self.dft.forward_in_place(&mut buf);
        buf.iter().map(|g| g.norm_sqr()).collect()
    }
}
