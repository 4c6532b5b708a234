//! Link-level simulation of RIS-assisted OFDM downlinks.
//!
//! The main scheme sounds the channel under `Q` pre-generated random
//! reflection vectors, estimates only the end-to-end composite channel in each
//! slot, water-fills power on that estimate, and keeps the slot with the best
//! expected rate. Baselines are a single random reflection vector and an
//! alternating optimizer fed by `M + 1` DFT-pattern channel estimates.
//!
//! Module map:
//! - [`config`]: parameters, link statistics, seeding.
//! - [`channel`]: Rician multipath draws and cascaded channels.
//! - [`ofdm`]: DFT convention and rate metrics.
//! - [`estimation`]: uplink pilots, LS and separate-channel estimation.
//! - [`allocation`]: the water-filling power allocation.
//! - [`reflection`] and [`ao`]: the training-set scheme and baselines.
//! - [`analysis`]: best-of-Q scaling law and complexity counts.
//! - [`harness`]: Monte Carlo scenarios and CSV output.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod allocation;
pub mod analysis;
pub mod ao;
pub mod channel;
pub mod config;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod harness;
pub mod link;
pub mod ofdm;
pub mod reflection;

pub use allocation::{water_fill, PowerAllocation};
pub use ao::{ao_optimize, run_ao_scheme, AoCsi, AoOutcome, AoResult, AoSettings};
pub use channel::{ChannelRealization, TapVector};
pub use config::{AoUpdateRule, ConfigFile, SeedPolicy, SystemConfig};
pub use error::{Error, Result};
pub use exec::Execution;
pub use harness::{Axis, ResultRow, Scenario, Scheme};
pub use link::LinkSimulator;
pub use reflection::{ReflectionVector, SchemeOutcome, TrainingSet};
