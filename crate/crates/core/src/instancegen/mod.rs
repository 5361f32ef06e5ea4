//! Synthetic problem instances.
//!
//! A [`PatientPool`] describes the treatment plans arrivals are drawn from.
//! Daily arrival counts are Poisson ([`generate_flow`]) or Poisson with a
//! rate redrawn every few days ([`generate_variable_flow`]). Each instance
//! starts from a warm-up scenario: an empty fleet is filled by online greedy
//! booking until a day reaches 90% occupancy, and the appointments falling
//! after that day become the fixed load of the new instance.
//!
//! Everything is driven by an explicit seed. Instance `k` of a batch uses
//! seed `base + k`.

mod flow;
mod pool;
mod warmup;

pub use flow::{generate_flow, generate_variable_flow, InstanceSetting, PatientFlow, RateVariation};
pub use pool::{sample_patient, CategoryProfile, DiscreteDist, PatientPool};
pub use warmup::{warmup_scenario, warmup_with, WarmupConfig, WarmupOutcome};

use crate::domain::Scenario;
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Default simulation period, in business days.
pub const DEFAULT_SIM_DAYS: u32 = 180;

/// Days kept after the simulation period so late bookings stay in range.
pub const HORIZON_PAD: u32 = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub num_days: u32,
    pub warmup: WarmupConfig,
    /// Varies the arrival rate of the simulated flow; the warm-up always uses
    /// the base rate.
    pub rate_variation: Option<RateVariation>,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig { num_days: DEFAULT_SIM_DAYS, warmup: WarmupConfig::default(), rate_variation: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub scenario: Scenario,
    pub flow: PatientFlow,
    pub setting: InstanceSetting,
    pub rng_seed: u64,
    /// Segment rates when the flow was generated with a varying rate.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segment_rates: Vec<f64>,
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.flow.validate()?;
        if self.flow.end_day() > self.scenario.horizon_days {
            return Err(Error::HorizonOverflow { day: self.flow.end_day(), horizon: self.scenario.horizon_days });
        }
        if self.scenario.num_linacs != self.setting.num_linacs {
            return Err(Error::InvalidParameter("scenario and setting disagree on fleet size".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let instance: Instance = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        instance.validate()?;
        Ok(instance)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }
}

pub fn generate_instance(
    setting: &InstanceSetting,
    pool: &PatientPool,
    config: &InstanceConfig,
    seed: u64,
) -> Result<Instance> {
    setting.validate()?;
    pool.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = config.num_days + HORIZON_PAD;
    let warm = warmup_scenario(setting, pool, &config.warmup, horizon, &mut rng)?;
    let (flow, segment_rates) = match config.rate_variation {
        Some(v) => generate_variable_flow(setting, 0, config.num_days, 0, v, pool, &mut rng)?,
        None => (generate_flow(setting, 0, config.num_days, 0, pool, &mut rng)?, Vec::new()),
    };
    Ok(Instance { scenario: warm.scenario, flow, setting: *setting, rng_seed: seed, segment_rates })
}

/// `count` instances with seeds `base_seed..base_seed + count`, generated in parallel.
pub fn generate_instances(
    setting: &InstanceSetting,
    pool: &PatientPool,
    config: &InstanceConfig,
    base_seed: u64,
    count: usize,
) -> Result<Vec<Instance>> {
    (0..count as u64).into_par_iter().map(|k| generate_instance(setting, pool, config, base_seed + k)).collect()
}

/// A named clinic setting shipped with the repository.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub setting: InstanceSetting,
    pub rate_variation: Option<RateVariation>,
}

/// Desk-scale setting plus the published fleet/rate combinations.
pub fn presets() -> Vec<Preset> {
    let fixed = |name: &str, linacs, rate| Preset {
        name: name.to_string(),
        setting: InstanceSetting { num_linacs: linacs, arrival_rate: rate },
        rate_variation: None,
    };
    vec![
        fixed("desk-2x2.5", 2, 2.5),
        fixed("4x5.0", 4, 5.0),
        fixed("4x6.0", 4, 6.0),
        fixed("6x7.0", 6, 7.0),
        fixed("6x9.0", 6, 9.0),
        fixed("8x10.0", 8, 10.0),
        fixed("8x12.0", 8, 12.0),
        Preset {
            name: "7x10.1-variable".to_string(),
            setting: InstanceSetting { num_linacs: 7, arrival_rate: 10.1 },
            rate_variation: Some(RateVariation::default()),
        },
    ]
}
