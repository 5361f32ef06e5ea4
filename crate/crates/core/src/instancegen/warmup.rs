use super::{generate_flow, InstanceSetting, PatientPool};
use crate::domain::{Day, Patient, Scenario, DEFAULT_DAY_CAPACITY};
use crate::error::{Error, Result};
use crate::strategies::{schedule_online_greedy, schedule_palliative_online, ScheduleState};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Days kept past the last warm-up day so late greedy bookings stay in range.
const WARMUP_PAD: u32 = 160;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmupConfig {
    /// Fleet-wide occupancy share of a day that ends the warm-up.
    pub threshold: f64,
    pub max_days: u32,
    pub day_capacity: u32,
}

impl Default for WarmupConfig {
    fn default() -> Self {
        WarmupConfig { threshold: 0.9, max_days: 400, day_capacity: DEFAULT_DAY_CAPACITY }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarmupOutcome {
    /// Last discarded day of the warm-up schedule.
    pub stop_day: Day,
    pub scenario: Scenario,
}

/// Pre-fills an empty fleet with online-greedy bookings until some day, at
/// its start, is occupied to `threshold` of fleet capacity.
///
/// `arrivals(d)` supplies day `d`'s patients. The returned scenario holds the
/// load booked on days after the stop day, moved so that the first of them is
/// day 0, over `horizon_days` days.
pub fn warmup_with<F>(
    num_linacs: usize,
    config: &WarmupConfig,
    horizon_days: u32,
    mut arrivals: F,
) -> Result<WarmupOutcome>
where
    F: FnMut(Day) -> Result<Vec<Patient>>,
{
    if !(0.0..=1.0).contains(&config.threshold) {
        return Err(Error::InvalidParameter(format!("warm-up threshold {} outside [0, 1]", config.threshold)));
    }
    let fleet = Scenario::uniform(num_linacs, config.max_days + WARMUP_PAD, config.day_capacity);
    let mut state = ScheduleState::new(fleet, 0.0)?;
    let mut stop = None;
    for day in 0..config.max_days {
        let capacity = state.scenario().fleet_total(day) as f64;
        let occupied = (capacity - state.fleet_remaining(day) as f64).max(0.0);
        if occupied >= config.threshold * capacity {
            stop = Some(day);
            break;
        }
        state.set_current_day(day);
        for p in arrivals(day)? {
            if p.is_palliative() {
                schedule_palliative_online(&mut state, &p)?;
            } else {
                schedule_online_greedy(&mut state, &p)?;
            }
        }
    }
    let stop_day = stop.ok_or(Error::WarmupExhausted(config.max_days))?;

    let mut scenario = Scenario::uniform(num_linacs, horizon_days, config.day_capacity);
    for k in 0..horizon_days {
        let src = stop_day + 1 + k;
        if src >= state.horizon() {
            break;
        }
        for linac in 0..num_linacs {
            scenario.committed[k as usize][linac] = state.used(src, linac);
        }
    }
    scenario.validate()?;
    Ok(WarmupOutcome { stop_day, scenario })
}

/// Warm-up on a fresh Poisson flow with the setting's arrival rate.
pub fn warmup_scenario<R: Rng + ?Sized>(
    setting: &InstanceSetting,
    pool: &PatientPool,
    config: &WarmupConfig,
    horizon_days: u32,
    rng: &mut R,
) -> Result<WarmupOutcome> {
    let mut next_id = 0;
    warmup_with(setting.num_linacs, config, horizon_days, |day| {
        let flow = generate_flow(setting, day, 1, next_id, pool, rng)?;
        next_id += flow.len() as u32;
        Ok(flow.arrivals.into_iter().next().unwrap_or_default())
    })
}
