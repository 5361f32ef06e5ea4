use super::stats::slope;
use crate::domain::{Scenario, DEFAULT_DAY_CAPACITY};
use crate::error::Result;
use crate::instancegen::{generate_flow, InstanceSetting, PatientPool};
use crate::strategies::{curative_scan_start, schedule_online_greedy, schedule_palliative_online, ScheduleState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Weeks skipped before demand is measured; by then the load of every
/// possible earlier arrival is in place.
pub const DEMAND_BURN_IN_WEEKS: u32 = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandReport {
    /// Blocks booked on each measured week.
    pub weekly_demand: Vec<u64>,
    pub weekly_capacity: u64,
    pub mean_weekly_demand: f64,
    /// `5 * rate * E[p * I]`.
    pub expected_weekly_demand: f64,
    pub weeks_over_capacity: usize,
}

/// Greedy booking with unlimited capacity: palliatives start on their ready
/// day, curatives on their greedy scan start. Reports the demand landing on
/// each week after the burn-in.
pub fn capacity_sim_uncapped(
    setting: &InstanceSetting,
    pool: &PatientPool,
    num_days: u32,
    seed: u64,
) -> Result<DemandReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flow = generate_flow(setting, 0, num_days, 0, pool, &mut rng)?;
    let mut per_day = vec![0u64; num_days as usize];
    for p in flow.patients() {
        let start = if p.is_palliative() { p.ready_day } else { curative_scan_start(p) };
        for d in start..=p.last_day(start) {
            if let Some(slot) = per_day.get_mut(d as usize) {
                *slot += p.fraction_blocks as u64;
            }
        }
    }
    let weeks = num_days / 5;
    let weekly_demand: Vec<u64> = (DEMAND_BURN_IN_WEEKS.min(weeks)..weeks)
        .map(|w| per_day[(w * 5) as usize..(w * 5 + 5) as usize].iter().sum())
        .collect();
    let weekly_capacity = 5 * setting.num_linacs as u64 * DEFAULT_DAY_CAPACITY as u64;
    let mean_weekly_demand = if weekly_demand.is_empty() {
        0.0
    } else {
        weekly_demand.iter().sum::<u64>() as f64 / weekly_demand.len() as f64
    };
    Ok(DemandReport {
        weeks_over_capacity: weekly_demand.iter().filter(|&&d| d > weekly_capacity).count(),
        weekly_demand,
        weekly_capacity,
        mean_weekly_demand,
        expected_weekly_demand: 5.0 * setting.arrival_rate * pool.expected_blocks_per_patient(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaitingTrend {
    /// Mean waiting of the patients admitted each week; `None` for weeks without arrivals.
    pub weekly_mean_waiting: Vec<Option<f64>>,
    /// Least-squares slope over the weeks with arrivals, in days per week.
    pub slope: Option<f64>,
}

/// Online greedy on an empty fleet with real capacity. A rising weekly mean
/// waiting time marks an arrival rate the fleet cannot absorb.
pub fn capacity_sim_waiting(
    setting: &InstanceSetting,
    pool: &PatientPool,
    num_days: u32,
    seed: u64,
) -> Result<WaitingTrend> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flow = generate_flow(setting, 0, num_days, 0, pool, &mut rng)?;
    // Room for waiting times several times the period under heavy overload.
    let horizon = num_days * 4 + 200;
    let scenario = Scenario::uniform(setting.num_linacs, horizon, DEFAULT_DAY_CAPACITY);
    let mut state = ScheduleState::new(scenario, 0.0)?.with_search_window(horizon);
    let weeks = num_days.div_ceil(5) as usize;
    let mut sums = vec![(0.0, 0usize); weeks];
    for (day, p) in flow.arrivals() {
        state.set_current_day(day);
        let slot = if p.is_palliative() {
            schedule_palliative_online(&mut state, p)?
        } else {
            schedule_online_greedy(&mut state, p)?
        };
        let w = (day / 5) as usize;
        sums[w].0 += (slot.start_day - p.admission_day) as f64;
        sums[w].1 += 1;
    }
    let weekly_mean_waiting: Vec<Option<f64>> = sums.iter().map(|&(s, n)| (n > 0).then(|| s / n as f64)).collect();
    let (x, y): (Vec<f64>, Vec<f64>) =
        weekly_mean_waiting.iter().enumerate().filter_map(|(w, m)| m.map(|m| (w as f64, m))).unzip();
    Ok(WaitingTrend { slope: slope(&x, &y), weekly_mean_waiting })
}

/// Arrival rate whose expected demand equals the fleet's capacity.
pub fn analytic_capacity_rate(num_linacs: usize, pool: &PatientPool) -> f64 {
    (num_linacs as f64 * DEFAULT_DAY_CAPACITY as f64) / pool.expected_blocks_per_patient()
}
