use crate::domain::{
    check_schedule, overdue_time, patient_cost, waiting_time, Category, Day, ObjectiveWeights, Patient, PatientId,
    Schedule,
};
use crate::error::{Error, Result};
use crate::instancegen::Instance;
use crate::ipcore::{BranchAndBound, SolveStatus, SolverBudget};
use crate::learning::WaitingPredictor;
use crate::strategies::{
    schedule_batch_ip, schedule_daily_greedy_batch, schedule_offline, schedule_online_greedy,
    schedule_palliative_online, schedule_prediction_based, Cadence, ScheduleState, StrategyKind, DEFAULT_SEARCH_WINDOW,
};
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub weights: ObjectiveWeights,
    /// Solver for the daily and weekly IP batches.
    pub batch_solver: BranchAndBound,
    /// Solver for the single offline curative model.
    pub offline_solver: BranchAndBound,
    pub search_window: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            weights: ObjectiveWeights::default(),
            batch_solver: BranchAndBound::new(SolverBudget::nodes(20_000)),
            offline_solver: BranchAndBound::new(SolverBudget::nodes(20_000)),
            search_window: DEFAULT_SEARCH_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub id: PatientId,
    pub category: Category,
    pub admission_day: Day,
    pub ready_day: Day,
    pub due_day: Day,
    pub start_day: Day,
    pub linac: usize,
    pub waiting: u32,
    pub overdue: u32,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySummary {
    pub category: Category,
    pub count: usize,
    /// `None` when the category had no arrivals.
    pub mean_waiting: Option<f64>,
    pub mean_overdue: Option<f64>,
    pub max_waiting: u32,
    pub max_overdue: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub strategy: StrategyKind,
    /// Requested reservation rate; offline applies none.
    pub gamma: f64,
    pub seed: u64,
    pub num_patients: usize,
    /// Sum of patient costs.
    pub objective: f64,
    /// Mean fleet occupancy over the simulated days, in percent.
    pub avg_occupancy: f64,
    /// Status of the offline solve; `None` for online strategies.
    pub solve_status: Option<SolveStatus>,
    pub per_category: Vec<CategorySummary>,
    pub records: Vec<PatientRecord>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl SimResult {
    pub fn category(&self, category: Category) -> &CategorySummary {
        &self.per_category[category.index()]
    }

    /// Mean of `metric` over the records of `category`.
    pub fn mean_of(&self, category: Category, metric: Metric) -> Option<f64> {
        let values: Vec<f64> = self.records.iter().filter(|r| r.category == category).map(|r| metric.of(r)).collect();
        crate::harness::stats::mean(&values)
    }

    pub fn palliative_mean_overdue(&self) -> Option<f64> {
        let values: Vec<f64> =
            self.records.iter().filter(|r| r.category.is_palliative()).map(|r| r.overdue as f64).collect();
        crate::harness::stats::mean(&values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Waiting,
    Overdue,
}

impl Metric {
    pub fn of(self, r: &PatientRecord) -> f64 {
        match self {
            Metric::Waiting => r.waiting as f64,
            Metric::Overdue => r.overdue as f64,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Waiting => "waiting",
            Metric::Overdue => "overdue",
        }
    }
}

/// Reservation rate actually applied by `strategy`.
pub fn effective_gamma(strategy: StrategyKind, gamma: f64) -> f64 {
    if strategy.reserves() {
        gamma
    } else {
        0.0
    }
}

/// Replays the instance's arrivals day by day under `strategy`.
///
/// Online strategies act at admission; batch strategies at the end of the
/// day, weekly ones on Fridays and on the last simulated day. The final
/// schedule is re-checked for feasibility before results are computed.
pub fn run_simulation(
    instance: &Instance,
    strategy: StrategyKind,
    gamma: f64,
    config: &SimConfig,
    predictor: Option<&dyn WaitingPredictor>,
) -> Result<SimResult> {
    let started = Instant::now();
    let applied = effective_gamma(strategy, gamma);
    let (schedule, solve_status) = match strategy {
        StrategyKind::Offline => {
            let out = schedule_offline(instance, config.weights, &config.offline_solver)?;
            (out.schedule, Some(out.solution.status))
        }
        _ => (run_online(instance, strategy, applied, config, predictor)?, None),
    };
    let patients: Vec<Patient> = instance.flow.patients().cloned().collect();
    let occupancy = check_schedule(&instance.scenario, &patients, &schedule, applied).map_err(Error::Infeasible)?;

    let mut result = summarize(instance, strategy, gamma, &config.weights, &schedule)?;
    result.solve_status = solve_status;
    let scenario = &instance.scenario;
    let days: Vec<Day> = instance.flow.days().collect();
    if !days.is_empty() {
        let share: f64 = days
            .iter()
            .map(|&d| {
                let used: u32 = (0..scenario.num_linacs).map(|l| occupancy.cell(d, l).total()).sum::<u32>()
                    + scenario.fleet_committed(d);
                used as f64 / scenario.fleet_total(d) as f64
            })
            .sum();
        result.avg_occupancy = 100.0 * share / days.len() as f64;
    }
    result.runtime = started.elapsed();
    Ok(result)
}

fn run_online(
    instance: &Instance,
    strategy: StrategyKind,
    gamma: f64,
    config: &SimConfig,
    predictor: Option<&dyn WaitingPredictor>,
) -> Result<Schedule> {
    if strategy == StrategyKind::PredictionBased && predictor.is_none() {
        return Err(Error::ModelMissing);
    }
    let mut state = ScheduleState::new(instance.scenario.clone(), gamma)?.with_search_window(config.search_window);
    let mut pending: Vec<Patient> = Vec::new();
    let last_day = instance.flow.end_day().saturating_sub(1);
    for day in instance.flow.days() {
        state.set_current_day(day);
        let wrap = |e: Error| Error::Simulation { day, source: Box::new(e) };
        let today = instance.flow.on_day(day);
        match strategy {
            StrategyKind::OnlineGreedy => {
                for p in today {
                    if p.is_palliative() {
                        schedule_palliative_online(&mut state, p).map_err(wrap)?;
                    } else {
                        schedule_online_greedy(&mut state, p).map_err(wrap)?;
                    }
                }
            }
            StrategyKind::PredictionBased => {
                let model = predictor.ok_or(Error::ModelMissing)?;
                for p in today {
                    schedule_prediction_based(&mut state, p, model).map_err(wrap)?;
                }
            }
            StrategyKind::DailyGreedy => {
                for p in today {
                    if p.is_palliative() {
                        schedule_palliative_online(&mut state, p).map_err(wrap)?;
                    } else {
                        pending.push(p.clone());
                    }
                }
                schedule_daily_greedy_batch(&mut state, &pending).map_err(wrap)?;
                pending.clear();
            }
            StrategyKind::DailyIp | StrategyKind::WeeklyIp => {
                for p in today.iter().filter(|p| p.is_palliative()) {
                    schedule_palliative_online(&mut state, p).map_err(wrap)?;
                }
                pending.extend(today.iter().filter(|p| p.is_curative()).cloned());
                let cadence = if strategy == StrategyKind::DailyIp { Cadence::Daily } else { Cadence::Weekly };
                if cadence.fires_on(day) || day == last_day {
                    schedule_batch_ip(&mut state, &pending, &config.batch_solver, config.weights).map_err(wrap)?;
                    pending.clear();
                }
            }
            StrategyKind::Offline => unreachable!("offline is not replayed"),
        }
    }
    Ok(state.schedule().clone())
}

/// Per-patient records and category means of a finished schedule.
pub fn summarize(
    instance: &Instance,
    strategy: StrategyKind,
    gamma: f64,
    weights: &ObjectiveWeights,
    schedule: &Schedule,
) -> Result<SimResult> {
    let mut records = Vec::with_capacity(instance.flow.len());
    let mut missing = Vec::new();
    for p in instance.flow.patients() {
        let Some(slot) = schedule.get(p.id) else {
            missing.push(p.id);
            continue;
        };
        records.push(PatientRecord {
            id: p.id,
            category: p.category,
            admission_day: p.admission_day,
            ready_day: p.ready_day,
            due_day: p.due_day,
            start_day: slot.start_day,
            linac: slot.linac,
            waiting: waiting_time(p, slot.start_day)?,
            overdue: overdue_time(p, slot.start_day)?,
            cost: patient_cost(p, slot.start_day, weights)?,
        });
    }
    if !missing.is_empty() {
        return Err(Error::Unassigned(missing));
    }
    let per_category = Category::ALL.iter().map(|&c| category_summary(&records, c)).collect();
    let objective = crate::domain::cost::sum_costs(records.iter().map(|r| r.cost).collect());
    Ok(SimResult {
        strategy,
        gamma,
        seed: instance.rng_seed,
        num_patients: records.len(),
        objective,
        avg_occupancy: 0.0,
        solve_status: None,
        per_category,
        records,
        runtime: Duration::ZERO,
    })
}

fn category_summary(records: &[PatientRecord], category: Category) -> CategorySummary {
    let rs: Vec<&PatientRecord> = records.iter().filter(|r| r.category == category).collect();
    let n = rs.len();
    let mean = |f: fn(&PatientRecord) -> u32| (n > 0).then(|| rs.iter().map(|r| f(r) as f64).sum::<f64>() / n as f64);
    CategorySummary {
        category,
        count: n,
        mean_waiting: mean(|r| r.waiting),
        mean_overdue: mean(|r| r.overdue),
        max_waiting: rs.iter().map(|r| r.waiting).max().unwrap_or(0),
        max_overdue: rs.iter().map(|r| r.overdue).max().unwrap_or(0),
    }
}
