use crate::domain::{
    cost::{sum_costs, unchecked_cost},
    reserved_blocks, Assignment, Day, ObjectiveWeights, Patient, Scenario,
};
use crate::error::{Error, Result};
use crate::strategies::ScheduleState;

/// Days after the last ready day searched for a start.
pub const SAMPLE_HORIZON: u32 = 50;

/// Planning horizon length from `start_day`: 50 business days past the last
/// ready day, plus room for the longest course.
pub fn default_horizon_len(patients: &[Patient], start_day: Day) -> u32 {
    let last_ready = patients.iter().map(|p| p.ready_day.max(start_day)).max().unwrap_or(start_day);
    let longest = patients.iter().map(|p| p.fractions).max().unwrap_or(1);
    last_ready - start_day + SAMPLE_HORIZON + longest
}

/// Allocation IP over a set of new patients.
///
/// Capacity grids cover days `start_day .. start_day + horizon_len` and are
/// indexed `[(day - start_day) * num_linacs + linac]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IpModel {
    pub patients: Vec<Patient>,
    pub start_day: Day,
    pub horizon_len: u32,
    pub num_linacs: usize,
    /// Capacity left after fixed patients.
    pub available: Vec<u32>,
    pub total: Vec<u32>,
    pub gamma: f64,
    pub weights: ObjectiveWeights,
}

impl IpModel {
    /// Model over the scenario's available capacity, starting on day 0.
    pub fn build(
        scenario: &Scenario,
        patients: Vec<Patient>,
        weights: ObjectiveWeights,
        horizon_len: u32,
    ) -> Result<Self> {
        let days = horizon_len.min(scenario.horizon_days);
        let mut available = Vec::new();
        let mut total = Vec::new();
        for day in 0..days {
            for linac in 0..scenario.num_linacs {
                available.push(scenario.available(day, linac));
                total.push(scenario.total(day, linac));
            }
        }
        Self::from_grids(patients, 0, scenario.num_linacs, available, total, scenario.gamma, weights)
    }

    /// Model over the capacity remaining in a live state, starting on its current day.
    pub fn from_state(
        state: &ScheduleState,
        patients: Vec<Patient>,
        weights: ObjectiveWeights,
        horizon_len: u32,
    ) -> Result<Self> {
        let start = state.current_day();
        let end = (start + horizon_len).min(state.horizon());
        let mut available = Vec::new();
        let mut total = Vec::new();
        for day in start..end {
            for linac in 0..state.num_linacs() {
                available.push(state.remaining(day, linac));
                total.push(state.scenario().total(day, linac));
            }
        }
        Self::from_grids(patients, start, state.num_linacs(), available, total, state.gamma(), weights)
    }

    pub fn from_grids(
        patients: Vec<Patient>,
        start_day: Day,
        num_linacs: usize,
        available: Vec<u32>,
        total: Vec<u32>,
        gamma: f64,
        weights: ObjectiveWeights,
    ) -> Result<Self> {
        if num_linacs == 0 || available.len() != total.len() || available.len() % num_linacs != 0 {
            return Err(Error::ModelBuild("capacity grids do not match the linac count".into()));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::ModelBuild(format!("reservation rate {gamma} outside [0, 1)")));
        }
        let horizon_len = (available.len() / num_linacs) as u32;
        let end = start_day + horizon_len;
        for p in &patients {
            let first = p.ready_day.max(start_day);
            if p.last_day(first) >= end {
                return Err(Error::ModelBuild(format!(
                    "patient {} cannot finish inside the horizon: ready day {}, {} fractions, horizon ends day {}",
                    p.id,
                    p.ready_day,
                    p.fractions,
                    end.saturating_sub(1)
                )));
            }
        }
        Ok(IpModel { patients, start_day, horizon_len, num_linacs, available, total, gamma, weights })
    }

    pub fn end_day(&self) -> Day {
        self.start_day + self.horizon_len
    }

    pub(crate) fn cell(&self, day: Day, linac: usize) -> usize {
        (day - self.start_day) as usize * self.num_linacs + linac
    }

    pub fn available(&self, day: Day, linac: usize) -> u32 {
        self.available[self.cell(day, linac)]
    }

    /// Right-hand side of the reservation constraint: `max(0, avail - gamma * C)`.
    pub fn curative_cap(&self, day: Day, linac: usize) -> u32 {
        let i = self.cell(day, linac);
        self.available[i].saturating_sub(reserved_blocks(self.total[i], self.gamma))
    }

    pub(crate) fn curative_cap_at(&self, cell: usize) -> u32 {
        self.available[cell].saturating_sub(reserved_blocks(self.total[cell], self.gamma))
    }

    /// Feasible (day, linac) choices for patient `i` ignoring other patients,
    /// ordered by day then linac.
    pub fn candidates(&self, i: usize) -> Vec<Assignment> {
        let p = &self.patients[i];
        let first = p.ready_day.max(self.start_day);
        let mut out = Vec::new();
        let mut start = first;
        while p.last_day(start) < self.end_day() {
            for linac in 0..self.num_linacs {
                out.push(Assignment { start_day: start, linac });
            }
            start += 1;
        }
        out
    }

    pub fn cost(&self, i: usize, start_day: Day) -> f64 {
        unchecked_cost(&self.patients[i], start_day, &self.weights)
    }

    /// Objective of a complete assignment, summed in ascending cost order.
    pub fn objective(&self, assignment: &[Assignment]) -> f64 {
        sum_costs(assignment.iter().enumerate().map(|(i, a)| self.cost(i, a.start_day)).collect())
    }

    /// Checks every constraint of the model for a complete assignment.
    pub fn is_feasible(&self, assignment: &[Assignment]) -> bool {
        if assignment.len() != self.patients.len() {
            return false;
        }
        let mut all = vec![0u32; self.available.len()];
        let mut cur = vec![0u32; self.available.len()];
        for (p, a) in self.patients.iter().zip(assignment) {
            if a.start_day < p.ready_day.max(self.start_day)
                || a.linac >= self.num_linacs
                || p.last_day(a.start_day) >= self.end_day()
            {
                return false;
            }
            for day in a.start_day..=p.last_day(a.start_day) {
                let i = self.cell(day, a.linac);
                all[i] += p.fraction_blocks;
                if p.is_curative() {
                    cur[i] += p.fraction_blocks;
                }
            }
        }
        (0..self.available.len()).all(|i| {
            let cap = self.available[i].saturating_sub(reserved_blocks(self.total[i], self.gamma));
            all[i] <= self.available[i] && cur[i] <= cap
        })
    }

    /// Admissible bound for a partial assignment: exact cost of the placed
    /// patients plus, for each open patient, the cost of starting on its
    /// earliest capacity-ignoring day `max(ready, start_day)`.
    pub fn lower_bound(&self, partial: &[Option<Assignment>]) -> f64 {
        let costs = self
            .patients
            .iter()
            .enumerate()
            .map(|(i, p)| match partial.get(i).copied().flatten() {
                Some(a) => self.cost(i, a.start_day),
                None => self.cost(i, p.ready_day.max(self.start_day)),
            })
            .collect();
        sum_costs(costs)
    }
}
