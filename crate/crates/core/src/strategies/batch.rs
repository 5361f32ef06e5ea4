use super::ScheduleState;
use crate::domain::{Assignment, Calendar, Day, ObjectiveWeights, Patient, PatientId};
use crate::error::{Error, Result};
use crate::ipcore::{default_horizon_len, IpModel, IpSolver};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cadence {
    Daily,
    /// Last business day of each week.
    Weekly,
}

impl Cadence {
    pub fn fires_on(self, day: Day) -> bool {
        match self {
            Cadence::Daily => true,
            Cadence::Weekly => Calendar::is_friday(day),
        }
    }
}

/// Solves the batch as one IP on the state's remaining capacity and commits
/// every booking, or none if the solver returns no assignment.
pub fn schedule_batch_ip(
    state: &mut ScheduleState,
    batch: &[Patient],
    solver: &dyn IpSolver,
    weights: ObjectiveWeights,
) -> Result<Vec<(PatientId, Assignment)>> {
    if batch.is_empty() {
        return Ok(Vec::new());
    }
    let start = state.current_day();
    let horizon = default_horizon_len(batch, start).min(state.horizon().saturating_sub(start));
    let model = IpModel::from_state(state, batch.to_vec(), weights, horizon)?;
    let solution = solver.solve(&model)?;
    if !solution.has_assignment() {
        let detail = solution
            .certificate
            .map(|c| format!("; patient {} ({} blocks) has no room", c.patient, c.fraction_blocks))
            .unwrap_or_default();
        return Err(Error::Solver(format!(
            "batch of {} patients on day {start}: {:?}{detail}",
            batch.len(),
            solution.status
        )));
    }
    let mut next = state.clone();
    let mut booked = Vec::with_capacity(batch.len());
    for p in batch {
        let slot = solution.assignment[&p.id];
        next.book(p, slot)?;
        booked.push((p.id, slot));
    }
    *state = next;
    Ok(booked)
}
