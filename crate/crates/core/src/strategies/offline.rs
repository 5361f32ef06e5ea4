use super::{schedule_palliative_online, ScheduleState};
use crate::domain::{ObjectiveWeights, Patient, Schedule};
use crate::error::{Error, Result};
use crate::instancegen::Instance;
use crate::ipcore::{default_horizon_len, IpModel, IpSolution, IpSolver};

#[derive(Debug, Clone)]
pub struct OfflineSolution {
    pub schedule: Schedule,
    /// Solver result for the curative pass.
    pub solution: IpSolution,
}

/// Schedule with every arrival known in advance.
///
/// Palliatives are replayed in arrival order onto their first eligible day.
/// All curatives of the period are then placed by one IP, decided on the
/// first simulation day, on the capacity the palliatives left and without
/// any reservation.
pub fn schedule_offline(
    instance: &Instance,
    weights: ObjectiveWeights,
    solver: &dyn IpSolver,
) -> Result<OfflineSolution> {
    schedule_offline_reserved(instance, 0.0, weights, solver)
}

/// [`schedule_offline`] with curatives kept out of a `gamma` reservation.
pub fn schedule_offline_reserved(
    instance: &Instance,
    gamma: f64,
    weights: ObjectiveWeights,
    solver: &dyn IpSolver,
) -> Result<OfflineSolution> {
    let mut state = ScheduleState::new(instance.scenario.clone(), gamma)?;
    let first_day = instance.flow.first_day();
    let mut curatives: Vec<Patient> = Vec::new();
    for (day, patient) in instance.flow.arrivals() {
        if patient.is_palliative() {
            state.set_current_day(day);
            schedule_palliative_online(&mut state, patient)
                .map_err(|e| Error::Simulation { day, source: Box::new(e) })?;
        } else {
            curatives.push(patient.clone());
        }
    }

    state.set_current_day(first_day);
    let horizon = default_horizon_len(&curatives, first_day).min(state.horizon().saturating_sub(first_day));
    let model = IpModel::from_state(&state, curatives.clone(), weights, horizon)?;
    let solution = solver.solve(&model)?;
    if !solution.has_assignment() {
        return Err(Error::Solver(format!(
            "offline curative model with {} patients: {:?}",
            curatives.len(),
            solution.status
        )));
    }
    for p in &curatives {
        state.book(p, solution.assignment[&p.id])?;
    }
    Ok(OfflineSolution { schedule: state.schedule().clone(), solution })
}
