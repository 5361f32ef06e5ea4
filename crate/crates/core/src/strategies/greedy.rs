use super::ScheduleState;
use crate::domain::{Assignment, Category, Day, Patient, PatientId};
use crate::error::{Error, Result};

/// Business days the greedy heuristic skips before scanning: one week for P3,
/// two for P4.
pub const P3_SCAN_OFFSET: u32 = 5;
pub const P4_SCAN_OFFSET: u32 = 10;

/// First day the greedy heuristic considers for a patient.
pub fn curative_scan_start(patient: &Patient) -> Day {
    let offset = match patient.category {
        Category::P3 => P3_SCAN_OFFSET,
        Category::P4 => P4_SCAN_OFFSET,
        Category::P1 | Category::P2 => 0,
    };
    patient.ready_day.max(patient.admission_day + offset)
}

/// Earliest eligible slot for a palliative, reserved capacity included.
pub fn plan_palliative_online(state: &ScheduleState, patient: &Patient) -> Result<Assignment> {
    let from = state.current_day().max(patient.ready_day);
    state.first_eligible_day(patient, from, false)
}

pub fn schedule_palliative_online(state: &mut ScheduleState, patient: &Patient) -> Result<Assignment> {
    let slot = plan_palliative_online(state, patient)?;
    state.book(patient, slot)?;
    Ok(slot)
}

pub fn plan_online_greedy(state: &ScheduleState, patient: &Patient) -> Result<Assignment> {
    if patient.is_palliative() {
        return Err(Error::InvalidParameter(format!(
            "greedy curative scan called for palliative patient {}",
            patient.id
        )));
    }
    let from = state.current_day().max(curative_scan_start(patient));
    state.first_eligible_day(patient, from, true)
}

pub fn schedule_online_greedy(state: &mut ScheduleState, patient: &Patient) -> Result<Assignment> {
    let slot = plan_online_greedy(state, patient)?;
    state.book(patient, slot)?;
    Ok(slot)
}

/// Batch order: most urgent due day first, then more fractions, then longer
/// fractions; arrival order breaks the remaining ties.
pub fn batch_order(patients: &[Patient]) -> Vec<&Patient> {
    let mut ordered: Vec<&Patient> = patients.iter().collect();
    ordered.sort_by(|a, b| {
        a.due_day
            .cmp(&b.due_day)
            .then(b.fractions.cmp(&a.fractions))
            .then(b.fraction_blocks.cmp(&a.fraction_blocks))
            .then((a.admission_day, a.admission_seq, a.id).cmp(&(b.admission_day, b.admission_seq, b.id)))
    });
    ordered
}

/// End-of-day greedy pass over the day's curatives.
pub fn schedule_daily_greedy_batch(
    state: &mut ScheduleState,
    patients: &[Patient],
) -> Result<Vec<(PatientId, Assignment)>> {
    batch_order(patients).into_iter().map(|p| schedule_online_greedy(state, p).map(|slot| (p.id, slot))).collect()
}
