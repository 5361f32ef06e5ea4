use super::{plan_palliative_online, ScheduleState};
use crate::domain::{Assignment, Patient};
use crate::error::Result;
use crate::learning::{FeatureVector, WaitingPredictor};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionPlan {
    pub assignment: Assignment,
    /// `None` for palliatives, which bypass the model.
    pub predicted_waiting: Option<u32>,
    pub features: Option<FeatureVector>,
}

/// Computes the prediction-based slot without booking it.
///
/// Curatives are scanned from `max(today + predicted waiting, ready day)`
/// under the reservation; palliatives take their first eligible day.
pub fn plan_prediction_based(
    state: &ScheduleState,
    patient: &Patient,
    predictor: &dyn WaitingPredictor,
) -> Result<PredictionPlan> {
    if patient.is_palliative() {
        let assignment = plan_palliative_online(state, patient)?;
        return Ok(PredictionPlan { assignment, predicted_waiting: None, features: None });
    }
    let features = FeatureVector::from_state(state, patient)?;
    let waiting = predictor.predict_waiting(&features)?;
    let from = (state.current_day() + waiting).max(patient.ready_day);
    let assignment = state.first_eligible_day(patient, from, true)?;
    Ok(PredictionPlan { assignment, predicted_waiting: Some(waiting), features: Some(features) })
}

pub fn schedule_prediction_based(
    state: &mut ScheduleState,
    patient: &Patient,
    predictor: &dyn WaitingPredictor,
) -> Result<PredictionPlan> {
    let plan = plan_prediction_based(state, patient, predictor)?;
    state.book(patient, plan.assignment)?;
    Ok(plan)
}
