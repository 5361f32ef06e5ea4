use crate::domain::{Day, Patient};
use crate::error::{Error, Result};
use crate::strategies::ScheduleState;
use serde::{Deserialize, Serialize};

/// Days of fleet capacity in the feature vector.
pub const CAPACITY_DAYS: usize = 50;
pub const NUM_FEATURES: usize = CAPACITY_DAYS + 4;

pub const READY_OFFSET: usize = CAPACITY_DAYS;
pub const DUE_OFFSET: usize = CAPACITY_DAYS + 1;
pub const FRACTIONS: usize = CAPACITY_DAYS + 2;
pub const FRACTION_BLOCKS: usize = CAPACITY_DAYS + 3;

pub fn feature_name(index: usize) -> String {
    match index {
        i if i < CAPACITY_DAYS => format!("capacity_d{i}"),
        READY_OFFSET => "ready_offset".into(),
        DUE_OFFSET => "due_offset".into(),
        FRACTIONS => "fractions".into(),
        FRACTION_BLOCKS => "fraction_blocks".into(),
        i => format!("feature_{i}"),
    }
}

pub fn feature_names() -> Vec<String> {
    (0..NUM_FEATURES).map(feature_name).collect()
}

/// Fleet-summed remaining capacity of days `day .. day + 50`.
pub fn present_capacity_vector(state: &ScheduleState, day: Day) -> Result<Vec<f64>> {
    let end = day + CAPACITY_DAYS as Day;
    if end > state.horizon() {
        return Err(Error::HorizonOverflow { day: end, horizon: state.horizon() });
    }
    Ok((day..end).map(|d| state.fleet_remaining(d) as f64).collect())
}

/// Model input: 50 days of present capacity from the admission day, then
/// ready offset, due offset, fraction count and fraction length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != NUM_FEATURES {
            return Err(Error::FeatureLength { got: values.len(), expected: NUM_FEATURES });
        }
        Ok(FeatureVector(values))
    }

    pub fn from_parts(capacities: &[f64], patient: &Patient) -> Result<Self> {
        let mut values = capacities.to_vec();
        values.extend([
            patient.ready_offset() as f64,
            patient.due_offset() as f64,
            patient.fractions as f64,
            patient.fraction_blocks as f64,
        ]);
        Self::new(values)
    }

    /// Features of `patient` against the capacity remaining in `state`.
    pub fn from_state(state: &ScheduleState, patient: &Patient) -> Result<Self> {
        Self::from_parts(&present_capacity_vector(state, patient.admission_day)?, patient)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn capacities(&self) -> &[f64] {
        &self.0[..CAPACITY_DAYS]
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(x: FeatureVector) -> Self {
        x.0
    }
}
