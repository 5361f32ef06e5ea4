use crate::domain::{Day, PatientId};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("patient {patient} cannot start on day {start_day}: ready day is {ready_day}")]
    InfeasibleAssignment { patient: PatientId, start_day: Day, ready_day: Day },

    #[error("invalid patient {id}: {reason}")]
    InvalidPatient { id: PatientId, reason: String },

    #[error("patients missing from schedule: {0:?}")]
    Unassigned(Vec<PatientId>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no eligible start day for patient {patient} in days {from}..{to}")]
    WindowExhausted { patient: PatientId, from: Day, to: Day },

    #[error("cannot build model: {0}")]
    ModelBuild(String),

    #[error("search space too large for exhaustive enumeration (~{estimate:.3e} assignments)")]
    SearchSpaceTooLarge { estimate: f64 },

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("warm-up did not reach the occupancy threshold within {0} days")]
    WarmupExhausted(u32),

    #[error("day {day} lies beyond the scenario horizon of {horizon} days")]
    HorizonOverflow { day: Day, horizon: Day },

    #[error("feature vector has length {got}, expected {expected}")]
    FeatureLength { got: usize, expected: usize },

    #[error("prediction-based scheduling requires a trained model")]
    ModelMissing,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("model file rejected: {0}")]
    ModelFormat(String),

    #[error("schedule violates {} constraint(s); first: {}", .0.len(), .0[0])]
    Infeasible(Vec<crate::domain::Violation>),

    #[error("simulation failed on day {day}: {source}")]
    Simulation {
        day: Day,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
