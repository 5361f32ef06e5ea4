use chrono::NaiveDate;
use radsched_core::domain::{Category, Day, Patient, PatientId};
use radsched_core::explain::Waterfall;
use radsched_core::{Attribution, StrategyKind};
use serde::{Deserialize, Serialize};

/// Patient as entered by a clerk. The due day follows from the category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientInput {
    pub id: u32,
    pub category: Category,
    /// Defaults to the service's current day.
    #[serde(default)]
    pub admission_day: Option<Day>,
    pub ready_offset: u32,
    pub fractions: u32,
    pub fraction_blocks: u32,
}

impl PatientInput {
    pub fn from_patient(p: &Patient) -> Self {
        PatientInput {
            id: p.id.0,
            category: p.category,
            admission_day: Some(p.admission_day),
            ready_offset: p.ready_offset(),
            fractions: p.fractions,
            fraction_blocks: p.fraction_blocks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestRequest {
    pub patient: PatientInput,
    /// Defaults to prediction-based for curatives when a model is loaded,
    /// online greedy otherwise.
    #[serde(default)]
    pub strategy: Option<StrategyKind>,
}

/// Proof of a suggestion, exchanged for a booking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookingToken {
    pub suggestion_id: String,
    /// State version the suggestion was computed against.
    pub version: u64,
    /// Milliseconds since the Unix epoch.
    pub expires_at_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub id: String,
    pub patient: Patient,
    pub strategy: StrategyKind,
    pub predicted_waiting: Option<u32>,
    pub start_day: Day,
    pub linac: usize,
    pub date: NaiveDate,
    pub waiting: u32,
    pub overdue: u32,
    /// Present for model-backed suggestions.
    pub attribution: Option<Attribution>,
    pub token: BookingToken,
}

/// Either a suggestion token, or a forced slot chosen by the clerk.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BookingRequest {
    #[serde(default)]
    pub token: Option<BookingToken>,
    #[serde(default)]
    pub force: bool,
    #[serde(default)]
    pub patient: Option<PatientInput>,
    #[serde(default)]
    pub start_day: Option<Day>,
    #[serde(default)]
    pub linac: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookingReceipt {
    pub patient: PatientId,
    pub start_day: Day,
    pub linac: usize,
    pub date: NaiveDate,
    pub forced: bool,
    /// State version after the booking.
    pub version: u64,
    /// SHA-256 of the committed schedule.
    pub digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OccupancyQuery {
    pub from: Option<Day>,
    pub days: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyCell {
    pub linac: usize,
    pub total: u32,
    pub remaining: u32,
    /// Blocks held back for palliatives.
    pub reserved: u32,
    pub curative_remaining: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyDay {
    pub day: Day,
    pub date: NaiveDate,
    pub fleet_remaining: u32,
    pub linacs: Vec<OccupancyCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyMap {
    pub version: u64,
    pub from: Day,
    pub days: Vec<OccupancyDay>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub suggestion_id: String,
    pub attribution: Attribution,
    pub waterfall: Waterfall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfRequest {
    pub patient: PatientInput,
    /// Defaults to every interactive strategy.
    #[serde(default)]
    pub strategies: Vec<StrategyKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfOutcome {
    pub strategy: StrategyKind,
    pub suggestion: Option<Suggestion>,
    pub error: Option<ErrorBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResponse {
    pub outcomes: Vec<WhatIfOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub version: u64,
    pub current_day: Day,
    pub booked: usize,
    pub gamma: f64,
    pub digest: String,
    pub model_loaded: bool,
}

/// JSON error payload. Version conflicts carry a fresh suggestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fresh: Option<Box<Suggestion>>,
}
