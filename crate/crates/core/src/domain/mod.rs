//! Core domain types shared by every other module.
//!
//! All day arithmetic uses business-day indices ([`Day`]); calendar dates only
//! appear at presentation boundaries through [`Calendar`].

mod calendar;
pub(crate) mod cost;
mod patient;
mod scenario;
mod schedule;

pub use calendar::Calendar;
pub use cost::{overdue_time, patient_cost, schedule_cost, waiting_time, ObjectiveWeights};
pub use patient::{Category, Patient, PatientId, MAX_BLOCKS, MAX_FRACTIONS, MIN_BLOCKS};
pub use scenario::{reserved_blocks, Scenario, DEFAULT_DAY_CAPACITY};
pub use schedule::{check_schedule, Assignment, CellLoad, Occupancy, Schedule, Violation};

/// Business-day index. Day 0 is the first business day of the calendar epoch.
pub type Day = u32;
