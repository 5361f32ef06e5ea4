//! Radiotherapy allocation scheduling.
//!
//! Patients arrive day by day and need a block of consecutive business-day
//! treatment fractions on a single linear accelerator (linac). This crate
//! provides:
//!
//! * [`domain`]: patients, scenarios, schedules and the waiting/overdue cost.
//! * [`instancegen`]: a synthetic patient pool, Poisson arrival flows and the
//!   greedy warm-up that produces partially booked scenarios.
//! * [`ipcore`]: the allocation integer program with an exact branch-and-bound
//!   solver and a brute-force oracle.
//! * [`strategies`]: offline, online-greedy, daily-greedy, daily-IP, weekly-IP
//!   and prediction-based scheduling.
//! * [`learning`]: training-example extraction from offline schedules and a
//!   gradient-boosted regression-tree model that predicts waiting time.
//! * [`explain`]: exact tree Shapley attributions for that model.
//! * [`harness`]: the rolling-horizon simulator, capacity simulations,
//!   experiments and the statistical tests used to compare strategies.

pub mod domain;
pub mod error;
pub mod explain;
pub mod harness;
pub mod instancegen;
pub mod ipcore;
pub mod learning;
pub mod strategies;

pub use domain::{
    check_schedule, overdue_time, patient_cost, schedule_cost, waiting_time, Assignment, Calendar, Category, Day,
    ObjectiveWeights, Occupancy, Patient, PatientId, Scenario, Schedule, Violation,
};
pub use error::{Error, Result};
pub use explain::{tree_shap, Attribution};
pub use instancegen::{Instance, InstanceSetting, PatientFlow, PatientPool};
pub use ipcore::{BranchAndBound, IpModel, IpSolution, IpSolver, SolveStatus, SolverBudget};
pub use learning::{FeatureVector, GbtModel, GbtParams, TrainingExample, WaitingPredictor};
pub use strategies::{ScheduleState, StrategyKind};
