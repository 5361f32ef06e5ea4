//! The allocation integer program and its solvers.
//!
//! One binary decision per (new patient, start day, linac): each patient gets
//! exactly one start on or after its ready day, every fraction fits in the
//! available capacity of its cell, and curative load stays out of the
//! reserved share of each cell. The model is solved by [`BranchAndBound`];
//! [`brute_force`] enumerates tiny models exhaustively and serves as its oracle.

mod bnb;
mod brute;
mod model;

pub use bnb::{BranchAndBound, LnsConfig};
pub use brute::{brute_force, BRUTE_FORCE_LIMIT};
pub use model::{default_horizon_len, IpModel, SAMPLE_HORIZON};

use crate::domain::{Assignment, Day, PatientId};
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// Search completed; the objective is minimal.
    Optimal,
    /// Budget exhausted; the assignment is the best incumbent.
    Feasible,
    /// Search completed without finding any feasible assignment.
    Infeasible,
    /// Budget exhausted before any feasible assignment was found.
    Unknown,
}

/// Search limits. `None` means unlimited.
///
/// Only the node limit keeps results reproducible; a binding time limit makes
/// the incumbent depend on machine speed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverBudget {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
}

impl SolverBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn nodes(limit: u64) -> Self {
        SolverBudget { time_limit: None, node_limit: Some(limit) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes: u64,
    /// Lower bound at the root, before any branching.
    pub root_bound: f64,
    pub lns_improvements: u32,
}

/// Per-candidate capacity probe explaining why a patient could not be placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityProbe {
    pub day: Day,
    pub linac: usize,
    /// Smallest remaining capacity over the fraction window.
    pub min_available: u32,
    /// Smallest curative cap over the window (equal to `min_available` for palliatives).
    pub min_allowed: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub patient: PatientId,
    pub fraction_blocks: u32,
    /// Whether the patient fails on its own, with no other new patient placed.
    pub alone: bool,
    pub probes: Vec<CapacityProbe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub assignment: BTreeMap<PatientId, Assignment>,
    pub stats: SolverStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<InfeasibilityCertificate>,
}

impl IpSolution {
    pub fn has_assignment(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

/// Seam for plugging in an external MILP engine in place of the built-in solver.
pub trait IpSolver: Send + Sync {
    fn solve(&self, model: &IpModel) -> Result<IpSolution>;
}
