use super::{reserved_blocks, Day, Patient, PatientId, Scenario};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// First fraction of a patient: all later fractions follow on consecutive
/// business days on the same linac.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub start_day: Day,
    pub linac: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub assignments: BTreeMap<PatientId, Assignment>,
}

impl Schedule {
    pub fn assign(&mut self, id: PatientId, assignment: Assignment) {
        self.assignments.insert(id, assignment);
    }

    pub fn get(&self, id: PatientId) -> Option<Assignment> {
        self.assignments.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PatientId, Assignment)> + '_ {
        self.assignments.iter().map(|(id, a)| (*id, *a))
    }
}

/// Blocks booked on one (day, linac) cell on top of the committed load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellLoad {
    pub palliative: u32,
    pub curative: u32,
}

impl CellLoad {
    pub fn total(&self) -> u32 {
        self.palliative + self.curative
    }
}

/// Per-cell load derived from a schedule, indexed `[day][linac]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occupancy {
    pub cells: Vec<Vec<CellLoad>>,
}

impl Occupancy {
    pub fn cell(&self, day: Day, linac: usize) -> CellLoad {
        self.cells[day as usize][linac]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Unassigned(PatientId),
    UnknownPatient(PatientId),
    BeforeReady { patient: PatientId, start_day: Day, ready_day: Day },
    UnknownLinac { patient: PatientId, linac: usize },
    BeyondHorizon { patient: PatientId, last_day: Day },
    Capacity { day: Day, linac: usize, load: u32, capacity: u32 },
    Reservation { day: Day, linac: usize, curative_load: u32, curative_cap: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unassigned(p) => write!(f, "patient {p} is not assigned"),
            Violation::UnknownPatient(p) => write!(f, "assignment for unknown patient {p}"),
            Violation::BeforeReady { patient, start_day, ready_day } => {
                write!(f, "patient {patient} starts on day {start_day} before ready day {ready_day}")
            }
            Violation::UnknownLinac { patient, linac } => {
                write!(f, "patient {patient} assigned to missing linac {linac}")
            }
            Violation::BeyondHorizon { patient, last_day } => {
                write!(f, "patient {patient} treated until day {last_day}, beyond the horizon")
            }
            Violation::Capacity { day, linac, load, capacity } => {
                write!(f, "day {day} linac {linac}: load {load} exceeds capacity {capacity}")
            }
            Violation::Reservation { day, linac, curative_load, curative_cap } => write!(
                f,
                "day {day} linac {linac}: committed + curative load {curative_load} exceeds \
                 the unreserved capacity {curative_cap}"
            ),
        }
    }
}

/// Verifies a schedule of `patients` against a scenario.
///
/// Checks ready dates, linac indices, the horizon, per-cell capacity and the
/// curative reservation: on every cell holding curative blocks, the committed
/// load plus the curative load must fit in `total - ceil(gamma * total)`. That
/// is the final-state consequence of booking each curative only while the
/// cell's load stays within the unreserved part. Returns the derived
/// occupancy when no violation is found.
pub fn check_schedule(
    scenario: &Scenario,
    patients: &[Patient],
    schedule: &Schedule,
    gamma: f64,
) -> Result<Occupancy, Vec<Violation>> {
    let mut violations = Vec::new();
    let mut cells = vec![vec![CellLoad::default(); scenario.num_linacs]; scenario.horizon_days as usize];
    let known: BTreeMap<PatientId, &Patient> = patients.iter().map(|p| (p.id, p)).collect();

    for id in schedule.assignments.keys() {
        if !known.contains_key(id) {
            violations.push(Violation::UnknownPatient(*id));
        }
    }
    for patient in patients {
        let Some(Assignment { start_day, linac }) = schedule.get(patient.id) else {
            violations.push(Violation::Unassigned(patient.id));
            continue;
        };
        if start_day < patient.ready_day {
            violations.push(Violation::BeforeReady { patient: patient.id, start_day, ready_day: patient.ready_day });
        }
        if linac >= scenario.num_linacs {
            violations.push(Violation::UnknownLinac { patient: patient.id, linac });
            continue;
        }
        let last_day = patient.last_day(start_day);
        if !scenario.contains(last_day) {
            violations.push(Violation::BeyondHorizon { patient: patient.id, last_day });
            continue;
        }
        for day in start_day..=last_day {
            let cell = &mut cells[day as usize][linac];
            if patient.is_palliative() {
                cell.palliative += patient.fraction_blocks;
            } else {
                cell.curative += patient.fraction_blocks;
            }
        }
    }

    for day in 0..scenario.horizon_days {
        for (linac, &load) in cells[day as usize].iter().enumerate() {
            let total = scenario.total(day, linac);
            let committed = scenario.committed(day, linac);
            if committed + load.total() > total {
                violations.push(Violation::Capacity { day, linac, load: committed + load.total(), capacity: total });
            }
            let curative_cap = total - reserved_blocks(total, gamma);
            if load.curative > 0 && committed + load.curative > curative_cap {
                violations.push(Violation::Reservation {
                    day,
                    linac,
                    curative_load: committed + load.curative,
                    curative_cap,
                });
            }
        }
    }

    if violations.is_empty() {
        Ok(Occupancy { cells })
    } else {
        Err(violations)
    }
}
