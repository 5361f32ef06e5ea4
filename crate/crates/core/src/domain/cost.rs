use super::{Day, Patient, PatientId, Schedule};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Weights of the waiting and overdue terms of the scheduling objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub waiting: f64,
    pub overdue: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights { waiting: 1.0, overdue: 100.0 }
    }
}

impl ObjectiveWeights {
    pub fn new(waiting: f64, overdue: f64) -> Result<Self> {
        if !(waiting >= 0.0 && overdue >= waiting && overdue.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "objective weights need 0 <= waiting <= overdue, got ({waiting}, {overdue})"
            )));
        }
        Ok(ObjectiveWeights { waiting, overdue })
    }
}

fn check_ready(patient: &Patient, start_day: Day) -> Result<()> {
    if start_day < patient.ready_day {
        return Err(Error::InfeasibleAssignment { patient: patient.id, start_day, ready_day: patient.ready_day });
    }
    Ok(())
}

/// Business days between admission and the first fraction.
pub fn waiting_time(patient: &Patient, start_day: Day) -> Result<u32> {
    check_ready(patient, start_day)?;
    Ok(start_day - patient.admission_day)
}

/// Business days the first fraction falls after the due day.
pub fn overdue_time(patient: &Patient, start_day: Day) -> Result<u32> {
    check_ready(patient, start_day)?;
    Ok(start_day.saturating_sub(patient.due_day))
}

/// Cost of starting `patient` on `start_day`.
///
/// The waiting term `w1 (t - a) ln(t - a + 1)` only applies strictly after the
/// ready day; the overdue term `w2 (t - d) ln(t - d + 1)` strictly after the
/// due day.
pub fn patient_cost(patient: &Patient, start_day: Day, weights: &ObjectiveWeights) -> Result<f64> {
    check_ready(patient, start_day)?;
    Ok(unchecked_cost(patient, start_day, weights))
}

pub(crate) fn unchecked_cost(patient: &Patient, t: Day, weights: &ObjectiveWeights) -> f64 {
    let mut cost = 0.0;
    if t > patient.ready_day {
        let wait = f64::from(t - patient.admission_day);
        cost += weights.waiting * wait * (wait + 1.0).ln();
    }
    if t > patient.due_day {
        let late = f64::from(t - patient.due_day);
        cost += weights.overdue * late * (late + 1.0).ln();
    }
    cost
}

/// Sums per-patient costs in ascending order.
///
/// Every objective in the crate goes through this function so that two
/// assignments with the same multiset of patient costs evaluate to the same
/// bits regardless of patient order.
pub(crate) fn sum_costs(mut costs: Vec<f64>) -> f64 {
    costs.sort_by(f64::total_cmp);
    costs.into_iter().sum()
}

/// Total cost of a schedule over `patients`.
pub fn schedule_cost(schedule: &Schedule, patients: &[Patient], weights: &ObjectiveWeights) -> Result<f64> {
    let missing: Vec<PatientId> = patients.iter().filter(|p| schedule.get(p.id).is_none()).map(|p| p.id).collect();
    if !missing.is_empty() {
        return Err(Error::Unassigned(missing));
    }
    let costs = patients
        .iter()
        .map(|p| patient_cost(p, schedule.get(p.id).expect("checked above").start_day, weights))
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_costs(costs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Assignment, Category};
    use proptest::prelude::*;

    fn patient(category: Category, a: Day, r: Day) -> Patient {
        Patient {
            id: PatientId(0),
            category,
            admission_day: a,
            admission_seq: 0,
            ready_day: r,
            due_day: a + category.deadline_days(),
            fractions: 1,
            fraction_blocks: 5,
        }
    }

    /// (a, r, d) with an arbitrary due day, for the hand-evaluated examples.
    fn raw(a: Day, r: Day, d: Day) -> Patient {
        Patient { due_day: d, ..patient(Category::P4, a, r) }
    }

    #[test]
    fn waiting_examples() {
        assert_eq!(waiting_time(&raw(0, 0, 28), 0).unwrap(), 0);
        assert_eq!(waiting_time(&raw(0, 5, 28), 12).unwrap(), 12);
        assert_eq!(waiting_time(&raw(3, 3, 31), 7).unwrap(), 4);
        assert!(matches!(
            waiting_time(&raw(0, 5, 28), 4),
            Err(Error::InfeasibleAssignment { start_day: 4, ready_day: 5, .. })
        ));
    }

    #[test]
    fn overdue_examples() {
        assert_eq!(overdue_time(&raw(0, 0, 14), 10).unwrap(), 0);
        assert_eq!(overdue_time(&raw(0, 0, 3), 5).unwrap(), 2);
        assert_eq!(overdue_time(&raw(0, 0, 1), 1).unwrap(), 0);
    }

    #[test]
    fn cost_examples() {
        let w = ObjectiveWeights::default();
        assert_eq!(patient_cost(&raw(0, 5, 28), 5, &w).unwrap(), 0.0);
        let expected = 5.0 * 6f64.ln() + 100.0 * 2.0 * 3f64.ln();
        let got = patient_cost(&raw(0, 0, 3), 5, &w).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 228.68).abs() < 5e-3);
        let got = patient_cost(&raw(0, 0, 28), 1, &w).unwrap();
        assert!((got - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn schedule_cost_examples() {
        let w = ObjectiveWeights::default();
        assert_eq!(schedule_cost(&Schedule::default(), &[], &w).unwrap(), 0.0);

        let mut a = raw(0, 5, 28);
        a.id = PatientId(1);
        let mut b = raw(0, 0, 3);
        b.id = PatientId(2);
        let mut schedule = Schedule::default();
        schedule.assign(a.id, Assignment { start_day: 5, linac: 0 });
        schedule.assign(b.id, Assignment { start_day: 5, linac: 0 });
        let total = schedule_cost(&schedule, &[a.clone(), b.clone()], &w).unwrap();
        assert_eq!(total, patient_cost(&b, 5, &w).unwrap());

        let missing = schedule_cost(&Schedule::default(), &[a, b], &w).unwrap_err();
        assert!(matches!(missing, Error::Unassigned(ids) if ids == vec![PatientId(1), PatientId(2)]));
    }

    #[test]
    fn same_day_starts_cost_nothing() {
        let w = ObjectiveWeights::default();
        let patients: Vec<Patient> =
            (0..5).map(|i| Patient { id: PatientId(i), ..patient(Category::P2, i, i) }).collect();
        let mut schedule = Schedule::default();
        for p in &patients {
            schedule.assign(p.id, Assignment { start_day: p.admission_day, linac: 0 });
        }
        assert_eq!(schedule_cost(&schedule, &patients, &w).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn cost_is_monotone(a in 0u32..50, ready in 0u32..8, cat in 0usize..4, t in 0u32..80) {
            let p = patient(Category::ALL[cat], a, a + ready);
            let start = p.ready_day + t;
            let w = ObjectiveWeights::default();
            let now = patient_cost(&p, start, &w).unwrap();
            let next = patient_cost(&p, start + 1, &w).unwrap();
            prop_assert!(next >= now);
        }

        #[test]
        fn overdue_zero_iff_not_late(a in 0u32..50, ready in 0u32..8, cat in 0usize..4, t in 0u32..80) {
            let p = patient(Category::ALL[cat], a, a + ready);
            let start = p.ready_day + t;
            prop_assert_eq!(overdue_time(&p, start).unwrap() == 0, start <= p.due_day);
        }
    }
}
