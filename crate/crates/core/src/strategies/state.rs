use crate::domain::{reserved_blocks, Assignment, Day, Patient, PatientId, Scenario, Schedule};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Business days scanned for an eligible start before giving up.
pub const DEFAULT_SEARCH_WINDOW: u32 = 50;

/// Live booking state of a rolling-horizon run.
///
/// Tracks, per (day, linac), the capacity remaining after the scenario's
/// committed load and every booking made so far. Curatives may only use the
/// part above the `ceil(gamma * C)` reservation; palliatives may use all of it.
#[derive(Debug, Clone)]
pub struct ScheduleState {
    scenario: Scenario,
    gamma: f64,
    current_day: Day,
    remaining: Vec<u32>,
    reserved: Vec<u32>,
    schedule: Schedule,
    booked: BTreeMap<PatientId, Patient>,
    search_window: u32,
}

impl ScheduleState {
    pub fn new(scenario: Scenario, gamma: f64) -> Result<Self> {
        let scenario = scenario.with_gamma(gamma)?;
        scenario.validate()?;
        let linacs = scenario.num_linacs;
        let mut remaining = Vec::with_capacity(scenario.horizon_days as usize * linacs);
        let mut reserved = Vec::with_capacity(remaining.capacity());
        for day in 0..scenario.horizon_days {
            for linac in 0..linacs {
                remaining.push(scenario.available(day, linac));
                reserved.push(reserved_blocks(scenario.total(day, linac), gamma));
            }
        }
        Ok(ScheduleState {
            scenario,
            gamma,
            current_day: 0,
            remaining,
            reserved,
            schedule: Schedule::default(),
            booked: BTreeMap::new(),
            search_window: DEFAULT_SEARCH_WINDOW,
        })
    }

    pub fn with_search_window(mut self, days: u32) -> Self {
        self.search_window = days.max(1);
        self
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn num_linacs(&self) -> usize {
        self.scenario.num_linacs
    }

    pub fn horizon(&self) -> Day {
        self.scenario.horizon_days
    }

    pub fn current_day(&self) -> Day {
        self.current_day
    }

    pub fn set_current_day(&mut self, day: Day) {
        self.current_day = day;
    }

    pub fn search_window(&self) -> u32 {
        self.search_window
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn booked(&self) -> impl Iterator<Item = &Patient> {
        self.booked.values()
    }

    pub fn is_booked(&self, id: PatientId) -> bool {
        self.booked.contains_key(&id)
    }

    fn idx(&self, day: Day, linac: usize) -> usize {
        day as usize * self.scenario.num_linacs + linac
    }

    /// Remaining blocks; zero outside the horizon.
    pub fn remaining(&self, day: Day, linac: usize) -> u32 {
        if day >= self.horizon() {
            return 0;
        }
        self.remaining[self.idx(day, linac)]
    }

    pub fn reserved(&self, day: Day, linac: usize) -> u32 {
        if day >= self.horizon() {
            return 0;
        }
        self.reserved[self.idx(day, linac)]
    }

    /// `max(0, remaining - ceil(gamma * C))`.
    pub fn curative_remaining(&self, day: Day, linac: usize) -> u32 {
        self.remaining(day, linac).saturating_sub(self.reserved(day, linac))
    }

    pub fn fleet_remaining(&self, day: Day) -> u32 {
        (0..self.num_linacs()).map(|l| self.remaining(day, l)).sum()
    }

    /// Blocks in use on a cell, committed load included.
    pub fn used(&self, day: Day, linac: usize) -> u32 {
        self.scenario.total(day, linac) - self.remaining(day, linac)
    }

    /// Whether `patient` can take `linac` on all of its treatment days from `start`.
    pub fn fits(&self, patient: &Patient, start: Day, linac: usize, respect_reservation: bool) -> bool {
        if patient.last_day(start) >= self.horizon() || linac >= self.num_linacs() {
            return false;
        }
        (start..=patient.last_day(start)).all(|day| {
            let free =
                if respect_reservation { self.curative_remaining(day, linac) } else { self.remaining(day, linac) };
            free >= patient.fraction_blocks
        })
    }

    /// Smallest day `>= from_day` with a linac able to host every fraction.
    ///
    /// Scans `search_window` business days; ties between linacs go to the
    /// lowest index.
    pub fn first_eligible_day(
        &self,
        patient: &Patient,
        from_day: Day,
        respect_reservation: bool,
    ) -> Result<Assignment> {
        if from_day < patient.ready_day {
            return Err(Error::InfeasibleAssignment {
                patient: patient.id,
                start_day: from_day,
                ready_day: patient.ready_day,
            });
        }
        let to = from_day + self.search_window;
        for start in from_day..to {
            if patient.last_day(start) >= self.horizon() {
                break;
            }
            if let Some(linac) = (0..self.num_linacs()).find(|&l| self.fits(patient, start, l, respect_reservation)) {
                return Ok(Assignment { start_day: start, linac });
            }
        }
        Err(Error::WindowExhausted { patient: patient.id, from: from_day, to })
    }

    /// Commits a booking. Curatives must fit under the reservation cap.
    pub fn book(&mut self, patient: &Patient, assignment: Assignment) -> Result<()> {
        if self.booked.contains_key(&patient.id) {
            return Err(Error::InvalidPatient { id: patient.id, reason: "already booked".into() });
        }
        if assignment.start_day < patient.ready_day {
            return Err(Error::InfeasibleAssignment {
                patient: patient.id,
                start_day: assignment.start_day,
                ready_day: patient.ready_day,
            });
        }
        if !self.fits(patient, assignment.start_day, assignment.linac, patient.is_curative()) {
            return Err(Error::Solver(format!(
                "patient {} does not fit on linac {} from day {}",
                patient.id, assignment.linac, assignment.start_day
            )));
        }
        for day in assignment.start_day..=patient.last_day(assignment.start_day) {
            let i = self.idx(day, assignment.linac);
            self.remaining[i] -= patient.fraction_blocks;
        }
        self.schedule.assign(patient.id, assignment);
        self.booked.insert(patient.id, patient.clone());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Category;

    pub(crate) fn patient(id: u32, category: Category, a: Day, r: Day, fractions: u32, blocks: u32) -> Patient {
        Patient {
            id: PatientId(id),
            category,
            admission_day: a,
            admission_seq: id,
            ready_day: r,
            due_day: a + category.deadline_days(),
            fractions,
            fraction_blocks: blocks,
        }
    }

    #[test]
    fn empty_fleet_books_ready_day_on_linac_zero() {
        let state = ScheduleState::new(Scenario::uniform(3, 100, 120), 0.1).unwrap();
        let p = patient(1, Category::P3, 0, 5, 20, 5);
        assert_eq!(state.first_eligible_day(&p, 5, true).unwrap(), Assignment { start_day: 5, linac: 0 });
    }

    #[test]
    fn exact_capacity_is_eligible() {
        let mut scenario = Scenario::uniform(1, 20, 120);
        for day in 0..20 {
            scenario.committed[day][0] = 110;
        }
        let state = ScheduleState::new(scenario, 0.0).unwrap();
        let p = patient(1, Category::P3, 0, 0, 3, 10);
        assert_eq!(state.first_eligible_day(&p, 0, true).unwrap().start_day, 0);
        let too_big = patient(2, Category::P3, 0, 0, 3, 11);
        assert!(matches!(state.first_eligible_day(&too_big, 0, true), Err(Error::WindowExhausted { .. })));
    }

    #[test]
    fn reservation_only_binds_curatives() {
        let mut scenario = Scenario::uniform(1, 10, 120);
        scenario.committed[0][0] = 100;
        let state = ScheduleState::new(scenario, 0.1).unwrap();
        assert_eq!(state.curative_remaining(0, 0), 8);
        let cur = patient(1, Category::P3, 0, 0, 1, 10);
        let pal = patient(2, Category::P1, 0, 0, 1, 10);
        assert_eq!(state.first_eligible_day(&cur, 0, true).unwrap().start_day, 1);
        assert_eq!(state.first_eligible_day(&pal, 0, false).unwrap().start_day, 0);
    }

    #[test]
    fn book_updates_remaining_and_rejects_duplicates() {
        let mut state = ScheduleState::new(Scenario::uniform(2, 10, 120), 0.0).unwrap();
        let p = patient(1, Category::P2, 0, 0, 3, 10);
        state.book(&p, Assignment { start_day: 1, linac: 1 }).unwrap();
        assert_eq!(state.remaining(0, 1), 120);
        assert_eq!(state.remaining(1, 1), 110);
        assert_eq!(state.remaining(3, 1), 110);
        assert_eq!(state.remaining(4, 1), 120);
        assert_eq!(state.used(2, 1), 10);
        assert!(state.book(&p, Assignment { start_day: 5, linac: 0 }).is_err());
    }

    #[test]
    fn from_day_before_ready_is_rejected() {
        let state = ScheduleState::new(Scenario::uniform(1, 10, 120), 0.0).unwrap();
        let p = patient(1, Category::P3, 0, 5, 1, 10);
        assert!(matches!(state.first_eligible_day(&p, 4, true), Err(Error::InfeasibleAssignment { .. })));
    }
}
