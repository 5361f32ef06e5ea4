use super::Day;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const MIN_BLOCKS: u32 = 2;
pub const MAX_BLOCKS: u32 = 33;
pub const MAX_FRACTIONS: u32 = 45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PatientId(pub u32);

impl fmt::Display for PatientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Priority category. P1 and P2 are palliative, P3 and P4 curative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    P1,
    P2,
    P3,
    P4,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::P1, Category::P2, Category::P3, Category::P4];

    /// Recommended deadline, in business days after admission.
    pub fn deadline_days(self) -> u32 {
        match self {
            Category::P1 => 1,
            Category::P2 => 3,
            Category::P3 => 14,
            Category::P4 => 28,
        }
    }

    pub fn is_palliative(self) -> bool {
        matches!(self, Category::P1 | Category::P2)
    }

    pub fn is_curative(self) -> bool {
        !self.is_palliative()
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::P1 => "P1",
            Category::P2 => "P2",
            Category::P3 => "P3",
            Category::P4 => "P4",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P1" => Ok(Category::P1),
            "P2" => Ok(Category::P2),
            "P3" => Ok(Category::P3),
            "P4" => Ok(Category::P4),
            other => Err(Error::InvalidParameter(format!("unknown category {other:?}"))),
        }
    }
}

/// One treatment request.
///
/// `fraction_blocks` is the length of each daily fraction in 5-minute blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Patient {
    pub id: PatientId,
    pub category: Category,
    pub admission_day: Day,
    /// Arrival order within the admission day.
    pub admission_seq: u32,
    pub ready_day: Day,
    pub due_day: Day,
    pub fractions: u32,
    pub fraction_blocks: u32,
}

impl Patient {
    /// Builds a patient whose due day follows from the category deadline.
    pub fn new(
        id: PatientId,
        category: Category,
        admission_day: Day,
        admission_seq: u32,
        ready_offset: u32,
        fractions: u32,
        fraction_blocks: u32,
    ) -> Result<Self> {
        let patient = Patient {
            id,
            category,
            admission_day,
            admission_seq,
            ready_day: admission_day + ready_offset,
            due_day: admission_day + category.deadline_days(),
            fractions,
            fraction_blocks,
        };
        patient.validate()?;
        Ok(patient)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidPatient { id: self.id, reason });
        if self.ready_day < self.admission_day {
            return fail(format!("ready day {} precedes admission day {}", self.ready_day, self.admission_day));
        }
        if self.due_day != self.admission_day + self.category.deadline_days() {
            return fail(format!(
                "due day {} should be admission day + {}",
                self.due_day,
                self.category.deadline_days()
            ));
        }
        if !(MIN_BLOCKS..=MAX_BLOCKS).contains(&self.fraction_blocks) {
            return fail(format!(
                "fraction length {} blocks outside {MIN_BLOCKS}..={MAX_BLOCKS}",
                self.fraction_blocks
            ));
        }
        if !(1..=MAX_FRACTIONS).contains(&self.fractions) {
            return fail(format!("fraction count {} outside 1..={MAX_FRACTIONS}", self.fractions));
        }
        Ok(())
    }

    pub fn is_palliative(&self) -> bool {
        self.category.is_palliative()
    }

    pub fn is_curative(&self) -> bool {
        self.category.is_curative()
    }

    pub fn ready_offset(&self) -> u32 {
        self.ready_day - self.admission_day
    }

    pub fn due_offset(&self) -> u32 {
        self.due_day - self.admission_day
    }

    /// Total blocks over the whole course of treatment.
    pub fn total_blocks(&self) -> u32 {
        self.fractions * self.fraction_blocks
    }

    /// Last treatment day when the first fraction is on `start`.
    pub fn last_day(&self, start: Day) -> Day {
        start + self.fractions - 1
    }

    /// Copy of this patient with every day shifted by `days`.
    pub fn shifted(&self, days: i64) -> Patient {
        let shift = |d: Day| (d as i64 + days) as Day;
        Patient {
            admission_day: shift(self.admission_day),
            ready_day: shift(self.ready_day),
            due_day: shift(self.due_day),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_table() {
        let deadlines: Vec<u32> = Category::ALL.iter().map(|c| c.deadline_days()).collect();
        assert_eq!(deadlines, vec![1, 3, 14, 28]);
        let palliative: Vec<bool> = Category::ALL.iter().map(|c| c.is_palliative()).collect();
        assert_eq!(palliative, vec![true, true, false, false]);
    }

    #[test]
    fn new_derives_due_day() {
        let p = Patient::new(PatientId(1), Category::P3, 10, 0, 5, 20, 5).unwrap();
        assert_eq!(p.ready_day, 15);
        assert_eq!(p.due_day, 24);
    }

    #[test]
    fn rejects_out_of_range_plans() {
        assert!(Patient::new(PatientId(1), Category::P2, 0, 0, 0, 0, 5).is_err());
        assert!(Patient::new(PatientId(1), Category::P2, 0, 0, 0, 46, 5).is_err());
        assert!(Patient::new(PatientId(1), Category::P2, 0, 0, 0, 3, 1).is_err());
        assert!(Patient::new(PatientId(1), Category::P2, 0, 0, 0, 3, 34).is_err());
        let mut p = Patient::new(PatientId(1), Category::P2, 4, 0, 0, 3, 4).unwrap();
        p.ready_day = 3;
        assert!(p.validate().is_err());
    }

    #[test]
    fn category_parses() {
        assert_eq!("p4".parse::<Category>().unwrap(), Category::P4);
        assert!("P5".parse::<Category>().is_err());
    }
}
