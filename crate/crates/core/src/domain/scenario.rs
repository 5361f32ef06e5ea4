use super::Day;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Blocks of 5 minutes per linac per business day (10 hours).
pub const DEFAULT_DAY_CAPACITY: u32 = 120;

/// Blocks withheld from curative bookings on a cell with `total` blocks.
///
/// A curative may use a cell only while its load stays at or below
/// `total - gamma * total`; with integer loads that is `total - ceil(gamma * total)`.
pub fn reserved_blocks(total: u32, gamma: f64) -> u32 {
    let exact = gamma * f64::from(total);
    (exact - 1e-9).ceil().max(0.0) as u32
}

/// Linac fleet and the capacity left over by previously fixed patients.
///
/// `total_capacity` and `committed` are indexed `[day][linac]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub num_linacs: usize,
    pub horizon_days: Day,
    pub total_capacity: Vec<Vec<u32>>,
    pub committed: Vec<Vec<u32>>,
    pub gamma: f64,
}

impl Scenario {
    /// Empty fleet with the same capacity on every day and linac.
    pub fn uniform(num_linacs: usize, horizon_days: Day, capacity: u32) -> Self {
        Scenario {
            num_linacs,
            horizon_days,
            total_capacity: vec![vec![capacity; num_linacs]; horizon_days as usize],
            committed: vec![vec![0; num_linacs]; horizon_days as usize],
            gamma: 0.0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        self.gamma = gamma;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_linacs == 0 {
            return Err(Error::InvalidParameter("scenario needs at least one linac".into()));
        }
        check_gamma(self.gamma)?;
        let days = self.horizon_days as usize;
        if self.total_capacity.len() != days || self.committed.len() != days {
            return Err(Error::InvalidParameter(format!(
                "capacity grids must have {days} days, got {} and {}",
                self.total_capacity.len(),
                self.committed.len()
            )));
        }
        for (day, (total, committed)) in self.total_capacity.iter().zip(&self.committed).enumerate() {
            if total.len() != self.num_linacs || committed.len() != self.num_linacs {
                return Err(Error::InvalidParameter(format!("day {day} has the wrong number of linacs")));
            }
            if let Some(l) = (0..self.num_linacs).find(|&l| committed[l] > total[l]) {
                return Err(Error::InvalidParameter(format!(
                    "day {day} linac {l}: committed {} exceeds capacity {}",
                    committed[l], total[l]
                )));
            }
        }
        Ok(())
    }

    pub fn total(&self, day: Day, linac: usize) -> u32 {
        self.total_capacity[day as usize][linac]
    }

    pub fn committed(&self, day: Day, linac: usize) -> u32 {
        self.committed[day as usize][linac]
    }

    /// Capacity left after the fixed patients.
    pub fn available(&self, day: Day, linac: usize) -> u32 {
        self.total(day, linac) - self.committed(day, linac)
    }

    pub fn fleet_total(&self, day: Day) -> u32 {
        self.total_capacity[day as usize].iter().sum()
    }

    pub fn fleet_committed(&self, day: Day) -> u32 {
        self.committed[day as usize].iter().sum()
    }

    pub fn contains(&self, day: Day) -> bool {
        day < self.horizon_days
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("reservation rate {gamma} outside [0, 1)")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_blocks_matches_real_cap() {
        assert_eq!(reserved_blocks(120, 0.0), 0);
        assert_eq!(reserved_blocks(120, 0.1), 12);
        assert_eq!(reserved_blocks(120, 0.05), 6);
        assert_eq!(reserved_blocks(120, 0.15), 18);
        assert_eq!(reserved_blocks(120, 0.2), 24);
        // 0.1 * 125 = 12.5: a load of 112 <= 112.5 is allowed, 113 is not.
        assert_eq!(reserved_blocks(125, 0.1), 13);
    }

    #[test]
    fn validation() {
        let mut s = Scenario::uniform(2, 3, 120);
        s.validate().unwrap();
        s.committed[1][1] = 121;
        assert!(s.validate().is_err());
        assert!(Scenario::uniform(1, 1, 10).with_gamma(1.0).is_err());
        assert!(Scenario::uniform(0, 1, 10).validate().is_err());
    }

    #[test]
    fn available_subtracts_committed() {
        let mut s = Scenario::uniform(2, 3, 120);
        s.committed[2][0] = 20;
        assert_eq!(s.available(2, 0), 100);
        assert_eq!(s.fleet_total(2), 240);
        assert_eq!(s.fleet_committed(2), 20);
    }
}
