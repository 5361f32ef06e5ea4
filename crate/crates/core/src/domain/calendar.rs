use super::Day;
use crate::error::{Error, Result};
use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

/// Maps business-day indices to civil dates, skipping Saturdays and Sundays.
///
/// The epoch must be a Monday so that day indices `4 (mod 5)` are Fridays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calendar {
    epoch: NaiveDate,
}

impl Default for Calendar {
    fn default() -> Self {
        Calendar { epoch: NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date") }
    }
}

impl Calendar {
    pub fn new(epoch: NaiveDate) -> Result<Self> {
        if epoch.weekday() != Weekday::Mon {
            return Err(Error::InvalidParameter(format!(
                "calendar epoch {epoch} is a {:?}, expected a Monday",
                epoch.weekday()
            )));
        }
        Ok(Calendar { epoch })
    }

    pub fn epoch(&self) -> NaiveDate {
        self.epoch
    }

    pub fn date(&self, day: Day) -> NaiveDate {
        let weeks = i64::from(day / 5);
        let weekday = i64::from(day % 5);
        self.epoch + Duration::days(weeks * 7 + weekday)
    }

    /// Business-day index of `date`; `None` for weekends and dates before the epoch.
    pub fn index(&self, date: NaiveDate) -> Option<Day> {
        let offset = (date - self.epoch).num_days();
        if offset < 0 {
            return None;
        }
        let weekday = offset % 7;
        if weekday >= 5 {
            return None;
        }
        Day::try_from((offset / 7) * 5 + weekday).ok()
    }

    pub fn is_friday(day: Day) -> bool {
        day % 5 == 4
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn skips_weekends() {
        let cal = Calendar::default();
        assert_eq!(cal.date(0), NaiveDate::from_ymd_opt(2024, 1, 1).unwrap());
        assert_eq!(cal.date(4).weekday(), Weekday::Fri);
        assert_eq!(cal.date(5), NaiveDate::from_ymd_opt(2024, 1, 8).unwrap());
        assert_eq!(cal.index(NaiveDate::from_ymd_opt(2024, 1, 6).unwrap()), None);
        assert_eq!(cal.index(NaiveDate::from_ymd_opt(2023, 12, 29).unwrap()), None);
    }

    #[test]
    fn epoch_must_be_monday() {
        assert!(Calendar::new(NaiveDate::from_ymd_opt(2024, 1, 3).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn index_date_round_trip(day in 0u32..100_000) {
            let cal = Calendar::default();
            prop_assert_eq!(cal.index(cal.date(day)), Some(day));
        }

        #[test]
        fn date_index_round_trip(offset in 0i64..140_000) {
            let cal = Calendar::default();
            let date = cal.epoch() + Duration::days(offset);
            match cal.index(date) {
                Some(day) => prop_assert_eq!(cal.date(day), date),
                None => prop_assert!(matches!(date.weekday(), Weekday::Sat | Weekday::Sun)),
            }
        }
    }
}
