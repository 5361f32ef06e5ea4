//! The six scheduling strategies.
//!
//! Palliative patients are always placed on their first eligible day and may
//! use reserved capacity. The strategies differ in how and when curatives are
//! placed:
//!
//! | strategy         | palliatives       | curatives            |
//! |------------------|-------------------|----------------------|
//! | offline          | once, in advance  | once, one IP         |
//! | online-greedy    | at admission      | at admission, greedy |
//! | daily-greedy     | at admission      | end of day, greedy   |
//! | daily-IP         | end of day        | end of day, IP       |
//! | weekly-IP        | end of day        | Fridays, IP          |
//! | prediction-based | at admission      | at admission, model  |

mod batch;
mod greedy;
mod offline;
mod prediction;
mod state;

pub use batch::{schedule_batch_ip, Cadence};
pub use greedy::{
    batch_order, curative_scan_start, plan_online_greedy, plan_palliative_online, schedule_daily_greedy_batch,
    schedule_online_greedy, schedule_palliative_online, P3_SCAN_OFFSET, P4_SCAN_OFFSET,
};
pub use offline::{schedule_offline, schedule_offline_reserved, OfflineSolution};
pub use prediction::{plan_prediction_based, schedule_prediction_based, PredictionPlan};
pub use state::{ScheduleState, DEFAULT_SEARCH_WINDOW};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Offline,
    OnlineGreedy,
    DailyGreedy,
    #[serde(rename = "daily-ip")]
    DailyIp,
    #[serde(rename = "weekly-ip")]
    WeeklyIp,
    PredictionBased,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Offline,
        StrategyKind::OnlineGreedy,
        StrategyKind::DailyGreedy,
        StrategyKind::DailyIp,
        StrategyKind::WeeklyIp,
        StrategyKind::PredictionBased,
    ];

    /// Strategies that decide without knowledge of future arrivals.
    pub const ONLINE: [StrategyKind; 5] = [
        StrategyKind::OnlineGreedy,
        StrategyKind::DailyGreedy,
        StrategyKind::DailyIp,
        StrategyKind::WeeklyIp,
        StrategyKind::PredictionBased,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Offline => "offline",
            StrategyKind::OnlineGreedy => "online-greedy",
            StrategyKind::DailyGreedy => "daily-greedy",
            StrategyKind::DailyIp => "daily-ip",
            StrategyKind::WeeklyIp => "weekly-ip",
            StrategyKind::PredictionBased => "prediction-based",
        }
    }

    pub fn needs_model(self) -> bool {
        self == StrategyKind::PredictionBased
    }

    /// Whether curatives honour the palliative reservation. Offline scheduling
    /// never reserves.
    pub fn reserves(self) -> bool {
        self != StrategyKind::Offline
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for kind in StrategyKind::ALL {
            assert_eq!(kind.name().parse::<StrategyKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
        assert_eq!("Weekly_IP".parse::<StrategyKind>().unwrap(), StrategyKind::WeeklyIp);
        assert!("random".parse::<StrategyKind>().is_err());
    }
}
