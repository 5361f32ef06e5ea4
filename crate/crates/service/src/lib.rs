//! HTTP booking service over a live schedule.
//!
//! A [`Service`] owns one [`ScheduleState`](radsched_core::ScheduleState).
//! Clerks ask for suggestions, which never touch the state, and confirm them
//! with a [`BookingToken`]. A token only commits while the state version it
//! was computed against is still current; otherwise the booking is refused
//! with a fresh suggestion. Every committed booking is appended to a JSON-lines
//! journal that is replayed on start-up.
//!
//! | Method | Path | |
//! |---|---|---|
//! | POST | `/patients:suggest` | [`SuggestRequest`] → [`Suggestion`] |
//! | POST | `/bookings` | [`BookingRequest`] → [`BookingReceipt`] |
//! | GET | `/occupancy?from&days` | [`OccupancyMap`] |
//! | GET | `/explanations/{id}` | [`Explanation`] |
//! | POST | `/whatif` | [`WhatIfRequest`] → [`WhatIfResponse`] |
//! | GET | `/state` | [`StateSummary`] |

mod api;
mod journal;
mod routes;
mod service;

pub use api::*;
pub use journal::{Journal, JournalRecord};
pub use routes::router;
pub use service::{Clock, ManualClock, Service, ServiceConfig, SystemClock};

use radsched_core::{GbtModel, Instance, Scenario};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

/// Start-up options of `radsched serve`.
#[derive(Debug, Clone)]
pub struct ServeOptions {
    /// Scenario JSON, or an instance JSON whose scenario is used.
    pub scenario: PathBuf,
    pub model: Option<PathBuf>,
    pub journal: Option<PathBuf>,
    pub config: ServiceConfig,
    pub addr: SocketAddr,
}

pub fn load_scenario(path: &std::path::Path) -> radsched_core::Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let scenario: Scenario = if value.get("scenario").is_some() {
        serde_json::from_value::<Instance>(value)?.scenario
    } else {
        serde_json::from_value(value)?
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Loads the inputs, replays the journal and serves until the process ends.
pub async fn serve(options: ServeOptions) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let scenario = load_scenario(&options.scenario)?;
    let model = options.model.as_deref().map(GbtModel::load).transpose()?;
    let journal = options.journal.as_deref().map(Journal::open).transpose()?;
    let service = Service::new(scenario, model, options.config, journal, Arc::new(SystemClock))?;
    let listener = tokio::net::TcpListener::bind(options.addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "serving");
    axum::serve(listener, router(Arc::new(service))).await?;
    Ok(())
}
