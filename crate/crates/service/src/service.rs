use crate::api::*;
use crate::journal::{Journal, JournalRecord};
use radsched_core::domain::{
    overdue_time, waiting_time, Assignment, Calendar, Day, ObjectiveWeights, Patient, PatientId, Schedule,
};
use radsched_core::explain::{tree_shap, waterfall_from};
use radsched_core::learning::NUM_FEATURES;
use radsched_core::strategies::{
    plan_online_greedy, plan_palliative_online, plan_prediction_based, schedule_batch_ip, DEFAULT_SEARCH_WINDOW,
};
use radsched_core::{
    BranchAndBound, Error, FeatureVector, GbtModel, Scenario, ScheduleState, SolverBudget, StrategyKind,
};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock, RwLockReadGuard, RwLockWriteGuard};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub gamma: f64,
    pub token_ttl: Duration,
    pub calendar: Calendar,
    pub weights: ObjectiveWeights,
    pub search_window: u32,
    /// Solver for single-patient IP suggestions.
    pub batch_solver: BranchAndBound,
    /// Day the service considers "today" before any booking.
    pub start_day: Day,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            gamma: 0.1,
            token_ttl: Duration::from_secs(600),
            calendar: Calendar::default(),
            weights: ObjectiveWeights::default(),
            search_window: DEFAULT_SEARCH_WINDOW,
            batch_solver: BranchAndBound::new(SolverBudget::nodes(20_000)),
            start_day: 0,
        }
    }
}

pub trait Clock: Send + Sync + fmt::Debug {
    /// Milliseconds since the Unix epoch.
    fn now_ms(&self) -> u64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
    }
}

/// Clock moved by hand, for tests.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(ms: u64) -> Self {
        ManualClock(AtomicU64::new(ms))
    }

    pub fn advance(&self, by: Duration) {
        self.0.fetch_add(by.as_millis() as u64, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

impl ErrorBody {
    pub fn new(status: u16, code: &str, message: impl fmt::Display) -> Self {
        ErrorBody { status, code: code.into(), message: message.to_string(), fresh: None }
    }
}

impl From<Error> for ErrorBody {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::WindowExhausted { .. } => (409, "window_exhausted"),
            Error::Solver(_) => (409, "no_slot"),
            Error::ModelMissing => (422, "model_missing"),
            Error::HorizonOverflow { .. } => (422, "beyond_horizon"),
            Error::InvalidPatient { .. } | Error::InfeasibleAssignment { .. } => (422, "invalid_patient"),
            Error::InvalidParameter(_) | Error::FeatureLength { .. } => (422, "invalid_request"),
            _ => (500, "internal"),
        };
        ErrorBody::new(status, code, e)
    }
}

type ApiResult<T> = Result<T, ErrorBody>;

#[derive(Debug)]
struct Live {
    state: ScheduleState,
    version: u64,
}

#[derive(Debug)]
struct Stored {
    suggestion: Suggestion,
    features: Option<FeatureVector>,
    consumed: bool,
}

#[derive(Debug, Default)]
struct Store {
    next: u64,
    map: HashMap<String, Stored>,
}

struct Planned {
    assignment: Assignment,
    predicted_waiting: Option<u32>,
    features: Option<FeatureVector>,
}

/// Live schedule shared by all HTTP clients.
///
/// Bookings take the state's write lock, so the committed schedule is always
/// the result of some serial order of accepted bookings.
#[derive(Debug)]
pub struct Service {
    live: RwLock<Live>,
    store: Mutex<Store>,
    model: Option<GbtModel>,
    config: ServiceConfig,
    journal: Option<Journal>,
    clock: Arc<dyn Clock>,
}

impl Service {
    /// Builds the live state and replays `journal`, if any.
    pub fn new(
        scenario: Scenario,
        model: Option<GbtModel>,
        config: ServiceConfig,
        journal: Option<Journal>,
        clock: Arc<dyn Clock>,
    ) -> radsched_core::Result<Self> {
        if let Some(m) = &model {
            if m.num_features != NUM_FEATURES {
                return Err(Error::FeatureLength { got: m.num_features, expected: NUM_FEATURES });
            }
        }
        let mut state = ScheduleState::new(scenario, config.gamma)?.with_search_window(config.search_window);
        state.set_current_day(config.start_day);
        let mut version = 0;
        if let Some(j) = &journal {
            for r in Journal::read_all(j.path())? {
                state.book(&r.patient, r.assignment)?;
                state.set_current_day(state.current_day().max(r.patient.admission_day));
                version = r.version;
            }
            tracing::info!(bookings = state.schedule().len(), version, "journal replayed");
        }
        Ok(Service {
            live: RwLock::new(Live { state, version }),
            store: Mutex::new(Store::default()),
            model,
            config,
            journal,
            clock,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn model(&self) -> Option<&GbtModel> {
        self.model.as_ref()
    }

    /// Copy of the live state.
    pub fn snapshot(&self) -> ScheduleState {
        self.read().state.clone()
    }

    fn read(&self) -> RwLockReadGuard<'_, Live> {
        self.live.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, Live> {
        self.live.write().unwrap_or_else(|e| e.into_inner())
    }

    fn store(&self) -> MutexGuard<'_, Store> {
        self.store.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn summary(&self) -> StateSummary {
        let live = self.read();
        StateSummary {
            version: live.version,
            current_day: live.state.current_day(),
            booked: live.state.schedule().len(),
            gamma: live.state.gamma(),
            digest: digest(live.state.schedule()),
            model_loaded: self.model.is_some(),
        }
    }

    fn make_patient(&self, state: &ScheduleState, input: &PatientInput) -> ApiResult<Patient> {
        let day = input.admission_day.unwrap_or(state.current_day());
        if day < state.current_day() {
            return Err(ErrorBody::new(
                422,
                "admission_in_past",
                format!("admission day {day} precedes the current day {}", state.current_day()),
            ));
        }
        let p = Patient::new(
            PatientId(input.id),
            input.category,
            day,
            0,
            input.ready_offset,
            input.fractions,
            input.fraction_blocks,
        )?;
        if state.is_booked(p.id) {
            return Err(ErrorBody::new(422, "duplicate", format!("patient {} is already booked", p.id)));
        }
        Ok(p)
    }

    fn default_strategy(&self, p: &Patient) -> StrategyKind {
        if p.is_curative() && self.model.is_some() {
            StrategyKind::PredictionBased
        } else {
            StrategyKind::OnlineGreedy
        }
    }

    fn interactive_strategies(&self) -> Vec<StrategyKind> {
        StrategyKind::ONLINE
            .into_iter()
            .filter(|s| *s != StrategyKind::PredictionBased || self.model.is_some())
            .collect()
    }

    /// Slot `strategy` would give `p` now; `state` is left untouched.
    fn plan(&self, state: &ScheduleState, p: &Patient, strategy: StrategyKind) -> ApiResult<Planned> {
        if strategy == StrategyKind::Offline {
            return Err(ErrorBody::new(422, "not_interactive", "offline scheduling needs the whole patient flow"));
        }
        let moved;
        let state = if state.current_day() == p.admission_day {
            state
        } else {
            moved = {
                let mut s = state.clone();
                s.set_current_day(p.admission_day);
                s
            };
            &moved
        };
        let plain = |assignment| Planned { assignment, predicted_waiting: None, features: None };
        if p.is_palliative() {
            return Ok(plain(plan_palliative_online(state, p)?));
        }
        match strategy {
            StrategyKind::OnlineGreedy | StrategyKind::DailyGreedy => Ok(plain(plan_online_greedy(state, p)?)),
            StrategyKind::PredictionBased => {
                let model = self.model.as_ref().ok_or(Error::ModelMissing)?;
                let plan = plan_prediction_based(state, p, model)?;
                Ok(Planned {
                    assignment: plan.assignment,
                    predicted_waiting: plan.predicted_waiting,
                    features: plan.features,
                })
            }
            StrategyKind::DailyIp | StrategyKind::WeeklyIp => {
                let mut scratch = state.clone();
                let booked = schedule_batch_ip(
                    &mut scratch,
                    std::slice::from_ref(p),
                    &self.config.batch_solver,
                    self.config.weights,
                )?;
                Ok(plain(booked[0].1))
            }
            StrategyKind::Offline => unreachable!(),
        }
    }

    /// Stores a suggestion and issues its token.
    fn record(
        &self,
        patient: Patient,
        strategy: StrategyKind,
        planned: Planned,
        version: u64,
    ) -> ApiResult<Suggestion> {
        let start = planned.assignment.start_day;
        let attribution = match (&self.model, &planned.features) {
            (Some(model), Some(x)) => Some(tree_shap(model, x)?),
            _ => None,
        };
        let waiting = waiting_time(&patient, start)?;
        let overdue = overdue_time(&patient, start)?;
        let mut store = self.store();
        store.next += 1;
        let id = format!("s{:06}", store.next);
        let suggestion = Suggestion {
            id: id.clone(),
            patient,
            strategy,
            predicted_waiting: planned.predicted_waiting,
            start_day: start,
            linac: planned.assignment.linac,
            date: self.config.calendar.date(start),
            waiting,
            overdue,
            attribution,
            token: BookingToken {
                suggestion_id: id.clone(),
                version,
                expires_at_ms: self.clock.now_ms() + self.config.token_ttl.as_millis() as u64,
            },
        };
        store.map.insert(id, Stored { suggestion: suggestion.clone(), features: planned.features, consumed: false });
        Ok(suggestion)
    }

    pub fn suggest(&self, req: SuggestRequest) -> ApiResult<Suggestion> {
        let live = self.read();
        let p = self.make_patient(&live.state, &req.patient)?;
        let strategy = req.strategy.unwrap_or_else(|| self.default_strategy(&p));
        let planned = self.plan(&live.state, &p, strategy)?;
        let version = live.version;
        drop(live);
        self.record(p, strategy, planned, version)
    }

    /// Suggestions of several strategies against one snapshot. Strategy
    /// failures are reported per strategy.
    pub fn what_if(&self, req: WhatIfRequest) -> ApiResult<WhatIfResponse> {
        let strategies = if req.strategies.is_empty() { self.interactive_strategies() } else { req.strategies };
        let live = self.read();
        let p = self.make_patient(&live.state, &req.patient)?;
        let planned: Vec<(StrategyKind, ApiResult<Planned>)> =
            strategies.iter().map(|&s| (s, self.plan(&live.state, &p, s))).collect();
        let version = live.version;
        drop(live);
        let outcomes = planned
            .into_iter()
            .map(|(strategy, plan)| match plan.and_then(|pl| self.record(p.clone(), strategy, pl, version)) {
                Ok(s) => WhatIfOutcome { strategy, suggestion: Some(s), error: None },
                Err(e) => WhatIfOutcome { strategy, suggestion: None, error: Some(e) },
            })
            .collect();
        Ok(WhatIfResponse { outcomes })
    }

    pub fn book(&self, req: BookingRequest) -> ApiResult<BookingReceipt> {
        if req.force {
            return self.book_forced(req);
        }
        let token = req.token.ok_or_else(|| ErrorBody::new(422, "missing_token", "booking needs a token or force"))?;
        let (patient, assignment, strategy) = {
            let store = self.store();
            let stored = store.map.get(&token.suggestion_id).ok_or_else(|| {
                ErrorBody::new(404, "unknown_suggestion", format!("no suggestion {}", token.suggestion_id))
            })?;
            if stored.suggestion.token != token {
                return Err(ErrorBody::new(422, "token_mismatch", "token does not match the issued suggestion"));
            }
            if stored.consumed {
                return Err(ErrorBody::new(409, "token_used", "token was already exchanged for a booking"));
            }
            let s = &stored.suggestion;
            (s.patient.clone(), Assignment { start_day: s.start_day, linac: s.linac }, s.strategy)
        };
        if self.clock.now_ms() > token.expires_at_ms {
            return Err(ErrorBody::new(410, "expired", format!("suggestion {} has expired", token.suggestion_id)));
        }
        let mut live = self.write();
        if live.state.is_booked(patient.id) {
            return Err(ErrorBody::new(422, "duplicate", format!("patient {} is already booked", patient.id)));
        }
        if live.version != token.version {
            let mut err = ErrorBody::new(
                409,
                "version_conflict",
                format!("schedule changed since version {}; now at {}", token.version, live.version),
            );
            let fresh = self.plan(&live.state, &patient, strategy);
            let version = live.version;
            drop(live);
            err.fresh = fresh.and_then(|pl| self.record(patient, strategy, pl, version)).ok().map(Box::new);
            return Err(err);
        }
        let receipt = self.commit(&mut live, &patient, assignment, false, Some(token.suggestion_id.clone()))?;
        drop(live);
        if let Some(s) = self.store().map.get_mut(&token.suggestion_id) {
            s.consumed = true;
        }
        Ok(receipt)
    }

    /// Books a slot chosen by the clerk. Feasibility is still enforced.
    fn book_forced(&self, req: BookingRequest) -> ApiResult<BookingReceipt> {
        let (Some(input), Some(start_day), Some(linac)) = (req.patient, req.start_day, req.linac) else {
            return Err(ErrorBody::new(
                422,
                "incomplete_override",
                "forced booking needs patient, start_day and linac",
            ));
        };
        let mut live = self.write();
        let patient = self.make_patient(&live.state, &input)?;
        self.commit(&mut live, &patient, Assignment { start_day, linac }, true, None)
    }

    fn commit(
        &self,
        live: &mut Live,
        patient: &Patient,
        assignment: Assignment,
        forced: bool,
        suggestion_id: Option<String>,
    ) -> ApiResult<BookingReceipt> {
        let Assignment { start_day, linac } = assignment;
        if start_day < patient.ready_day || !live.state.fits(patient, start_day, linac, patient.is_curative()) {
            return Err(ErrorBody::new(
                422,
                "infeasible_slot",
                format!("patient {} does not fit on linac {linac} from day {start_day}", patient.id),
            ));
        }
        let version = live.version + 1;
        if let Some(journal) = &self.journal {
            let record = JournalRecord {
                version,
                patient: patient.clone(),
                assignment,
                forced,
                suggestion_id,
                at_ms: self.clock.now_ms(),
            };
            journal.append(&record).map_err(|e| ErrorBody::new(500, "journal", e))?;
        }
        live.state.book(patient, assignment)?;
        let today = live.state.current_day().max(patient.admission_day);
        live.state.set_current_day(today);
        live.version = version;
        tracing::info!(patient = %patient.id, start_day, linac, forced, version, "booked");
        Ok(BookingReceipt {
            patient: patient.id,
            start_day,
            linac,
            date: self.config.calendar.date(start_day),
            forced,
            version,
            digest: digest(live.state.schedule()),
        })
    }

    pub fn occupancy(&self, q: OccupancyQuery) -> ApiResult<OccupancyMap> {
        let live = self.read();
        let state = &live.state;
        let from = q.from.unwrap_or(state.current_day());
        let days = q.days.unwrap_or(radsched_core::learning::CAPACITY_DAYS as u32);
        if days == 0 || from as u64 + days as u64 > state.horizon() as u64 {
            return Err(ErrorBody::new(
                416,
                "range_not_satisfiable",
                format!("days {from}..{} outside horizon of {} days", from as u64 + days as u64, state.horizon()),
            ));
        }
        let days = (from..from + days)
            .map(|day| OccupancyDay {
                day,
                date: self.config.calendar.date(day),
                fleet_remaining: state.fleet_remaining(day),
                linacs: (0..state.num_linacs())
                    .map(|linac| OccupancyCell {
                        linac,
                        total: state.scenario().total(day, linac),
                        remaining: state.remaining(day, linac),
                        reserved: state.reserved(day, linac),
                        curative_remaining: state.curative_remaining(day, linac),
                    })
                    .collect(),
            })
            .collect();
        Ok(OccupancyMap { version: live.version, from, days })
    }

    pub fn explanation(&self, id: &str) -> ApiResult<Explanation> {
        let store = self.store();
        let stored = store
            .map
            .get(id)
            .ok_or_else(|| ErrorBody::new(404, "unknown_suggestion", format!("no suggestion {id}")))?;
        match (&stored.suggestion.attribution, &stored.features) {
            (Some(a), Some(x)) => Ok(Explanation {
                suggestion_id: id.into(),
                attribution: a.clone(),
                waterfall: waterfall_from(a, x.as_slice()),
            }),
            _ => Err(ErrorBody::new(
                409,
                "not_model_backed",
                format!("suggestion {id} came from {} and has no attribution", stored.suggestion.strategy),
            )),
        }
    }
}

/// SHA-256 of a schedule's JSON form, hex encoded.
pub fn digest(schedule: &Schedule) -> String {
    let bytes = serde_json::to_vec(schedule).unwrap_or_default();
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}
