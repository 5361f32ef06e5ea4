use super::{sample_patient, PatientPool};
use crate::domain::{Day, Patient, PatientId};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

/// Fleet size and daily arrival rate characterizing a clinic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSetting {
    pub num_linacs: usize,
    pub arrival_rate: f64,
}

impl InstanceSetting {
    pub fn new(num_linacs: usize, arrival_rate: f64) -> Result<Self> {
        let s = InstanceSetting { num_linacs, arrival_rate };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_linacs == 0 {
            return Err(Error::InvalidParameter("at least one linac required".into()));
        }
        if !(self.arrival_rate.is_finite() && self.arrival_rate > 0.0) {
            return Err(Error::InvalidParameter(format!("arrival rate must be positive, got {}", self.arrival_rate)));
        }
        Ok(())
    }
}

/// Day-indexed arrivals. `arrivals[k]` holds the patients admitted on
/// `start_day + k`, in admission order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PatientFlow {
    pub start_day: Day,
    pub arrivals: Vec<Vec<Patient>>,
}

impl PatientFlow {
    pub fn first_day(&self) -> Day {
        self.start_day
    }

    pub fn num_days(&self) -> u32 {
        self.arrivals.len() as u32
    }

    /// Day after the last simulated day.
    pub fn end_day(&self) -> Day {
        self.start_day + self.num_days()
    }

    pub fn days(&self) -> impl Iterator<Item = Day> + '_ {
        self.start_day..self.end_day()
    }

    pub fn on_day(&self, day: Day) -> &[Patient] {
        day.checked_sub(self.start_day).and_then(|k| self.arrivals.get(k as usize)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All arrivals in (day, admission_seq) order.
    pub fn arrivals(&self) -> impl Iterator<Item = (Day, &Patient)> + '_ {
        self.arrivals
            .iter()
            .enumerate()
            .flat_map(move |(k, day)| day.iter().map(move |p| (self.start_day + k as Day, p)))
    }

    pub fn patients(&self) -> impl Iterator<Item = &Patient> + '_ {
        self.arrivals.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.arrivals.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = std::collections::BTreeSet::new();
        for (k, day) in self.arrivals.iter().enumerate() {
            let d = self.start_day + k as Day;
            for (j, p) in day.iter().enumerate() {
                p.validate()?;
                if p.admission_day != d {
                    return Err(Error::InvalidPatient {
                        id: p.id,
                        reason: format!("admitted on {} but listed on {d}", p.admission_day),
                    });
                }
                if j > 0 && p.admission_seq <= day[j - 1].admission_seq {
                    return Err(Error::InvalidPatient { id: p.id, reason: "admission order not increasing".into() });
                }
                if !ids.insert(p.id) {
                    return Err(Error::InvalidPatient { id: p.id, reason: "duplicate id".into() });
                }
            }
        }
        Ok(())
    }

    /// Copy of the flow moved `days` later (or earlier when negative).
    pub fn shifted(&self, days: i64) -> PatientFlow {
        PatientFlow {
            start_day: (self.start_day as i64 + days) as Day,
            arrivals: self.arrivals.iter().map(|d| d.iter().map(|p| p.shifted(days)).collect()).collect(),
        }
    }
}

/// Piecewise-constant arrival rates: every `interval_days` a new rate is drawn
/// uniformly from `[rate - delta, rate + delta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateVariation {
    pub delta: f64,
    pub interval_days: u32,
}

impl Default for RateVariation {
    fn default() -> Self {
        RateVariation { delta: 1.5, interval_days: 10 }
    }
}

fn poisson(rate: f64) -> Result<Poisson<f64>> {
    Poisson::new(rate).map_err(|e| Error::InvalidParameter(format!("arrival rate {rate}: {e}")))
}

fn fill_day<R: Rng + ?Sized>(
    pool: &PatientPool,
    day: Day,
    count: u32,
    next_id: &mut u32,
    rng: &mut R,
) -> Result<Vec<Patient>> {
    (0..count)
        .map(|seq| {
            let id = PatientId(*next_id);
            *next_id += 1;
            sample_patient(pool, None, id, day, seq, rng)
        })
        .collect()
}

/// Poisson arrivals over `num_days` days starting on `start_day`; ids count up from `first_id`.
pub fn generate_flow<R: Rng + ?Sized>(
    setting: &InstanceSetting,
    start_day: Day,
    num_days: u32,
    first_id: u32,
    pool: &PatientPool,
    rng: &mut R,
) -> Result<PatientFlow> {
    setting.validate()?;
    if num_days == 0 {
        return Err(Error::InvalidParameter("flow needs at least one day".into()));
    }
    let counts = poisson(setting.arrival_rate)?;
    let mut next_id = first_id;
    let mut arrivals = Vec::with_capacity(num_days as usize);
    for k in 0..num_days {
        let n = counts.sample(rng) as u32;
        arrivals.push(fill_day(pool, start_day + k, n, &mut next_id, rng)?);
    }
    Ok(PatientFlow { start_day, arrivals })
}

/// Arrivals whose rate changes every `variation.interval_days`. Returns the
/// flow and the rate of each segment.
pub fn generate_variable_flow<R: Rng + ?Sized>(
    setting: &InstanceSetting,
    start_day: Day,
    num_days: u32,
    first_id: u32,
    variation: RateVariation,
    pool: &PatientPool,
    rng: &mut R,
) -> Result<(PatientFlow, Vec<f64>)> {
    setting.validate()?;
    let RateVariation { delta, interval_days } = variation;
    if !(delta >= 0.0 && delta < setting.arrival_rate) {
        return Err(Error::InvalidParameter(format!(
            "rate variation {delta} must lie in [0, {})",
            setting.arrival_rate
        )));
    }
    if interval_days == 0 || num_days == 0 {
        return Err(Error::InvalidParameter("interval and period must be positive".into()));
    }
    let lo = setting.arrival_rate - delta;
    let hi = setting.arrival_rate + delta;
    let mut next_id = first_id;
    let mut rates = Vec::new();
    let mut arrivals = Vec::with_capacity(num_days as usize);
    let mut counts = poisson(setting.arrival_rate)?;
    for k in 0..num_days {
        if k % interval_days == 0 {
            let rate = if delta > 0.0 { rng.random_range(lo..=hi) } else { setting.arrival_rate };
            counts = poisson(rate)?;
            rates.push(rate);
        }
        let n = counts.sample(rng) as u32;
        arrivals.push(fill_day(pool, start_day + k, n, &mut next_id, rng)?);
    }
    Ok((PatientFlow { start_day, arrivals }, rates))
}
