use super::{feature_names, FeatureVector, NUM_FEATURES};
use crate::domain::{waiting_time, Schedule};
use crate::error::{Error, Result};
use crate::instancegen::Instance;
use crate::strategies::ScheduleState;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub x: FeatureVector,
    /// Waiting time in the offline schedule, in business days.
    pub y: f64,
}

/// Replays an instance against its offline schedule.
///
/// Arrivals are visited in admission order. Each curative emits its feature
/// vector, computed from the capacity left by the offline appointments of
/// every earlier arrival, labelled with its offline waiting time. Every
/// patient's appointments are then removed from the present capacity.
pub fn make_training_examples(instance: &Instance, offline: &Schedule) -> Result<Vec<TrainingExample>> {
    let mut state = ScheduleState::new(instance.scenario.clone(), 0.0)?;
    let mut out = Vec::new();
    for (_, patient) in instance.flow.arrivals() {
        let slot = offline.get(patient.id).ok_or_else(|| Error::Unassigned(vec![patient.id]))?;
        if patient.is_curative() {
            let x = FeatureVector::from_state(&state, patient)?;
            let y = waiting_time(patient, slot.start_day)? as f64;
            out.push(TrainingExample { x, y });
        }
        state.book(patient, slot)?;
    }
    Ok(out)
}

/// Writes examples as CSV: one column per feature, then `label`.
pub fn write_examples_csv<W: Write>(examples: &[TrainingExample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = feature_names();
    header.push("label".into());
    w.write_record(&header)?;
    for e in examples {
        let mut row: Vec<String> = e.x.as_slice().iter().map(|v| v.to_string()).collect();
        row.push(e.y.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_examples_csv<R: Read>(input: R) -> Result<Vec<TrainingExample>> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers()?.len();
    if width != NUM_FEATURES + 1 {
        return Err(Error::FeatureLength { got: width.saturating_sub(1), expected: NUM_FEATURES });
    }
    let mut out = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::InvalidParameter(format!("examples row {}: {e}", line + 2)))?;
        let (x, y) = values.split_at(NUM_FEATURES);
        out.push(TrainingExample { x: FeatureVector::new(x.to_vec())?, y: y[0] });
    }
    Ok(out)
}
