//! Rolling-horizon simulation and experiments.
//!
//! [`run_simulation`] replays one instance under one strategy and reports
//! per-patient waiting and overdue times. On top of it sit the two capacity
//! simulations used to pick arrival rates, the reservation sweep, strategy
//! comparisons with one-way ANOVA and paired t tests, and the end-to-end
//! train-and-evaluate pipeline.

mod capacity;
mod experiment;
mod sim;
pub mod stats;

pub use capacity::{
    analytic_capacity_rate, capacity_sim_uncapped, capacity_sim_waiting, DemandReport, WaitingTrend,
    DEMAND_BURN_IN_WEEKS,
};
pub use experiment::{
    compare, extract_examples, reservation_sweep, run_grid, run_pipeline, AnovaRow, ComparisonReport, PairRow,
    PipelineConfig, PipelineReport, StrategyCategoryStats, SweepReport, SweepRow, DEFAULT_GAMMAS,
};
pub use sim::{
    effective_gamma, run_simulation, summarize, CategorySummary, Metric, PatientRecord, SimConfig, SimResult,
};

use crate::error::Result;
use std::io::Write;

/// One row per patient per result.
pub fn write_records_csv<W: Write>(results: &[SimResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "strategy",
        "gamma",
        "seed",
        "patient",
        "category",
        "admission_day",
        "ready_day",
        "due_day",
        "start_day",
        "linac",
        "waiting",
        "overdue",
        "cost",
    ])?;
    for r in results {
        for p in &r.records {
            w.write_record([
                r.strategy.name().to_string(),
                r.gamma.to_string(),
                r.seed.to_string(),
                p.id.0.to_string(),
                p.category.label().to_string(),
                p.admission_day.to_string(),
                p.ready_day.to_string(),
                p.due_day.to_string(),
                p.start_day.to_string(),
                p.linac.to_string(),
                p.waiting.to_string(),
                p.overdue.to_string(),
                p.cost.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per (result, category) with the category means.
pub fn write_summary_csv<W: Write>(results: &[SimResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "strategy",
        "gamma",
        "seed",
        "category",
        "count",
        "mean_waiting",
        "mean_overdue",
        "avg_occupancy",
        "objective",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in results {
        for c in &r.per_category {
            w.write_record([
                r.strategy.name().to_string(),
                r.gamma.to_string(),
                r.seed.to_string(),
                c.category.label().to_string(),
                c.count.to_string(),
                opt(c.mean_waiting),
                opt(c.mean_overdue),
                r.avg_occupancy.to_string(),
                r.objective.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Mean overdue and waiting per strategy, gamma and category.
pub fn write_sweep_csv<W: Write>(report: &SweepReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["strategy", "gamma", "category", "mean_overdue", "mean_waiting"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in &report.rows {
        w.write_record([
            row.strategy.name().to_string(),
            row.gamma.to_string(),
            row.category.label().to_string(),
            opt(row.mean_overdue),
            opt(row.mean_waiting),
        ])?;
    }
    w.flush()?;
    Ok(())
}
