//! Waiting-time prediction.
//!
//! Training examples are extracted by replaying an instance against its
//! offline schedule; each curative arrival yields its [`FeatureVector`] and
//! its offline waiting time. A [`GbtModel`] is fitted on them and used by the
//! prediction-based strategy through the [`WaitingPredictor`] trait.

mod examples;
mod features;
mod gbt;
mod metrics;

pub use examples::{make_training_examples, read_examples_csv, write_examples_csv, TrainingExample};
pub use features::{
    feature_name, feature_names, present_capacity_vector, FeatureVector, CAPACITY_DAYS, DUE_OFFSET, FRACTIONS,
    FRACTION_BLOCKS, NUM_FEATURES, READY_OFFSET,
};
pub use gbt::{fit_gbt, fit_gbt_rows, GbtModel, GbtParams, Node, Tree, MODEL_FORMAT, MODEL_VERSION};
pub use metrics::{
    correlation_rows, evaluate, evaluate_predictions, feature_correlation, CorrelationMatrix, EvalReport, LinearModel,
};

use crate::error::Result;

/// Regressor mapping features to a waiting time in business days.
pub trait WaitingPredictor: Send + Sync {
    fn predict_raw(&self, x: &FeatureVector) -> Result<f64>;

    fn predict_waiting(&self, x: &FeatureVector) -> Result<u32> {
        Ok(round_waiting(self.predict_raw(x)?))
    }
}

/// Clamps at zero and rounds half away from zero.
pub fn round_waiting(raw: f64) -> u32 {
    if raw.is_nan() {
        return 0;
    }
    raw.max(0.0).round() as u32
}

/// Predicts the same raw value for every input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPredictor(pub f64);

impl WaitingPredictor for ConstantPredictor {
    fn predict_raw(&self, _: &FeatureVector) -> Result<f64> {
        Ok(self.0)
    }
}
