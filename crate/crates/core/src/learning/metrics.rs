use super::{feature_names, FeatureVector, TrainingExample, WaitingPredictor, NUM_FEATURES};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mse: f64,
    pub mae: f64,
    /// `1 - SS_res / SS_tot`; constant labels give 1 for a perfect fit, else 0.
    pub r_squared: f64,
    pub n: usize,
}

pub fn evaluate_predictions(y: &[f64], y_hat: &[f64]) -> Result<EvalReport> {
    if y.is_empty() || y.len() != y_hat.len() {
        return Err(Error::Empty("evaluation set"));
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - mean) * (a - mean)).sum();
    let mae = y.iter().zip(y_hat).map(|(a, b)| (a - b).abs()).sum::<f64>() / n;
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(EvalReport { mse: ss_res / n, mae, r_squared, n: y.len() })
}

/// Scores the raw (unrounded) model output against the labels.
pub fn evaluate(model: &dyn WaitingPredictor, examples: &[TrainingExample]) -> Result<EvalReport> {
    let y: Vec<f64> = examples.iter().map(|e| e.y).collect();
    let y_hat = examples.iter().map(|e| model.predict_raw(&e.x)).collect::<Result<Vec<f64>>>()?;
    evaluate_predictions(&y, &y_hat)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// Pearson correlations; rows and columns of zero-variance features are 0.
    pub values: Vec<Vec<f64>>,
    pub zero_variance: Vec<bool>,
}

pub fn feature_correlation(examples: &[TrainingExample]) -> Result<CorrelationMatrix> {
    let rows: Vec<&[f64]> = examples.iter().map(|e| e.x.as_slice()).collect();
    let mut m = correlation_rows(&rows, NUM_FEATURES)?;
    m.names = feature_names();
    Ok(m)
}

/// Pearson correlation of the columns of `rows`.
pub fn correlation_rows(rows: &[&[f64]], width: usize) -> Result<CorrelationMatrix> {
    if rows.len() < 2 {
        return Err(Error::Empty("correlation needs at least two rows"));
    }
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..width).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; width]; width];
    for r in rows {
        for i in 0..width {
            let di = r[i] - means[i];
            for j in i..width {
                cov[i][j] += di * (r[j] - means[j]);
            }
        }
    }
    let zero_variance: Vec<bool> = (0..width).map(|i| cov[i][i] <= 0.0).collect();
    let mut values = vec![vec![0.0; width]; width];
    for i in 0..width {
        for j in i..width {
            if zero_variance[i] || zero_variance[j] {
                continue;
            }
            let c = if i == j { 1.0 } else { (cov[i][j] / (cov[i][i] * cov[j][j]).sqrt()).clamp(-1.0, 1.0) };
            values[i][j] = c;
            values[j][i] = c;
        }
    }
    Ok(CorrelationMatrix { names: (0..width).map(|i| format!("x{i}")).collect(), values, zero_variance })
}

/// Ordinary least-squares baseline with intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearModel {
    /// Minimum-norm least-squares fit via SVD, so collinear features are tolerated.
    pub fn fit(examples: &[TrainingExample]) -> Result<Self> {
        if examples.len() < 2 {
            return Err(Error::Empty("linear fit needs at least two examples"));
        }
        let n = examples.len();
        let a =
            DMatrix::from_fn(n, NUM_FEATURES + 1, |i, j| if j == 0 { 1.0 } else { examples[i].x.as_slice()[j - 1] });
        let b = DVector::from_iterator(n, examples.iter().map(|e| e.y));
        let beta = a.svd(true, true).solve(&b, 1e-9).map_err(|e| Error::Solver(format!("least squares: {e}")))?;
        Ok(LinearModel { intercept: beta[0], coefficients: beta.iter().skip(1).copied().collect() })
    }
}

impl WaitingPredictor for LinearModel {
    fn predict_raw(&self, x: &FeatureVector) -> Result<f64> {
        Ok(self.intercept + self.coefficients.iter().zip(x.as_slice()).map(|(c, v)| c * v).sum::<f64>())
    }
}
