use super::sim::{run_simulation, Metric, SimConfig, SimResult};
use super::stats::{one_way_anova, paired_t_test, sign_test_less, SignTest, TestResult};
use crate::domain::Category;
use crate::error::{Error, Result};
use crate::instancegen::{generate_instances, Instance, InstanceConfig, InstanceSetting, PatientPool};
use crate::learning::{
    evaluate, fit_gbt, make_training_examples, EvalReport, GbtModel, GbtParams, LinearModel, TrainingExample,
    WaitingPredictor,
};
use crate::strategies::{schedule_offline, StrategyKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_GAMMAS: [f64; 5] = [0.0, 0.05, 0.10, 0.15, 0.20];

/// Runs every (instance, strategy, gamma) cell in parallel. Results come
/// back ordered by gamma, then strategy, then instance.
pub fn run_grid(
    instances: &[Instance],
    strategies: &[StrategyKind],
    gammas: &[f64],
    config: &SimConfig,
    predictor: Option<&dyn WaitingPredictor>,
) -> Result<Vec<SimResult>> {
    let cells: Vec<(f64, StrategyKind, &Instance)> = gammas
        .iter()
        .flat_map(|&g| strategies.iter().flat_map(move |&s| instances.iter().map(move |i| (g, s, i))))
        .collect();
    cells.par_iter().map(|&(g, s, inst)| run_simulation(inst, s, g, config, predictor)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyCategoryStats {
    pub strategy: StrategyKind,
    pub category: Category,
    pub metric: Metric,
    /// Mean over instances of the per-instance mean.
    pub mean_of_instance_means: Option<f64>,
    /// Mean over all patients of all instances.
    pub pooled_mean: Option<f64>,
    pub instance_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub category: Category,
    pub metric: Metric,
    pub result: Option<TestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub category: Category,
    pub metric: Metric,
    pub a: StrategyKind,
    pub b: StrategyKind,
    pub result: Option<TestResult>,
}

/// Strategy comparison at one reservation rate.
///
/// Statistics use per-instance means; instances without patients of a
/// category are left out of that category's tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub gamma: f64,
    pub strategies: Vec<StrategyKind>,
    pub stats: Vec<StrategyCategoryStats>,
    pub anova: Vec<AnovaRow>,
    pub pairs: Vec<PairRow>,
}

/// Builds the report from results of several strategies on the same
/// instances at one gamma.
pub fn compare(results: &[SimResult]) -> Result<ComparisonReport> {
    let first = results.first().ok_or(Error::Empty("comparison results"))?;
    let gamma = first.gamma;
    let mut strategies: Vec<StrategyKind> = Vec::new();
    for r in results {
        if !strategies.contains(&r.strategy) {
            strategies.push(r.strategy);
        }
    }
    let mut seeds: Vec<u64> = results.iter().filter(|r| r.strategy == strategies[0]).map(|r| r.seed).collect();
    seeds.dedup();
    let find = |s: StrategyKind, seed: u64| results.iter().find(|r| r.strategy == s && r.seed == seed);

    let mut stats = Vec::new();
    let mut anova = Vec::new();
    let mut pairs = Vec::new();
    for metric in [Metric::Waiting, Metric::Overdue] {
        for category in Category::ALL {
            // Seeds where every strategy has patients of this category.
            let usable: Vec<u64> = seeds
                .iter()
                .copied()
                .filter(|&seed| {
                    strategies.iter().all(|&s| find(s, seed).and_then(|r| r.mean_of(category, metric)).is_some())
                })
                .collect();
            let mut groups: Vec<Vec<f64>> = Vec::new();
            for &s in &strategies {
                let means: Vec<f64> =
                    usable.iter().filter_map(|&seed| find(s, seed).and_then(|r| r.mean_of(category, metric))).collect();
                let pooled: Vec<f64> = results
                    .iter()
                    .filter(|r| r.strategy == s)
                    .flat_map(|r| r.records.iter().filter(|p| p.category == category).map(|p| metric.of(p)))
                    .collect();
                stats.push(StrategyCategoryStats {
                    strategy: s,
                    category,
                    metric,
                    mean_of_instance_means: super::stats::mean(&means),
                    pooled_mean: super::stats::mean(&pooled),
                    instance_means: means.clone(),
                });
                groups.push(means);
            }
            let refs: Vec<&[f64]> = groups.iter().map(Vec::as_slice).collect();
            anova.push(AnovaRow { category, metric, result: one_way_anova(&refs).ok() });
            for i in 0..strategies.len() {
                for j in i + 1..strategies.len() {
                    pairs.push(PairRow {
                        category,
                        metric,
                        a: strategies[i],
                        b: strategies[j],
                        result: paired_t_test(&groups[i], &groups[j]).ok(),
                    });
                }
            }
        }
    }
    Ok(ComparisonReport { gamma, strategies, stats, anova, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub strategy: StrategyKind,
    pub gamma: f64,
    pub category: Category,
    pub mean_overdue: Option<f64>,
    pub mean_waiting: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub reports: Vec<ComparisonReport>,
}

/// Full factorial of strategies and reservation rates.
pub fn reservation_sweep(
    instances: &[Instance],
    strategies: &[StrategyKind],
    gammas: &[f64],
    config: &SimConfig,
    predictor: Option<&dyn WaitingPredictor>,
) -> Result<SweepReport> {
    if let Some(g) = gammas.iter().find(|g| !(0.0..1.0).contains(*g)) {
        return Err(Error::InvalidParameter(format!("reservation rate {g} outside [0, 1)")));
    }
    let results = run_grid(instances, strategies, gammas, config, predictor)?;
    let per_gamma = strategies.len() * instances.len();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (gi, &gamma) in gammas.iter().enumerate() {
        let chunk = &results[gi * per_gamma..(gi + 1) * per_gamma];
        let mut report = compare(chunk)?;
        report.gamma = gamma;
        for &s in strategies {
            for c in Category::ALL {
                let pick = |m: Metric| {
                    report
                        .stats
                        .iter()
                        .find(|x| x.strategy == s && x.category == c && x.metric == m)
                        .and_then(|x| x.pooled_mean)
                };
                rows.push(SweepRow {
                    strategy: s,
                    gamma,
                    category: c,
                    mean_overdue: pick(Metric::Overdue),
                    mean_waiting: pick(Metric::Waiting),
                });
            }
        }
        reports.push(report);
    }
    Ok(SweepReport { rows, reports })
}

/// Offline schedules of `instances` turned into training examples.
pub fn extract_examples(instances: &[Instance], config: &SimConfig) -> Result<Vec<TrainingExample>> {
    let per_instance: Vec<Vec<TrainingExample>> = instances
        .par_iter()
        .map(|inst| {
            let offline = schedule_offline(inst, config.weights, &config.offline_solver)?;
            make_training_examples(inst, &offline.schedule)
        })
        .collect::<Result<_>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub setting: InstanceSetting,
    pub instance: InstanceConfig,
    pub train_instances: usize,
    pub test_instances: usize,
    pub train_seed: u64,
    pub test_seed: u64,
    pub gamma: f64,
    pub gbt: GbtParams,
    pub sim: SimConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            setting: InstanceSetting { num_linacs: 2, arrival_rate: 2.5 },
            instance: InstanceConfig::default(),
            train_instances: 50,
            test_instances: 30,
            train_seed: 1_000,
            test_seed: 900_000,
            gamma: 0.10,
            gbt: GbtParams::default(),
            sim: SimConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub train_examples: usize,
    pub test_examples: usize,
    /// Held-out score of the boosted model.
    pub gbt_eval: EvalReport,
    /// Held-out score of the least-squares baseline.
    pub linear_eval: EvalReport,
    /// Per test instance mean palliative overdue (0 when it has no palliatives).
    pub prediction_palliative_overdue: Vec<f64>,
    pub greedy_palliative_overdue: Vec<f64>,
    pub sign_test: SignTest,
    pub model: GbtModel,
}

/// Train on offline schedules, then compare prediction-based against online
/// greedy on held-out instances.
pub fn run_pipeline(config: &PipelineConfig, pool: &PatientPool) -> Result<PipelineReport> {
    let train = generate_instances(&config.setting, pool, &config.instance, config.train_seed, config.train_instances)?;
    let train_examples = extract_examples(&train, &config.sim)?;
    drop(train);
    let model = fit_gbt(&train_examples, &config.gbt)?;
    let linear = LinearModel::fit(&train_examples)?;

    let test = generate_instances(&config.setting, pool, &config.instance, config.test_seed, config.test_instances)?;
    let test_examples = extract_examples(&test, &config.sim)?;
    let gbt_eval = evaluate(&model, &test_examples)?;
    let linear_eval = evaluate(&linear, &test_examples)?;

    let strategies = [StrategyKind::PredictionBased, StrategyKind::OnlineGreedy];
    let results = run_grid(&test, &strategies, &[config.gamma], &config.sim, Some(&model))?;
    let overdue = |s: StrategyKind| -> Vec<f64> {
        results.iter().filter(|r| r.strategy == s).map(|r| r.palliative_mean_overdue().unwrap_or(0.0)).collect()
    };
    let prediction_palliative_overdue = overdue(StrategyKind::PredictionBased);
    let greedy_palliative_overdue = overdue(StrategyKind::OnlineGreedy);
    let sign_test = sign_test_less(&prediction_palliative_overdue, &greedy_palliative_overdue)?;
    Ok(PipelineReport {
        train_examples: train_examples.len(),
        test_examples: test_examples.len(),
        gbt_eval,
        linear_eval,
        prediction_palliative_overdue,
        greedy_palliative_overdue,
        sign_test,
        model,
    })
}
