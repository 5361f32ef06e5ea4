use radsched_core::domain::Category;
use radsched_core::harness::stats::{mean, median};
use radsched_core::harness::*;
use radsched_core::instancegen::*;
use radsched_core::ipcore::{BranchAndBound, SolverBudget};
use radsched_core::learning::ConstantPredictor;
use radsched_core::strategies::StrategyKind;

fn pool() -> PatientPool {
    PatientPool::default()
}

#[test]
fn uncapped_demand_matches_the_analytic_expectation() {
    let setting = InstanceSetting::new(4, 5.0).unwrap();
    let report = capacity_sim_uncapped(&setting, &pool(), 5_000, 21).unwrap();
    // Weekly demand is autocorrelated through multi-week courses, so the
    // standard error comes from means of 20-week batches.
    let batches: Vec<f64> =
        report.weekly_demand.chunks_exact(20).map(|c| c.iter().sum::<u64>() as f64 / 20.0).collect();
    let m = mean(&batches).unwrap();
    let var = batches.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (batches.len() - 1) as f64;
    let se = (var / batches.len() as f64).sqrt();
    assert!(
        (report.expected_weekly_demand - report.mean_weekly_demand).abs() <= 3.0 * se,
        "expected {}, simulated {} (se {se})",
        report.expected_weekly_demand,
        report.mean_weekly_demand
    );
    assert_eq!(report.weekly_capacity, 4 * 5 * 120);
}

fn median_slope(linacs: usize, rate: f64) -> f64 {
    let setting = InstanceSetting::new(linacs, rate).unwrap();
    let slopes: Vec<f64> =
        (0..5).map(|s| capacity_sim_waiting(&setting, &pool(), 180, s).unwrap().slope.unwrap()).collect();
    median(&slopes).unwrap()
}

#[test]
fn waiting_is_flat_below_capacity_and_grows_above_it() {
    let cap = analytic_capacity_rate(2, &pool());
    let calm = median_slope(2, 0.4 * cap);
    assert!(calm.abs() < 0.05, "slope {calm}");
    let busy = median_slope(2, 1.3 * cap);
    assert!(busy > 0.0, "slope {busy}");
}

fn tiny_instances(count: usize) -> Vec<Instance> {
    let rate = 0.9 * analytic_capacity_rate(1, &pool());
    let setting = InstanceSetting::new(1, rate).unwrap();
    let config = InstanceConfig { num_days: 3, ..Default::default() };
    (0..)
        .map(|seed| generate_instance(&setting, &pool(), &config, seed).unwrap())
        .filter(|i| (1..=8).contains(&i.flow.len()) && i.flow.patients().any(|p| p.is_curative()))
        .take(count)
        .collect()
}

#[test]
fn offline_is_never_beaten_on_tiny_instances() {
    let config = SimConfig { offline_solver: BranchAndBound::new(SolverBudget::unlimited()), ..Default::default() };
    for inst in tiny_instances(30) {
        let offline = run_simulation(&inst, StrategyKind::Offline, 0.0, &config, None).unwrap();
        for gamma in [0.0, 0.1] {
            for s in StrategyKind::ONLINE {
                let predictor = ConstantPredictor(8.0);
                let r = run_simulation(&inst, s, gamma, &config, Some(&predictor)).unwrap();
                assert!(
                    offline.objective <= r.objective,
                    "seed {} {s} gamma {gamma}: offline {} > {}",
                    inst.rng_seed,
                    offline.objective,
                    r.objective
                );
            }
        }
    }
}

#[test]
fn grid_results_are_ordered_and_complete() {
    let setting = InstanceSetting::new(2, 2.5).unwrap();
    let instances =
        generate_instances(&setting, &pool(), &InstanceConfig { num_days: 15, ..Default::default() }, 70, 3).unwrap();
    let strategies = [StrategyKind::OnlineGreedy, StrategyKind::DailyGreedy];
    let gammas = [0.0, 0.2];
    let results = run_grid(&instances, &strategies, &gammas, &SimConfig::default(), None).unwrap();
    assert_eq!(results.len(), 12);
    let mut k = 0;
    for &g in &gammas {
        for &s in &strategies {
            for inst in &instances {
                assert_eq!((results[k].gamma, results[k].strategy, results[k].seed), (g, s, inst.rng_seed));
                assert_eq!(results[k].num_patients, inst.flow.len());
                k += 1;
            }
        }
    }
    let report = compare(&results[..6]).unwrap();
    assert_eq!(report.stats.len(), 2 * 4 * 2);
    assert_eq!(report.pairs.len(), 2 * 4);
    for st in &report.stats {
        let records: Vec<f64> = results[..6]
            .iter()
            .filter(|r| r.strategy == st.strategy)
            .flat_map(|r| r.records.iter().filter(|p| p.category == st.category).map(|p| st.metric.of(p)))
            .collect();
        assert_eq!(st.pooled_mean, mean(&records));
    }
    let total: usize = results[0].per_category.iter().map(|c| c.count).sum();
    assert_eq!(total, results[0].num_patients);
    let objective: f64 = results[0].records.iter().map(|r| r.cost).sum();
    assert!((objective - results[0].objective).abs() < 1e-6 * objective.max(1.0));
}

#[test]
fn reservation_lowers_palliative_overdue_for_greedy() {
    let setting = InstanceSetting::new(2, 2.5).unwrap();
    let instances =
        generate_instances(&setting, &pool(), &InstanceConfig { num_days: 60, ..Default::default() }, 300, 6).unwrap();
    let sweep =
        reservation_sweep(&instances, &[StrategyKind::OnlineGreedy], &[0.0, 0.2], &SimConfig::default(), None).unwrap();
    let overdue = |g: f64| {
        sweep
            .rows
            .iter()
            .filter(|r| r.gamma == g && r.category.is_palliative())
            .filter_map(|r| r.mean_overdue)
            .sum::<f64>()
    };
    assert!(overdue(0.2) <= overdue(0.0), "{} > {}", overdue(0.2), overdue(0.0));
    assert_eq!(sweep.rows.len(), 2 * Category::ALL.len());
    assert!(reservation_sweep(&instances, &[StrategyKind::OnlineGreedy], &[1.0], &SimConfig::default(), None).is_err());
}

#[test]
fn csv_writers_emit_one_row_per_record() {
    let setting = InstanceSetting::new(2, 2.5).unwrap();
    let inst = generate_instance(&setting, &pool(), &InstanceConfig { num_days: 10, ..Default::default() }, 5).unwrap();
    let r = run_simulation(&inst, StrategyKind::OnlineGreedy, 0.1, &SimConfig::default(), None).unwrap();
    let mut out = Vec::new();
    write_records_csv(std::slice::from_ref(&r), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), r.records.len() + 1);
}

#[test]
fn four_linacs_at_rate_6_5_have_overloaded_weeks() {
    let setting = InstanceSetting::new(4, 6.5).unwrap();
    let overloaded =
        (0..5).filter(|&s| capacity_sim_uncapped(&setting, &pool(), 1_000, s).unwrap().weeks_over_capacity > 0).count();
    assert!(overloaded >= 3, "only {overloaded} of 5 seeds overloaded");
}

#[test]
fn default_reservation_rates() {
    assert_eq!(DEFAULT_GAMMAS, [0.0, 0.05, 0.10, 0.15, 0.20]);
}

#[test]
fn palliative_overdue_does_not_grow_with_the_reservation() {
    let rate = analytic_capacity_rate(2, &pool());
    let setting = InstanceSetting::new(2, rate).unwrap();
    let instances =
        generate_instances(&setting, &pool(), &InstanceConfig { num_days: 80, ..Default::default() }, 600, 12).unwrap();
    let results =
        run_grid(&instances, &[StrategyKind::OnlineGreedy], &DEFAULT_GAMMAS, &SimConfig::default(), None).unwrap();
    let per_instance = |g: f64| -> Vec<f64> {
        results.iter().filter(|r| r.gamma == g).map(|r| r.palliative_mean_overdue().unwrap_or(0.0)).collect()
    };
    let aggregate: Vec<f64> = DEFAULT_GAMMAS.iter().map(|&g| mean(&per_instance(g)).unwrap()).collect();
    for w in aggregate.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "aggregate overdue rose: {aggregate:?}");
    }
    let test = stats::sign_test_less(&per_instance(0.2), &per_instance(0.0)).unwrap();
    assert!(test.p_value < 0.05, "{test:?}");
}

#[test]
fn category_summaries_recompute_from_records() {
    let setting = InstanceSetting::new(2, 2.5).unwrap();
    let inst = generate_instance(&setting, &pool(), &InstanceConfig { num_days: 40, ..Default::default() }, 8).unwrap();
    for s in [StrategyKind::OnlineGreedy, StrategyKind::WeeklyIp] {
        let r = run_simulation(&inst, s, 0.1, &SimConfig::default(), None).unwrap();
        for c in Category::ALL {
            let rows: Vec<_> = r.records.iter().filter(|p| p.category == c).collect();
            let summary = r.category(c);
            assert_eq!(summary.count, rows.len());
            let w: Vec<f64> = rows.iter().map(|p| p.waiting as f64).collect();
            let o: Vec<f64> = rows.iter().map(|p| p.overdue as f64).collect();
            assert_eq!(summary.mean_waiting, mean(&w));
            assert_eq!(summary.mean_overdue, mean(&o));
            assert_eq!(summary.max_waiting, rows.iter().map(|p| p.waiting).max().unwrap_or(0));
        }
    }
}
