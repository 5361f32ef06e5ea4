use proptest::prelude::*;
use radsched_core::domain::{Category, PatientId};
use radsched_core::instancegen::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TABLE_WEIGHTS: [(Category, f64); 4] =
    [(Category::P1, 0.0044), (Category::P2, 0.2714), (Category::P3, 0.4136), (Category::P4, 0.3106)];

#[test]
fn poisson_daily_counts_have_mean_lambda() {
    let pool = PatientPool::default();
    for (k, lambda) in [2.5, 5.0, 12.0].into_iter().enumerate() {
        let setting = InstanceSetting::new(2, lambda).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77 + k as u64);
        let flow = generate_flow(&setting, 0, 10_000, 0, &pool, &mut rng).unwrap();
        let mean = flow.len() as f64 / 10_000.0;
        let tol = 3.0 * (lambda / 10_000.0).sqrt();
        assert!((mean - lambda).abs() <= tol, "lambda {lambda}: mean {mean}, tol {tol}");
    }
}

#[test]
fn category_shares_match_weights() {
    let pool = PatientPool::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut counts = [0usize; 4];
    for _ in 0..100_000 {
        counts[pool.sample_category(&mut rng).index()] += 1;
    }
    for (cat, w) in TABLE_WEIGHTS {
        let share = counts[cat.index()] as f64 / 100_000.0;
        assert!((share - w).abs() <= 0.02, "{cat}: {share} vs {w}");
        assert_eq!(pool.weight(cat), w);
    }
}

#[test]
fn ids_are_consecutive_and_sequence_numbers_restart_daily() {
    let setting = InstanceSetting::new(2, 5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let flow = generate_flow(&setting, 3, 40, 100, &PatientPool::default(), &mut rng).unwrap();
    for (k, p) in flow.patients().enumerate() {
        assert_eq!(p.id, PatientId(100 + k as u32));
    }
    for day in flow.days() {
        for (seq, p) in flow.on_day(day).iter().enumerate() {
            assert_eq!((p.admission_day, p.admission_seq), (day, seq as u32));
        }
    }
    assert_eq!(flow.first_day(), 3);
    assert_eq!(flow.end_day(), 43);
}

#[test]
fn variable_rates_stay_in_band_and_reject_large_delta() {
    let setting = InstanceSetting::new(4, 5.0).unwrap();
    let pool = PatientPool::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let v = RateVariation { delta: 1.5, interval_days: 10 };
    let (flow, rates) = generate_variable_flow(&setting, 0, 95, 0, v, &pool, &mut rng).unwrap();
    assert_eq!(flow.num_days(), 95);
    assert_eq!(rates.len(), 10);
    assert!(rates.iter().all(|r| (3.5..=6.5).contains(r)));
    let bad = RateVariation { delta: 5.0, interval_days: 10 };
    assert!(generate_variable_flow(&setting, 0, 10, 0, bad, &pool, &mut rng).is_err());
}

#[test]
fn instances_are_reproducible_from_their_seed() {
    let setting = InstanceSetting::new(2, 2.5).unwrap();
    let config = InstanceConfig { num_days: 30, ..Default::default() };
    let pool = PatientPool::default();
    let a = generate_instance(&setting, &pool, &config, 42).unwrap();
    let b = generate_instance(&setting, &pool, &config, 42).unwrap();
    let c = generate_instance(&setting, &pool, &config, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.flow, c.flow);
    let batch = generate_instances(&setting, &pool, &config, 42, 2).unwrap();
    assert_eq!(batch[0], a);
    assert_eq!(batch[1], c);
    a.validate().unwrap();
    assert_eq!(a.scenario.horizon_days, 30 + HORIZON_PAD);
}

#[test]
fn warmup_leaves_a_busy_but_legal_fleet() {
    let setting = InstanceSetting::new(2, 2.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let config = WarmupConfig::default();
    let out = warmup_scenario(&setting, &PatientPool::default(), &config, 100, &mut rng).unwrap();
    out.scenario.validate().unwrap();
    let fleet = 2.0 * config.day_capacity as f64;
    // Day 0 of the scenario follows the stop day, which was itself at least 90% full.
    assert!(out.scenario.fleet_committed(0) as f64 > 0.5 * fleet);
    assert!(out.scenario.fleet_committed(99) < out.scenario.fleet_committed(0));
    for day in 0..100 {
        for linac in 0..2 {
            assert!(out.scenario.committed(day, linac) <= config.day_capacity);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sampled_patients_respect_their_profile(seed in any::<u64>(), day in 0u32..500) {
        let pool = PatientPool::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for seq in 0..8 {
            let p = sample_patient(&pool, None, PatientId(seq), day, seq, &mut rng).unwrap();
            let prof = pool.profile(p.category).unwrap();
            prop_assert!(prof.fractions.values.contains(&p.fractions));
            prop_assert!(prof.fraction_blocks.values.contains(&p.fraction_blocks));
            prop_assert!(prof.ready_offset.values.contains(&p.ready_offset()));
            prop_assert_eq!(p.due_day, day + p.category.deadline_days());
            prop_assert!(p.ready_day >= p.admission_day);
            if p.is_palliative() {
                prop_assert!(p.fractions <= 5);
            }
        }
    }

    #[test]
    fn shifting_a_flow_moves_every_date(seed in 0u64..1000, shift in 0i64..300) {
        let setting = InstanceSetting::new(1, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flow = generate_flow(&setting, 10, 15, 0, &PatientPool::default(), &mut rng).unwrap();
        let moved = flow.shifted(shift);
        prop_assert_eq!(moved.first_day() as i64, 10 + shift);
        for (a, b) in flow.patients().zip(moved.patients()) {
            prop_assert_eq!(b.admission_day as i64 - a.admission_day as i64, shift);
            prop_assert_eq!(b.due_day as i64 - a.due_day as i64, shift);
            prop_assert_eq!(b.ready_offset(), a.ready_offset());
        }
    }
}
