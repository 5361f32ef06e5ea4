//! Shared inputs for the benchmarks.

use radsched_core::domain::Patient;
use radsched_core::harness::SimConfig;
use radsched_core::instancegen::{generate_instance, generate_instances, Instance, InstanceConfig, InstanceSetting};
use radsched_core::ipcore::{default_horizon_len, IpModel};
use radsched_core::learning::{fit_gbt, make_training_examples, GbtModel, GbtParams, TrainingExample};
use radsched_core::strategies::{schedule_offline, schedule_palliative_online, ScheduleState};
use radsched_core::PatientPool;

/// Desk-scale instance: 2 linacs, 2.5 arrivals per day.
pub fn desk_instance(days: u32, seed: u64) -> Instance {
    let setting = InstanceSetting::new(2, 2.5).expect("valid setting");
    let config = InstanceConfig { num_days: days, ..Default::default() };
    generate_instance(&setting, &PatientPool::default(), &config, seed).expect("instance")
}

/// The offline curative model of `instance`, on the capacity its palliatives leave.
pub fn curative_model(instance: &Instance) -> IpModel {
    let mut state = ScheduleState::new(instance.scenario.clone(), 0.0).expect("state");
    let mut curatives: Vec<Patient> = Vec::new();
    for (day, p) in instance.flow.arrivals() {
        if p.is_palliative() {
            state.set_current_day(day);
            schedule_palliative_online(&mut state, p).expect("palliative fits");
        } else {
            curatives.push(p.clone());
        }
    }
    let first = instance.flow.first_day();
    state.set_current_day(first);
    let horizon = default_horizon_len(&curatives, first).min(state.horizon() - first);
    IpModel::from_state(&state, curatives, Default::default(), horizon).expect("model")
}

pub fn training_examples(instances: usize) -> Vec<TrainingExample> {
    let setting = InstanceSetting::new(2, 2.5).expect("valid setting");
    let batch = generate_instances(&setting, &PatientPool::default(), &InstanceConfig::default(), 500, instances)
        .expect("instances");
    let config = SimConfig::default();
    batch
        .iter()
        .flat_map(|inst| {
            let offline = schedule_offline(inst, config.weights, &config.offline_solver).expect("offline");
            make_training_examples(inst, &offline.schedule).expect("examples")
        })
        .collect()
}

pub fn small_model(examples: &[TrainingExample]) -> GbtModel {
    fit_gbt(examples, &GbtParams { n_trees: 100, ..Default::default() }).expect("fit")
}
