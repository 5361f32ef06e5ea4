//! Independent reference implementations shared by the integration and
//! acceptance tests. Nothing here calls the code it checks.
#![allow(dead_code)]

use radsched_core::domain::{Assignment, Category, Day, ObjectiveWeights, Patient, PatientId};
use radsched_core::ipcore::IpModel;
use radsched_core::learning::{GbtModel, Node, Tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct evaluation of the waiting/overdue cost.
pub fn cost_formula(a: f64, r: f64, d: f64, t: f64, w: &ObjectiveWeights) -> f64 {
    let mut c = 0.0;
    if t > r {
        c += w.waiting * (t - a) * (t - a + 1.0).ln();
    }
    if t > d {
        c += w.overdue * (t - d) * (t - d + 1.0).ln();
    }
    c
}

/// Mean tree output when only the features in `known` are observed; the
/// rest are integrated out by training cover.
fn tree_expectation(tree: &Tree, x: &[f64], known: &[bool], node: usize) -> f64 {
    match tree.nodes[node] {
        Node::Leaf { value, .. } => value,
        Node::Split { feature, threshold, left, right, cover } => {
            if known[feature] {
                let next = if x[feature] < threshold { left } else { right };
                tree_expectation(tree, x, known, next)
            } else {
                let wl = tree.nodes[left].cover() / cover;
                let wr = tree.nodes[right].cover() / cover;
                wl * tree_expectation(tree, x, known, left) + wr * tree_expectation(tree, x, known, right)
            }
        }
    }
}

fn model_expectation(model: &GbtModel, x: &[f64], known: &[bool]) -> f64 {
    model.base_score
        + model.params.learning_rate * model.trees.iter().map(|t| tree_expectation(t, x, known, 0)).sum::<f64>()
}

/// Shapley values by enumerating every subset of the features the model uses.
pub fn brute_force_shapley(model: &GbtModel, x: &[f64]) -> Vec<f64> {
    let mut used: Vec<usize> = model.trees.iter().flat_map(|t| t.split_features()).collect();
    used.sort_unstable();
    used.dedup();
    let m = used.len();
    assert!(m <= 16, "too many features for enumeration: {m}");
    let fact: Vec<f64> = (0..=m)
        .scan(1.0, |acc, i| {
            if i > 0 {
                *acc *= i as f64;
            }
            Some(*acc)
        })
        .collect();
    let value = |mask: u32| {
        let mut known = vec![false; model.num_features];
        for (b, &f) in used.iter().enumerate() {
            if mask & (1 << b) != 0 {
                known[f] = true;
            }
        }
        model_expectation(model, x, &known)
    };
    let values: Vec<f64> = (0..(1u32 << m)).map(value).collect();
    let mut phi = vec![0.0; model.num_features];
    for (b, &f) in used.iter().enumerate() {
        let bit = 1u32 << b;
        let mut total = 0.0;
        for mask in 0..(1u32 << m) {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let weight = fact[s] * fact[m - s - 1] / fact[m];
            total += weight * (values[(mask | bit) as usize] - values[mask as usize]);
        }
        phi[f] = total;
    }
    phi
}

/// Random tree of the given depth over `features`, with consistent covers.
pub fn random_tree<R: Rng>(rng: &mut R, depth: usize, features: &[usize]) -> Tree {
    fn build<R: Rng>(rng: &mut R, nodes: &mut Vec<Node>, depth: usize, cover: f64, features: &[usize]) -> usize {
        let i = nodes.len();
        if depth == 0 || cover < 2.0 || rng.random_bool(0.15) {
            nodes.push(Node::Leaf { value: rng.random_range(-5.0..5.0), cover });
            return i;
        }
        nodes.push(Node::Leaf { value: 0.0, cover });
        let feature = features[rng.random_range(0..features.len())];
        let threshold = rng.random_range(0..10) as f64 + 0.5;
        let left_cover = rng.random_range(1..cover as u32) as f64;
        let left = build(rng, nodes, depth - 1, left_cover, features);
        let right = build(rng, nodes, depth - 1, cover - left_cover, features);
        nodes[i] = Node::Split { feature, threshold, left, right, cover };
        i
    }
    let mut nodes = Vec::new();
    let cover = rng.random_range(20..200) as f64;
    build(rng, &mut nodes, depth, cover, features);
    Tree { nodes }
}

/// Random ensemble restricted to `features`.
pub fn random_model(seed: u64, num_features: usize, features: &[usize], trees: usize, depth: usize) -> GbtModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GbtModel {
        params: radsched_core::learning::GbtParams { learning_rate: rng.random_range(0.05..1.0), ..Default::default() },
        base_score: rng.random_range(-3.0..3.0),
        num_features,
        trees: (0..trees).map(|_| random_tree(&mut rng, depth, features)).collect(),
    }
}

pub fn random_row<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0..11) as f64).collect()
}

/// A random allocation model with at most 6 patients, 2 linacs and 15 days,
/// small enough for exhaustive enumeration.
pub fn random_tiny_model(seed: u64) -> IpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let num_linacs = rng.random_range(1..=2usize);
        let horizon = rng.random_range(6..=15u32);
        let n = rng.random_range(1..=6usize);
        let capacity = rng.random_range(8..=30u32);
        let gamma = [0.0, 0.1, 0.2][rng.random_range(0..3)];
        let patients: Vec<Patient> = (0..n)
            .map(|i| {
                let category = Category::ALL[rng.random_range(0..4)];
                let a = rng.random_range(0..3u32);
                let offset = rng.random_range(0..3u32);
                let fractions = rng.random_range(1..=4u32);
                let blocks = rng.random_range(2..=capacity.min(12));
                Patient::new(PatientId(i as u32), category, a, i as u32, offset, fractions, blocks).unwrap()
            })
            .collect();
        if patients.iter().any(|p| p.last_day(p.ready_day) >= horizon) {
            continue;
        }
        let cells = horizon as usize * num_linacs;
        let total = vec![capacity; cells];
        let available: Vec<u32> = (0..cells).map(|_| capacity - rng.random_range(0..=capacity / 2)).collect();
        let model =
            IpModel::from_grids(patients, 0, num_linacs, available, total, gamma, ObjectiveWeights::default()).unwrap();
        let space: f64 = (0..model.patients.len()).map(|i| model.candidates(i).len().max(1) as f64).product();
        if space <= 1e7 {
            return model;
        }
    }
}

/// Every feasible assignment of a tiny model, by exhaustive enumeration with
/// an independent capacity check.
pub fn feasible_assignments(model: &IpModel) -> Vec<Vec<Assignment>> {
    let n = model.patients.len();
    let days = model.horizon_len;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    fn go(model: &IpModel, i: usize, current: &mut Vec<Assignment>, out: &mut Vec<Vec<Assignment>>, days: Day) {
        if i == model.patients.len() {
            if independent_feasible(model, current) {
                out.push(current.clone());
            }
            return;
        }
        let p = &model.patients[i];
        for start in p.ready_day.max(model.start_day)..model.start_day + days {
            for linac in 0..model.num_linacs {
                current.push(Assignment { start_day: start, linac });
                go(model, i + 1, current, out, days);
                current.pop();
            }
        }
    }
    go(model, 0, &mut current, &mut out, days);
    out
}

/// Capacity and reservation check written from the model definition.
pub fn independent_feasible(model: &IpModel, assignment: &[Assignment]) -> bool {
    let mut all = vec![0u32; model.horizon_len as usize * model.num_linacs];
    let mut cur = vec![0u32; all.len()];
    for (p, a) in model.patients.iter().zip(assignment) {
        if a.start_day < p.ready_day || a.start_day < model.start_day {
            return false;
        }
        for k in 0..p.fractions {
            let day = a.start_day + k - model.start_day;
            if day >= model.horizon_len {
                return false;
            }
            let cell = day as usize * model.num_linacs + a.linac;
            all[cell] += p.fraction_blocks;
            if p.category.is_curative() {
                cur[cell] += p.fraction_blocks;
            }
        }
    }
    (0..all.len()).all(|cell| {
        let day = (cell / model.num_linacs) as Day + model.start_day;
        let linac = cell % model.num_linacs;
        let avail = model.available(day, linac) as f64;
        let total = model.total[cell] as f64;
        all[cell] as f64 <= avail && cur[cell] as f64 <= (avail - model.gamma * total).max(0.0) + 1e-9
    })
}

/// Scipy reference values for the statistical tests.
pub mod fixtures {
    pub const TOY_GROUPS: [&[f64]; 2] = [&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]];
    pub const TOY_F: f64 = 13.5;
    pub const TOY_P: f64 = 0.02131164112875672;

    pub const THREE_GROUPS: [&[f64]; 3] =
        [&[6.0, 8.0, 4.0, 5.0, 3.0, 4.0], &[8.0, 12.0, 9.0, 11.0, 6.0, 8.0], &[13.0, 9.0, 11.0, 8.0, 7.0, 12.0]];
    pub const THREE_F: f64 = 9.264705882352942;
    pub const THREE_P: f64 = 0.0023987773293929083;

    pub const FIVE_GROUPS: [&[f64]; 3] =
        [&[24.5, 23.5, 26.4, 27.1, 29.9], &[28.4, 34.2, 29.5, 32.2, 30.1], &[26.1, 28.3, 24.3, 26.2, 27.8]];
    pub const FIVE_F: f64 = 7.137827822120864;
    pub const FIVE_P: f64 = 0.009073317468563075;

    pub const PAIR_A: [f64; 8] = [5.1, 4.8, 6.0, 5.7, 5.3, 6.2, 4.9, 5.5];
    pub const PAIR_B: [f64; 8] = [4.9, 4.6, 5.6, 5.9, 5.0, 5.8, 4.7, 5.1];
    pub const PAIR_T: f64 = 3.3662796326244804;
    pub const PAIR_P: f64 = 0.011981050499028758;

    pub const PAIR2_A: [f64; 10] = [12.0, 15.0, 11.0, 18.0, 14.0, 16.0, 13.0, 17.0, 15.0, 14.0];
    pub const PAIR2_B: [f64; 10] = [14.0, 15.0, 13.0, 19.0, 17.0, 15.0, 16.0, 18.0, 17.0, 16.0];
    pub const PAIR2_T: f64 = -3.7370465934182984;
    pub const PAIR2_P: f64 = 0.004646628087613753;

    /// `P(X >= 8)`, `X ~ Bin(10, 1/2)`.
    pub const BINOM_8_OF_10: f64 = 0.0546875;
}

/// Hand-built scheduling toys.
pub mod toys {
    use radsched_core::domain::{Category, Patient, PatientId, Scenario};
    use radsched_core::strategies::ScheduleState;

    /// One linac, days 0..=20 partly committed; day 11 leaves fewer than 10
    /// blocks, so a 3-fraction course of 10 blocks cannot start on day 10 or 11.
    pub fn figure_two_state() -> ScheduleState {
        let mut scenario = Scenario::uniform(1, 120, 120);
        for day in 0..=20 {
            scenario.committed[day][0] = 100;
        }
        scenario.committed[11][0] = 115;
        ScheduleState::new(scenario, 0.0).unwrap()
    }

    /// P4 admitted on day 0, ready on day 5, 3 fractions of 10 blocks.
    pub fn figure_two_patient() -> Patient {
        Patient::new(PatientId(1), Category::P4, 0, 0, 5, 3, 10).unwrap()
    }
}
