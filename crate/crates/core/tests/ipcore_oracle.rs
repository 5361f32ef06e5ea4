mod oracles;

use oracles::{feasible_assignments, independent_feasible, random_tiny_model};
use radsched_core::domain::Assignment;
use radsched_core::ipcore::{brute_force, BranchAndBound, IpSolver, SolveStatus};

fn assignment_vec(model: &radsched_core::ipcore::IpModel, sol: &radsched_core::ipcore::IpSolution) -> Vec<Assignment> {
    model.patients.iter().map(|p| sol.assignment[&p.id]).collect()
}

#[test]
fn branch_and_bound_matches_brute_force_on_100_models() {
    for seed in 0..100 {
        let model = random_tiny_model(seed);
        let oracle = brute_force(&model).unwrap();
        let solved = BranchAndBound::default().solve(&model).unwrap();
        assert_eq!(solved.status, oracle.status, "seed {seed}");
        if oracle.status == SolveStatus::Optimal {
            assert_eq!(solved.objective.to_bits(), oracle.objective.to_bits(), "seed {seed}");
            assert!(independent_feasible(&model, &assignment_vec(&model, &solved)), "seed {seed}");
        }
    }
}

#[test]
fn brute_force_is_the_true_minimum() {
    for seed in 100..130 {
        let model = random_tiny_model(seed);
        if model.patients.len() > 3 {
            continue;
        }
        let all = feasible_assignments(&model);
        let oracle = brute_force(&model).unwrap();
        match all.iter().map(|a| model.objective(a)).min_by(f64::total_cmp) {
            Some(best) => assert!((best - oracle.objective).abs() <= 1e-9 * best.max(1.0), "seed {seed}"),
            None => assert_eq!(oracle.status, SolveStatus::Infeasible),
        }
    }
}

#[test]
fn root_bound_is_admissible() {
    for seed in 200..300 {
        let model = random_tiny_model(seed);
        let root = model.lower_bound(&vec![None; model.patients.len()]);
        let oracle = brute_force(&model).unwrap();
        if oracle.status == SolveStatus::Optimal {
            assert!(root <= oracle.objective + 1e-9, "seed {seed}: {root} > {}", oracle.objective);
            let full: Vec<Option<Assignment>> = assignment_vec(&model, &oracle).into_iter().map(Some).collect();
            assert!((model.lower_bound(&full) - oracle.objective).abs() <= 1e-9 * oracle.objective.max(1.0));
        }
    }
}

#[test]
fn raising_gamma_never_enlarges_the_feasible_set() {
    for seed in 300..340 {
        let mut model = random_tiny_model(seed);
        if model.patients.len() > 3 {
            continue;
        }
        model.gamma = 0.0;
        let loose = feasible_assignments(&model);
        for gamma in [0.1, 0.25] {
            model.gamma = gamma;
            for a in feasible_assignments(&model) {
                assert!(loose.contains(&a), "seed {seed}");
                assert!(model.is_feasible(&a));
            }
        }
    }
}

#[test]
fn solver_feasibility_agrees_with_independent_check() {
    for seed in 400..440 {
        let model = random_tiny_model(seed);
        if model.patients.len() > 3 {
            continue;
        }
        for a in feasible_assignments(&model) {
            assert!(model.is_feasible(&a), "seed {seed}");
        }
    }
}
