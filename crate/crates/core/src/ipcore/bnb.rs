use super::{
    CapacityProbe, InfeasibilityCertificate, IpModel, IpSolution, IpSolver, SolveStatus, SolverBudget, SolverStats,
};
use crate::domain::{cost::sum_costs, reserved_blocks, Assignment, Day};
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// Open patients that get a capacity-aware bound; the rest use their
/// capacity-ignoring earliest cost.
const DYNAMIC_BOUND_DEPTH: usize = 16;

/// Large-neighbourhood improvement of the starting incumbent: windows of
/// patients adjacent in start-day order are released and re-placed by an
/// exact sub-search with the rest of the schedule held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LnsConfig {
    pub window: usize,
    pub stride: usize,
    pub passes: u32,
    pub sub_node_limit: u64,
    /// Models with fewer patients skip the improvement phase.
    pub min_patients: usize,
}

impl Default for LnsConfig {
    fn default() -> Self {
        LnsConfig { window: 6, stride: 3, passes: 4, sub_node_limit: 4_000, min_patients: 10 }
    }
}

/// Depth-first branch and bound.
///
/// Patients are branched in ascending due day (then id), values tried by
/// ascending day then linac. Since a patient's cost never decreases with its
/// start day, the first fitting candidate is its cheapest, which gives both
/// the value ordering and the capacity-aware bound. A greedy dive, improved by
/// [`LnsConfig`], seeds the incumbent. `budget.node_limit` bounds the exact
/// search phase; `budget.time_limit` bounds the whole call.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BranchAndBound {
    pub budget: SolverBudget,
    pub lns: LnsConfig,
}

impl BranchAndBound {
    pub fn new(budget: SolverBudget) -> Self {
        BranchAndBound { budget, lns: LnsConfig::default() }
    }

    pub fn with_lns(mut self, lns: LnsConfig) -> Self {
        self.lns = lns;
        self
    }
}

impl IpSolver for BranchAndBound {
    fn solve(&self, model: &IpModel) -> Result<IpSolution> {
        Ok(solve_bnb(model, self))
    }
}

#[derive(Debug, Clone, Copy)]
struct Cand {
    start: Day,
    linac: usize,
    cost: f64,
}

/// Relative tolerance separating a genuine improvement from float noise.
pub(crate) fn improves(candidate: f64, best: f64) -> bool {
    if best.is_infinite() {
        return true;
    }
    candidate < best - 1e-9 * best.abs().max(1.0)
}

struct Search<'m> {
    model: &'m IpModel,
    cands: Vec<Vec<Cand>>,
    curative_cap: Vec<u32>,
    all: Vec<u32>,
    cur: Vec<u32>,
    nodes: u64,
    node_limit: u64,
    deadline: Option<Instant>,
    aborted: bool,
    deepest: usize,
}

struct Dive {
    order: Vec<usize>,
    /// `static_suffix[k]`: capacity-ignoring cost of `order[k..]`.
    static_suffix: Vec<f64>,
    choice: Vec<usize>,
    best_cost: f64,
    best: Option<Vec<usize>>,
}

impl<'m> Search<'m> {
    fn new(model: &'m IpModel, deadline: Option<Instant>) -> Self {
        let cands = (0..model.patients.len())
            .map(|i| {
                model
                    .candidates(i)
                    .into_iter()
                    .map(|a| Cand { start: a.start_day, linac: a.linac, cost: model.cost(i, a.start_day) })
                    .collect()
            })
            .collect();
        let curative_cap = model
            .available
            .iter()
            .zip(&model.total)
            .map(|(&a, &t)| a.saturating_sub(reserved_blocks(t, model.gamma)))
            .collect();
        Search {
            model,
            cands,
            curative_cap,
            all: vec![0; model.available.len()],
            cur: vec![0; model.available.len()],
            nodes: 0,
            node_limit: u64::MAX,
            deadline,
            aborted: false,
            deepest: 0,
        }
    }

    fn fits(&self, i: usize, c: &Cand) -> bool {
        let p = &self.model.patients[i];
        let curative = p.is_curative();
        (0..p.fractions).all(|k| {
            let cell = self.model.cell(c.start + k, c.linac);
            self.all[cell] + p.fraction_blocks <= self.model.available[cell]
                && (!curative || self.cur[cell] + p.fraction_blocks <= self.curative_cap[cell])
        })
    }

    fn place(&mut self, i: usize, c: &Cand) {
        let p = &self.model.patients[i];
        for k in 0..p.fractions {
            let cell = self.model.cell(c.start + k, c.linac);
            self.all[cell] += p.fraction_blocks;
            if p.is_curative() {
                self.cur[cell] += p.fraction_blocks;
            }
        }
    }

    fn unplace(&mut self, i: usize, c: &Cand) {
        let p = &self.model.patients[i];
        for k in 0..p.fractions {
            let cell = self.model.cell(c.start + k, c.linac);
            self.all[cell] -= p.fraction_blocks;
            if p.is_curative() {
                self.cur[cell] -= p.fraction_blocks;
            }
        }
    }

    fn first_fit(&self, i: usize) -> Option<usize> {
        self.cands[i].iter().position(|c| self.fits(i, c))
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if self.nodes >= self.node_limit {
            self.aborted = true;
        } else if self.nodes % 256 == 0 {
            if let Some(deadline) = self.deadline {
                self.aborted = Instant::now() >= deadline;
            }
        }
        self.aborted
    }

    fn dive(&self, order: Vec<usize>, best_cost: f64) -> Dive {
        let mut static_suffix = vec![0.0; order.len() + 1];
        for k in (0..order.len()).rev() {
            let cheapest = self.cands[order[k]].first().map_or(0.0, |c| c.cost);
            static_suffix[k] = static_suffix[k + 1] + cheapest;
        }
        Dive { choice: vec![0; order.len()], order, static_suffix, best_cost, best: None }
    }

    /// Bound on the cost of `order[depth..]` given the current loads, or
    /// `None` when one of the next open patients no longer fits anywhere.
    fn open_bound(&self, dive: &Dive, depth: usize) -> Option<f64> {
        let dynamic_end = (depth + DYNAMIC_BOUND_DEPTH).min(dive.order.len());
        let mut bound = dive.static_suffix[dynamic_end];
        for &i in &dive.order[depth..dynamic_end] {
            bound += self.cands[i][self.first_fit(i)?].cost;
        }
        Some(bound)
    }

    fn dfs(&mut self, dive: &mut Dive, depth: usize, partial: f64) {
        self.deepest = self.deepest.max(depth);
        if depth == dive.order.len() {
            let leaf = sum_costs(dive.order.iter().zip(&dive.choice).map(|(&i, &c)| self.cands[i][c].cost).collect());
            if improves(leaf, dive.best_cost) {
                dive.best_cost = leaf;
                dive.best = Some(dive.choice.clone());
            }
            return;
        }
        let i = dive.order[depth];
        let rest_static = dive.static_suffix[depth + 1];
        for c in 0..self.cands[i].len() {
            let cand = self.cands[i][c];
            if !improves(partial + cand.cost + rest_static, dive.best_cost) {
                break;
            }
            if !self.fits(i, &cand) {
                continue;
            }
            if self.out_of_budget() {
                return;
            }
            self.nodes += 1;
            self.place(i, &cand);
            let child = partial + cand.cost;
            if let Some(rest) = self.open_bound(dive, depth + 1) {
                if improves(child + rest, dive.best_cost) {
                    dive.choice[depth] = c;
                    self.dfs(dive, depth + 1, child);
                }
            }
            self.unplace(i, &cand);
            if self.aborted {
                return;
            }
        }
    }

    /// Places `order` one by one on the first fitting candidate.
    fn greedy(&mut self, order: &[usize]) -> Option<Vec<usize>> {
        let mut chosen = vec![usize::MAX; self.model.patients.len()];
        for (k, &i) in order.iter().enumerate() {
            match self.first_fit(i) {
                Some(c) => {
                    let cand = self.cands[i][c];
                    self.place(i, &cand);
                    chosen[i] = c;
                }
                None => {
                    for &j in &order[..k] {
                        let cand = self.cands[j][chosen[j]];
                        self.unplace(j, &cand);
                    }
                    return None;
                }
            }
        }
        Some(chosen)
    }

    fn cost_of(&self, ids: &[usize], chosen: &[usize]) -> f64 {
        sum_costs(ids.iter().map(|&i| self.cands[i][chosen[i]].cost).collect())
    }

    /// Improves a placed incumbent in place; returns the number of accepted moves.
    fn lns(&mut self, chosen: &mut [usize], order_key: &dyn Fn(usize) -> (Day, u32), cfg: &LnsConfig) -> u32 {
        let n = chosen.len();
        let window = cfg.window.max(1).min(n);
        let stride = cfg.stride.max(1);
        let mut accepted = 0;
        for _ in 0..cfg.passes {
            let mut by_start: Vec<usize> = (0..n).collect();
            by_start.sort_by_key(|&i| (self.cands[i][chosen[i]].start, order_key(i), i));
            let mut improved = false;
            let mut begin = 0;
            while begin < n {
                let end = (begin + window).min(n);
                let mut members: Vec<usize> = by_start[begin..end].to_vec();
                members.sort_by_key(|&i| (order_key(i), i));
                let current = self.cost_of(&members, chosen);
                if current > 0.0 {
                    for &i in &members {
                        let cand = self.cands[i][chosen[i]];
                        self.unplace(i, &cand);
                    }
                    let saved_limit = self.node_limit;
                    self.node_limit = self.nodes.saturating_add(cfg.sub_node_limit);
                    let mut dive = self.dive(members.clone(), current);
                    self.dfs(&mut dive, 0, 0.0);
                    let time_up = self.aborted && self.nodes < self.node_limit;
                    self.aborted = false;
                    self.node_limit = saved_limit;
                    if let Some(best) = dive.best {
                        for (k, &i) in members.iter().enumerate() {
                            chosen[i] = best[k];
                        }
                        improved = true;
                        accepted += 1;
                    }
                    for &i in &members {
                        let cand = self.cands[i][chosen[i]];
                        self.place(i, &cand);
                    }
                    if time_up {
                        self.aborted = true;
                        return accepted;
                    }
                }
                if end == n {
                    break;
                }
                begin += stride;
            }
            if !improved {
                break;
            }
        }
        accepted
    }

    fn certificate(&self, order: &[usize]) -> InfeasibilityCertificate {
        let blocking = (0..self.model.patients.len())
            .find(|&i| self.first_fit(i).is_none())
            .map(|i| (i, true))
            .unwrap_or_else(|| (order[self.deepest.min(order.len() - 1)], false));
        let (i, alone) = blocking;
        let p = &self.model.patients[i];
        let probes = self.cands[i]
            .iter()
            .map(|c| {
                let cells = (0..p.fractions).map(|k| self.model.cell(c.start + k, c.linac));
                let min_available = cells.clone().map(|cell| self.model.available[cell]).min().unwrap_or(0);
                let min_allowed = if p.is_curative() {
                    cells.map(|cell| self.curative_cap[cell]).min().unwrap_or(0)
                } else {
                    min_available
                };
                CapacityProbe { day: c.start, linac: c.linac, min_available, min_allowed }
            })
            .collect();
        InfeasibilityCertificate { patient: p.id, fraction_blocks: p.fraction_blocks, alone, probes }
    }
}

fn solve_bnb(model: &IpModel, solver: &BranchAndBound) -> IpSolution {
    let deadline = solver.budget.time_limit.map(|limit| Instant::now() + limit);
    let mut search = Search::new(model, deadline);
    let n = model.patients.len();
    let root_bound = model.lower_bound(&vec![None; n]);
    let due = |i: usize| (model.patients[i].due_day, model.patients[i].id.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| due(i));

    let mut stats = SolverStats { nodes: 0, root_bound, lns_improvements: 0 };
    let mut incumbent = search.greedy(&order);
    if let Some(chosen) = incumbent.as_mut() {
        if n >= solver.lns.min_patients {
            stats.lns_improvements = search.lns(chosen, &due, &solver.lns);
        }
        for &i in &order {
            let cand = search.cands[i][chosen[i]];
            search.unplace(i, &cand);
        }
    }
    let incumbent_cost = incumbent.as_ref().map_or(f64::INFINITY, |c| search.cost_of(&order, c));

    if !search.aborted {
        search.node_limit = solver.budget.node_limit.map_or(u64::MAX, |l| search.nodes.saturating_add(l));
        let mut dive = search.dive(order.clone(), incumbent_cost);
        search.dfs(&mut dive, 0, 0.0);
        if let Some(best) = dive.best {
            let mut chosen = vec![0; n];
            for (k, &i) in order.iter().enumerate() {
                chosen[i] = best[k];
            }
            incumbent = Some(chosen);
        }
    }
    stats.nodes = search.nodes;

    let status = match (&incumbent, search.aborted) {
        (Some(_), false) => SolveStatus::Optimal,
        (Some(_), true) => SolveStatus::Feasible,
        (None, false) => SolveStatus::Infeasible,
        (None, true) => SolveStatus::Unknown,
    };
    match incumbent {
        Some(chosen) => {
            let assignment: Vec<Assignment> = (0..n)
                .map(|i| {
                    let c = search.cands[i][chosen[i]];
                    Assignment { start_day: c.start, linac: c.linac }
                })
                .collect();
            IpSolution {
                status,
                objective: model.objective(&assignment),
                assignment: model.patients.iter().map(|p| p.id).zip(assignment).collect(),
                stats,
                certificate: None,
            }
        }
        None => IpSolution {
            status,
            objective: f64::INFINITY,
            assignment: BTreeMap::new(),
            stats,
            certificate: (status == SolveStatus::Infeasible && n > 0).then(|| search.certificate(&order)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Category, ObjectiveWeights, Patient, PatientId, Scenario};

    fn patient(id: u32, category: Category, a: Day, r: Day, fractions: u32, blocks: u32) -> Patient {
        Patient {
            id: PatientId(id),
            category,
            admission_day: a,
            admission_seq: id,
            ready_day: r,
            due_day: a + category.deadline_days(),
            fractions,
            fraction_blocks: blocks,
        }
    }

    fn solve(model: &IpModel) -> IpSolution {
        BranchAndBound::default().solve(model).unwrap()
    }

    #[test]
    fn single_patient_starts_on_ready_day() {
        let scenario = Scenario::uniform(1, 80, 120);
        let p = patient(1, Category::P3, 0, 0, 1, 5);
        let model = IpModel::build(&scenario, vec![p], ObjectiveWeights::default(), 60).unwrap();
        let sol = solve(&model);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.assignment[&PatientId(1)], Assignment { start_day: 0, linac: 0 });
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn single_patient_on_a_late_ready_day() {
        let scenario = Scenario::uniform(2, 80, 120);
        let p = patient(1, Category::P4, 0, 6, 5, 5);
        let model = IpModel::build(&scenario, vec![p], ObjectiveWeights::default(), 70).unwrap();
        assert_eq!(solve(&model).assignment[&PatientId(1)].start_day, 6);
    }

    #[test]
    fn oversized_fraction_is_infeasible_with_certificate() {
        let scenario = Scenario::uniform(1, 60, 1);
        let p = patient(1, Category::P3, 0, 0, 1, 2);
        let model = IpModel::build(&scenario, vec![p], ObjectiveWeights::default(), 60).unwrap();
        let sol = solve(&model);
        assert_eq!(sol.status, SolveStatus::Infeasible);
        let cert = sol.certificate.unwrap();
        assert!(cert.alone);
        assert_eq!(cert.patient, PatientId(1));
        assert!(cert.probes.iter().all(|probe| probe.min_available == 1));
    }

    #[test]
    fn empty_model_is_optimal_at_zero() {
        let scenario = Scenario::uniform(1, 10, 120);
        let model = IpModel::build(&scenario, vec![], ObjectiveWeights::default(), 10).unwrap();
        let sol = solve(&model);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn contention_spreads_patients() {
        // Two 60-block patients on one 100-block linac cannot overlap.
        let scenario = Scenario::uniform(1, 80, 100);
        let patients = vec![patient(1, Category::P3, 0, 0, 2, 30), patient(2, Category::P3, 0, 0, 2, 33)];
        let model = IpModel::build(&scenario, patients.clone(), ObjectiveWeights::default(), 60).unwrap();
        let sol = solve(&model);
        assert_eq!(sol.status, SolveStatus::Optimal);
        let both = [sol.assignment[&PatientId(1)], sol.assignment[&PatientId(2)]];
        assert!(model.is_feasible(&both));
        assert_eq!(sol.objective, 0.0);

        let heavy = vec![
            patient(1, Category::P3, 0, 0, 2, 33),
            patient(2, Category::P3, 0, 0, 2, 33),
            patient(3, Category::P3, 0, 0, 2, 33),
            patient(4, Category::P3, 0, 0, 2, 33),
        ];
        let model = IpModel::build(&scenario, heavy, ObjectiveWeights::default(), 60).unwrap();
        let sol = solve(&model);
        let starts: Vec<Day> = sol.assignment.values().map(|a| a.start_day).collect();
        assert_eq!(starts.iter().filter(|&&d| d == 0).count(), 3);
        assert_eq!(starts.iter().filter(|&&d| d == 2).count(), 1);
    }

    #[test]
    fn node_limit_returns_incumbent() {
        let scenario = Scenario::uniform(1, 200, 40);
        let patients: Vec<Patient> = (0..30).map(|i| patient(i, Category::P3, 0, 0, 5, 10)).collect();
        let model = IpModel::build(&scenario, patients, ObjectiveWeights::default(), 150).unwrap();
        let solver = BranchAndBound::new(SolverBudget::nodes(50));
        let sol = solver.solve(&model).unwrap();
        assert!(sol.has_assignment());
        let assignment: Vec<Assignment> = model.patients.iter().map(|p| sol.assignment[&p.id]).collect();
        assert!(model.is_feasible(&assignment));
        assert!(sol.objective >= sol.stats.root_bound);
    }
}
