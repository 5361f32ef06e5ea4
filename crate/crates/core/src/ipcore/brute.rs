use super::{bnb::improves, IpModel, IpSolution, SolveStatus, SolverStats};
use crate::domain::Assignment;
use crate::error::{Error, Result};

/// Largest candidate-product the exhaustive enumeration accepts.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// Exhaustive enumeration of every assignment of a tiny model.
///
/// Patients are enumerated in id order and candidates in (day, linac) order;
/// a later assignment replaces the incumbent only when strictly cheaper, so
/// ties resolve to the lexicographically smallest assignment. Partial
/// assignments that already break a capacity constraint are skipped, which
/// drops only infeasible completions.
pub fn brute_force(model: &IpModel) -> Result<IpSolution> {
    let n = model.patients.len();
    let cands: Vec<Vec<Assignment>> = (0..n).map(|i| model.candidates(i)).collect();
    let estimate: f64 = cands.iter().map(|c| c.len() as f64).product();
    if estimate > BRUTE_FORCE_LIMIT {
        return Err(Error::SearchSpaceTooLarge { estimate });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| model.patients[i].id);

    let mut walk = Walk {
        model,
        cands: &cands,
        order: &order,
        all: vec![0; model.available.len()],
        cur: vec![0; model.available.len()],
        current: vec![Assignment { start_day: 0, linac: 0 }; n],
        best: None,
        best_cost: f64::INFINITY,
        leaves: 0,
    };
    walk.enumerate(0);

    let stats = SolverStats { nodes: walk.leaves, root_bound: model.lower_bound(&vec![None; n]), lns_improvements: 0 };
    Ok(match walk.best {
        Some(best) => IpSolution {
            status: SolveStatus::Optimal,
            objective: model.objective(&best),
            assignment: model.patients.iter().map(|p| p.id).zip(best).collect(),
            stats,
            certificate: None,
        },
        None => IpSolution {
            status: SolveStatus::Infeasible,
            objective: f64::INFINITY,
            assignment: Default::default(),
            stats,
            certificate: None,
        },
    })
}

struct Walk<'a> {
    model: &'a IpModel,
    cands: &'a [Vec<Assignment>],
    order: &'a [usize],
    all: Vec<u32>,
    cur: Vec<u32>,
    current: Vec<Assignment>,
    best: Option<Vec<Assignment>>,
    best_cost: f64,
    leaves: u64,
}

impl Walk<'_> {
    fn enumerate(&mut self, depth: usize) {
        if depth == self.order.len() {
            self.leaves += 1;
            let cost = self.model.objective(&self.current);
            if improves(cost, self.best_cost) {
                self.best_cost = cost;
                self.best = Some(self.current.clone());
            }
            return;
        }
        let i = self.order[depth];
        let p = &self.model.patients[i];
        for &a in &self.cands[i] {
            let cells: Vec<usize> = (0..p.fractions).map(|k| self.model.cell(a.start_day + k, a.linac)).collect();
            let ok = cells.iter().all(|&c| {
                self.all[c] + p.fraction_blocks <= self.model.available[c]
                    && (p.is_palliative() || self.cur[c] + p.fraction_blocks <= self.model.curative_cap_at(c))
            });
            if !ok {
                continue;
            }
            for &c in &cells {
                self.all[c] += p.fraction_blocks;
                if p.is_curative() {
                    self.cur[c] += p.fraction_blocks;
                }
            }
            self.current[i] = a;
            self.enumerate(depth + 1);
            for &c in &cells {
                self.all[c] -= p.fraction_blocks;
                if p.is_curative() {
                    self.cur[c] -= p.fraction_blocks;
                }
            }
        }
    }
}
