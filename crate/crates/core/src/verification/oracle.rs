use crate::error::{Result, UflError};
use crate::instance::Instance;
use crate::rounding::RoundedSolution;

const BRUTE_CAP: usize = 20;
const TABLE_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub opt_cost: f64,
    /// Facility indices of an optimal set.
    pub opt_set: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetCost {
    pub mask: u32,
    pub facility_cost: f64,
    pub connection_cost: f64,
}

fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

fn subset_cost(inst: &Instance, mask: u32) -> SubsetCost {
    let set = members(mask);
    let facility_cost = set.iter().map(|&i| inst.open_cost(i)).sum();
    let connection_cost = (0..inst.n_clients())
        .map(|j| set.iter().map(|&i| inst.dist(i, j)).fold(f64::INFINITY, f64::min))
        .sum();
    SubsetCost { mask, facility_cost, connection_cost }
}

fn cap(inst: &Instance, limit: usize) -> Result<()> {
    if inst.n_facilities() > limit {
        return Err(UflError::input(format!("{} facilities exceeds the enumeration cap of {limit}", inst.n_facilities())));
    }
    Ok(())
}

/// `F(T)`, `C(T)` for every nonempty facility subset.
pub fn subset_table(inst: &Instance) -> Result<Vec<SubsetCost>> {
    cap(inst, TABLE_CAP)?;
    Ok((1..1u32 << inst.n_facilities()).map(|m| subset_cost(inst, m)).collect())
}

/// Exhaustive enumeration of nonempty facility subsets.
pub fn brute_force_opt(inst: &Instance) -> Result<OracleResult> {
    cap(inst, BRUTE_CAP)?;
    let mut best = (f64::INFINITY, 0u32);
    for m in 1..1u32 << inst.n_facilities() {
        let c = subset_cost(inst, m);
        let total = c.facility_cost + c.connection_cost;
        if total < best.0 {
            best = (total, m);
        }
    }
    Ok(OracleResult { opt_cost: best.0, opt_set: members(best.1) })
}

struct Search<'a> {
    inst: &'a Instance,
    best: f64,
    best_set: Vec<usize>,
    chosen: Vec<usize>,
}

impl Search<'_> {
    /// Facilities `< next` are decided. Bound: opened cost plus each client's
    /// nearest among opened and undecided facilities.
    fn go(&mut self, next: usize, nearest_open: &[f64], opened_cost: f64) {
        let (nf, nc) = (self.inst.n_facilities(), self.inst.n_clients());
        let bound: f64 = opened_cost
            + (0..nc)
                .map(|j| (next..nf).map(|i| self.inst.dist(i, j)).fold(nearest_open[j], f64::min))
                .sum::<f64>();
        if bound >= self.best {
            return;
        }
        if next == nf {
            if !self.chosen.is_empty() {
                self.best = bound;
                self.best_set = self.chosen.clone();
            }
            return;
        }
        let with: Vec<f64> = (0..nc).map(|j| nearest_open[j].min(self.inst.dist(next, j))).collect();
        self.chosen.push(next);
        self.go(next + 1, &with, opened_cost + self.inst.open_cost(next));
        self.chosen.pop();
        self.go(next + 1, nearest_open, opened_cost);
    }
}

/// Depth-first include/exclude search with an optimistic connection bound.
pub fn branch_and_bound_opt(inst: &Instance) -> Result<OracleResult> {
    cap(inst, BRUTE_CAP)?;
    let mut s = Search { inst, best: f64::INFINITY, best_set: Vec::new(), chosen: Vec::new() };
    s.go(0, &vec![f64::INFINITY; inst.n_clients()], 0.0);
    Ok(OracleResult { opt_cost: s.best, opt_set: s.best_set })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifactorCertificate {
    pub holds: bool,
    /// Subset with the least slack `λ_f·F(T) + λ_c·C(T) − cost`.
    pub worst_set: Vec<usize>,
    pub worst_slack: f64,
}

pub fn certify_bifactor(sol: &RoundedSolution, inst: &Instance, lambda_f: f64, lambda_c: f64) -> Result<BifactorCertificate> {
    let table = subset_table(inst)?;
    let cost = sol.total_cost;
    let (slack, mask) = table
        .iter()
        .map(|t| (lambda_f * t.facility_cost + lambda_c * t.connection_cost - cost, t.mask))
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
    Ok(BifactorCertificate { holds: slack >= -1e-9 * cost.max(1.0), worst_set: members(mask), worst_slack: slack })
}
