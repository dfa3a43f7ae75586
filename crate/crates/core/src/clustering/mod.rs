//! Client clustering: greedy, homogeneous (max-saving) and the interval-based
//! connection-dominant driver.

mod blocks;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::augmentation::AugmentedSolution;
use crate::error::{Result, UflError};
use crate::params::{theta, ParamSet};

pub use blocks::{build_blocks, cut_intervals, Block, Interval};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClientGeometry {
    pub reroute_cost: f64,
    pub z_val: f64,
    pub is_normal: bool,
    pub has_small_arm: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Greedy,
    MaxSaving,
    /// Homogeneous round with no normal client left.
    MinCm,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Greedy => "greedy",
            Rule::MaxSaving => "max_saving",
            Rule::MinCm => "min_cm",
        }
    }
}

/// Members and center are client indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRecord {
    pub rule: Rule,
    /// Saving/Spending of the center over the network it was picked from.
    pub saving: Option<f64>,
    pub spending: Option<f64>,
    /// Members whose rerouting cost exceeds their target.
    pub nminus: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusteringResult {
    pub clusters: Vec<Cluster>,
    pub trace: Vec<ClusterRecord>,
}

impl ClusteringResult {
    /// Center index for every client, `None` if unclustered.
    pub fn center_of(&self, n_clients: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_clients];
        for c in &self.clusters {
            for &m in &c.members {
                out[m] = Some(c.center);
            }
        }
        out
    }

    /// Every client in `universe` lies in exactly one cluster, and nothing else does.
    pub fn is_partition_of(&self, universe: &[usize], n_clients: usize) -> bool {
        let mut seen = vec![0u32; n_clients];
        for c in &self.clusters {
            if !c.members.contains(&c.center) {
                return false;
            }
            for &m in &c.members {
                seen[m] += 1;
            }
        }
        let mut want = vec![0u32; n_clients];
        for &u in universe {
            want[u] = 1;
        }
        seen == want
    }

    fn extend(&mut self, other: ClusteringResult) {
        self.clusters.extend(other.clusters);
        self.trace.extend(other.trace);
    }

    pub fn trace_tsv(&self, aug: &AugmentedSolution) -> String {
        let id = |j: usize| aug.instance.clients()[j].id;
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| x.to_string());
        let mut s = String::from("cluster\tcenter\trule\tsaving\tspending\tmembers\n");
        for (k, (c, t)) in self.clusters.iter().zip(&self.trace).enumerate() {
            let members: Vec<String> = c.members.iter().map(|&m| id(m).to_string()).collect();
            let _ = writeln!(
                s,
                "{k}\t{}\t{}\t{}\t{}\t{}",
                id(c.center),
                t.rule.as_str(),
                opt(t.saving),
                opt(t.spending),
                members.join(",")
            );
        }
        s
    }
}

/// `(cost_{j'}(j), z_{j'}(j))`: mean distance from `j` and from `j'` to the
/// part of `C_{j'}` outside `C_j ∪ D_j`; `(0, 0)` if that part is empty.
pub fn reroute_cost(jprime: usize, j: usize, aug: &AugmentedSolution) -> (f64, f64) {
    let (mut cost, mut z, mut w) = (0.0, 0.0, 0.0);
    for &c in &aug.close[jprime] {
        if !aug.is_adjacent(c, j) {
            let s = aug.copies[c].ystar_share;
            cost += s * aug.dist(c, j);
            z += s * aug.dist(c, jprime);
            w += s;
        }
    }
    if w > 0.0 {
        (cost / w, z / w)
    } else {
        (0.0, 0.0)
    }
}

pub fn classify_normal(j: usize, aug: &AugmentedSolution, params: &ParamSet) -> bool {
    let st = aug.stats[j];
    st.cval >= theta(params.k6(), aug.gamma) * (st.cval + st.mval) - params.cmp_tol
}

/// True when `j` has a small remote arm with respect to `jprime`.
pub fn classify_arm(jprime: usize, j: usize, aug: &AugmentedSolution, params: &ParamSet) -> bool {
    let (_, z) = reroute_cost(jprime, j, aug);
    let d = aug.instance.client_dist(jprime, j);
    let v = aug.cstar[j] + aug.fstar[j];
    let zz = 0.998 * z;
    // cos(π/2 − α) = sin α
    let rhs = d * d + zz * zz - 2.0 * d * zz * params.alpha.sin();
    v * v < rhs + params.cmp_tol * rhs.abs().max(v * v)
}

pub fn client_geometry(jprime: usize, j: usize, aug: &AugmentedSolution, params: &ParamSet) -> ClientGeometry {
    let (reroute_cost, z_val) = reroute_cost(jprime, j, aug);
    ClientGeometry {
        reroute_cost,
        z_val,
        is_normal: classify_normal(j, aug, params),
        has_small_arm: classify_arm(jprime, j, aug, params),
    }
}

/// Rerouting target `(1−ε)C_j + (3−γ)M_j + (γ−1)D_j`.
pub fn target(j: usize, aug: &AugmentedSolution, eps: f64) -> f64 {
    let st = aug.stats[j];
    let g = aug.gamma;
    (1.0 - eps) * st.cval + (3.0 - g) * st.mval + (g - 1.0) * st.dval
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavingSpending {
    pub nplus: Vec<usize>,
    pub nminus: Vec<usize>,
    pub saving: f64,
    pub spending: f64,
}

impl SavingSpending {
    pub fn members(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.nplus.iter().chain(&self.nminus).copied().collect();
        m.sort_unstable();
        m
    }
}

pub fn saving_spending(jprime: usize, eligible: &[usize], aug: &AugmentedSolution, eps: f64) -> SavingSpending {
    let mut out = SavingSpending { nplus: Vec::new(), nminus: Vec::new(), saving: 0.0, spending: 0.0 };
    for &j in eligible {
        let (cost, _) = reroute_cost(jprime, j, aug);
        let tau = target(j, aug, eps);
        if cost <= tau {
            out.nplus.push(j);
            out.saving += tau - cost;
        } else if j == jprime || aug.is_neighbor(jprime, j) {
            out.nminus.push(j);
            out.spending += cost - tau;
        }
    }
    out
}

fn cm_key(j: usize, aug: &AugmentedSolution) -> (f64, u64) {
    (aug.cm(j), aug.instance.clients()[j].id)
}

fn argmin_cm(cands: &[usize], aug: &AugmentedSolution) -> usize {
    *cands
        .iter()
        .min_by(|&&a, &&b| {
            let (ka, kb) = (cm_key(a, aug), cm_key(b, aug));
            ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1))
        })
        .expect("nonempty candidates")
}

fn free_list(free: &[bool]) -> Vec<usize> {
    (0..free.len()).filter(|&j| free[j]).collect()
}

/// Greedy over `network`; each cluster takes every free neighbor of its center.
fn greedy_in(network: &[usize], free: &mut [bool], aug: &AugmentedSolution) -> ClusteringResult {
    let mut out = ClusteringResult::default();
    loop {
        let left: Vec<usize> = network.iter().copied().filter(|&j| free[j]).collect();
        if left.is_empty() {
            return out;
        }
        let c = argmin_cm(&left, aug);
        let mut members: Vec<usize> = aug.neighbors[c].iter().copied().filter(|&j| free[j]).collect();
        members.push(c);
        members.sort_unstable();
        for &m in &members {
            free[m] = false;
        }
        out.clusters.push(Cluster { center: c, members });
        out.trace.push(ClusterRecord { rule: Rule::Greedy, saving: None, spending: None, nminus: Vec::new() });
    }
}

/// Centers and their Saving come from `network`; membership is drawn from
/// every client still free.
fn homogeneous_in(network: &[usize], free: &mut [bool], aug: &AugmentedSolution, params: &ParamSet) -> ClusteringResult {
    let eps = params.eps(1);
    let mut out = ClusteringResult::default();
    loop {
        let left: Vec<usize> = network.iter().copied().filter(|&j| free[j]).collect();
        if left.is_empty() {
            return out;
        }
        let normals: Vec<usize> = left.iter().copied().filter(|&j| classify_normal(j, aug, params)).collect();
        let (c, rule, local) = if normals.is_empty() {
            let c = argmin_cm(&left, aug);
            (c, Rule::MinCm, saving_spending(c, &left, aug, eps))
        } else {
            let scored: Vec<(usize, SavingSpending)> =
                normals.par_iter().map(|&j| (j, saving_spending(j, &left, aug, eps))).collect();
            let id = |j: usize| aug.instance.clients()[j].id;
            let (c, ss) = scored
                .into_iter()
                .reduce(|a, b| {
                    let better = b.1.saving > a.1.saving || (b.1.saving == a.1.saving && id(b.0) < id(a.0));
                    if better {
                        b
                    } else {
                        a
                    }
                })
                .expect("normals nonempty");
            (c, Rule::MaxSaving, ss)
        };
        let global = saving_spending(c, &free_list(free), aug, eps);
        let members = global.members();
        debug_assert!(members.contains(&c));
        for &m in &members {
            free[m] = false;
        }
        out.clusters.push(Cluster { center: c, members });
        out.trace.push(ClusterRecord {
            rule,
            saving: Some(local.saving),
            spending: Some(local.spending),
            nminus: global.nminus,
        });
    }
}

fn require_network(network: &[usize], aug: &AugmentedSolution) -> Result<()> {
    if network.is_empty() {
        return Err(UflError::input("network has no clients"));
    }
    if let Some(&j) = network.iter().find(|&&j| j >= aug.n_clients()) {
        return Err(UflError::input(format!("client index {j} out of range")));
    }
    Ok(())
}

/// Client in `network` breaking `max ≤ (1+δ)·min` on `C+M`, if any.
pub fn homogeneity_violation(network: &[usize], aug: &AugmentedSolution, params: &ParamSet) -> Option<usize> {
    let lo = network.iter().map(|&j| aug.cm(j)).fold(f64::INFINITY, f64::min);
    network
        .iter()
        .copied()
        .filter(|&j| aug.cm(j) > (1.0 + params.delta) * lo * (1.0 + params.cmp_tol))
        .max_by(|&a, &b| aug.cm(a).total_cmp(&aug.cm(b)))
}

pub fn cluster_greedy(network: &[usize], aug: &AugmentedSolution, _params: &ParamSet) -> Result<ClusteringResult> {
    require_network(network, aug)?;
    let mut free = vec![false; aug.n_clients()];
    for &j in network {
        free[j] = true;
    }
    Ok(greedy_in(network, &mut free, aug))
}

pub fn cluster_homogeneous(network: &[usize], aug: &AugmentedSolution, params: &ParamSet) -> Result<ClusteringResult> {
    require_network(network, aug)?;
    if let Some(j) = homogeneity_violation(network, aug, params) {
        return Err(UflError::input(format!(
            "network is not homogeneous: client {} has C+M = {}",
            aug.instance.clients()[j].id,
            aug.cm(j)
        )));
    }
    let mut free = vec![false; aug.n_clients()];
    for &j in network {
        free[j] = true;
    }
    Ok(homogeneous_in(network, &mut free, aug, params))
}

/// Interval driver for connection-dominant instances. Intervals whose free
/// clients are not homogeneous (B₀ mixed with positive C+M) go to greedy.
pub fn cluster_conn(aug: &AugmentedSolution, params: &ParamSet) -> Result<ClusteringResult> {
    let (c, f): (f64, f64) = (aug.cstar.iter().sum(), aug.fstar.iter().sum());
    if !(c > params.k1() * f) {
        return Err(UflError::input(format!("instance is not connection-dominant: C* = {c}, F* = {f}")));
    }
    let blocks = build_blocks(aug, params);
    let intervals = cut_intervals(&blocks, params);
    Ok(cluster_intervals(aug, params, &blocks, &intervals))
}

pub fn cluster_intervals(aug: &AugmentedSolution, params: &ParamSet, blocks: &[Block], intervals: &[Interval]) -> ClusteringResult {
    let mut free = vec![true; aug.n_clients()];
    let mut out = ClusteringResult::default();
    for iv in intervals {
        let network: Vec<usize> = blocks
            .iter()
            .filter(|b| iv.lo <= b.index && b.index <= iv.hi)
            .flat_map(|b| b.clients.iter().copied())
            .filter(|&j| free[j])
            .collect();
        if network.is_empty() {
            continue;
        }
        let cs: f64 = network.iter().map(|&j| aug.cstar[j]).sum();
        let fs: f64 = network.iter().map(|&j| aug.fstar[j]).sum();
        let homogeneous = iv.size() >= 2 && cs > params.k4() * fs && homogeneity_violation(&network, aug, params).is_none();
        let part = if homogeneous {
            homogeneous_in(&network, &mut free, aug, params)
        } else {
            greedy_in(&network, &mut free, aug)
        };
        out.extend(part);
    }
    out
}

#[cfg(test)]
mod tests;
