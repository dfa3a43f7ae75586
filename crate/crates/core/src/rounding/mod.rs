//! Cluster-center lotteries plus independent openings, and the drivers that
//! pick between this and JMS.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::augmentation::{augment, avg_distance, AugmentedSolution};
use crate::clustering::{cluster_conn, cluster_greedy, ClusteringResult};
use crate::error::{Result, UflError};
use crate::game::{GammaDistribution, GammaDraw};
use crate::instance::Instance;
use crate::jms::jms_solve;
use crate::lp::{solve_relaxation, LpOutput};
use crate::params::ParamSet;

/// Integral solution. Facility and client references are indices.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundedSolution {
    pub open_copies: Vec<usize>,
    pub open_parents: Vec<usize>,
    pub assignment: Vec<usize>,
    pub facility_cost: f64,
    pub connection_cost: f64,
    pub total_cost: f64,
    pub rng_seed: u64,
}

impl RoundedSolution {
    /// Assigns every client to its nearest open facility (ties: lowest id).
    pub fn from_open(inst: &Instance, mut open_parents: Vec<usize>, open_copies: Vec<usize>, rng_seed: u64) -> Self {
        open_parents.sort_unstable();
        open_parents.dedup();
        assert!(!open_parents.is_empty(), "at least one facility must be open");
        let fid = |i: usize| inst.facilities()[i].id;
        let assignment: Vec<usize> = (0..inst.n_clients())
            .map(|j| {
                *open_parents
                    .iter()
                    .min_by(|&&a, &&b| inst.dist(a, j).total_cmp(&inst.dist(b, j)).then(fid(a).cmp(&fid(b))))
                    .expect("nonempty")
            })
            .collect();
        let facility_cost: f64 = open_parents.iter().map(|&i| inst.open_cost(i)).sum();
        let connection_cost: f64 = assignment.iter().enumerate().map(|(j, &i)| inst.dist(i, j)).sum();
        RoundedSolution {
            open_copies,
            open_parents,
            assignment,
            facility_cost,
            connection_cost,
            total_cost: facility_cost + connection_cost,
            rng_seed,
        }
    }

    pub fn to_tsv(&self, inst: &Instance) -> String {
        let mut s = String::new();
        for &i in &self.open_parents {
            let _ = writeln!(s, "open\t{}", inst.facilities()[i].id);
        }
        for (j, &i) in self.assignment.iter().enumerate() {
            let _ = writeln!(s, "assign\t{}\t{}", inst.clients()[j].id, inst.facilities()[i].id);
        }
        let _ = writeln!(s, "cost\t{}\t{}\t{}", self.facility_cost, self.connection_cost, self.total_cost);
        s
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Per-copy flag: close to some cluster center.
fn center_copies(aug: &AugmentedSolution, clustering: &ClusteringResult) -> Result<Vec<bool>> {
    let n = aug.n_clients();
    let mut seen = vec![false; n];
    for c in &clustering.clusters {
        if c.center >= n || !c.members.contains(&c.center) {
            return Err(UflError::input("cluster center must be one of its members"));
        }
        for &m in &c.members {
            if m >= n || std::mem::replace(&mut seen[m], true) {
                return Err(UflError::input(format!("client index {m} is missing or clustered twice")));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(UflError::input("clustering does not cover every client"));
    }
    let mut owned = vec![false; aug.copies.len()];
    for c in &clustering.clusters {
        for &k in &aug.close[c.center] {
            if std::mem::replace(&mut owned[k], true) {
                return Err(UflError::input("two cluster centers share a close facility copy"));
            }
        }
    }
    Ok(owned)
}

/// Open copies for one trial; `owned` from [`center_copies`].
fn draw_open(aug: &AugmentedSolution, clustering: &ClusteringResult, owned: &[bool], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut open = Vec::new();
    for c in &clustering.clusters {
        let list = &aug.close[c.center];
        let total: f64 = list.iter().map(|&k| aug.copies[k].ybar).sum();
        let mut u = rng.gen::<f64>() * total;
        let mut pick = *list.last().expect("close set is nonempty");
        for &k in list {
            if u < aug.copies[k].ybar {
                pick = k;
                break;
            }
            u -= aug.copies[k].ybar;
        }
        open.push(pick);
    }
    for (k, copy) in aug.copies.iter().enumerate() {
        if !owned[k] && rng.gen::<f64>() < copy.ybar {
            open.push(k);
        }
    }
    open.sort_unstable();
    open
}

fn solution_from_copies(aug: &AugmentedSolution, open: Vec<usize>, seed: u64) -> RoundedSolution {
    let parents = open.iter().map(|&k| aug.copies[k].parent).collect();
    RoundedSolution::from_open(&aug.instance, parents, open, seed)
}

fn round_trial(aug: &AugmentedSolution, clustering: &ClusteringResult, owned: &[bool], seed: u64, trial: u64) -> RoundedSolution {
    let mut rng = trial_rng(seed, trial);
    let open = draw_open(aug, clustering, owned, &mut rng);
    solution_from_copies(aug, open, seed)
}

pub fn round_once(aug: &AugmentedSolution, clustering: &ClusteringResult, seed: u64) -> Result<RoundedSolution> {
    let owned = center_copies(aug, clustering)?;
    Ok(round_trial(aug, clustering, &owned, seed, 0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingDiagnostics {
    pub p_close: Vec<f64>,
    pub p_distant: Vec<f64>,
    pub p_far: Vec<f64>,
    pub trials: usize,
    pub mean_cost: f64,
    /// Standard error of `mean_cost`.
    pub std_error: f64,
}

impl RoundingDiagnostics {
    /// `σ̂` for an empirical probability.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Trials run on independent streams `(seed, t)`, reduced in trial order.
pub fn estimate_with_best(
    aug: &AugmentedSolution,
    clustering: &ClusteringResult,
    trials: usize,
    seed: u64,
) -> Result<(RoundingDiagnostics, RoundedSolution)> {
    if trials == 0 {
        return Err(UflError::input("trials must be at least 1"));
    }
    let owned = center_copies(aug, clustering)?;
    let n = aug.n_clients();
    let per_trial: Vec<(RoundedSolution, Vec<u8>)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let sol = round_trial(aug, clustering, &owned, seed, t);
            let mut is_open = vec![false; aug.copies.len()];
            for &k in &sol.open_copies {
                is_open[k] = true;
            }
            let events = (0..n)
                .map(|j| {
                    if aug.close[j].iter().any(|&k| is_open[k]) {
                        0
                    } else if aug.distant[j].iter().any(|&k| is_open[k]) {
                        1
                    } else {
                        2
                    }
                })
                .collect();
            (sol, events)
        })
        .collect();

    let mut counts = vec![[0usize; 3]; n];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut best: Option<&RoundedSolution> = None;
    for (sol, ev) in &per_trial {
        for (j, &e) in ev.iter().enumerate() {
            counts[j][e as usize] += 1;
        }
        sum += sol.total_cost;
        sum_sq += sol.total_cost * sol.total_cost;
        if best.map_or(true, |b| sol.total_cost < b.total_cost) {
            best = Some(sol);
        }
    }
    let tf = trials as f64;
    let mean = sum / tf;
    let var = if trials > 1 { ((sum_sq - tf * mean * mean) / (tf - 1.0)).max(0.0) } else { 0.0 };
    let frac = |k: usize| counts.iter().map(|c| c[k] as f64 / tf).collect::<Vec<_>>();
    let diag = RoundingDiagnostics {
        p_close: frac(0),
        p_distant: frac(1),
        p_far: frac(2),
        trials,
        mean_cost: mean,
        std_error: (var / tf).sqrt(),
    };
    Ok((diag, best.expect("trials ≥ 1").clone()))
}

pub fn estimate(aug: &AugmentedSolution, clustering: &ClusteringResult, trials: usize, seed: u64) -> Result<RoundingDiagnostics> {
    estimate_with_best(aug, clustering, trials, seed).map(|r| r.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Jms,
    Conn,
}

#[derive(Debug, Clone)]
pub struct BifactorRun {
    pub branch: Branch,
    pub best: RoundedSolution,
    /// Monte Carlo statistics; `None` on the deterministic JMS branch.
    pub diagnostics: Option<RoundingDiagnostics>,
    pub lp: LpOutput,
    pub clustering: Option<ClusteringResult>,
}

impl BifactorRun {
    /// Expected cost (JMS cost on that branch).
    pub fn mean_cost(&self) -> f64 {
        self.diagnostics.as_ref().map_or(self.best.total_cost, |d| d.mean_cost)
    }
}

pub fn is_connection_dominant(lp: &LpOutput, params: &ParamSet) -> bool {
    lp.decomposition.total_c() > params.k1() * lp.decomposition.total_f()
}

pub fn run_bifactor(inst: &Instance, params: &ParamSet, gamma: f64, trials: usize, seed: u64) -> Result<BifactorRun> {
    let lp = solve_relaxation(inst)?;
    run_bifactor_with(inst, lp, params, gamma, trials, seed)
}

pub fn run_bifactor_with(inst: &Instance, lp: LpOutput, params: &ParamSet, gamma: f64, trials: usize, seed: u64) -> Result<BifactorRun> {
    if trials == 0 {
        return Err(UflError::input("trials must be at least 1"));
    }
    if !is_connection_dominant(&lp, params) {
        return Ok(BifactorRun { branch: Branch::Jms, best: jms_solve(inst), diagnostics: None, lp, clustering: None });
    }
    let aug = augment(&lp, inst, gamma)?;
    let clustering = cluster_conn(&aug, params)?;
    let (diag, best) = estimate_with_best(&aug, &clustering, trials, seed)?;
    Ok(BifactorRun { branch: Branch::Conn, best, diagnostics: Some(diag), lp, clustering: Some(clustering) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnifactorPath {
    Jms,
    Conn,
    Greedy,
}

impl UnifactorPath {
    pub fn as_str(self) -> &'static str {
        match self {
            UnifactorPath::Jms => "jms",
            UnifactorPath::Conn => "conn",
            UnifactorPath::Greedy => "greedy",
        }
    }
}

/// Clustering used for a sampled γ on a connection-dominant instance.
pub fn unifactor_path(gamma: f64) -> UnifactorPath {
    if (1.6..=2.0).contains(&gamma) {
        UnifactorPath::Conn
    } else {
        UnifactorPath::Greedy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnifactorTrial {
    pub gamma: Option<f64>,
    pub path: UnifactorPath,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct UnifactorReport {
    pub trials: Vec<UnifactorTrial>,
    pub mean_cost: f64,
    pub lp_objective: f64,
}

pub fn run_unifactor(inst: &Instance, params: &ParamSet, trials: usize, seed: u64) -> Result<(RoundedSolution, UnifactorReport)> {
    if trials == 0 {
        return Err(UflError::input("trials must be at least 1"));
    }
    let lp = solve_relaxation(inst)?;
    let jms = jms_solve(inst);
    let dominant = is_connection_dominant(&lp, params);
    let dist = GammaDistribution::mu2(params.eps(7), params.kappa2)?;
    let results: Vec<Result<(UnifactorTrial, RoundedSolution)>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let draw = if dominant { dist.sample(&mut rng) } else { GammaDraw::Jms };
            let GammaDraw::Gamma(g) = draw else {
                return Ok((UnifactorTrial { gamma: None, path: UnifactorPath::Jms, cost: jms.total_cost }, jms.clone()));
            };
            let aug = augment(&lp, inst, g)?;
            let path = unifactor_path(g);
            let all: Vec<usize> = (0..inst.n_clients()).collect();
            let clustering = match path {
                UnifactorPath::Conn => cluster_conn(&aug, params)?,
                _ => cluster_greedy(&all, &aug, params)?,
            };
            let owned = center_copies(&aug, &clustering)?;
            let open = draw_open(&aug, &clustering, &owned, &mut rng);
            let sol = solution_from_copies(&aug, open, seed);
            Ok((UnifactorTrial { gamma: Some(g), path, cost: sol.total_cost }, sol))
        })
        .collect();
    let mut log = Vec::with_capacity(trials);
    let mut best: Option<RoundedSolution> = None;
    for r in results {
        let (tr, sol) = r?;
        if best.as_ref().map_or(true, |b| sol.total_cost < b.total_cost) {
            best = Some(sol);
        }
        log.push(tr);
    }
    let mean_cost = log.iter().map(|t| t.cost).sum::<f64>() / trials as f64;
    Ok((best.expect("trials ≥ 1"), UnifactorReport { trials: log, mean_cost, lp_objective: lp.primal.objective }))
}

/// Monte Carlo check of `E[min_{open k ∈ A} d(j, k) | some k ∈ A open] ≤ d(j, A)`.
/// Openings follow the rounding's joint law when a clustering is given,
/// otherwise each copy opens independently with probability ȳ.
pub fn closest_open_bound_check(
    aug: &AugmentedSolution,
    set: &[usize],
    j: usize,
    trials: usize,
    seed: u64,
    clustering: Option<&ClusteringResult>,
) -> Result<bool> {
    let mass: f64 = set.iter().map(|&k| aug.copies[k].ybar).sum();
    if !(mass > 0.0) || trials == 0 {
        return Err(UflError::input("copy set needs positive mass and trials ≥ 1"));
    }
    let owned = clustering.map(|c| center_copies(aug, c)).transpose()?;
    let (mut n, mut sum, mut sum_sq) = (0usize, 0.0, 0.0);
    let mut is_open = vec![false; aug.copies.len()];
    for t in 0..trials as u64 {
        let mut rng = trial_rng(seed, t);
        is_open.iter_mut().for_each(|o| *o = false);
        match (clustering, &owned) {
            (Some(c), Some(o)) => draw_open(aug, c, o, &mut rng).into_iter().for_each(|k| is_open[k] = true),
            _ => {
                for &k in set {
                    is_open[k] = rng.gen::<f64>() < aug.copies[k].ybar;
                }
            }
        }
        let best = set.iter().filter(|&&k| is_open[k]).map(|&k| aug.dist(k, j)).fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            n += 1;
            sum += best;
            sum_sq += best * best;
        }
    }
    if n == 0 {
        return Ok(false);
    }
    let nf = n as f64;
    let mean = sum / nf;
    let sd = if n > 1 { ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0).sqrt() } else { 0.0 };
    let bound = avg_distance(j, set, aug);
    // naive summation of n equal terms drifts by about n·ε relative
    let rounding = 4.0 * f64::EPSILON * nf * bound.abs().max(1.0);
    Ok(mean <= bound + 3.0 * sd / nf.sqrt() + rounding)
}

#[cfg(test)]
mod tests;
