//! Numeric checks of the per-client and per-cluster inequalities behind the
//! rounding guarantee, evaluated on concrete clusterings.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::augmentation::AugmentedSolution;
use crate::clustering::{
    build_blocks, classify_arm, classify_normal, cluster_homogeneous, cut_intervals, homogeneity_violation, reroute_cost,
    saving_spending, target, ClusteringResult, Rule,
};
use crate::error::Result;
use crate::geometry::angle_at;
use crate::params::{theta, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl LemmaStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LemmaStatus::Pass => "pass",
            LemmaStatus::Fail => "FAIL",
            LemmaStatus::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaOutcome {
    pub name: &'static str,
    /// Configurations where the hypotheses held.
    pub checked: usize,
    pub failures: usize,
    /// Smallest `(rhs − lhs)/scale` seen; `+∞` when nothing was checked.
    pub worst_slack: f64,
}

impl LemmaOutcome {
    fn new(name: &'static str) -> Self {
        LemmaOutcome { name, checked: 0, failures: 0, worst_slack: f64::INFINITY }
    }

    pub fn status(&self) -> LemmaStatus {
        if self.checked == 0 {
            LemmaStatus::NotApplicable
        } else if self.failures > 0 {
            LemmaStatus::Fail
        } else {
            LemmaStatus::Pass
        }
    }

    /// Records `lhs ≤ rhs + tol`.
    fn le(&mut self, lhs: f64, rhs: f64, tol: f64) {
        self.checked += 1;
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        self.worst_slack = self.worst_slack.min((rhs - lhs) / scale);
        if lhs > rhs + tol {
            self.failures += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub outcomes: Vec<LemmaOutcome>,
}

impl LemmaReport {
    pub fn hard_failures(&self) -> usize {
        self.outcomes.iter().map(|o| o.failures).sum()
    }

    pub fn get(&self, name: &str) -> Option<&LemmaOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("lemma\tstatus\tchecked\tfailures\tworst_slack\n");
        for o in &self.outcomes {
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", o.name, o.status().as_str(), o.checked, o.failures, o.worst_slack);
        }
        s
    }
}

/// One round of a homogeneous run, with the clients still free when it started.
struct Round {
    network: Vec<usize>,
    free: Vec<usize>,
    center: usize,
    rule: Rule,
    members: Vec<usize>,
    nminus: Vec<usize>,
}

fn rounds_of(network: &[usize], result: &ClusteringResult) -> Vec<Round> {
    let mut free: BTreeSet<usize> = network.iter().copied().collect();
    let mut out = Vec::new();
    for (c, rec) in result.clusters.iter().zip(&result.trace) {
        out.push(Round {
            network: network.to_vec(),
            free: free.iter().copied().collect(),
            center: c.center,
            rule: rec.rule,
            members: c.members.clone(),
            nminus: rec.nminus.clone(),
        });
        for m in &c.members {
            free.remove(m);
        }
    }
    out
}

/// Homogeneous, connection-dominant client sets the analysis speaks about:
/// qualifying intervals and, if it qualifies, the whole client set.
fn candidate_networks(aug: &AugmentedSolution, params: &ParamSet) -> Vec<Vec<usize>> {
    let qualifies = |n: &[usize]| {
        let c: f64 = n.iter().map(|&j| aug.cstar[j]).sum();
        let f: f64 = n.iter().map(|&j| aug.fstar[j]).sum();
        !n.is_empty() && c > params.k4() * f && homogeneity_violation(n, aug, params).is_none()
    };
    let mut out: Vec<Vec<usize>> = Vec::new();
    let all: Vec<usize> = (0..aug.n_clients()).collect();
    if qualifies(&all) {
        out.push(all);
    }
    let blocks = build_blocks(aug, params);
    for iv in cut_intervals(&blocks, params) {
        let mut n: Vec<usize> = blocks
            .iter()
            .filter(|b| iv.lo <= b.index && b.index <= iv.hi)
            .flat_map(|b| b.clients.iter().copied())
            .collect();
        n.sort_unstable();
        if qualifies(&n) && !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

fn pair_homogeneous(a: usize, b: usize, aug: &AugmentedSolution, params: &ParamSet) -> bool {
    let (x, y) = (aug.cm(a), aug.cm(b));
    x.max(y) <= (1.0 + params.delta) * x.min(y) * (1.0 + params.cmp_tol)
}

fn coords_client(aug: &AugmentedSolution, j: usize) -> &[f64] {
    aug.instance.clients()[j].location.coords()
}

fn coords_copy(aug: &AugmentedSolution, c: usize) -> &[f64] {
    aug.instance.facilities()[aug.copies[c].parent].location.coords()
}

/// y*-mass of the worst-angle and remaining parts of the far band of `C_{j'}`,
/// restricted to the copies `j` would be rerouted to.
fn cone_masses(jp: usize, j: usize, aug: &AugmentedSolution, params: &ParamSet) -> Option<(f64, f64)> {
    let (_, z) = reroute_cost(jp, j, aug);
    let mval = aug.stats[jp].mval;
    let (mut g1, mut g2, mut any) = (0.0, 0.0, false);
    for &c in &aug.close[jp] {
        if aug.is_adjacent(c, j) {
            continue;
        }
        any = true;
        let d = aug.dist(c, jp);
        if d < 0.999 * z || d > mval {
            continue;
        }
        let ang = angle_at(coords_client(aug, jp), coords_client(aug, j), coords_copy(aug, c));
        if ang > std::f64::consts::PI - params.phi_r {
            g1 += aug.copies[c].ystar_share;
        } else {
            g2 += aug.copies[c].ystar_share;
        }
    }
    any.then_some((g1, g2))
}

pub fn check_lemmas(aug: &AugmentedSolution, clustering: &ClusteringResult, params: &ParamSet) -> Result<LemmaReport> {
    let g = aug.gamma;
    let n = aug.n_clients();
    let in_range = g > params.analysis_range.0 && g < params.analysis_range.1;
    let tol = |a: f64, b: f64| params.lp_tol * a.abs().max(b.abs()) + params.cmp_tol;

    let mut weird = LemmaOutcome::new("weird_client");
    let mut zlow = LemmaOutcome::new("z_lower_bound");
    let mut cone = LemmaOutcome::new("cone_probability");
    let mut expansion = LemmaOutcome::new("saving_expansion");
    let mut round_avg = LemmaOutcome::new("round_good_on_average");
    let mut homog_avg = LemmaOutcome::new("homogeneous_average");
    let mut far = LemmaOutcome::new("far_block");
    let mut reward = LemmaOutcome::new("interval_reward");

    if g > 1.0 && g <= 2.0 {
        let th = theta(params.k6(), g);
        for j in 0..n {
            let st = aug.stats[j];
            if st.cval < th * (st.cval + st.mval) - params.cmp_tol && !aug.distant[j].is_empty() {
                weird.le(aug.cstar[j], params.k6() * aug.fstar[j], tol(aug.cstar[j], aug.fstar[j]));
            }
        }
    }

    let mut pairs = BTreeSet::new();
    let mut rounds = Vec::new();
    if in_range {
        for (c, rec) in clustering.clusters.iter().zip(&clustering.trace) {
            pairs.extend(rec.nminus.iter().map(|&j| (c.center, j)));
        }
        for net in candidate_networks(aug, params) {
            let result = cluster_homogeneous(&net, aug, params)?;
            let (mut lhs, mut rhs) = (0.0, 0.0);
            for c in &result.clusters {
                for &j in &c.members {
                    lhs += reroute_cost(c.center, j, aug).0;
                    rhs += target(j, aug, params.eps(3));
                }
            }
            homog_avg.le(lhs, rhs, tol(lhs, rhs));
            for r in rounds_of(&net, &result) {
                pairs.extend(r.nminus.iter().map(|&j| (r.center, j)));
                rounds.push(r);
            }
        }
    }

    for &(jp, j) in &pairs {
        if jp == j || !classify_normal(jp, aug, params) || !pair_homogeneous(jp, j, aug, params) {
            continue;
        }
        let (_, z) = reroute_cost(jp, j, aug);
        let cp = aug.stats[jp].cval;
        zlow.le(0.99 * cp, z, tol(cp, z));
        if let Some((g1, g2)) = cone_masses(jp, j, aug, params) {
            cone.le(g2, g1, params.cmp_tol);
        }
    }

    for r in &rounds {
        if r.rule != Rule::MaxSaving {
            continue;
        }
        let s = r.network.iter().map(|&j| aug.cm(j)).fold(f64::INFINITY, f64::min);
        let small: Vec<usize> =
            r.nminus.iter().copied().filter(|&j| j != r.center && classify_arm(r.center, j, aug, params)).collect();
        if !small.is_empty() {
            let best = small
                .iter()
                .map(|&j| saving_spending(j, &r.free, aug, params.eps(1)).saving)
                .fold(f64::NEG_INFINITY, f64::max);
            let need = s / 125.0 * small.len() as f64 / params.m_cap as f64;
            expansion.le(need, best, tol(need, best));
        }
        let cs: f64 = r.members.iter().map(|&j| aug.cstar[j]).sum();
        let fs: f64 = r.members.iter().map(|&j| aug.fstar[j]).sum();
        if cs > params.k5() * fs {
            let lhs: f64 = r.members.iter().map(|&j| reroute_cost(r.center, j, aug).0).sum();
            let rhs: f64 = r.members.iter().map(|&j| target(j, aug, params.eps(2))).sum();
            round_avg.le(lhs, rhs, tol(lhs, rhs));
        }
    }

    if g > 1.0 {
        let blocks = build_blocks(aug, params);
        let mut index = vec![0i128; n];
        for b in &blocks {
            for &j in &b.clients {
                index[j] = b.index;
            }
        }
        let shrink = 1.0 - 2.0 * params.delta_prime / (1.0 + params.delta_prime);
        for a in 0..n {
            for &b in &aug.neighbors[a] {
                if a == b || (index[a] - index[b]).abs() < 2 || (1.0 + params.delta_prime) * aug.cm(a) > aug.cm(b) {
                    continue;
                }
                let st = aug.stats[b];
                let lhs = reroute_cost(a, b, aug).0;
                let rhs = shrink * st.cval + (3.0 - g) * st.mval + (g - 1.0) * st.dval;
                far.le(lhs, rhs, tol(lhs, rhs));
            }
        }
    }

    let (c, f): (f64, f64) = (aug.cstar.iter().sum(), aug.fstar.iter().sum());
    if c > params.k1() * f {
        let total: f64 = cut_intervals(&build_blocks(aug, params), params).iter().map(|iv| iv.reward).sum();
        reward.le(c / 1e5, total, params.cmp_tol * c);
    }

    Ok(LemmaReport { outcomes: vec![weird, zlow, cone, expansion, round_avg, homog_avg, far, reward] })
}
