//! Greedy dual-fitting with recontribution: client budgets rise together,
//! unconnected clients pay `α − d` towards a facility, connected ones pay the
//! saving `d(current) − d` they would get by switching.

use crate::instance::Instance;
use crate::rounding::RoundedSolution;

#[derive(Debug, Clone, PartialEq)]
pub struct JmsTrace {
    /// Budget at the moment each client connected.
    pub alpha: Vec<f64>,
    /// Facility indices in opening order, with opening times.
    pub opened: Vec<(usize, f64)>,
    /// Facility each client was connected to when the run ended.
    pub connected: Vec<usize>,
}

/// Earliest `t ≥ now` with `fixed + Σ_k max(t − d_k, 0) ≥ cost`, `d` sorted.
fn opening_time(cost: f64, fixed: f64, d: &[f64], now: f64) -> f64 {
    let need = cost - fixed;
    if need <= 0.0 {
        return now;
    }
    let mut sum = 0.0;
    for (m, &dm) in d.iter().enumerate() {
        sum += dm;
        let t = (need + sum) / (m + 1) as f64;
        let next = d.get(m + 1).copied().unwrap_or(f64::INFINITY);
        if t <= next {
            return t.max(now).max(dm);
        }
    }
    f64::INFINITY
}

pub fn jms_run(inst: &Instance) -> JmsTrace {
    let (nf, nc) = (inst.n_facilities(), inst.n_clients());
    let mut open = vec![false; nf];
    let mut conn: Vec<Option<usize>> = vec![None; nc];
    let mut alpha = vec![0.0; nc];
    let mut opened = Vec::new();
    let mut now = 0.0f64;

    while conn.iter().any(Option::is_none) {
        // next facility opening
        let mut best_f = (f64::INFINITY, usize::MAX);
        for i in (0..nf).filter(|&i| !open[i]) {
            let mut fixed = 0.0;
            let mut d = Vec::new();
            for j in 0..nc {
                let dij = inst.dist(i, j);
                match conn[j] {
                    Some(c) => fixed += (inst.dist(c, j) - dij).max(0.0),
                    None => d.push(dij),
                }
            }
            d.sort_by(f64::total_cmp);
            let t = opening_time(inst.open_cost(i), fixed, &d, now);
            if t < best_f.0 {
                best_f = (t, i);
            }
        }
        // next client reaching an open facility
        let mut best_c = (f64::INFINITY, usize::MAX, usize::MAX);
        for j in (0..nc).filter(|&j| conn[j].is_none()) {
            for i in (0..nf).filter(|&i| open[i]) {
                let t = inst.dist(i, j).max(now);
                if t < best_c.0 {
                    best_c = (t, j, i);
                }
            }
        }
        if best_f.0 <= best_c.0 {
            let (t, i) = best_f;
            assert!(t.is_finite(), "some facility must eventually open");
            now = t;
            open[i] = true;
            opened.push((i, t));
            for j in 0..nc {
                let dij = inst.dist(i, j);
                match conn[j] {
                    None if dij <= now => {
                        conn[j] = Some(i);
                        alpha[j] = now;
                    }
                    Some(c) if dij < inst.dist(c, j) => conn[j] = Some(i),
                    _ => {}
                }
            }
        } else {
            let (t, j, i) = best_c;
            now = t;
            conn[j] = Some(i);
            alpha[j] = now;
        }
    }
    JmsTrace { alpha, opened, connected: conn.into_iter().map(|c| c.expect("all connected")).collect() }
}

pub fn jms_solve(inst: &Instance) -> RoundedSolution {
    let trace = jms_run(inst);
    let parents: Vec<usize> = trace.opened.iter().map(|&(i, _)| i).collect();
    RoundedSolution::from_open(inst, parents, Vec::new(), 0)
}
