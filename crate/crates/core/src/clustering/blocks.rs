use std::collections::BTreeMap;

use crate::augmentation::AugmentedSolution;
use crate::params::ParamSet;

/// Clients whose `C+M` lies in `[(1+δ')^(n−1)·s, (1+δ')^n·s)`; index 0 holds `C+M = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub index: i128,
    pub clients: Vec<usize>,
    pub cstar: f64,
    pub fstar: f64,
}

/// Block range `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: i128,
    pub hi: i128,
    pub reward: f64,
}

impl Interval {
    pub fn size(&self) -> i128 {
        self.hi - self.lo + 1
    }
}

pub fn block_index(cm: f64, s: f64, delta_prime: f64) -> i128 {
    if cm <= 0.0 {
        return 0;
    }
    let n = ((cm / s).ln() / delta_prime.ln_1p()).floor();
    (n as i128).max(0) + 1
}

/// Nonempty blocks in increasing index order.
pub fn build_blocks(aug: &AugmentedSolution, params: &ParamSet) -> Vec<Block> {
    let n = aug.n_clients();
    let s = (0..n).map(|j| aug.cm(j)).filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let mut map: BTreeMap<i128, Block> = BTreeMap::new();
    for j in 0..n {
        let idx = block_index(aug.cm(j), s, params.delta_prime);
        let b = map.entry(idx).or_insert_with(|| Block { index: idx, clients: Vec::new(), cstar: 0.0, fstar: 0.0 });
        b.clients.push(j);
        b.cstar += aug.cstar[j];
        b.fstar += aug.fstar[j];
    }
    map.into_values().collect()
}

/// Right-to-left scan for intervals with large reward, then every block not
/// yet covered becomes a size-1 interval. Output is sorted by `lo`.
pub fn cut_intervals(blocks: &[Block], params: &ParamSet) -> Vec<Interval> {
    let (k2, k3) = (params.k2(), params.k3());
    let big_l = params.l_interval as i128;
    let mass: BTreeMap<i128, (f64, f64)> = blocks.iter().map(|b| (b.index, (b.cstar, b.fstar))).collect();
    let at = |i: i128| mass.get(&i).copied().unwrap_or((0.0, 0.0));
    let range_sum = |lo: i128, hi: i128| {
        mass.range(lo..=hi).fold((0.0, 0.0), |acc, (_, &(c, f))| (acc.0 + c, acc.1 + f))
    };
    // Largest nonempty index ≤ r, or 0.
    let settle = |r: i128| mass.range(..=r).next_back().map_or(0, |(&i, _)| i);

    let mut found = Vec::new();
    let mut r = settle(blocks.last().map_or(0, |b| b.index));
    'outer: while r > 0 {
        let mut l = r;
        let (mut c, mut f) = (0.0, 0.0);
        loop {
            if l < 0 {
                break 'outer;
            }
            let (cl, fl) = at(l);
            if c >= k3 * (f + fl) && cl <= (k2 - k3) / k2 * c {
                found.push(Interval { lo: l, hi: r, reward: c });
                r = l - 1;
                break;
            }
            c += cl;
            f += fl;
            if c < k2 * f {
                r = l - 1;
                break;
            }
            if r - l + 1 == 2 * big_l {
                let (dc, df) = range_sum(l + big_l, r);
                c -= dc;
                f -= df;
                r -= big_l;
            }
            l -= 1;
        }
        r = settle(r);
    }

    for b in blocks {
        if !found.iter().any(|iv| iv.lo <= b.index && b.index <= iv.hi) {
            found.push(Interval { lo: b.index, hi: b.index, reward: 0.0 });
        }
    }
    found.sort_by_key(|iv| iv.lo);
    found
}
