//! γ-scaled, split ("complete") form of the fractional solution.
//!
//! Facility i's mass is the interval `[0, y*_i]`; client j uses the prefix
//! `[0, x_ij]` of it. Walking j's facilities by distance, the first `1/γ` of
//! y*-mass (one unit of ȳ) is close; the rest of the prefix is distant. Cutting
//! every facility interval at all client boundaries yields one copy list in
//! which each copy is wholly close, wholly distant or unused for every client.

use std::fmt::Write as _;

use crate::error::{Result, UflError};
use crate::instance::Instance;
use crate::lp::LpOutput;

/// Mass below which an x value is treated as LP noise.
const MASS_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FacilityCopy {
    pub id: usize,
    pub parent: usize,
    /// Sub-interval `[lo, hi]` of the parent's y* mass.
    pub lo: f64,
    pub hi: f64,
    pub ystar_share: f64,
    pub ybar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClientStats {
    pub cval: f64,
    pub mval: f64,
    pub dval: f64,
    pub r: f64,
    pub rprime: f64,
}

#[derive(Debug, Clone)]
pub struct AugmentedSolution {
    pub gamma: f64,
    pub instance: Instance,
    pub copies: Vec<FacilityCopy>,
    /// Close copies per client, sorted by (distance, copy id).
    pub close: Vec<Vec<usize>>,
    pub distant: Vec<Vec<usize>>,
    pub stats: Vec<ClientStats>,
    pub cstar: Vec<f64>,
    pub fstar: Vec<f64>,
    /// `extent[j][i] = (t_ji, x_ij)`: close and total prefix of facility i used by j.
    pub extent: Vec<Vec<(f64, f64)>>,
    /// Clients whose close sets intersect.
    pub neighbors: Vec<Vec<usize>>,
}

impl AugmentedSolution {
    pub fn n_clients(&self) -> usize {
        self.close.len()
    }

    pub fn dist(&self, copy: usize, j: usize) -> f64 {
        self.instance.dist(self.copies[copy].parent, j)
    }

    pub fn is_close(&self, copy: usize, j: usize) -> bool {
        let c = &self.copies[copy];
        c.hi <= self.extent[j][c.parent].0
    }

    /// In `C_j ∪ D_j`.
    pub fn is_adjacent(&self, copy: usize, j: usize) -> bool {
        let c = &self.copies[copy];
        c.hi <= self.extent[j][c.parent].1
    }

    pub fn is_neighbor(&self, a: usize, b: usize) -> bool {
        self.extent[a].iter().zip(&self.extent[b]).any(|(ea, eb)| ea.0 > 0.0 && eb.0 > 0.0)
    }

    /// `C_j + M_j`.
    pub fn cm(&self, j: usize) -> f64 {
        self.stats[j].cval + self.stats[j].mval
    }

    /// Per-client TSV of the close/distant statistics.
    pub fn stats_tsv(&self) -> String {
        let mut s = String::from("client\tcval\tmval\tdval\tr\n");
        for (j, st) in self.stats.iter().enumerate() {
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", self.instance.clients()[j].id, st.cval, st.mval, st.dval, st.r);
        }
        s
    }
}

/// y*-share weighted mean distance from client `j` to the copies in `set`; 0 if empty.
pub fn avg_distance(j: usize, set: &[usize], aug: &AugmentedSolution) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &c in set {
        let w = aug.copies[c].ystar_share;
        num += w * aug.dist(c, j);
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn augment(lp: &LpOutput, inst: &Instance, gamma: f64) -> Result<AugmentedSolution> {
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(UflError::input(format!("gamma must be at least 1, got {gamma}")));
    }
    let (nf, nc) = (inst.n_facilities(), inst.n_clients());
    let x = &lp.primal.x;
    let ystar = &lp.primal.y;
    let target = 1.0 / gamma;

    // Per-client close extents along the distance order.
    let mut extent = vec![vec![(0.0, 0.0); nf]; nc];
    for (j, ext) in extent.iter_mut().enumerate() {
        let mut order: Vec<usize> = (0..nf).filter(|&i| x[i][j] > MASS_EPS).collect();
        order.sort_by(|&a, &b| inst.dist(a, j).total_cmp(&inst.dist(b, j)).then(a.cmp(&b)));
        let mut remaining = target;
        for &i in &order {
            let xi = x[i][j];
            let mut take = xi.min(remaining.max(0.0));
            if xi - take <= MASS_EPS {
                take = xi;
            }
            if remaining <= MASS_EPS {
                take = 0.0;
            }
            remaining -= take;
            ext[i] = (take, xi);
        }
        if remaining > 1e-9 {
            return Err(UflError::Internal(format!("client {j} has close mass short by {remaining}")));
        }
    }

    // Global cut points per facility.
    let mut copies = Vec::new();
    for i in 0..nf {
        let top = ystar[i];
        let mut cuts = vec![0.0, top];
        for ext in &extent {
            let (t, xi) = ext[i];
            cuts.push(t.min(top));
            cuts.push(xi.min(top));
        }
        let mut k = 1.0;
        while k * target < top {
            cuts.push(k * target);
            k += 1.0;
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            if w[1] > w[0] {
                copies.push(FacilityCopy {
                    id: copies.len(),
                    parent: i,
                    lo: w[0],
                    hi: w[1],
                    ystar_share: w[1] - w[0],
                    ybar: gamma * (w[1] - w[0]),
                });
            }
        }
    }

    let mut close = vec![Vec::new(); nc];
    let mut distant = vec![Vec::new(); nc];
    for c in &copies {
        for j in 0..nc {
            let (t, xi) = extent[j][c.parent];
            if c.hi <= t {
                close[j].push(c.id);
            } else if c.lo >= t && c.hi <= xi {
                distant[j].push(c.id);
            }
        }
    }
    let by_distance = |j: usize, list: &mut Vec<usize>| {
        list.sort_by(|&a, &b| inst.dist(copies[a].parent, j).total_cmp(&inst.dist(copies[b].parent, j)).then(a.cmp(&b)));
    };
    for j in 0..nc {
        by_distance(j, &mut close[j]);
        by_distance(j, &mut distant[j]);
    }

    let dec = &lp.decomposition;
    let mut aug = AugmentedSolution {
        gamma,
        instance: inst.clone(),
        copies,
        close,
        distant,
        stats: vec![ClientStats::default(); nc],
        cstar: dec.cstar.clone(),
        fstar: dec.fstar.clone(),
        extent,
        neighbors: Vec::new(),
    };
    for j in 0..nc {
        let cval = avg_distance(j, &aug.close[j], &aug);
        let mval = aug.close[j].iter().map(|&c| aug.dist(c, j)).fold(0.0, f64::max);
        let dval = avg_distance(j, &aug.distant[j], &aug);
        let (cs, fs) = (aug.cstar[j], aug.fstar[j]);
        let r = if fs > MASS_EPS * cs.max(1.0) && !aug.distant[j].is_empty() {
            ((dval - cs) / fs).clamp(0.0, 1.0)
        } else {
            0.0
        };
        aug.stats[j] = ClientStats { cval, mval, dval, r, rprime: (gamma - 1.0) * r };
    }
    aug.neighbors = (0..nc).map(|a| (0..nc).filter(|&b| b != a && aug.is_neighbor(a, b)).collect()).collect();
    Ok(aug)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_random, GenSpec, Profile};
    use crate::geometry::Point;
    use crate::instance::{Client, Facility};
    use crate::lp::{solve_relaxation, ClientDecomposition, DualSolution, FractionalSolution};
    use proptest::prelude::*;

    /// Hand-built LP output for a single client at the origin.
    fn handmade(facs: &[(f64, f64)], cstar: f64, fstar: f64) -> (LpOutput, Instance) {
        let inst = Instance::new(
            facs.iter()
                .enumerate()
                .map(|(k, &(d, _))| Facility { id: k as u64, location: Point::new(vec![d]).unwrap(), open_cost: 1.0 })
                .collect(),
            vec![Client { id: 0, location: Point::new(vec![0.0]).unwrap() }],
        )
        .unwrap();
        let lp = LpOutput {
            primal: FractionalSolution {
                x: facs.iter().map(|&(_, y)| vec![y]).collect(),
                y: facs.iter().map(|&(_, y)| y).collect(),
                objective: 0.0,
            },
            dual: DualSolution { v: vec![cstar + fstar], w: vec![vec![0.0]; facs.len()], objective: 0.0 },
            decomposition: ClientDecomposition { cstar: vec![cstar], fstar: vec![fstar], vstar: vec![cstar + fstar] },
            iterations: 0,
        };
        (lp, inst)
    }

    #[test]
    fn single_facility() {
        let (lp, inst) = handmade(&[(2.0, 1.0)], 2.0, 1.0);
        let aug = augment(&lp, &inst, 1.6774).unwrap();
        let s = aug.stats[0];
        assert_eq!((s.cval, s.mval, s.dval, s.r), (2.0, 2.0, 2.0, 0.0));
        let close_mass: f64 = aug.close[0].iter().map(|&c| aug.copies[c].ybar).sum();
        assert!((close_mass - 1.0).abs() < 1e-12);
        assert!(aug.copies.iter().all(|c| c.ybar <= 1.0 + 1e-12));
    }

    #[test]
    fn two_facility_prefix_split() {
        let g = 1.6774;
        let (lp, inst) = handmade(&[(1.0, 0.5), (3.0, 0.5)], 2.0, 1.0);
        let aug = augment(&lp, &inst, g).unwrap();
        // Independent cumulative-mass oracle: near facility contributes γ·0.5
        // of ȳ, the far one fills the remaining 1 − γ/2.
        let near = g * 0.5;
        let far = 1.0 - near;
        let s = aug.stats[0];
        assert!((s.cval - (near * 1.0 + far * 3.0)).abs() < 1e-12);
        assert!((s.cval - 1.3226).abs() < 1e-12);
        assert_eq!(s.mval, 3.0);
        assert_eq!(s.dval, 3.0);
        assert!((s.r - 1.0).abs() < 1e-12);
        assert!((s.cval - (2.0 - s.rprime * 1.0)).abs() < 1e-12);
        assert!((s.dval - (2.0 + s.r * 1.0)).abs() < 1e-12);
    }

    #[test]
    fn gamma_one_has_no_distant_copies() {
        let (lp, inst) = handmade(&[(1.0, 0.25), (2.0, 0.75)], 1.75, 0.25);
        let aug = augment(&lp, &inst, 1.0).unwrap();
        assert!(aug.distant[0].is_empty());
        assert_eq!(aug.stats[0].dval, 0.0);
        assert_eq!(aug.close[0].len(), 2);
    }

    #[test]
    fn rejects_gamma_below_one() {
        let (lp, inst) = handmade(&[(1.0, 1.0)], 1.0, 0.0);
        assert!(augment(&lp, &inst, 0.9).is_err());
    }

    #[test]
    fn avg_distance_cases() {
        let (lp, inst) = handmade(&[(1.0, 0.5), (3.0, 0.25), (5.0, 0.25)], 2.0, 1.0);
        let aug = augment(&lp, &inst, 1.0).unwrap();
        let of_parent = |p: usize| aug.copies.iter().filter(|c| c.parent == p).map(|c| c.id).collect::<Vec<_>>();
        assert_eq!(avg_distance(0, &of_parent(2), &aug), 5.0);
        assert_eq!(avg_distance(0, &[], &aug), 0.0);
        let mixed: Vec<usize> = of_parent(0).into_iter().chain(of_parent(1)).collect();
        assert!((avg_distance(0, &mixed, &aug) - 5.0 / 3.0).abs() < 1e-12);
    }

    fn check_invariants(inst: &Instance, gamma: f64) {
        let lp = solve_relaxation(inst).unwrap();
        let aug = augment(&lp, inst, gamma).unwrap();
        let tol = 1e-9;
        for i in 0..inst.n_facilities() {
            let share: f64 = aug.copies.iter().filter(|c| c.parent == i).map(|c| c.ystar_share).sum();
            assert!((share - lp.primal.y[i]).abs() < tol);
        }
        assert!(aug.copies.iter().all(|c| c.ybar <= 1.0 + tol && (c.ybar - gamma * c.ystar_share).abs() < 1e-12));
        let fmass: f64 = aug.copies.iter().map(|c| c.ybar * inst.open_cost(c.parent)).sum();
        assert!((fmass - gamma * lp.decomposition.total_f()).abs() < 1e-6 * fmass.max(1.0));
        for j in 0..inst.n_clients() {
            let close_mass: f64 = aug.close[j].iter().map(|&c| aug.copies[c].ybar).sum();
            assert!((close_mass - 1.0).abs() < 1e-8, "client {j}: {close_mass}");
            assert!(aug.close[j].iter().all(|c| !aug.distant[j].contains(c)));
            for &c in &aug.distant[j] {
                assert!(lp.primal.x[aug.copies[c].parent][j] > 0.0);
            }
            let s = aug.stats[j];
            assert!(s.cval <= s.mval + tol);
            if !aug.distant[j].is_empty() {
                assert!(s.mval <= s.dval + tol);
                let far_close = aug.close[j].iter().map(|&c| aug.dist(c, j)).fold(0.0, f64::max);
                let near_distant = aug.distant[j].iter().map(|&c| aug.dist(c, j)).fold(f64::INFINITY, f64::min);
                assert!(far_close <= near_distant + 1e-12);
            }
            assert!((0.0..=1.0).contains(&s.r));
            assert!((s.cval + (gamma - 1.0) * s.r * aug.fstar[j] - aug.cstar[j]).abs() < 1e-7);
            if !aug.distant[j].is_empty() && aug.fstar[j] > 1e-9 {
                assert!((s.dval - aug.cstar[j] - s.r * aug.fstar[j]).abs() < 1e-7);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn invariants_on_random_instances(seed in any::<u64>(), nf in 1usize..6, nc in 1usize..7, gamma in 1.0..2.0f64) {
            let mut spec = GenSpec::new(seed, 2, nf, nc, Profile::ClusteredBlobs);
            spec.cost_range = (0.0, 0.5);
            check_invariants(&generate_random(&spec).unwrap(), gamma);
        }
    }
}
