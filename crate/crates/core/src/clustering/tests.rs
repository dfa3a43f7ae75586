use std::collections::HashSet;

use proptest::prelude::*;

use super::*;
use crate::augmentation::augment;
use crate::generators::{cyclic_average, generate_random, ring, GenSpec, Profile};
use crate::geometry::Point;
use crate::instance::{Client, Facility, Instance};
use crate::lp::{solve_relaxation, LpOutput};

fn line_instance(facs: &[f64], clis: &[f64]) -> Instance {
    Instance::new(
        facs.iter()
            .enumerate()
            .map(|(k, &x)| Facility { id: k as u64, location: Point::new(vec![x]).unwrap(), open_cost: 1.0 })
            .collect(),
        clis.iter().enumerate().map(|(k, &x)| Client { id: k as u64, location: Point::new(vec![x]).unwrap() }).collect(),
    )
    .unwrap()
}

/// LP output from an explicit `x[i][j]` and duals `v`.
fn handmade(inst: &Instance, x: Vec<Vec<f64>>, v: Vec<f64>) -> LpOutput {
    let w = vec![vec![0.0; inst.n_clients()]; inst.n_facilities()];
    LpOutput::from_parts(inst, x, v, w, 0)
}

fn params() -> ParamSet {
    ParamSet::inflated()
}

fn seeded(seed: u64, nf: usize, nc: usize, profile: Profile, gamma: f64) -> AugmentedSolution {
    let mut spec = GenSpec::new(seed, 2, nf, nc, profile);
    spec.cost_range = (0.0, 0.3);
    let inst = generate_random(&spec).unwrap();
    let lp = solve_relaxation(&inst).unwrap();
    augment(&lp, &inst, gamma).unwrap()
}

fn all(aug: &AugmentedSolution) -> Vec<usize> {
    (0..aug.n_clients()).collect()
}

#[test]
fn reroute_to_self_is_empty() {
    let aug = seeded(3, 4, 5, Profile::UniformBox, 1.6774);
    for j in 0..5 {
        assert_eq!(reroute_cost(j, j, &aug), (0.0, 0.0));
    }
}

#[test]
fn reroute_disjoint_single_facility() {
    // j at 0 owns the facility at −1; j' at 7 owns the facility at 4.
    let inst = line_instance(&[-1.0, 4.0], &[0.0, 7.0]);
    let lp = handmade(&inst, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![2.0, 4.0]);
    let aug = augment(&lp, &inst, 1.6774).unwrap();
    assert_eq!(reroute_cost(1, 0, &aug), (4.0, 3.0));
}

#[test]
fn reroute_matches_set_difference_oracle() {
    let aug = seeded(11, 5, 5, Profile::ClusteredBlobs, 1.6774);
    for jp in 0..5 {
        for j in 0..5 {
            let own: HashSet<usize> = aug.close[j].iter().chain(&aug.distant[j]).copied().collect();
            let rest: Vec<usize> = aug.close[jp].iter().copied().filter(|c| !own.contains(c)).collect();
            let w: f64 = rest.iter().map(|&c| aug.copies[c].ystar_share).sum();
            let mean = |who: usize| {
                if w == 0.0 {
                    0.0
                } else {
                    rest.iter().map(|&c| aug.copies[c].ystar_share * aug.dist(c, who)).sum::<f64>() / w
                }
            };
            let (cost, z) = reroute_cost(jp, j, &aug);
            assert!((cost - mean(j)).abs() < 1e-12 && (z - mean(jp)).abs() < 1e-12);
            assert!(cost <= aug.instance.client_dist(jp, j) + z + 1e-9);
        }
    }
}

/// Client at 0 with facilities at 0 and 1 taking near mass `p`.
fn two_point_client(p: f64, gamma: f64) -> AugmentedSolution {
    let inst = line_instance(&[0.0, 1.0], &[0.0]);
    let lp = handmade(&inst, vec![vec![p], vec![1.0 - p]], vec![1.0]);
    augment(&lp, &inst, gamma).unwrap()
}

#[test]
fn normal_and_weird() {
    let p = params();
    // Cval = Mval = 1
    let inst = line_instance(&[1.0], &[0.0]);
    let aug = augment(&handmade(&inst, vec![vec![1.0]], vec![1.0]), &inst, p.gamma).unwrap();
    assert!(classify_normal(0, &aug, &p));
    // Cval = 0, Mval = 1 needs close mass on a zero-distance copy plus a
    // zero-share far copy; take γ = 1 with near mass 1 − tiny.
    let aug = two_point_client(1.0, 1.0);
    assert_eq!(aug.stats[0].cval, 0.0);
    let inst = line_instance(&[0.0, 1.0], &[0.0]);
    let mut weird = augment(&handmade(&inst, vec![vec![1.0], vec![0.0]], vec![0.0]), &inst, 1.0).unwrap();
    weird.stats[0].mval = 1.0;
    assert!(!classify_normal(0, &weird, &p));
}

#[test]
fn normal_boundary() {
    let p = params();
    let g = p.gamma;
    let th = theta(p.k6(), g);
    // Cval = 1 − γp, Mval = 1; boundary at Cval = θ/(1−θ).
    let pb = (1.0 - th / (1.0 - th)) / g;
    let aug = two_point_client(pb, g);
    let st = aug.stats[0];
    assert!((st.cval - th * (st.cval + st.mval)).abs() < 1e-12);
    assert!(classify_normal(0, &aug, &p));
    assert!(!classify_normal(0, &two_point_client(pb + 1e-6, g), &p));
}

#[test]
fn small_arm_when_fstar_zero() {
    // j at 0 uses the facility at 1 only, v = C* = 1. j' at 2 splits its
    // close mass between that facility and one at 5.
    let inst = line_instance(&[1.0, 5.0], &[0.0, 2.0]);
    let lp = handmade(&inst, vec![vec![1.0, 0.5], vec![0.0, 0.5]], vec![1.0, 3.0]);
    let aug = augment(&lp, &inst, 1.2).unwrap();
    assert_eq!(aug.fstar[0], 0.0);
    assert!(aug.is_neighbor(0, 1));
    let (_, z) = reroute_cost(1, 0, &aug);
    assert!((z - 3.0).abs() < 1e-12);
    assert!(classify_arm(1, 0, &aug, &params()));
}

#[test]
fn arm_with_empty_reroute_set() {
    // Both clients use only the facility at 0, so z = 0 and the test is v < d.
    let inst = line_instance(&[0.0], &[1.0, -2.0]);
    for (v, small) in [(2.9, true), (3.1, false)] {
        let lp = handmade(&inst, vec![vec![1.0, 1.0]], vec![v, 2.0]);
        let aug = augment(&lp, &inst, 1.5).unwrap();
        assert_eq!(reroute_cost(1, 0, &aug).1, 0.0);
        assert_eq!(classify_arm(1, 0, &aug, &params()), small, "v = {v}");
    }
}

#[test]
fn lone_center_saves_its_target() {
    let aug = seeded(5, 3, 4, Profile::UniformBox, 1.6774);
    let ss = saving_spending(2, &[2], &aug, 1e-3);
    assert_eq!(ss.nplus, vec![2]);
    assert!(ss.nminus.is_empty());
    assert_eq!(ss.saving, target(2, &aug, 1e-3));
    assert_eq!(ss.spending, 0.0);
}

#[test]
fn distant_client_with_large_target_joins() {
    // j at 0 with its only facility at 100; j' at 50 with a facility at 51.
    let inst = line_instance(&[100.0, 51.0], &[0.0, 50.0]);
    let lp = handmade(&inst, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![100.0, 1.0]);
    let aug = augment(&lp, &inst, 1.6774).unwrap();
    assert!(!aug.is_neighbor(0, 1));
    let ss = saving_spending(1, &[0, 1], &aug, 0.0);
    assert_eq!(ss.nplus, vec![0, 1]);
}

#[test]
fn saving_sets_match_definition() {
    let aug = seeded(21, 6, 8, Profile::ClusteredBlobs, 1.6774);
    let eps = 1e-3;
    let everyone = all(&aug);
    for jp in 0..8 {
        let ss = saving_spending(jp, &everyone, &aug, eps);
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for j in 0..8 {
            let cost = reroute_cost(jp, j, &aug).0;
            let st = aug.stats[j];
            let tau = (1.0 - eps) * st.cval + (3.0 - aug.gamma) * st.mval + (aug.gamma - 1.0) * st.dval;
            let shares = aug.close[jp].iter().any(|c| aug.close[j].contains(c));
            if cost <= tau {
                plus.push(j);
            } else if shares {
                minus.push(j);
            }
        }
        assert_eq!(ss.nplus, plus);
        assert_eq!(ss.nminus, minus);
        let nbrs: Vec<usize> = (0..8).filter(|&j| j == jp || aug.is_neighbor(jp, j)).collect();
        assert!(ss.nminus.iter().all(|j| nbrs.contains(j)));
        assert!(nbrs.iter().all(|j| ss.nplus.contains(j) || ss.nminus.contains(j)));
    }
}

#[test]
fn greedy_shared_facility_one_cluster() {
    let inst = line_instance(&[0.0], &[1.0, 3.0]);
    let lp = handmade(&inst, vec![vec![1.0, 1.0]], vec![2.0, 4.0]);
    let aug = augment(&lp, &inst, 1.6774).unwrap();
    let res = cluster_greedy(&[0, 1], &aug, &params()).unwrap();
    assert_eq!(res.clusters, vec![Cluster { center: 0, members: vec![0, 1] }]);
}

#[test]
fn greedy_disjoint_singletons() {
    let inst = line_instance(&[0.0, 10.0], &[1.0, 12.0]);
    let lp = handmade(&inst, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![2.0, 3.0]);
    let aug = augment(&lp, &inst, 1.6774).unwrap();
    let res = cluster_greedy(&[0, 1], &aug, &params()).unwrap();
    assert_eq!(res.clusters.len(), 2);
    assert!(res.clusters.iter().all(|c| c.members == vec![c.center]));
}

fn member_bound_holds(res: &ClusteringResult, aug: &AugmentedSolution) {
    for c in &res.clusters {
        for &j in &c.members {
            let cost = reroute_cost(c.center, j, aug).0;
            assert!(cost <= target(j, aug, 0.0) + 1e-9, "center {} member {j}: {cost}", c.center);
        }
    }
}

#[test]
fn greedy_per_member_bound() {
    for seed in 0..30 {
        for profile in [Profile::UniformBox, Profile::ClusteredBlobs, Profile::ColinearAdversarial] {
            let aug = seeded(seed, 6, 9, profile, 1.6774);
            let res = cluster_greedy(&all(&aug), &aug, &params()).unwrap();
            assert!(res.is_partition_of(&all(&aug), aug.n_clients()));
            member_bound_holds(&res, &aug);
        }
    }
}

fn ring_aug(n: usize, radius: f64, cost: f64, gamma: f64) -> AugmentedSolution {
    let inst = ring(n, radius, cost, 2).unwrap();
    let lp = cyclic_average(&solve_relaxation(&inst).unwrap(), &inst).unwrap();
    augment(&lp, &inst, gamma).unwrap()
}

#[test]
fn homogeneous_single_client() {
    let aug = seeded(1, 3, 1, Profile::UniformBox, 1.6774);
    let res = cluster_homogeneous(&[0], &aug, &params()).unwrap();
    assert_eq!(res.clusters, vec![Cluster { center: 0, members: vec![0] }]);
}

#[test]
fn homogeneous_rejects_spread_network() {
    let inst = line_instance(&[0.0, 10.0], &[1.0, 13.0]);
    let lp = handmade(&inst, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![2.0, 4.0]);
    let aug = augment(&lp, &inst, 1.6774).unwrap();
    let err = cluster_homogeneous(&[0, 1], &aug, &params()).unwrap_err();
    assert!(err.to_string().contains("client 1"), "{err}");
}

#[test]
fn homogeneous_weird_only_matches_greedy_bounds() {
    // Every client weird: facilities at distance 0 carry nearly all close mass.
    let mut p = params();
    p.k[5] = 1.302;
    let aug = {
        let inst = line_instance(&[0.0, 0.5, 3.0], &[0.0, 0.5]);
        let lp = handmade(&inst, vec![vec![0.9, 0.0], vec![0.0, 0.9], vec![0.1, 0.1]], vec![1.0, 1.0]);
        augment(&lp, &inst, 1.0).unwrap()
    };
    let net = all(&aug);
    assert!(net.iter().all(|&j| !classify_normal(j, &aug, &p)));
    let mut loose = p.clone();
    loose.delta = 10.0;
    let homo = cluster_homogeneous(&net, &aug, &loose).unwrap();
    let greedy = cluster_greedy(&net, &aug, &loose).unwrap();
    assert!(homo.trace.iter().all(|t| t.rule == Rule::MinCm));
    assert!(homo.is_partition_of(&net, 2) && greedy.is_partition_of(&net, 2));
    member_bound_holds(&homo, &aug);
    member_bound_holds(&greedy, &aug);
}

#[test]
fn ring_is_homogeneous_and_averages_hold() {
    let p = params();
    let mut checked = 0;
    for seed in 0..24u64 {
        let n = 3 + (seed % 8) as usize;
        let radius = 0.3 + 0.15 * (seed % 7) as f64;
        let cost = 0.02 + 0.03 * (seed % 5) as f64;
        let aug = ring_aug(n, radius, cost, p.gamma);
        let net = all(&aug);
        assert!(homogeneity_violation(&net, &aug, &p).is_none());
        let res = cluster_homogeneous(&net, &aug, &p).unwrap();
        assert!(res.is_partition_of(&net, n));
        let (cs, fs): (f64, f64) = (aug.cstar.iter().sum(), aug.fstar.iter().sum());
        if cs > p.k4() * fs {
            checked += 1;
            let aug = &aug;
            let total: f64 = res.clusters.iter().flat_map(|c| c.members.iter().map(move |&j| reroute_cost(c.center, j, aug).0)).sum();
            let bound: f64 = net.iter().map(|&j| target(j, aug, p.eps(3))).sum();
            assert!(total <= bound + 1e-9, "seed {seed}: {total} > {bound}");
        }
    }
    assert!(checked >= 20, "only {checked} connection-dominant rings");
}

#[test]
fn conn_requires_connection_dominance() {
    let inst = line_instance(&[0.0], &[0.0, 0.0]);
    let lp = handmade(&inst, vec![vec![1.0, 1.0]], vec![0.5, 0.5]);
    let aug = augment(&lp, &inst, 1.6774).unwrap();
    assert!(cluster_conn(&aug, &params()).unwrap_err().is_input_error());
}

#[test]
fn conn_single_interval_is_homogeneous() {
    let p = params();
    let aug = ring_aug(6, 0.5, 0.02, p.gamma);
    let conn = cluster_conn(&aug, &p).unwrap();
    // one block, paired with the empty slot below it
    let blocks = build_blocks(&aug, &p);
    assert_eq!(blocks.len(), 1);
    assert_eq!(cut_intervals(&blocks, &p).len(), 1);
    assert_eq!(conn, cluster_homogeneous(&all(&aug), &aug, &p).unwrap());
}

#[test]
fn conn_single_singleton_is_greedy() {
    let p = params();
    let aug = ring_aug(6, 0.5, 0.02, p.gamma);
    let blocks = build_blocks(&aug, &p);
    let iv = [Interval { lo: blocks[0].index, hi: blocks[0].index, reward: 0.0 }];
    let via = cluster_intervals(&aug, &p, &blocks, &iv);
    assert_eq!(via, cluster_greedy(&all(&aug), &aug, &p).unwrap());
}

#[test]
fn trace_tsv_lists_members_by_id() {
    let aug = seeded(2, 4, 5, Profile::UniformBox, 1.6774);
    let res = cluster_greedy(&all(&aug), &aug, &params()).unwrap();
    let tsv = res.trace_tsv(&aug);
    assert!(tsv.starts_with("cluster\tcenter\trule"));
    assert_eq!(tsv.lines().count(), res.clusters.len() + 1);
    assert!(tsv.lines().nth(1).unwrap().contains("\tgreedy\t-\t-\t"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn conn_partitions_when_dominant(seed in any::<u64>(), nf in 2usize..7, nc in 2usize..10, colinear in any::<bool>()) {
        let profile = if colinear { Profile::ColinearAdversarial } else { Profile::ClusteredBlobs };
        let mut spec = GenSpec::new(seed, 2, nf, nc, profile);
        spec.cost_range = (0.0, 0.05);
        let inst = generate_random(&spec).unwrap();
        let lp = solve_relaxation(&inst).unwrap();
        let aug = augment(&lp, &inst, 1.6774).unwrap();
        let p = params();
        match cluster_conn(&aug, &p) {
            Ok(res) => {
                prop_assert!(res.is_partition_of(&all(&aug), nc));
                prop_assert_eq!(res.clusters.len(), res.trace.len());
            }
            Err(e) => prop_assert!(e.is_input_error()),
        }
    }
}
