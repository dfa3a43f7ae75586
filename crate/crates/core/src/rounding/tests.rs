use proptest::prelude::*;

use super::*;
use crate::clustering::Cluster;
use crate::generators::{generate_random, GenSpec, Profile};
use crate::geometry::Point;
use crate::instance::{Client, Facility};

fn all(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn seeded_inst(seed: u64, nf: usize, nc: usize, profile: Profile, cost_hi: f64) -> Instance {
    let mut spec = GenSpec::new(seed, 2, nf, nc, profile);
    spec.cost_range = (0.0, cost_hi);
    generate_random(&spec).unwrap()
}

fn greedy_setup(inst: &Instance, gamma: f64) -> (AugmentedSolution, ClusteringResult) {
    let lp = solve_relaxation(inst).unwrap();
    let aug = augment(&lp, inst, gamma).unwrap();
    let cl = cluster_greedy(&all(inst.n_clients()), &aug, &ParamSet::inflated()).unwrap();
    (aug, cl)
}

#[test]
fn single_pair_always_opens() {
    let inst = Instance::new(
        vec![Facility { id: 4, location: Point::new(vec![0.0, 0.0]).unwrap(), open_cost: 2.5 }],
        vec![Client { id: 0, location: Point::new(vec![3.0, 4.0]).unwrap() }],
    )
    .unwrap();
    let (aug, cl) = greedy_setup(&inst, 1.6774);
    for seed in 0..20 {
        let sol = round_once(&aug, &cl, seed).unwrap();
        assert_eq!(sol.open_parents, vec![0]);
        assert_eq!(sol.total_cost, 7.5);
    }
    assert_eq!(round_once(&aug, &cl, 0).unwrap().to_tsv(&inst), "open\t4\nassign\t0\t4\ncost\t2.5\t5\t7.5\n");
}

#[test]
fn one_lottery_winner_per_cluster() {
    let inst = seeded_inst(4, 6, 9, Profile::ClusteredBlobs, 0.3);
    let (aug, cl) = greedy_setup(&inst, 1.6774);
    let owned = center_copies(&aug, &cl).unwrap();
    for t in 0..200 {
        let sol = round_trial(&aug, &cl, &owned, 1, t);
        for c in &cl.clusters {
            let won = aug.close[c.center].iter().filter(|k| sol.open_copies.contains(k)).count();
            assert_eq!(won, 1);
        }
    }
}

#[test]
fn rejects_bad_clusterings() {
    let inst = seeded_inst(4, 4, 5, Profile::UniformBox, 0.3);
    let (aug, cl) = greedy_setup(&inst, 1.6774);
    let mut missing = cl.clone();
    let c0 = missing.clusters[0].center;
    missing.clusters[0].members.retain(|&m| m == c0);
    if missing != cl {
        assert!(round_once(&aug, &missing, 0).unwrap_err().is_input_error());
    }
    let twice = ClusteringResult {
        clusters: vec![Cluster { center: 0, members: all(5) }, Cluster { center: 1, members: vec![1] }],
        trace: Vec::new(),
    };
    assert!(round_once(&aug, &twice, 0).unwrap_err().is_input_error());
}

#[test]
fn fixed_seed_golden() {
    let text = include_str!("../../tests/golden/uniform_box_seed1.ufl");
    let inst = Instance::parse(text).unwrap();
    let (aug, cl) = greedy_setup(&inst, 1.6774);
    let a = round_once(&aug, &cl, 7).unwrap().to_tsv(&inst);
    assert_eq!(a, round_once(&aug, &cl, 7).unwrap().to_tsv(&inst));
    assert_eq!(a, include_str!("../../tests/golden/round_seed7.tsv"));
}

#[test]
fn shared_facility_always_covered() {
    // one facility, every client clusters under one center whose lottery
    // has a single unit copy
    let inst = Instance::new(
        vec![Facility { id: 0, location: Point::new(vec![0.0]).unwrap(), open_cost: 1.0 }],
        (0..4).map(|k| Client { id: k, location: Point::new(vec![k as f64 + 1.0]).unwrap() }).collect(),
    )
    .unwrap();
    let (aug, cl) = greedy_setup(&inst, 1.6774);
    let d = estimate(&aug, &cl, 500, 3).unwrap();
    assert!(d.p_close.iter().all(|&p| p == 1.0));
    assert_eq!(d.std_error, 0.0);
}

#[test]
fn opening_probabilities() {
    let g = 1.6774;
    let trials = 10_000;
    for seed in 0..6 {
        let inst = seeded_inst(seed, 7, 10, Profile::ClusteredBlobs, 0.2);
        let (aug, cl) = greedy_setup(&inst, g);
        let d = estimate(&aug, &cl, trials, 11).unwrap();
        for j in 0..inst.n_clients() {
            let sum = d.p_close[j] + d.p_distant[j] + d.p_far[j];
            assert!((sum - 1.0).abs() < 1e-12);
            let pc = d.p_close[j];
            let pcd = pc + d.p_distant[j];
            let lo_c = 1.0 - (-1.0f64).exp();
            let lo_cd = 1.0 - (-g).exp();
            assert!(pc >= lo_c - 3.0 * d.sigma(lo_c), "seed {seed} client {j}: {pc}");
            assert!(pcd >= lo_cd - 3.0 * d.sigma(lo_cd), "seed {seed} client {j}: {pcd}");
        }
    }
}

#[test]
fn estimate_is_order_independent() {
    let inst = seeded_inst(8, 5, 7, Profile::UniformBox, 0.3);
    let (aug, cl) = greedy_setup(&inst, 1.6774);
    let a = estimate(&aug, &cl, 300, 5).unwrap();
    let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| estimate(&aug, &cl, 300, 5).unwrap());
    assert_eq!(a, b);
    assert!(estimate(&aug, &cl, 0, 5).is_err());
}

#[test]
fn facility_dominant_takes_jms() {
    // expensive facilities, clients sitting on them
    let inst = Instance::new(
        (0..3).map(|k| Facility { id: k, location: Point::new(vec![k as f64 * 10.0]).unwrap(), open_cost: 5.0 }).collect(),
        (0..3).map(|k| Client { id: k, location: Point::new(vec![k as f64 * 10.0 + 0.1]).unwrap() }).collect(),
    )
    .unwrap();
    let run = run_bifactor(&inst, &ParamSet::published(), 1.6774, 10, 0).unwrap();
    assert_eq!(run.branch, Branch::Jms);
    assert!(run.diagnostics.is_none());
    assert_eq!(run.best, jms_solve(&inst));
}

#[test]
fn connection_dominant_meets_envelope() {
    let g = 1.6774;
    let p = ParamSet::published();
    let mut conn_runs = 0;
    for seed in 0..8 {
        let inst = seeded_inst(seed, 6, 10, Profile::ClusteredBlobs, 0.05);
        let run = run_bifactor(&inst, &p, g, 2000, seed).unwrap();
        let (cs, fs) = (run.lp.decomposition.total_c(), run.lp.decomposition.total_f());
        let bound = g * fs + (1.0 + 2.0 * (-g).exp()) * cs;
        if let Some(d) = &run.diagnostics {
            conn_runs += 1;
            assert_eq!(run.branch, Branch::Conn);
            assert!(d.mean_cost <= bound + 3.0 * d.std_error, "seed {seed}: {} > {bound}", d.mean_cost);
            assert!(run.best.total_cost <= d.mean_cost * (1.0 + 1e-12));
        }
    }
    assert!(conn_runs >= 4);
}

#[test]
fn unifactor_paths() {
    assert_eq!(unifactor_path(crate::game::MIX_GAMMA1), UnifactorPath::Greedy);
    assert_eq!(unifactor_path(1.0), UnifactorPath::Greedy);
    assert_eq!(unifactor_path(1.8), UnifactorPath::Conn);
    let inst = seeded_inst(2, 6, 10, Profile::ClusteredBlobs, 0.05);
    let (sol, rep) = run_unifactor(&inst, &ParamSet::published(), 60, 4).unwrap();
    assert_eq!(rep.trials.len(), 60);
    for t in &rep.trials {
        match t.gamma {
            Some(g) => assert_eq!(t.path, unifactor_path(g)),
            None => assert_eq!(t.path, UnifactorPath::Jms),
        }
        assert!(t.cost >= rep.lp_objective - 1e-9);
    }
    assert!(rep.trials.iter().any(|t| t.path == UnifactorPath::Conn));
    assert!(sol.total_cost <= rep.mean_cost * (1.0 + 1e-12));
}

#[test]
fn closest_open_cases() {
    let inst = seeded_inst(13, 5, 6, Profile::UniformBox, 0.3);
    let (aug, cl) = greedy_setup(&inst, 1.6774);
    // singleton: conditional mean is the distance itself
    let k = aug.close[0][0];
    assert!(closest_open_bound_check(&aug, &[k], 0, 2000, 1, None).unwrap());

    // two equidistant copies
    let inst2 = Instance::new(
        vec![
            Facility { id: 0, location: Point::new(vec![-1.0]).unwrap(), open_cost: 1.0 },
            Facility { id: 1, location: Point::new(vec![1.0]).unwrap(), open_cost: 1.0 },
        ],
        vec![Client { id: 0, location: Point::new(vec![0.0]).unwrap() }],
    )
    .unwrap();
    let lp = LpOutput::from_parts(&inst2, vec![vec![0.5], vec![0.5]], vec![2.0], vec![vec![0.0]; 2], 0);
    let aug2 = augment(&lp, &inst2, 1.6774).unwrap();
    let both: Vec<usize> = (0..aug2.copies.len()).collect();
    assert!(closest_open_bound_check(&aug2, &both, 0, 5000, 2, None).unwrap());

    // five copies from a seeded instance under the rounding's own law
    let mut set: Vec<usize> = aug.close[1].iter().chain(&aug.distant[1]).copied().collect();
    set.truncate(5);
    assert!(closest_open_bound_check(&aug, &set, 1, 100_000, 3, Some(&cl)).unwrap());
    assert!(closest_open_bound_check(&aug, &set, 1, 100_000, 3, None).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn assignments_are_nearest(seed in any::<u64>(), nf in 1usize..6, nc in 1usize..8, trial_seed in any::<u64>()) {
        let inst = seeded_inst(seed, nf, nc, Profile::UniformBox, 0.5);
        let (aug, cl) = greedy_setup(&inst, 1.6774);
        let sol = round_once(&aug, &cl, trial_seed).unwrap();
        prop_assert!(!sol.open_parents.is_empty());
        for j in 0..nc {
            let d = inst.dist(sol.assignment[j], j);
            prop_assert!(sol.open_parents.iter().all(|&i| inst.dist(i, j) >= d));
        }
        let fc: f64 = sol.open_parents.iter().map(|&i| inst.open_cost(i)).sum();
        prop_assert!((sol.facility_cost - fc).abs() < 1e-12);
        prop_assert!((sol.total_cost - sol.facility_cost - sol.connection_cost).abs() < 1e-12);
    }
}
