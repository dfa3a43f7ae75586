//! The UFL relaxation, its dual, and the per-client cost split.
//!
//! Primal: `min Σ d_ij x_ij + Σ f_i y_i`, `Σ_i x_ij = 1`, `x_ij ≤ y_i`, `x, y ≥ 0`.
//! Dual:   `max Σ v_j`, `v_j − w_ij ≤ d_ij`, `Σ_j w_ij ≤ f_i`, `w ≥ 0`.

use std::fmt::Write as _;

use crate::error::Result;
use crate::instance::Instance;
use crate::lp::simplex::{self, LinearProgram, Row, Sense};
use crate::scalar::Scalar;

/// Primal solution, dense `x[i][j]` (facility i, client j).
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution<T: Scalar = f64> {
    pub x: Vec<Vec<T>>,
    pub y: Vec<T>,
    pub objective: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution<T: Scalar = f64> {
    pub v: Vec<T>,
    pub w: Vec<Vec<T>>,
    pub objective: T,
}

/// `cstar[j] = Σ_i d_ij x_ij`, `fstar[j] = vstar[j] − cstar[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientDecomposition<T: Scalar = f64> {
    pub cstar: Vec<T>,
    pub fstar: Vec<T>,
    pub vstar: Vec<T>,
}

impl<T: Scalar> ClientDecomposition<T> {
    pub fn total_c(&self) -> T {
        self.cstar.iter().copied().sum()
    }

    pub fn total_f(&self) -> T {
        self.fstar.iter().copied().sum()
    }
}

#[derive(Debug, Clone)]
pub struct LpOutput<T: Scalar = f64> {
    pub primal: FractionalSolution<T>,
    pub dual: DualSolution<T>,
    pub decomposition: ClientDecomposition<T>,
    pub iterations: usize,
}

impl<T: Scalar> LpOutput<T> {
    /// Relative duality gap `|P − D| / max(1, P)`.
    pub fn duality_gap(&self) -> T {
        (self.primal.objective - self.dual.objective).abs() / self.primal.objective.max(T::one())
    }

    pub fn to_tsv(&self, inst: &Instance<T>) -> String {
        let fid = |i: usize| inst.facilities()[i].id;
        let cid = |j: usize| inst.clients()[j].id;
        let mut s = String::new();
        for (i, row) in self.primal.x.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v > T::zero() {
                    let _ = writeln!(s, "x\t{}\t{}\t{}", fid(i), cid(j), v);
                }
            }
        }
        for (i, v) in self.primal.y.iter().enumerate() {
            let _ = writeln!(s, "y\t{}\t{}", fid(i), v);
        }
        for (j, v) in self.dual.v.iter().enumerate() {
            let _ = writeln!(s, "v\t{}\t{}", cid(j), v);
        }
        for (i, row) in self.dual.w.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v > T::zero() {
                    let _ = writeln!(s, "w\t{}\t{}\t{}", fid(i), cid(j), v);
                }
            }
        }
        s
    }
}

pub fn solve_relaxation<T: Scalar>(inst: &Instance<T>) -> Result<LpOutput<T>> {
    let (nf, nc) = (inst.n_facilities(), inst.n_clients());
    let xv = |i: usize, j: usize| i * nc + j;
    let yv = |i: usize| nf * nc + i;
    let n_vars = nf * nc + nf;

    let mut objective = vec![T::zero(); n_vars];
    for i in 0..nf {
        for j in 0..nc {
            objective[xv(i, j)] = inst.dist(i, j);
        }
        objective[yv(i)] = inst.open_cost(i);
    }
    let mut rows = Vec::with_capacity(nc + nf * nc);
    for j in 0..nc {
        rows.push(Row { coeffs: (0..nf).map(|i| (xv(i, j), T::one())).collect(), sense: Sense::Eq, rhs: T::one() });
    }
    for i in 0..nf {
        for j in 0..nc {
            rows.push(Row { coeffs: vec![(xv(i, j), T::one()), (yv(i), -T::one())], sense: Sense::Le, rhs: T::zero() });
        }
    }
    let sol = simplex::solve(&LinearProgram { n_vars, objective, rows })?;

    let x: Vec<Vec<T>> = (0..nf).map(|i| (0..nc).map(|j| sol.x[xv(i, j)].min(T::one())).collect()).collect();
    let v: Vec<T> = sol.duals[..nc].to_vec();
    let w: Vec<Vec<T>> = (0..nf)
        .map(|i| (0..nc).map(|j| (-sol.duals[nc + i * nc + j]).max(T::zero())).collect())
        .collect();
    Ok(LpOutput::from_parts(inst, x, v, w, sol.iterations))
}

impl<T: Scalar> LpOutput<T> {
    /// Assembles objectives and the per-client split from raw primal/dual values.
    /// `y` is taken as `max_j x_ij`: without `y ≤ 1` rows a facility may carry slack.
    pub fn from_parts(inst: &Instance<T>, x: Vec<Vec<T>>, v: Vec<T>, w: Vec<Vec<T>>, iterations: usize) -> Self {
        let (nf, nc) = (inst.n_facilities(), inst.n_clients());
        let y: Vec<T> = x.iter().map(|row| row.iter().copied().fold(T::zero(), T::max)).collect();
        let primal_obj = (0..nf)
            .map(|i| inst.open_cost(i) * y[i] + (0..nc).map(|j| inst.dist(i, j) * x[i][j]).sum::<T>())
            .sum::<T>();
        let dual_obj = v.iter().copied().sum();
        let cstar: Vec<T> = (0..nc).map(|j| (0..nf).map(|i| inst.dist(i, j) * x[i][j]).sum()).collect();
        let fstar: Vec<T> = (0..nc).map(|j| (v[j] - cstar[j]).max(T::zero())).collect();
        let vstar = cstar.iter().zip(&fstar).map(|(c, f)| *c + *f).collect();
        LpOutput {
            primal: FractionalSolution { x, y, objective: primal_obj },
            dual: DualSolution { v, w, objective: dual_obj },
            decomposition: ClientDecomposition { cstar, fstar, vstar },
            iterations,
        }
    }
}

/// Bipartite support of `x` and the induced client-client neighbour relation.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportGraph {
    pub facility_clients: Vec<Vec<usize>>,
    pub client_facilities: Vec<Vec<usize>>,
    pub neighbors: Vec<Vec<usize>>,
}

pub fn support_graph<T: Scalar>(fs: &FractionalSolution<T>, threshold: T) -> SupportGraph {
    let nf = fs.x.len();
    let nc = fs.x.first().map_or(0, Vec::len);
    let mut facility_clients = vec![Vec::new(); nf];
    let mut client_facilities = vec![Vec::new(); nc];
    for i in 0..nf {
        for j in 0..nc {
            if fs.x[i][j] > threshold {
                facility_clients[i].push(j);
                client_facilities[j].push(i);
            }
        }
    }
    let mut neighbors = vec![Vec::new(); nc];
    for (j, nb) in neighbors.iter_mut().enumerate() {
        let mut mark = vec![false; nc];
        for &i in &client_facilities[j] {
            for &k in &facility_clients[i] {
                mark[k] = true;
            }
        }
        mark[j] = false;
        *nb = (0..nc).filter(|&k| mark[k]).collect();
    }
    SupportGraph { facility_clients, client_facilities, neighbors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::instance::{Client, Facility};

    fn line_instance(facs: &[(f64, f64)], clients: &[f64]) -> Instance {
        Instance::new(
            facs.iter()
                .enumerate()
                .map(|(k, &(pos, cost))| Facility { id: k as u64, location: Point::new(vec![pos]).unwrap(), open_cost: cost })
                .collect(),
            clients
                .iter()
                .enumerate()
                .map(|(k, &pos)| Client { id: k as u64, location: Point::new(vec![pos]).unwrap() })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_pair() {
        let out = solve_relaxation(&line_instance(&[(2.0, 5.0)], &[0.0])).unwrap();
        assert!((out.primal.objective - 7.0).abs() < 1e-9);
        assert!((out.primal.y[0] - 1.0).abs() < 1e-9);
        assert!((out.dual.v[0] - 7.0).abs() < 1e-9);
        assert!((out.decomposition.cstar[0] - 2.0).abs() < 1e-9);
        assert!((out.decomposition.fstar[0] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn colocated_free_facility() {
        let out = solve_relaxation(&line_instance(&[(0.0, 0.0)], &[0.0])).unwrap();
        assert_eq!(out.primal.objective, 0.0);
        assert_eq!(out.decomposition.cstar[0], 0.0);
        assert_eq!(out.decomposition.fstar[0], 0.0);
    }

    #[test]
    fn two_facility_case_matches_vertex_enumeration() {
        // Costs 3 and 0 at distances 1 and 4. Serving a fraction t from the
        // near facility costs t·(1 + 3) + (1 − t)·4, so both vertices cost 4.
        let inst = line_instance(&[(1.0, 3.0), (4.0, 0.0)], &[0.0]);
        let vertices = [0.0 * (1.0 + 3.0) + 1.0 * 4.0, 1.0 * (1.0 + 3.0) + 0.0 * 4.0];
        let want = vertices.iter().copied().fold(f64::INFINITY, f64::min);
        let out = solve_relaxation(&inst).unwrap();
        assert!((out.primal.objective - want).abs() < 1e-9);
        assert!(out.duality_gap() < 1e-9);
    }

    #[test]
    fn dual_feasibility_and_slackness() {
        let inst = line_instance(&[(0.0, 2.0), (3.0, 1.0), (7.0, 4.0)], &[0.5, 1.0, 2.5, 4.0, 6.5]);
        let out = solve_relaxation(&inst).unwrap();
        let tol = 1e-9;
        for i in 0..3 {
            let load: f64 = out.dual.w[i].iter().sum();
            assert!(load <= inst.open_cost(i) + tol);
            for j in 0..5 {
                assert!(out.dual.v[j] - out.dual.w[i][j] <= inst.dist(i, j) + tol);
                assert!(out.primal.x[i][j] <= out.primal.y[i] + tol);
                if out.primal.x[i][j] > 10.0 * tol {
                    assert!((out.dual.v[j] - out.dual.w[i][j] - inst.dist(i, j)).abs() <= 1e-6);
                }
            }
        }
        for j in 0..5 {
            let s: f64 = (0..3).map(|i| out.primal.x[i][j]).sum();
            assert!((s - 1.0).abs() < tol);
        }
        assert!(out.duality_gap() <= 1e-6);
        let fsum: f64 = (0..3).map(|i| inst.open_cost(i) * out.primal.y[i]).sum();
        assert!((out.decomposition.total_f() - fsum).abs() <= 1e-6 * fsum.max(1.0));
    }

    #[test]
    fn generic_over_f32() {
        let inst = Instance::<f32>::parse(&line_instance(&[(2.0, 5.0)], &[0.0]).to_text()).unwrap();
        let out = solve_relaxation(&inst).unwrap();
        assert!((out.primal.objective - 7.0).abs() < 1e-4);
    }

    #[test]
    fn support_graph_cases() {
        let single = FractionalSolution { x: vec![vec![1.0]], y: vec![1.0], objective: 0.0 };
        let g = support_graph(&single, 1e-9);
        assert_eq!(g.client_facilities, vec![vec![0]]);
        assert!(g.neighbors[0].is_empty());

        let shared = FractionalSolution { x: vec![vec![1.0, 1.0]], y: vec![1.0], objective: 0.0 };
        let g = support_graph(&shared, 1e-9);
        assert_eq!(g.neighbors, vec![vec![1], vec![0]]);
    }

    #[test]
    fn support_graph_matches_recomputation() {
        let inst = line_instance(&[(0.0, 1.0), (2.0, 1.0), (4.0, 1.0)], &[0.2, 1.9, 3.5]);
        let out = solve_relaxation(&inst).unwrap();
        let g = support_graph(&out.primal, 1e-9);
        for a in 0..3 {
            for b in 0..3 {
                let share = a != b && (0..3).any(|i| out.primal.x[i][a] > 1e-9 && out.primal.x[i][b] > 1e-9);
                assert_eq!(g.neighbors[a].contains(&b), share);
            }
        }
    }
}
