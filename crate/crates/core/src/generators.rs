//! Seeded random instances and the graph-based hardness construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal as NormalDist};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, UflError};
use crate::geometry::Point;
use crate::instance::{Client, Facility, Instance};
use crate::lp::LpOutput;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    UniformBox,
    ClusteredBlobs,
    ColinearAdversarial,
}

impl std::str::FromStr for Profile {
    type Err = UflError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_box" => Ok(Profile::UniformBox),
            "clustered_blobs" => Ok(Profile::ClusteredBlobs),
            "colinear_adversarial" => Ok(Profile::ColinearAdversarial),
            other => Err(UflError::input(format!("unknown profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub seed: u64,
    pub dim: usize,
    pub n_facilities: usize,
    pub n_clients: usize,
    pub cost_range: (f64, f64),
    pub coordinate_scale: f64,
    pub profile: Profile,
}

impl GenSpec {
    pub fn new(seed: u64, dim: usize, n_facilities: usize, n_clients: usize, profile: Profile) -> Self {
        GenSpec { seed, dim, n_facilities, n_clients, cost_range: (0.0, 1.0), coordinate_scale: 1.0, profile }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.cost_range;
        if self.dim == 0 || self.n_facilities == 0 || self.n_clients == 0 {
            return Err(UflError::input("dim, facility count and client count must be positive"));
        }
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return Err(UflError::input("cost range must satisfy 0 ≤ lo ≤ hi"));
        }
        if !(self.coordinate_scale > 0.0 && self.coordinate_scale.is_finite()) {
            return Err(UflError::input("coordinate scale must be positive"));
        }
        Ok(())
    }
}

pub fn generate_random(spec: &GenSpec) -> Result<Instance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let s = spec.coordinate_scale;
    let d = spec.dim;
    let (lo, hi) = spec.cost_range;
    let cost = |rng: &mut ChaCha8Rng| if hi > lo { rng.gen_range(lo..hi) } else { lo };

    let (fac_pts, cli_pts): (Vec<Vec<f64>>, Vec<Vec<f64>>) = match spec.profile {
        Profile::UniformBox => {
            let draw = |rng: &mut ChaCha8Rng| (0..d).map(|_| rng.gen_range(0.0..s)).collect::<Vec<_>>();
            let f = (0..spec.n_facilities).map(|_| draw(&mut rng)).collect();
            let c = (0..spec.n_clients).map(|_| draw(&mut rng)).collect();
            (f, c)
        }
        Profile::ClusteredBlobs => {
            let n_blobs = ((spec.n_facilities + spec.n_clients) as f64).sqrt().ceil().max(2.0) as usize / 2;
            let centers: Vec<Vec<f64>> =
                (0..n_blobs.max(1)).map(|_| (0..d).map(|_| rng.gen_range(0.0..s)).collect()).collect();
            let noise = NormalDist::new(0.0, s / 10.0).expect("positive sigma");
            let draw = |rng: &mut ChaCha8Rng| {
                let c = &centers[rng.gen_range(0..centers.len())];
                c.iter().map(|x| x + noise.sample(rng)).collect::<Vec<_>>()
            };
            let f = (0..spec.n_facilities).map(|_| draw(&mut rng)).collect();
            let c = (0..spec.n_clients).map(|_| draw(&mut rng)).collect();
            (f, c)
        }
        Profile::ColinearAdversarial => colinear(spec, &mut rng),
    };

    let facilities = fac_pts
        .into_iter()
        .enumerate()
        .map(|(k, p)| Ok(Facility { id: k as u64, location: Point::new(p)?, open_cost: cost(&mut rng) }))
        .collect::<Result<Vec<_>>>()?;
    let clients = cli_pts
        .into_iter()
        .enumerate()
        .map(|(k, p)| Ok(Client { id: k as u64, location: Point::new(p)? }))
        .collect::<Result<Vec<_>>>()?;
    Instance::new(facilities, clients)
}

/// A hub client at the origin, most facilities packed in a narrow cone around
/// `−s·e₁`, and the remaining clients packed around `+2s·e₁` with a few
/// facilities of their own. Reroutes through the hub are then close to the
/// three-hop worst case.
fn colinear(spec: &GenSpec, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let s = spec.coordinate_scale;
    let d = spec.dim;
    let jitter = NormalDist::new(0.0, s / 50.0).expect("positive sigma");
    let around = |rng: &mut ChaCha8Rng, axis: f64| {
        let mut p: Vec<f64> = (0..d).map(|_| jitter.sample(rng)).collect();
        p[0] += axis;
        p
    };
    let n_far = (spec.n_facilities / 3).max(usize::from(spec.n_facilities > 1));
    let n_hub = spec.n_facilities - n_far;
    let mut f: Vec<Vec<f64>> = (0..n_hub).map(|_| around(rng, -s)).collect();
    f.extend((0..n_far).map(|_| around(rng, 2.5 * s)));
    let mut c = vec![vec![0.0; d]];
    c.extend((1..spec.n_clients).map(|_| around(rng, 2.0 * s)));
    (f, c)
}

/// `n` clients on the unit circle and `n` facilities of equal cost on a circle
/// of radius `facility_radius`, offset by half a step. Rotating by one step maps
/// client k to k+1 and facility k to k+1. Extra dimensions are zero.
pub fn ring(n: usize, facility_radius: f64, open_cost: f64, dim: usize) -> Result<Instance> {
    if n == 0 || dim < 2 {
        return Err(UflError::input("ring needs n ≥ 1 and dim ≥ 2"));
    }
    let at = |radius: f64, angle: f64| {
        let mut p = vec![0.0; dim];
        p[0] = radius * angle.cos();
        p[1] = radius * angle.sin();
        Point::new(p)
    };
    let step = std::f64::consts::TAU / n as f64;
    let facilities = (0..n)
        .map(|k| Ok(Facility { id: k as u64, location: at(facility_radius, (k as f64 + 0.5) * step)?, open_cost }))
        .collect::<Result<Vec<_>>>()?;
    let clients = (0..n).map(|k| Ok(Client { id: k as u64, location: at(1.0, k as f64 * step)? })).collect::<Result<Vec<_>>>()?;
    Instance::new(facilities, clients)
}

/// Average of an optimal LP solution over the rotations of a [`ring`]
/// instance. The result is optimal and identical for every client.
pub fn cyclic_average(lp: &LpOutput, inst: &Instance) -> Result<LpOutput> {
    let n = inst.n_clients();
    if inst.n_facilities() != n {
        return Err(UflError::input("cyclic averaging needs as many facilities as clients"));
    }
    let avg = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| m[(i + k) % n][(j + k) % n]).sum::<f64>() / n as f64).collect())
            .collect()
    };
    let vbar = lp.dual.v.iter().sum::<f64>() / n as f64;
    Ok(LpOutput::from_parts(inst, avg(&lp.primal.x), vec![vbar; n], avg(&lp.dual.w), lp.iterations))
}

/// Undirected simple graph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInput {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphInput {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(UflError::input("graph needs at least one vertex"));
        }
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &edges {
            if u == v {
                return Err(UflError::input(format!("self-loop at vertex {u}")));
            }
            if u == 0 || v == 0 || u > n_vertices || v > n_vertices {
                return Err(UflError::input(format!("edge ({u}, {v}) outside 1..={n_vertices}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(UflError::input(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(GraphInput { n_vertices, edges })
    }

    /// First line `n m`, then `m` lines `u v` (1-based).
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim().starts_with('#'));
        let pair = |(ln, l): (usize, &str)| -> Result<(usize, usize)> {
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| UflError::Parse { line: ln + 1, msg: format!("bad integer `{t}`") }))
                .collect::<Result<_>>()?;
            match v[..] {
                [a, b] => Ok((a, b)),
                _ => Err(UflError::Parse { line: ln + 1, msg: "expected two integers".into() }),
            }
        };
        let (n, m) = pair(lines.next().ok_or(UflError::Parse { line: 1, msg: "empty graph file".into() })?)?;
        let edges = lines.map(pair).collect::<Result<Vec<_>>>()?;
        if edges.len() != m {
            return Err(UflError::input(format!("header announces {m} edges, found {}", edges.len())));
        }
        GraphInput::new(n, edges)
    }

    pub fn complete(n: usize) -> Self {
        let edges = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect();
        GraphInput { n_vertices: n, edges }
    }

    pub fn path(n: usize) -> Self {
        GraphInput { n_vertices: n, edges: (1..n).map(|u| (u, u + 1)).collect() }
    }
}

/// `Pr[X ≤ t ∧ Y ≤ t]` for standard normals with correlation ρ and `t = Φ⁻¹(μ)`.
///
/// Uses the one-dimensional form
/// `Φ(t)² + (1/2π) ∫₀^{asin ρ} exp(−t²/(1 + sin φ)) dφ`.
pub fn gamma_corr(rho: f64, mu: f64) -> f64 {
    assert!((-1.0..=1.0).contains(&rho) && (0.0..=1.0).contains(&mu), "gamma_corr inputs out of range");
    if mu == 0.0 {
        return 0.0;
    }
    if mu == 1.0 {
        return 1.0;
    }
    if rho == 1.0 {
        return mu;
    }
    if rho == -1.0 {
        return (2.0 * mu - 1.0).max(0.0);
    }
    let n = Normal::standard();
    let t = n.inverse_cdf(mu);
    let base = mu * mu;
    if rho == 0.0 {
        return base;
    }
    let upper = rho.asin();
    let r = quadrature::integrate(|phi: f64| (-t * t / (1.0 + phi.sin())).exp(), 0.0, upper, 1e-13);
    (base + r.integral / (2.0 * std::f64::consts::PI)).clamp(0.0, 1.0)
}

/// `dΓ_ρ(μ)/dμ` by central difference with step `h`.
pub fn gamma_corr_derivative(rho: f64, mu: f64, h: f64) -> f64 {
    (gamma_corr(rho, mu + h) - gamma_corr(rho, mu - h)) / (2.0 * h)
}

#[derive(Debug, Clone)]
pub struct HardnessInstance {
    pub instance: Instance,
    pub lambda: f64,
    /// Cost of opening a vertex cover of size `(1−q)n`: `λ(1−q)n + m`.
    pub completeness_cost: f64,
}

/// Facility per vertex at `e_v` with cost λ, client per edge `{u,v}` at `e_u + e_v`.
pub fn generate_hardness(graph: &GraphInput, q: f64, lambda_override: Option<f64>) -> Result<HardnessInstance> {
    if graph.edges.is_empty() {
        return Err(UflError::input("hardness construction needs at least one edge"));
    }
    if !(q > 0.0 && q < 0.5) {
        return Err(UflError::input("q must lie in (0, 1/2)"));
    }
    let n = graph.n_vertices;
    let m = graph.edges.len();
    let lambda = match lambda_override {
        Some(l) if l >= 0.0 && l.is_finite() => l,
        Some(_) => return Err(UflError::input("lambda override must be nonnegative")),
        None => {
            let rho = -q / (1.0 - q);
            (m as f64 / n as f64) * (3f64.sqrt() - 1.0) * gamma_corr_derivative(rho, q, 1e-5)
        }
    };
    let unit = |v: usize| {
        let mut c = vec![0.0; n];
        c[v - 1] = 1.0;
        c
    };
    let facilities = (1..=n)
        .map(|v| Ok(Facility { id: v as u64, location: Point::new(unit(v))?, open_cost: lambda }))
        .collect::<Result<Vec<_>>>()?;
    let clients = graph
        .edges
        .iter()
        .enumerate()
        .map(|(k, &(u, v))| {
            let mut c = unit(u);
            c[v - 1] = 1.0;
            Ok(Client { id: k as u64, location: Point::new(c)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HardnessInstance {
        instance: Instance::new(facilities, clients)?,
        lambda,
        completeness_cost: lambda * (1.0 - q) * n as f64 + m as f64,
    })
}
