//! Zero-sum game between a γ distribution and a distance profile `h`.

use std::fmt::Write as _;

use rand::Rng;

use crate::augmentation::AugmentedSolution;
use crate::error::{Result, UflError};
use crate::params::MIX_KAPPA;

pub const MIX_GAMMA1: f64 = 1.479311;
pub const MIX_GAMMA2: f64 = 2.016569;
pub const MIX_THETA: f64 = 0.503357;

const JMS_F: f64 = 1.11;
const JMS_C: f64 = 1.7764;
const QUAD_TARGET: f64 = 1e-10;

/// Normalized distance profile on `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum CharacteristicFunction {
    /// `1/(1−q)` above `q`, zero below.
    Threshold(f64),
    /// `values[k]` on `(breaks[k−1], breaks[k]]`, with `breaks[−1] = 0` and
    /// the last break at 1.
    Step { breaks: Vec<f64>, values: Vec<f64> },
}

impl CharacteristicFunction {
    pub fn threshold(q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(UflError::input(format!("threshold q must lie in [0, 1), got {q}")));
        }
        Ok(CharacteristicFunction::Threshold(q))
    }

    /// Validates and rescales so the integral is 1.
    pub fn step(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() != values.len() {
            return Err(UflError::input("step function needs matching, nonempty breaks and values"));
        }
        let mut prev = 0.0;
        for &b in &breaks {
            if !(b > prev) {
                return Err(UflError::input("breaks must be strictly increasing in (0, 1]"));
            }
            prev = b;
        }
        if (prev - 1.0).abs() > 1e-9 {
            return Err(UflError::input("last break must be 1"));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) || values.windows(2).any(|w| w[1] < w[0]) {
            return Err(UflError::input("step values must be finite, nonnegative and nondecreasing"));
        }
        let mut h = CharacteristicFunction::Step { breaks, values };
        let total = h.integral();
        if !(total > 0.0) {
            return Err(UflError::input("step function has zero integral"));
        }
        if let CharacteristicFunction::Step { values, .. } = &mut h {
            values.iter_mut().for_each(|v| *v /= total);
        }
        Ok(h)
    }

    pub fn at(&self, p: f64) -> f64 {
        match self {
            CharacteristicFunction::Threshold(q) => {
                if p > *q {
                    1.0 / (1.0 - q)
                } else {
                    0.0
                }
            }
            CharacteristicFunction::Step { breaks, values } => {
                let k = breaks.partition_point(|&b| b < p).min(values.len() - 1);
                values[k]
            }
        }
    }

    pub fn integral(&self) -> f64 {
        match self {
            CharacteristicFunction::Threshold(_) => 1.0,
            CharacteristicFunction::Step { breaks, values } => {
                let mut lo = 0.0;
                let mut s = 0.0;
                for (b, v) in breaks.iter().zip(values) {
                    s += v * (b - lo);
                    lo = *b;
                }
                s
            }
        }
    }

    /// `∫₀¹ h(p)·γe^{−γp} dp` in closed form.
    pub fn exp_moment(&self, gamma: f64) -> f64 {
        match self {
            CharacteristicFunction::Threshold(q) => ((-q * gamma).exp() - (-gamma).exp()) / (1.0 - q),
            CharacteristicFunction::Step { breaks, values } => {
                let mut lo = 0.0;
                let mut s = 0.0;
                for (b, v) in breaks.iter().zip(values) {
                    s += v * ((-gamma * lo).exp() - (-gamma * b).exp());
                    lo = *b;
                }
                s
            }
        }
    }
}

/// Aggregate profile of an augmented solution: each client's copies in
/// `C_j ∪ D_j` by distance, indexed by cumulative y* share, summed and normalized.
pub fn h_empirical(aug: &AugmentedSolution) -> Result<CharacteristicFunction> {
    let mut pieces: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut cuts = vec![1.0];
    for j in 0..aug.n_clients() {
        let mut own: Vec<usize> = aug.close[j].iter().chain(&aug.distant[j]).copied().collect();
        own.sort_by(|&a, &b| aug.dist(a, j).total_cmp(&aug.dist(b, j)).then(a.cmp(&b)));
        let total: f64 = own.iter().map(|&c| aug.copies[c].ystar_share).sum();
        let mut acc = 0.0;
        let mut steps = Vec::new();
        for &c in &own {
            acc += aug.copies[c].ystar_share / total;
            let p = acc.min(1.0);
            steps.push((p, aug.dist(c, j)));
            cuts.push(p);
        }
        if let Some(last) = steps.last_mut() {
            last.0 = 1.0;
        }
        pieces.push(steps);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    cuts.retain(|&p| p > 0.0);
    if let Some(last) = cuts.last_mut() {
        *last = 1.0;
    }
    let values: Vec<f64> = cuts
        .iter()
        .map(|&b| {
            pieces
                .iter()
                .map(|steps| {
                    let k = steps.partition_point(|&(p, _)| p < b - 1e-15).min(steps.len().saturating_sub(1));
                    steps.get(k).map_or(0.0, |s| s.1)
                })
                .sum()
        })
        .collect();
    CharacteristicFunction::step(cuts, values)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(UflError::input(format!("gamma must be at least 1, got {gamma}")));
    }
    Ok(())
}

fn alpha_raw(gamma: f64, h: &CharacteristicFunction, discount: f64) -> f64 {
    let e = (-gamma).exp();
    h.exp_moment(gamma) + e * (gamma * (1.0 - discount) + (3.0 - gamma) * h.at(1.0 / gamma))
}

fn discount(gamma: f64, eps7: f64) -> f64 {
    if gamma > 1.6 && gamma < 2.0 {
        eps7
    } else {
        0.0
    }
}

pub fn alpha_of(gamma: f64, h: &CharacteristicFunction) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(alpha_raw(gamma, h, 0.0))
}

pub fn alpha_prime_of(gamma: f64, h: &CharacteristicFunction, eps7: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(alpha_raw(gamma, h, discount(gamma, eps7)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaDistribution {
    pub kappa: f64,
    pub atoms: Vec<(f64, f64)>,
    /// `(lo, hi, mass)` spread uniformly.
    pub uniform: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaDraw {
    Jms,
    Gamma(f64),
}

impl GammaDistribution {
    pub fn new(kappa: f64, atoms: Vec<(f64, f64)>, uniform: Vec<(f64, f64, f64)>) -> Result<Self> {
        let d = GammaDistribution { kappa, atoms, uniform };
        let masses = d.atoms.iter().map(|a| a.1).chain(d.uniform.iter().map(|u| u.2));
        if !(0.0..1.0).contains(&d.kappa) || masses.clone().any(|m| m < 0.0) {
            return Err(UflError::input("masses must be nonnegative and kappa in [0, 1)"));
        }
        if d.atoms.iter().any(|a| a.0 < 1.0) || d.uniform.iter().any(|u| !(u.0 >= 1.0 && u.1 > u.0)) {
            return Err(UflError::input("gamma support must lie in [1, ∞)"));
        }
        let total = d.kappa + masses.sum::<f64>();
        if (total - 1.0).abs() > 1e-12 {
            return Err(UflError::input(format!("total mass is {total}, not 1")));
        }
        Ok(d)
    }

    /// Pure JMS.
    pub fn jms_only() -> Self {
        GammaDistribution { kappa: 1.0, atoms: Vec::new(), uniform: Vec::new() }
    }

    pub fn point(gamma: f64) -> Result<Self> {
        Self::new(0.0, vec![(gamma, 1.0)], Vec::new())
    }

    /// The published mixed strategy with JMS weight `kappa`.
    pub fn mixed(kappa: f64) -> Result<Self> {
        Self::new(kappa, vec![(MIX_GAMMA1, MIX_THETA)], vec![(MIX_GAMMA1, MIX_GAMMA2, 1.0 - kappa - MIX_THETA)])
    }

    pub fn mu1() -> Self {
        Self::mixed(MIX_KAPPA).expect("published constants are valid")
    }

    /// `(1−ε₇)·μ₁ + ε₇(1−κ₂)·δ₁`, with JMS weight κ₂.
    pub fn mu2(eps7: f64, kappa2: f64) -> Result<Self> {
        let base = Self::mixed(kappa2)?;
        let mut atoms: Vec<(f64, f64)> = base.atoms.iter().map(|&(g, m)| (g, (1.0 - eps7) * m)).collect();
        atoms.push((1.0, eps7 * (1.0 - kappa2)));
        let uniform = base.uniform.iter().map(|&(a, b, m)| (a, b, (1.0 - eps7) * m)).collect();
        Self::new(kappa2, atoms, uniform)
    }

    /// `∫ f dμ` over the γ part (JMS weight excluded).
    fn expect(&self, f: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
        let mut s: f64 = self.atoms.iter().map(|&(g, m)| m * f(g)).sum();
        for &(lo, hi, m) in &self.uniform {
            if m == 0.0 {
                continue;
            }
            let mut pts = vec![lo];
            pts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
            pts.push(hi);
            pts.sort_by(f64::total_cmp);
            let integral: f64 = pts.windows(2).map(|w| quadrature::integrate(&f, w[0], w[1], QUAD_TARGET).integral).sum();
            s += m / (hi - lo) * integral;
        }
        s
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GammaDraw {
        let mut u: f64 = rng.gen();
        if u < self.kappa {
            return GammaDraw::Jms;
        }
        u -= self.kappa;
        for &(g, m) in &self.atoms {
            if u < m {
                return GammaDraw::Gamma(g);
            }
            u -= m;
        }
        for &(lo, hi, m) in &self.uniform {
            if u < m {
                return GammaDraw::Gamma(lo + (hi - lo) * u / m);
            }
            u -= m;
        }
        // rounding slack lands on the last piece
        match (self.uniform.last(), self.atoms.last()) {
            (Some(&(_, hi, _)), _) => GammaDraw::Gamma(hi),
            (None, Some(&(g, _))) => GammaDraw::Gamma(g),
            _ => GammaDraw::Jms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Nu,
    NuPrime,
}

impl std::str::FromStr for Variant {
    type Err = UflError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nu" => Ok(Variant::Nu),
            "nu_prime" => Ok(Variant::NuPrime),
            other => Err(UflError::input(format!("unknown game variant `{other}`"))),
        }
    }
}

/// `(facility branch, connection branch)`; the game value is their max.
pub fn game_branches(dist: &GammaDistribution, h: &CharacteristicFunction, variant: Variant, eps7: f64) -> (f64, f64) {
    let e7 = if variant == Variant::NuPrime { eps7 } else { 0.0 };
    let mut breaks = vec![1.6, 2.0];
    if let CharacteristicFunction::Threshold(q) = h {
        if *q > 0.0 {
            breaks.push(1.0 / q);
        }
    }
    if let CharacteristicFunction::Step { breaks: b, .. } = h {
        breaks.extend(b.iter().map(|p| 1.0 / p));
    }
    let fac = dist.expect(|g| g, &[]) + JMS_F * dist.kappa;
    let conn = dist.expect(|g| alpha_raw(g, h, discount(g, e7)), &breaks) + JMS_C * dist.kappa;
    (fac, conn)
}

pub fn game_value(dist: &GammaDistribution, h: &CharacteristicFunction, variant: Variant, eps7: f64) -> f64 {
    let (a, b) = game_branches(dist, h, variant, eps7);
    a.max(b)
}

fn value_at_q(dist: &GammaDistribution, variant: Variant, eps7: f64, q: f64) -> f64 {
    game_value(dist, &CharacteristicFunction::Threshold(q), variant, eps7)
}

/// Adversarial threshold: grid over `[0, 1)` then golden-section refinement
/// around the best grid point down to a bracket of 1e-6.
pub fn worst_case_ratio(dist: &GammaDistribution, variant: Variant, eps7: f64, step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0 && step <= 1e-3) {
        return Err(UflError::input(format!("q grid step must lie in (0, 1e-3], got {step}")));
    }
    let q_max = 1.0 - 1e-9;
    let n = (1.0 / step).ceil() as usize;
    let (mut best_v, mut best_q) = (f64::NEG_INFINITY, 0.0);
    for k in 0..n {
        let q = (k as f64 * step).min(q_max);
        let v = value_at_q(dist, variant, eps7, q);
        if v > best_v {
            best_v = v;
            best_q = q;
        }
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((best_q - step).max(0.0), (best_q + step).min(q_max));
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (value_at_q(dist, variant, eps7, x1), value_at_q(dist, variant, eps7, x2));
    while b - a > 1e-6 {
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f > best_v {
                best_v = f;
                best_q = x;
            }
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = value_at_q(dist, variant, eps7, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = value_at_q(dist, variant, eps7, x2);
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f > best_v {
            best_v = f;
            best_q = x;
        }
    }
    Ok((best_v, best_q))
}

/// `q`, `ν(q)` rows over the grid.
pub fn game_table(dist: &GammaDistribution, variant: Variant, eps7: f64, step: f64) -> Result<String> {
    if !(step > 0.0 && step < 1.0) {
        return Err(UflError::input("q step must lie in (0, 1)"));
    }
    let mut s = String::from("q\tnu\n");
    let mut k = 0usize;
    loop {
        let q = k as f64 * step;
        if q >= 1.0 {
            return Ok(s);
        }
        let _ = writeln!(s, "{q}\t{}", value_at_q(dist, variant, eps7, q));
        k += 1;
    }
}
