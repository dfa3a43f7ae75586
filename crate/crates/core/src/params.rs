//! Algorithm constants and the derived quantities computed from them.

use crate::error::{Result, UflError};

/// All tunable constants used by the clustering pipeline and its checkers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    /// Connection-dominance ratios, strictly decreasing.
    pub k: [f64; 6],
    /// Scaling factor used by the bifactor driver.
    pub gamma: f64,
    /// Range of γ where the geometric lemmas apply.
    pub analysis_range: (f64, f64),
    /// Range of γ the unifactor driver may sample from.
    pub sampling_range: (f64, f64),
    pub alpha: f64,
    pub m_cap: u64,
    pub r_cone: f64,
    pub l_interval: u64,
    pub phi_r: f64,
    pub eps: [f64; 8],
    pub delta: f64,
    pub delta_prime: f64,
    pub lp_tol: f64,
    pub cmp_tol: f64,
    pub gamma0: f64,
    /// Probability of the JMS branch in the unifactor driver.
    pub kappa2: f64,
}

/// Weight of JMS in the published γ distribution.
pub const MIX_KAPPA: f64 = 0.195583;

impl ParamSet {
    /// The published constants.
    pub fn published() -> Self {
        let r_cone = 1e-8;
        let eps = [1e-12, 5e-18, 3e-32, 2e-36, 2e-41, 3e-42, 2e-42, 2e-45];
        ParamSet {
            k: [1.3025, 1.3024, 1.3023, 1.3022, 1.3021, 1.302],
            gamma: 1.6774,
            analysis_range: (1.6, 2.0),
            sampling_range: (1.0, 2.016569),
            alpha: 5e-4,
            m_cap: 5_000_000,
            r_cone,
            l_interval: 200_000_000,
            phi_r: phi_r(r_cone).expect("r in range"),
            eps,
            delta: 3e-23,
            delta_prime: 7e-32,
            lp_tol: 1e-9,
            cmp_tol: 1e-12,
            gamma0: gamma0(eps[4]),
            kappa2: MIX_KAPPA,
        }
    }

    /// Same structure with ε, δ, δ' raised to ~1e-3 so their effect is
    /// visible in double precision. Keeps `(1+δ')^(2L) ≤ 1+δ`.
    pub fn inflated() -> Self {
        let eps = [4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4, 1e-4, 1e-4, 1e-7];
        ParamSet {
            eps,
            delta: 1e-3,
            delta_prime: 1e-4,
            l_interval: 4,
            gamma0: gamma0(eps[4]),
            ..Self::published()
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn k1(&self) -> f64 {
        self.k[0]
    }
    pub fn k2(&self) -> f64 {
        self.k[1]
    }
    pub fn k3(&self) -> f64 {
        self.k[2]
    }
    pub fn k4(&self) -> f64 {
        self.k[3]
    }
    pub fn k5(&self) -> f64 {
        self.k[4]
    }
    pub fn k6(&self) -> f64 {
        self.k[5]
    }

    /// `eps(1)` .. `eps(8)`, one-based to match the usual naming.
    pub fn eps(&self, n: usize) -> f64 {
        self.eps[n - 1]
    }

    /// Normal/weird threshold at the configured γ.
    pub fn theta(&self) -> f64 {
        theta(self.k6(), self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.windows(2).all(|w| w[0] > w[1]) {
            return Err(UflError::input("K1..K6 must be strictly decreasing"));
        }
        if !self.eps[..6].windows(2).all(|w| w[0] > w[1]) {
            return Err(UflError::input("eps1..eps6 must be strictly decreasing"));
        }
        if self.eps[6] > self.eps[4] {
            return Err(UflError::input("eps7 must not exceed eps5"));
        }
        if !(self.gamma >= 1.0) {
            return Err(UflError::input("gamma must be at least 1"));
        }
        if self.l_interval == 0 || self.m_cap == 0 {
            return Err(UflError::input("L and M must be positive"));
        }
        if !(0.0..1.0).contains(&self.kappa2) {
            return Err(UflError::input("kappa2 must lie in [0, 1)"));
        }
        Ok(())
    }
}

impl Default for ParamSet {
    fn default() -> Self {
        Self::published()
    }
}

/// θ(γ) = (K6 + 1 − γ) / (2·K6 + 2 − γ).
pub fn theta(k6: f64, gamma: f64) -> f64 {
    (k6 + 1.0 - gamma) / (2.0 * k6 + 2.0 - gamma)
}

/// Smallest φ with `1 + x² + 2x·cos φ ≤ (1 + (1−r)x)²` for every `x ∈ [0, 2]`.
///
/// Rearranged, the constraint is `cos φ ≤ g(x) = ((1−r)² − 1)x/2 + (1−r)`,
/// which decreases in x, so x = 2 binds: `cos φ = 1 − 3r + r²`. The arccos is
/// evaluated through `2·asin(√((1 − cos φ)/2))` to keep precision for tiny r.
pub fn phi_r(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(UflError::input("r_cone must lie in (0, 1)"));
    }
    let one_minus_cos = 3.0 * r - r * r;
    Ok(2.0 * (one_minus_cos / 2.0).sqrt().asin())
}

/// Root of `1/e + e^{−γ} − (γ−1)(1 − 1/e + (1−ε5)e^{−γ})` in (1, 2), by bisection.
pub fn gamma0(eps5: f64) -> f64 {
    let e_inv = (-1.0f64).exp();
    let g = |x: f64| e_inv + (-x).exp() - (x - 1.0) * (1.0 - e_inv + (1.0 - eps5) * (-x).exp());
    let (mut lo, mut hi) = (1.0, 2.0);
    debug_assert!(g(lo) > 0.0 && g(hi) < 0.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
