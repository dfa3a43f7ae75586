//! Executable form of the thirteen sufficient conditions on the constants.

use std::f64::consts::E;

use crate::params::{theta, ParamSet};

/// Outcome of one condition over the whole γ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionOutcome {
    pub index: usize,
    pub label: &'static str,
    pub passed: bool,
    /// Smallest relative slack `(rhs − lhs)/max(|lhs|, |rhs|)` seen on the grid.
    pub min_margin: f64,
    pub worst_gamma: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub grid_points: usize,
    pub outcomes: Vec<ConditionOutcome>,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("condition\tpassed\tmin_margin\tworst_gamma\tfailures\tlabel\n");
        for o in &self.outcomes {
            s.push_str(&format!(
                "{}\t{}\t{:e}\t{}\t{}\t{}\n",
                o.index, o.passed, o.min_margin, o.worst_gamma, o.failures, o.label
            ));
        }
        s
    }
}

const LABELS: [&str; 13] = [
    "big remote arm slack",
    "(eps1+delta)/theta <= 1/100",
    "cone probability gap",
    "phi_r and cap-count bounds",
    "saving expansion constants",
    "good-on-average constant",
    "homogeneous clustering constant",
    "block width and eps4",
    "interval reward >= 1e-5",
    "eps5 <= eps4/1e5",
    "eps6 <= eps5/e^gamma0",
    "eps7 bound",
    "eps8 <= eps7/1000",
];

/// Relative slack of `lhs ≤ rhs`.
fn le(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

/// Relative slack of a strict `lhs < rhs`; an exact tie counts as failure.
fn lt(lhs: f64, rhs: f64) -> f64 {
    let m = le(lhs, rhs);
    if m == 0.0 {
        -f64::MIN_POSITIVE
    } else {
        m
    }
}

/// Slack of every condition at one γ, in order. Composite conditions report
/// the minimum over their parts.
pub fn condition_margins(p: &ParamSet, gamma: f64) -> [f64; 13] {
    let th = theta(p.k6(), gamma);
    let (k1, k2, k3, k4, k5, k6) = (p.k1(), p.k2(), p.k3(), p.k4(), p.k5(), p.k6());
    let e = |n: usize| p.eps(n);
    let (d, dp, r, a, m) = (p.delta, p.delta_prime, p.r_cone, p.alpha, p.m_cap as f64);
    let phi = p.phi_r;
    let l = p.l_interval as f64;

    let c1 = le(2.0 * 0.998 * a.sin(), (1.0 - 0.995) * 0.2319);
    let c2 = le((e(1) + d) / th, 0.01);
    let c3 = lt(1.0 / (0.98 * th * r) * (d + e(1) / 2.0) / (1.0 + d), 0.00099 * th / (1.0 - th));
    let caps = (1.0 + 1.0 / (a - phi).sin()) * ((1.0 - th) / (0.99 * th)).ln() / 1.001f64.ln();
    let c4 = lt(phi, a)
        .min(lt(2.0 * phi, 0.01))
        .min(le(2.0 * (1.0 + d) * a.sin(), 0.98 * th))
        .min(le(caps, m));
    let c5 = le(36.0 / 25.0 * (1.0 + d), (3.0 - e(1)) / (2.0 * (1.0 + d))).min(le(72.0 * d + 25.0 * e(1), 1.0));
    let kp = (2.0 * k5 + 2.0 - gamma) / (k5 - k6) * k5 / (k5 - gamma + 1.0);
    let c6 = le((d + e(2)) * kp * (125.0 * m * (1.0 + d) / 2.0).max(1.0 / (e(1) - e(2))), 1.0);
    let c7 = le(
        (d + e(3)) * (2.0 - gamma + 2.0 * k4) / k4,
        (e(2) - e(3)) * (k5 - gamma + 1.0) * (k4 - k5) / (k4 * k5),
    );
    // (1+δ')^{2L} ≤ 1+δ compared in log space; the ε4 identity is read as an upper bound.
    let c8 = le(2.0 * l * dp.ln_1p(), d.ln_1p()).min(le(e(4), (1.0 - k4 / k3) * e(3).min(2.0 * dp / (1.0 + dp))));
    let a9 = k2 / ((k2 - k3) * l);
    let c9 = le(1e-5, (1.0 - a9 - (k2 - k3) / k2) * (1.0 - k2 / k1 / (1.0 - a9)));
    let c10 = le(e(5), e(4) / 1e5);
    let c11 = le(e(6), e(5) / p.gamma0.exp());
    let c12 = le(e(7), (k1 - gamma + 1.0) / (2.0 * k1 - gamma + 2.0) * e(5));
    let c13 = le(e(8), e(7) / 1000.0);
    [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13]
}

/// Evaluates all conditions at every γ in `gamma_grid`. A condition passes
/// when its relative slack is at least `−params.cmp_tol` everywhere.
pub fn validate_parameters(params: &ParamSet, gamma_grid: &[f64]) -> ConditionReport {
    let mut outcomes: Vec<ConditionOutcome> = LABELS
        .iter()
        .enumerate()
        .map(|(i, label)| ConditionOutcome {
            index: i + 1,
            label,
            passed: true,
            min_margin: f64::INFINITY,
            worst_gamma: f64::NAN,
            failures: 0,
        })
        .collect();
    for &g in gamma_grid {
        for (o, m) in outcomes.iter_mut().zip(condition_margins(params, g)) {
            if m < o.min_margin {
                o.min_margin = m;
                o.worst_gamma = g;
            }
            if m < -params.cmp_tol || m.is_nan() {
                o.passed = false;
                o.failures += 1;
            }
        }
    }
    ConditionReport { grid_points: gamma_grid.len(), outcomes }
}

/// γ ∈ {1.601, 1.602, …, 1.999}.
pub fn default_gamma_grid() -> Vec<f64> {
    (1601..=1999).map(|k| k as f64 / 1000.0).collect()
}

/// Parses `lo:hi:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Option<Vec<f64>> {
    let parts: Vec<f64> = spec.split(':').map(|s| s.trim().parse().ok()).collect::<Option<_>>()?;
    let [lo, hi, step] = parts[..] else { return None };
    if !(step > 0.0) || hi < lo {
        return None;
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Some((0..=n).map(|k| lo + k as f64 * step).collect())
}

/// ε6 bound uses e^{γ0}; exposed for reports.
pub fn eps6_cap(p: &ParamSet) -> f64 {
    p.eps(5) / E.powf(p.gamma0)
}
