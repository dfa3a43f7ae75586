//! Grid search over `(γ, k, l, r)` for the two quadratic inequalities that
//! close the small-arm case. A point is covered when either left-hand side is
//! positive beyond its Lipschitz allowance `c·d`.

use rayon::prelude::*;

use crate::error::{Result, UflError};
use crate::params::{theta, ParamSet};

/// Lipschitz allowances per unit of grid step.
const LIP1: f64 = 360.8;
const LIP2: f64 = 139.1;
/// Shrink applied to the squared right-hand side.
const SHRINK: f64 = 0.995;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub gamma: f64,
    pub k: f64,
    pub l: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchReport {
    pub step: f64,
    pub points: u64,
    /// `min max(L1 − 360.8d, L2 − 139.1d)`; positive means every cell is covered.
    pub min_robust_margin: f64,
    pub worst: Option<GridPoint>,
    /// `(L1, L2)` at the worst point.
    pub worst_lhs: (f64, f64),
}

impl GridSearchReport {
    pub fn covered(&self) -> bool {
        self.min_robust_margin > 0.0
    }
}

/// `(L1, L2)` through the linear-in-x coefficient forms `A·x + B`.
pub fn appendix_lhs(p: &ParamSet, pt: &GridPoint, x: f64) -> (f64, f64) {
    let GridPoint { gamma: g, k, l, r } = *pt;
    let (e1, dl) = (p.eps(1), p.delta);
    let w = g - 1.0 + l - k + dl;
    let a1 = (g - 1.0) * (3.0 - 2.0 * l) + (l - k + dl) * (2.0 * g - 3.0) - e1 * w;
    let b1 = (g - 1.0) * r * ((1.0 + e1) * w + (2.0 - k + dl) * (2.0 - g));
    let a2 = 2.0 * (g - 1.0) * l;
    let b2 = (g - 1.0) * (2.0 - g) * r * l;
    let a3 = (3.0 - 3.0 * dl + 2.0 * dl * g - 2.0 * l) / (1.0 + dl) - e1;
    let b3 = (g - 1.0) * r * ((-(3.0 - g) * (1.0 - dl) + 2.0 * l) / (1.0 + dl) + e1);
    let a4 = 2.0 * l / (1.0 + dl);
    let b4 = -2.0 * l * (g - 1.0) * r / (1.0 + dl);
    let sq = (x + 1.0).powi(2) / SHRINK;
    let l1 = (a1 * x + b1).powi(2) + (a2 * x + b2).powi(2) - w * w * sq;
    let l2 = (a3 * x + b3).powi(2) + (a4 * x + b4).powi(2) - sq;
    (l1, l2)
}

/// Same quantities assembled from the rerouting geometry before collecting
/// terms in x. Used to cross-check [`appendix_lhs`].
pub fn appendix_lhs_direct(p: &ParamSet, pt: &GridPoint, x: f64) -> (f64, f64) {
    let GridPoint { gamma: g, k, l, r } = *pt;
    let (e1, dl) = (p.eps(1), p.delta);
    let w = g - 1.0 + l - k + dl;
    let near = x - (g - 1.0) * r;
    let far = x + r;
    let lean = (6.0 - 2.0 * g - 2.0 * l) / (1.0 + dl) - (2.0 - g + e1);
    let l2 = (lean * near + (g - 1.0) * far).powi(2) + (2.0 * l / (1.0 + dl) * near).powi(2) - (x + 1.0).powi(2) / SHRINK;
    let arm = (g - 1.0) * (2.0 * x + (2.0 - g) * r);
    let t = (3.0 - g - l) * arm + w * (g - 1.0) * far - w * (2.0 - g + e1) * near;
    let l1 = t * t + (l * arm).powi(2) - (w * (x + 1.0)).powi(2) / SHRINK;
    (l1, l2)
}

/// `0.99k + d·i` for `i = 1..=⌊(1 − k + δ − 0.99k)/d⌋`; empty when `0.99k` already exceeds the bound.
pub fn l_values(k: f64, d: f64, delta: f64) -> Vec<f64> {
    let n = ((1.0 - k + delta - 0.99 * k) / d).floor();
    if n < 1.0 {
        return Vec::new();
    }
    (1..=n as u64).map(|i| 0.99 * k + d * i as f64).collect()
}

fn steps(span: f64, d: f64) -> u64 {
    (span / d).floor().max(0.0) as u64
}

pub fn appendix_grid_search(params: &ParamSet, d: f64) -> Result<GridSearchReport> {
    if !(1e-4..=1e-2).contains(&d) {
        return Err(UflError::input(format!("grid step {d} outside [1e-4, 1e-2]")));
    }
    let x = params.k6();
    let n_r = steps(1.0, d);
    let n_g = steps(0.4, d);
    let per_gamma = |gi: u64| {
        let g = 1.6 + d * gi as f64;
        let th = theta(x, g);
        let mut best = (f64::INFINITY, None, (0.0, 0.0));
        let mut count = 0u64;
        for ki in 0..=steps((1.0 + params.delta) / 2.0 - th, d) {
            let k = th + d * ki as f64;
            for l in l_values(k, d, params.delta) {
                for ri in 0..=n_r {
                    let pt = GridPoint { gamma: g, k, l, r: d * ri as f64 };
                    let (l1, l2) = appendix_lhs(params, &pt, x);
                    let m = (l1 - LIP1 * d).max(l2 - LIP2 * d);
                    count += 1;
                    if m < best.0 {
                        best = (m, Some(pt), (l1, l2));
                    }
                }
            }
        }
        (count, best)
    };
    let slices: Vec<_> = (1..n_g).into_par_iter().map(per_gamma).collect();
    let mut report = GridSearchReport { step: d, points: 0, min_robust_margin: f64::INFINITY, worst: None, worst_lhs: (0.0, 0.0) };
    for (count, (m, pt, lhs)) in slices {
        report.points += count;
        if m < report.min_robust_margin {
            report.min_robust_margin = m;
            report.worst = pt;
            report.worst_lhs = lhs;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_point() {
        let p = ParamSet::published();
        let pt = GridPoint { gamma: 1.8, k: 0.2, l: 0.3, r: 0.7 };
        let (_, l2) = appendix_lhs(&p, &pt, p.k6());
        assert!((l2 - 2.64977).abs() < 1e-5, "{l2}");
    }

    #[test]
    fn empty_l_range() {
        assert!(l_values(0.51, 5e-3, 3e-23).is_empty());
        assert_eq!(l_values(0.2, 0.1, 0.0).len(), 6);
    }

    #[test]
    fn step_bounds() {
        let p = ParamSet::published();
        assert!(appendix_grid_search(&p, 0.05).unwrap_err().is_input_error());
        assert!(appendix_grid_search(&p, 1e-5).unwrap_err().is_input_error());
    }

    #[test]
    fn coarse_search_is_deterministic() {
        let p = ParamSet::published();
        let a = appendix_grid_search(&p, 1e-2).unwrap();
        let b = appendix_grid_search(&p, 1e-2).unwrap();
        assert_eq!(a, b);
        assert!(a.points > 1_000_000);
        let w = a.worst.unwrap();
        let (l1, l2) = appendix_lhs(&p, &w, p.k6());
        assert_eq!(a.min_robust_margin, (l1 - LIP1 * 1e-2).max(l2 - LIP2 * 1e-2));
    }

    #[test]
    fn refinement_does_not_drop_margin() {
        let p = ParamSet::published();
        let coarse = appendix_grid_search(&p, 1e-2).unwrap();
        let fine = appendix_grid_search(&p, 5e-3).unwrap();
        assert!(fine.min_robust_margin >= coarse.min_robust_margin - LIP1 * 1e-2);
    }

    proptest! {
        #[test]
        fn forms_agree(g in 1.6f64..2.0, k in 0.0f64..0.5, l in 0.0f64..1.0, r in 0.0f64..1.0, x in 0.0f64..4.0) {
            let p = ParamSet::published();
            let pt = GridPoint { gamma: g, k, l, r };
            let (a1, a2) = appendix_lhs(&p, &pt, x);
            let (b1, b2) = appendix_lhs_direct(&p, &pt, x);
            prop_assert!((a1 - b1).abs() <= 1e-10 * a1.abs().max(1.0));
            prop_assert!((a2 - b2).abs() <= 1e-10 * a2.abs().max(1.0));
        }
    }
}
