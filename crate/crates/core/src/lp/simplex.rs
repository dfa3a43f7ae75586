//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Solves `min cᵀx  s.t.  rows, x ≥ 0`. Row duals are read off the reduced
//! costs of each row's initial identity column, so they are consistent with
//! the final basis.

use crate::error::{Result, UflError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row<T: Scalar = f64> {
    pub coeffs: Vec<(usize, T)>,
    pub sense: Sense,
    pub rhs: T,
}

#[derive(Debug, Clone)]
pub struct LinearProgram<T: Scalar = f64> {
    pub n_vars: usize,
    pub objective: Vec<T>,
    pub rows: Vec<Row<T>>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T: Scalar = f64> {
    pub x: Vec<T>,
    /// One multiplier per row: `cᵀ − yᵀA ≥ 0` and `yᵀb` equals the optimum.
    pub duals: Vec<T>,
    pub objective: T,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau<T: Scalar> {
    /// m rows of `ncols + 1` entries, last entry is the rhs.
    a: Vec<Vec<T>>,
    /// Reduced costs, last entry is minus the objective value.
    obj: Vec<T>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    eps: T,
    iterations: usize,
    cap: usize,
}

impl<T: Scalar> Tableau<T> {
    fn ncols(&self) -> usize {
        self.kinds.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.ncols() + 1;
        let p = self.a[r][c];
        for k in 0..w {
            self.a[r][k] = self.a[r][k] / p;
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != T::zero() {
                for k in 0..w {
                    row[k] = row[k] - f * pivot_row[k];
                }
                row[c] = T::zero();
            }
        }
        let f = self.obj[c];
        if f != T::zero() {
            for k in 0..w {
                self.obj[k] = self.obj[k] - f * pivot_row[k];
            }
            self.obj[c] = T::zero();
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Runs Bland's rule until optimal. `allow(col)` filters entering columns.
    fn optimize(&mut self, allow: impl Fn(ColKind) -> bool) -> Result<()> {
        let n = self.ncols();
        loop {
            if self.iterations >= self.cap {
                return Err(UflError::Solver { iterations: self.iterations });
            }
            let Some(enter) = (0..n).find(|&k| allow(self.kinds[k]) && self.obj[k] < -self.eps) else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.a.iter().enumerate() {
                if row[enter] > self.eps {
                    let ratio = row[n] / row[enter];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - self.eps || (ratio <= lr + self.eps && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Err(UflError::Internal("linear program is unbounded".into())),
            }
        }
    }
}

pub fn solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    if lp.objective.len() != lp.n_vars {
        return Err(UflError::DimensionMismatch { left: lp.objective.len(), right: lp.n_vars });
    }
    let m = lp.rows.len();
    let nv = lp.n_vars;
    let n_slack = lp.rows.iter().filter(|r| r.sense != Sense::Eq).count();
    let flipped: Vec<bool> = lp.rows.iter().map(|r| r.rhs < T::zero()).collect();
    let senses: Vec<Sense> = lp
        .rows
        .iter()
        .zip(&flipped)
        .map(|(r, &f)| match (r.sense, f) {
            (Sense::Le, true) => Sense::Ge,
            (Sense::Ge, true) => Sense::Le,
            (s, _) => s,
        })
        .collect();
    let n_art = senses.iter().filter(|s| **s != Sense::Le).count();
    let ncols = nv + n_slack + n_art;

    let mut kinds = vec![ColKind::Structural; nv];
    kinds.extend(std::iter::repeat(ColKind::Slack).take(n_slack));
    kinds.extend(std::iter::repeat(ColKind::Artificial).take(n_art));

    let mut a = vec![vec![T::zero(); ncols + 1]; m];
    let mut basis = vec![0; m];
    let mut identity_col = vec![0; m];
    let (mut next_slack, mut next_art) = (nv, nv + n_slack);
    for (i, row) in lp.rows.iter().enumerate() {
        let sign = if flipped[i] { -T::one() } else { T::one() };
        for &(j, v) in &row.coeffs {
            if j >= nv {
                return Err(UflError::input(format!("row {i} references variable {j} of {nv}")));
            }
            a[i][j] = a[i][j] + sign * v;
        }
        a[i][ncols] = sign * row.rhs;
        match senses[i] {
            Sense::Le => {
                a[i][next_slack] = T::one();
                basis[i] = next_slack;
                identity_col[i] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                a[i][next_slack] = -T::one();
                next_slack += 1;
                a[i][next_art] = T::one();
                basis[i] = next_art;
                identity_col[i] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                a[i][next_art] = T::one();
                basis[i] = next_art;
                identity_col[i] = next_art;
                next_art += 1;
            }
        }
    }

    let eps = T::lit(T::LP_EPS);
    let cap = 50_000 + 50 * (m + ncols);
    let mut tab = Tableau { a, obj: vec![T::zero(); ncols + 1], basis, kinds, eps, iterations: 0, cap };

    // Phase 1: minimise the sum of artificials.
    if n_art > 0 {
        for k in 0..ncols {
            if tab.kinds[k] == ColKind::Artificial {
                tab.obj[k] = T::one();
            }
        }
        for i in 0..m {
            if tab.kinds[tab.basis[i]] == ColKind::Artificial {
                for k in 0..=ncols {
                    tab.obj[k] = tab.obj[k] - tab.a[i][k];
                }
            }
        }
        tab.optimize(|_| true)?;
        let infeas = -tab.obj[ncols];
        let scale = lp.rows.iter().map(|r| r.rhs.abs()).fold(T::one(), T::max);
        if infeas > eps * scale * T::lit(10.0) {
            return Err(UflError::Internal("linear program is infeasible".into()));
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if tab.kinds[tab.basis[i]] == ColKind::Artificial {
                if let Some(k) = (0..ncols).find(|&k| tab.kinds[k] != ColKind::Artificial && tab.a[i][k].abs() > eps) {
                    tab.pivot(i, k);
                }
            }
        }
    }

    // Phase 2: reduced costs of the real objective under the current basis.
    tab.obj = vec![T::zero(); ncols + 1];
    tab.obj[..nv].copy_from_slice(&lp.objective);
    for i in 0..m {
        let b = tab.basis[i];
        let cb = if b < nv { lp.objective[b] } else { T::zero() };
        if cb != T::zero() {
            for k in 0..=ncols {
                tab.obj[k] = tab.obj[k] - cb * tab.a[i][k];
            }
        }
    }
    tab.optimize(|kind| kind != ColKind::Artificial)?;

    let mut x = vec![T::zero(); nv];
    for i in 0..m {
        if tab.basis[i] < nv {
            x[tab.basis[i]] = tab.a[i][ncols].max(T::zero());
        }
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| *c * *v).sum();
    let duals = (0..m)
        .map(|i| {
            let y = -tab.obj[identity_col[i]];
            if flipped[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    Ok(LpSolution { x, duals, objective, iterations: tab.iterations })
}
