//! Dense phase-one simplex for `A x = b, x ≥ 0`.
//!
//! Artificial variables are added on every row and their sum is minimized.
//! The optimum is zero exactly when the system is feasible; otherwise it is
//! the smallest L1 constraint violation reachable with `x ≥ 0`.
//!
//! Pricing is Dantzig's most-negative reduced cost, falling back to Bland's
//! smallest-index rule after a run of degenerate pivots so the method
//! cannot cycle.

use std::fmt;

const PIVOT_TOL: f64 = 1e-11;
const PRICE_TOL: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum SimplexError {
    Shape(String),
    NonFinite,
    IterationLimit(usize),
}

impl fmt::Display for SimplexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimplexError::Shape(msg) => write!(f, "bad problem shape: {msg}"),
            SimplexError::NonFinite => write!(f, "non-finite value in tableau"),
            SimplexError::IterationLimit(n) => write!(f, "no convergence after {n} pivots"),
        }
    }
}

impl std::error::Error for SimplexError {}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOne {
    /// Nonnegative point minimizing the total artificial mass.
    pub point: Vec<f64>,
    /// Optimal sum of artificials (the L1 infeasibility).
    pub infeasibility: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs for every column, with `−w` in the last slot.
    cost: Vec<f64>,
    basis: Vec<usize>,
    structural: usize,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.cost.len() - 1
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let candidates = (0..self.structural).filter(|&j| self.cost[j] < -PRICE_TOL);
        if bland {
            candidates.into_iter().next()
        } else {
            candidates.min_by(|&a, &b| self.cost[a].total_cmp(&self.cost[b]))
        }
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let rhs = self.rhs_col();
        let mut best: Option<(usize, f64)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            let a = row[col];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = row[rhs] / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    if ratio < bratio - 1e-14
                        || (ratio <= bratio + 1e-14 && self.basis[r] < self.basis[br])
                    {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for x in self.rows[r].iter_mut() {
            *x /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                row[col] = 0.0;
            }
        }
        let f = self.cost[col];
        for (x, y) in self.cost.iter_mut().zip(&pivot_row) {
            *x -= f * y;
        }
        self.cost[col] = 0.0;
        let rhs = self.rhs_col();
        for row in self.rows.iter_mut() {
            if row[rhs] < 0.0 {
                row[rhs] = 0.0;
            }
        }
        self.basis[r] = col;
    }
}

/// Minimizes `Σ artificials` subject to `A x + s = b`, `x, s ≥ 0`.
pub fn phase_one(a: &[Vec<f64>], b: &[f64], max_pivots: usize) -> Result<PhaseOne, SimplexError> {
    let m = a.len();
    if b.len() != m {
        return Err(SimplexError::Shape(format!("{m} rows but {} right-hand sides", b.len())));
    }
    let n = a.first().map_or(0, Vec::len);
    if a.iter().any(|row| row.len() != n) {
        return Err(SimplexError::Shape("ragged constraint matrix".into()));
    }
    if a.iter().flatten().chain(b).any(|x| !x.is_finite()) {
        return Err(SimplexError::NonFinite);
    }

    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    let mut cost = vec![0.0; width];
    for (i, (row, &rhs)) in a.iter().zip(b).enumerate() {
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        let mut t = vec![0.0; width];
        for (dst, src) in t.iter_mut().zip(row) {
            *dst = sign * src;
        }
        t[n + i] = 1.0;
        t[width - 1] = sign * rhs;
        for j in 0..n {
            cost[j] -= t[j];
        }
        cost[width - 1] -= t[width - 1];
        rows.push(t);
    }
    let mut tab = Tableau {
        rows,
        cost,
        basis: (n..n + m).collect(),
        structural: n,
    };

    let mut pivots = 0;
    let mut degenerate = 0;
    while let Some(col) = tab.entering(degenerate >= DEGENERATE_RUN) {
        if pivots >= max_pivots {
            return Err(SimplexError::IterationLimit(pivots));
        }
        // Phase one is bounded below by zero, so some row always qualifies
        // unless the column is numerically zero.
        let Some(r) = tab.leaving(col) else {
            tab.cost[col] = 0.0;
            continue;
        };
        let before = -tab.cost[width - 1];
        tab.pivot(r, col);
        pivots += 1;
        let after = -tab.cost[width - 1];
        if !after.is_finite() {
            return Err(SimplexError::NonFinite);
        }
        if before - after > 1e-15 {
            degenerate = 0;
        } else {
            degenerate += 1;
        }
    }

    let mut point = vec![0.0; n];
    let mut infeasibility = 0.0;
    for (row, &var) in tab.rows.iter().zip(&tab.basis) {
        let value = row[width - 1].max(0.0);
        if var < n {
            point[var] = value;
        } else {
            infeasibility += value;
        }
    }
    Ok(PhaseOne {
        point,
        infeasibility,
        pivots,
    })
}

/// `max_i |(A x − b)_i|`.
pub fn max_residual(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(row, rhs)| (row.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() - rhs).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_system_reaches_zero() {
        // x + y = 1, x − y = 0.5  →  x = 0.75, y = 0.25
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let b = vec![1.0, 0.5];
        let out = phase_one(&a, &b, 100).unwrap();
        assert!(out.infeasibility < 1e-14);
        assert!((out.point[0] - 0.75).abs() < 1e-14);
        assert!((out.point[1] - 0.25).abs() < 1e-14);
        assert!(max_residual(&a, &b, &out.point) < 1e-14);
    }

    #[test]
    fn negative_rhs_is_handled() {
        // −x = −2
        let out = phase_one(&[vec![-1.0]], &[-2.0], 10).unwrap();
        assert!(out.infeasibility < 1e-14);
        assert!((out.point[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nonnegativity_conflict_reports_distance() {
        // x + y = 1 and x + y = 1.3 cannot both hold; best L1 violation is 0.3.
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let out = phase_one(&a, &[1.0, 1.3], 100).unwrap();
        assert!((out.infeasibility - 0.3).abs() < 1e-12);
    }

    #[test]
    fn sign_conflict_is_infeasible() {
        // x − y = 1, y − x = 1
        let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let out = phase_one(&a, &[1.0, 1.0], 100).unwrap();
        assert!((out.infeasibility - 2.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let a = vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0], vec![1.0, 0.0, 0.0]];
        let out = phase_one(&a, &[1.0, 2.0, 0.2], 100).unwrap();
        assert!(out.infeasibility < 1e-14);
        assert!(max_residual(&a, &[1.0, 2.0, 0.2], &out.point) < 1e-14);
        assert!(out.point.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(phase_one(&[vec![1.0]], &[1.0, 2.0], 10), Err(SimplexError::Shape(_))));
        assert!(matches!(
            phase_one(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 2.0], 10),
            Err(SimplexError::Shape(_))
        ));
        assert_eq!(phase_one(&[vec![f64::NAN]], &[1.0], 10), Err(SimplexError::NonFinite));
    }

    #[test]
    fn iteration_limit_is_reported() {
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        assert!(matches!(
            phase_one(&a, &[1.0, 0.5], 0),
            Err(SimplexError::IterationLimit(0))
        ));
    }
}
