//! CHSH quantity, signaling measure `Δ₀` and the four Kujala-Dzhafarov
//! inequalities of the 2×2 system.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measurement::{correlation_set, Context, CorrelationSet, ExperimentTable};

pub const DEFAULT_DECISION_TOL: f64 = 1e-9;

/// Sign patterns over contexts `[11, 12, 21, 22]`. Pattern `k` puts the
/// single minus sign on context 22, 21, 12, 11 respectively.
pub const KD_SIGN_PATTERNS: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, -1.0],
    [1.0, 1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0, 1.0],
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub s_chsh: f64,
    pub s_kd: [f64; 4],
    pub delta0: f64,
    pub kd_bound: f64,
    pub chsh_violated: bool,
    pub contextual: bool,
    /// `max S_KD − kd_bound`.
    pub margin: f64,
    pub decision_tol: f64,
}

impl InequalityReport {
    pub fn max_s_kd(&self) -> f64 {
        self.s_kd.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// 1-based index of the largest `S_KD`.
    pub fn leading_inequality(&self) -> usize {
        let mut best = 0;
        for k in 1..4 {
            if self.s_kd[k] > self.s_kd[best] {
                best = k;
            }
        }
        best + 1
    }
}

/// `|Σ_k sign_k · corr_k|` for each of the four odd sign patterns.
pub fn kd_combinations(correlators: [f64; 4]) -> [f64; 4] {
    KD_SIGN_PATTERNS.map(|signs| {
        signs
            .iter()
            .zip(correlators)
            .map(|(s, c)| s * c)
            .sum::<f64>()
            .abs()
    })
}

/// `S = M(α₁,β₁) + M(α₁,β₂) − M(α₂,β₁) + M(α₂,β₂)`.
pub fn chsh_from_correlators(m: [f64; 4]) -> f64 {
    m[0] + m[1] - m[2] + m[3]
}

pub fn chsh_s(table: &ExperimentTable) -> Result<f64> {
    Ok(chsh_from_correlators(correlation_set(table)?.m_values()))
}

pub fn delta0_from_correlations(c: &CorrelationSet) -> f64 {
    let a = |i, j| c.get(Context { i, j }).a;
    let b = |i, j| c.get(Context { i, j }).b;
    0.5 * ((a(1, 1) - a(1, 2)).abs()
        + (a(2, 1) - a(2, 2)).abs()
        + (b(1, 1) - b(2, 1)).abs()
        + (b(1, 2) - b(2, 2)).abs())
}

pub fn delta0(table: &ExperimentTable) -> Result<f64> {
    Ok(delta0_from_correlations(&correlation_set(table)?))
}

pub fn report_from_correlations(c: &CorrelationSet, decision_tol: f64) -> InequalityReport {
    let ab = c.entries.map(|e| e.ab);
    let s_kd = kd_combinations(ab);
    let delta0 = delta0_from_correlations(c);
    let kd_bound = 2.0 * (1.0 + delta0);
    let s_chsh = chsh_from_correlators(c.m_values());
    let max_kd = s_kd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let margin = max_kd - kd_bound;
    InequalityReport {
        s_chsh,
        s_kd,
        delta0,
        kd_bound,
        chsh_violated: s_chsh.abs() > 2.0 + decision_tol,
        contextual: margin > decision_tol,
        margin,
        decision_tol,
    }
}

pub fn kd_report(table: &ExperimentTable, decision_tol: f64) -> Result<InequalityReport> {
    Ok(report_from_correlations(&correlation_set(table)?, decision_tol))
}
