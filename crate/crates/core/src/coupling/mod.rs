//! Multimaximal-coupling feasibility oracle.
//!
//! The eight contextually labelled outcomes `A₁₁, A₁₂, A₂₁, A₂₂, B₁₁, B₁₂,
//! B₂₁, B₂₂` (first index: setting, second index: context) take values ±1.
//! A coupling is a distribution over the 2⁸ joint assignments ("atoms") that
//! reproduces every context's observed joint distribution of `(A_ij, B_ij)`.
//! It is multimaximal when, for every connection (the same property seen in
//! two contexts), the probability that the two copies differ is as small as
//! their marginals allow, namely `½|⟨X⟩ − ⟨X'⟩|`.
//!
//! The system is noncontextual exactly when such a coupling exists. This
//! module decides that by linear feasibility, without going through the
//! inequality formulas of [`crate::contextuality`].

pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::contextuality::{kd_report, InequalityReport};
use crate::error::{Error, Result};
use crate::measurement::{Context, ExperimentTable};

pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-7;

pub const ATOMS: usize = 256;

const MAX_PIVOTS: usize = 20_000;

/// Position of `A_ij` in an atom's bit pattern.
pub const fn a_var(i: usize, j: usize) -> usize {
    2 * (i - 1) + (j - 1)
}

/// Position of `B_ij` in an atom's bit pattern.
pub const fn b_var(i: usize, j: usize) -> usize {
    4 + 2 * (i - 1) + (j - 1)
}

/// Value (±1) of variable `var` in `atom`; a set bit means −1.
pub const fn atom_value(atom: usize, var: usize) -> i8 {
    if (atom >> var) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Observed joint distribution of `(A_ij, B_ij)` in one context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextJoint {
    pub context: Context,
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
}

impl ContextJoint {
    /// Probability of `(A, B) = (a, b)`.
    pub fn probability(&self, a: i8, b: i8) -> f64 {
        match (a > 0, b > 0) {
            (true, true) => self.p_pp,
            (true, false) => self.p_pm,
            (false, true) => self.p_mp,
            (false, false) => self.p_mm,
        }
    }

    pub fn mean_a(&self) -> f64 {
        self.p_pp + self.p_pm - self.p_mp - self.p_mm
    }

    pub fn mean_b(&self) -> f64 {
        self.p_pp - self.p_pm + self.p_mp - self.p_mm
    }
}

pub fn context_joints(table: &ExperimentTable) -> Result<[ContextJoint; 4]> {
    let records = table.complete_records()?;
    let mut out = [ContextJoint {
        context: Context::ALL[0],
        p_pp: 0.0,
        p_pm: 0.0,
        p_mp: 0.0,
        p_mm: 0.0,
    }; 4];
    for ctx in Context::ALL {
        let r = &records[ctx.slot()];
        if !r.is_normalized() {
            return Err(Error::MalformedData(format!(
                "record for context {ctx} is not normalized (total {})",
                r.total()
            )));
        }
        out[ctx.slot()] = ContextJoint {
            context: ctx,
            p_pp: r.i_pp(),
            p_pm: r.i_pm(),
            p_mp: r.i_mp(),
            p_mm: r.i_mm(),
        };
    }
    Ok(out)
}

/// A pair of variables representing one property in two contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub name: &'static str,
    pub first: usize,
    pub second: usize,
}

/// `(A₁₁,A₁₂)`, `(A₂₁,A₂₂)`, `(B₁₁,B₂₁)`, `(B₁₂,B₂₂)`.
pub const CONNECTIONS: [Connection; 4] = [
    Connection {
        name: "A1",
        first: a_var(1, 1),
        second: a_var(1, 2),
    },
    Connection {
        name: "A2",
        first: a_var(2, 1),
        second: a_var(2, 2),
    },
    Connection {
        name: "B1",
        first: b_var(1, 1),
        second: b_var(2, 1),
    },
    Connection {
        name: "B2",
        first: b_var(1, 2),
        second: b_var(2, 2),
    },
];

fn targets_from_joints(joints: &[ContextJoint; 4]) -> [f64; 4] {
    let a = |i, j| joints[Context { i, j }.slot()].mean_a();
    let b = |i, j| joints[Context { i, j }.slot()].mean_b();
    [
        0.5 * (a(1, 1) - a(1, 2)).abs(),
        0.5 * (a(2, 1) - a(2, 2)).abs(),
        0.5 * (b(1, 1) - b(2, 1)).abs(),
        0.5 * (b(1, 2) - b(2, 2)).abs(),
    ]
}

/// Minimal mismatch probability `P(X ≠ X')` for each connection, in
/// [`CONNECTIONS`] order.
pub fn connection_targets(table: &ExperimentTable) -> Result<[f64; 4]> {
    Ok(targets_from_joints(&context_joints(table)?))
}

/// Linear system over the 256 atom probabilities.
///
/// Rows: for each context the probabilities of `(+,+)`, `(+,−)`, `(−,+)`
/// (the `(−,−)` entry follows from normalization), one normalization row,
/// and one mismatch row per connection; 17 in total.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProblem {
    pub joints: [ContextJoint; 4],
    pub targets: [f64; 4],
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub feasibility_tol: f64,
}

impl CouplingProblem {
    pub fn new(table: &ExperimentTable, feasibility_tol: f64) -> Result<Self> {
        let joints = context_joints(table)?;
        let targets = targets_from_joints(&joints);
        let mut rows = Vec::with_capacity(17);
        let mut rhs = Vec::with_capacity(17);
        for joint in &joints {
            let Context { i, j } = joint.context;
            for (a, b) in [(1, 1), (1, -1), (-1, 1)] {
                rows.push(
                    (0..ATOMS)
                        .map(|atom| {
                            let hit = atom_value(atom, a_var(i, j)) == a
                                && atom_value(atom, b_var(i, j)) == b;
                            if hit {
                                1.0
                            } else {
                                0.0
                            }
                        })
                        .collect(),
                );
                rhs.push(joint.probability(a, b));
            }
        }
        rows.push(vec![1.0; ATOMS]);
        rhs.push(1.0);
        for (conn, target) in CONNECTIONS.iter().zip(targets) {
            rows.push(
                (0..ATOMS)
                    .map(|atom| {
                        if atom_value(atom, conn.first) != atom_value(atom, conn.second) {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            );
            rhs.push(target);
        }
        Ok(CouplingProblem {
            joints,
            targets,
            rows,
            rhs,
            feasibility_tol,
        })
    }

    /// Largest deviation of a candidate atom distribution from every
    /// requirement: all sixteen context probabilities, the four mismatch
    /// targets, total mass and nonnegativity.
    pub fn witness_residual(&self, atoms: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for joint in &self.joints {
            let Context { i, j } = joint.context;
            for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mass: f64 = (0..ATOMS)
                    .filter(|&atom| {
                        atom_value(atom, a_var(i, j)) == a && atom_value(atom, b_var(i, j)) == b
                    })
                    .map(|atom| atoms[atom])
                    .sum();
                worst = worst.max((mass - joint.probability(a, b)).abs());
            }
        }
        for (conn, target) in CONNECTIONS.iter().zip(self.targets) {
            let mass: f64 = (0..ATOMS)
                .filter(|&atom| atom_value(atom, conn.first) != atom_value(atom, conn.second))
                .map(|atom| atoms[atom])
                .sum();
            worst = worst.max((mass - target).abs());
        }
        worst = worst.max((atoms.iter().sum::<f64>() - 1.0).abs());
        let most_negative = atoms.iter().copied().fold(0.0, f64::min);
        worst.max(-most_negative)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub feasible: bool,
    /// Atom distribution reproducing the data, when one exists.
    pub witness: Option<Vec<f64>>,
    /// Residual of the best point found against all requirements.
    pub max_constraint_residual: f64,
    /// Smallest total constraint violation reachable (zero when feasible).
    pub infeasibility: f64,
    pub feasibility_tol: f64,
}

impl OracleVerdict {
    pub fn contextual(&self) -> bool {
        !self.feasible
    }
}

pub fn multimaximal_feasible(table: &ExperimentTable, feasibility_tol: f64) -> Result<OracleVerdict> {
    if feasibility_tol.is_nan() || feasibility_tol <= 0.0 {
        return Err(Error::MalformedData(format!(
            "feasibility tolerance must be positive, got {feasibility_tol}"
        )));
    }
    let problem = CouplingProblem::new(table, feasibility_tol)?;
    let outcome = simplex::phase_one(&problem.rows, &problem.rhs, MAX_PIVOTS).map_err(|e| {
        Error::SolverFailure {
            reason: e.to_string(),
            max_residual: f64::NAN,
        }
    })?;
    let residual = problem.witness_residual(&outcome.point);
    let feasible = outcome.infeasibility <= feasibility_tol;
    if feasible && residual > feasibility_tol {
        return Err(Error::SolverFailure {
            reason: format!(
                "phase one reported infeasibility {:e} but the witness misses the constraints",
                outcome.infeasibility
            ),
            max_residual: residual,
        });
    }
    Ok(OracleVerdict {
        feasible,
        witness: feasible.then_some(outcome.point),
        max_constraint_residual: residual,
        infeasibility: outcome.infeasibility,
        feasibility_tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    /// True when the inequality verdict and the coupling verdict coincide.
    pub agree: bool,
    pub report: InequalityReport,
    pub verdict: OracleVerdict,
}

pub fn cross_validate(
    table: &ExperimentTable,
    decision_tol: f64,
    feasibility_tol: f64,
) -> Result<CrossValidation> {
    let report = kd_report(table, decision_tol)?;
    let verdict = multimaximal_feasible(table, feasibility_tol)?;
    Ok(CrossValidation {
        agree: report.contextual == verdict.contextual(),
        report,
        verdict,
    })
}
