//! Simulation and contextuality analysis of spin-orbit laser modes.
//!
//! A spin-orbit mode couples the polarization of a laser beam with its
//! first-order transverse mode, giving a four-dimensional space with the
//! same structure as two qubits. This crate
//!
//! * builds modes and measures their non-separability ([`mode`]),
//! * models the measurement bench element by element ([`bench`]),
//! * turns bench outputs into normalized four-port intensity records and
//!   correlators ([`measurement`]),
//! * evaluates the CHSH quantity and the Kujala-Dzhafarov inequalities with
//!   their signaling correction ([`contextuality`]),
//! * and decides contextuality independently by searching for a
//!   multimaximal coupling ([`coupling`]).

pub mod bench;
pub mod contextuality;
pub mod coupling;
pub mod error;
pub mod measurement;
pub mod mode;

pub use bench::{BetaSetting, NoiseModel, OpticalElement, PbsPort};
pub use contextuality::{chsh_s, delta0, kd_report, InequalityReport, DEFAULT_DECISION_TOL};
pub use coupling::{
    connection_targets, context_joints, cross_validate, multimaximal_feasible, CrossValidation,
    OracleVerdict, DEFAULT_FEASIBILITY_TOL,
};
pub use error::{Error, Result};
pub use measurement::{
    correlation_m, correlation_set, expectations, measure_intensities, normalize_record,
    simulate_table, AngleSet, Context, CorrelationSet, ExperimentTable, IntensityRecord,
};
pub use mode::{bell_mode, concurrence, make_mode, rotated_decomposition, BellLabel, SpinOrbitMode};
