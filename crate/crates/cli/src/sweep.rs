//! Parameter sweeps. Grid points and random cases are evaluated in parallel;
//! results are always collected in grid or index order.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use spinorbit::mode::{make_mode, SpinOrbitMode};
use spinorbit::{correlation_set, cross_validate, kd_report, simulate_table, AngleSet, BetaSetting, NoiseModel};

use crate::error::{CliError, CliResult};

/// Measured correlators `M11, M12, M21, M22` of the reference bench run,
/// the default target of the visibility fit.
pub const REFERENCE_CORRELATORS: [f64; 4] = [0.679, 0.583, -0.679, 0.562];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(from: f64, to: f64, steps: usize) -> CliResult<Self> {
        if !from.is_finite() || !to.is_finite() || steps == 0 {
            return Err(CliError::Usage("a grid needs finite bounds and at least one step".into()));
        }
        Ok(Grid { from, to, steps })
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.steps == 1 {
            return self.from;
        }
        if k + 1 == self.steps {
            return self.to;
        }
        self.from + (self.to - self.from) * k as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.value(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub v_beta1: f64,
    pub v_beta2: f64,
    pub crosstalk: f64,
    /// Swept angle, for angle sweeps.
    pub angle: Option<f64>,
    pub correlators: [f64; 4],
    pub s_chsh: f64,
    pub s_kd: [f64; 4],
    pub delta0: f64,
    pub kd_bound: f64,
    pub contextual: bool,
}

fn evaluate(
    mode: &SpinOrbitMode,
    angles: &AngleSet,
    noise: &NoiseModel,
    angle: Option<f64>,
    decision_tol: f64,
) -> CliResult<SweepPoint> {
    let table = simulate_table(mode, angles, noise)?;
    let report = kd_report(&table, decision_tol)?;
    Ok(SweepPoint {
        v_beta1: noise.visibility(BetaSetting::First),
        v_beta2: noise.visibility(BetaSetting::Second),
        crosstalk: noise.crosstalk(),
        angle,
        correlators: correlation_set(&table)?.m_values(),
        s_chsh: report.s_chsh,
        s_kd: report.s_kd,
        delta0: report.delta0,
        kd_bound: report.kd_bound,
        contextual: report.contextual,
    })
}

/// Every `(V_β₁, V_β₂)` pair of the grid, β₁ varying slowest.
pub fn visibility_sweep(
    mode: &SpinOrbitMode,
    angles: &AngleSet,
    crosstalk: f64,
    grid: Grid,
    decision_tol: f64,
) -> CliResult<Vec<SweepPoint>> {
    let values = grid.values();
    let pairs: Vec<(f64, f64)> = values
        .iter()
        .flat_map(|v1| values.iter().map(move |v2| (*v1, *v2)))
        .collect();
    pairs
        .par_iter()
        .map(|(v1, v2)| {
            let noise = NoiseModel::new(*v1, *v2, crosstalk).map_err(|e| CliError::Usage(e.to_string()))?;
            evaluate(mode, angles, &noise, None, decision_tol)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AngleSlot {
    Alpha1,
    Alpha2,
    Beta1,
    Beta2,
}

impl std::str::FromStr for AngleSlot {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a1" | "alpha1" => Ok(AngleSlot::Alpha1),
            "a2" | "alpha2" => Ok(AngleSlot::Alpha2),
            "b1" | "beta1" => Ok(AngleSlot::Beta1),
            "b2" | "beta2" => Ok(AngleSlot::Beta2),
            other => Err(CliError::Usage(format!("unknown angle `{other}` (a1, a2, b1, b2)"))),
        }
    }
}

/// Moves one analyzer setting over the grid, all else fixed.
pub fn angle_sweep(
    mode: &SpinOrbitMode,
    angles: &AngleSet,
    noise: &NoiseModel,
    slot: AngleSlot,
    grid: Grid,
    decision_tol: f64,
) -> CliResult<Vec<SweepPoint>> {
    grid.values()
        .par_iter()
        .map(|x| {
            let mut a = angles.as_array();
            a[slot as usize] = *x;
            let set = AngleSet::new(a[0], a[1], a[2], a[3])?;
            evaluate(mode, &set, noise, Some(*x), decision_tol)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestFit {
    pub v_beta1: f64,
    pub v_beta2: f64,
    /// Root-mean-square correlator residual at the fit.
    pub rms: f64,
    pub s_chsh: f64,
}

/// Grid point whose correlators are closest to `target` in least squares.
pub fn best_fit(points: &[SweepPoint], target: [f64; 4]) -> Option<BestFit> {
    points
        .iter()
        .map(|p| {
            let ss: f64 = p.correlators.iter().zip(target).map(|(m, t)| (m - t).powi(2)).sum();
            (p, (ss / 4.0).sqrt())
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(p, rms)| BestFit {
            v_beta1: p.v_beta1,
            v_beta2: p.v_beta2,
            rms,
            s_chsh: p.s_chsh,
        })
}

pub fn sweep_csv(points: &[SweepPoint], fit: Option<&BestFit>) -> String {
    let mut s = String::new();
    let with_angle = points.iter().any(|p| p.angle.is_some());
    if with_angle {
        s.push_str("angle_rad,");
    }
    s.push_str("v_beta1,v_beta2,crosstalk,m11,m12,m21,m22,s_chsh,s_kd1,s_kd2,s_kd3,s_kd4,delta0,kd_bound,contextual\n");
    for p in points {
        if let Some(a) = p.angle {
            let _ = write!(s, "{a},");
        }
        let [m11, m12, m21, m22] = p.correlators;
        let [k1, k2, k3, k4] = p.s_kd;
        let _ = writeln!(
            s,
            "{},{},{},{m11},{m12},{m21},{m22},{},{k1},{k2},{k3},{k4},{},{},{}",
            p.v_beta1, p.v_beta2, p.crosstalk, p.s_chsh, p.delta0, p.kd_bound, p.contextual
        );
    }
    if let Some(f) = fit {
        let _ = writeln!(
            s,
            "# best_fit: v_beta1={}, v_beta2={}, rms={}, s_chsh={}",
            f.v_beta1, f.v_beta2, f.rms, f.s_chsh
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomCase {
    pub mode: SpinOrbitMode,
    pub angles: AngleSet,
    pub noise: NoiseModel,
}

/// Case `index` of the stream for `seed`; independent of evaluation order.
pub fn random_case(seed: u64, index: u64) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    loop {
        let mut z = || num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (a, b, c, d) = (z(), z(), z(), z());
        let Ok(mode) = make_mode(a, b, c, d) else { continue };
        let mut angle = || rng.gen_range(-PI..PI);
        let (a1, a2, b1, b2) = (angle(), angle(), angle(), angle());
        let Ok(angles) = AngleSet::new(a1, a2, b1, b2) else { continue };
        if a1 == a2 || b1 == b2 {
            continue;
        }
        let v1 = rng.gen_range(0.5..=1.0);
        let v2 = rng.gen_range(0.5..=1.0);
        let eps = rng.gen_range(0.0..=0.2);
        let noise = NoiseModel::new(v1, v2, eps).expect("sampled inside the valid ranges");
        return RandomCase { mode, angles, noise };
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub index: u64,
    pub margin: f64,
    pub inequality_contextual: bool,
    pub oracle_contextual: bool,
    pub infeasibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheckSummary {
    pub seed: u64,
    pub count: u64,
    /// Cases with `|margin| ≤ band`, excluded from the agreement count.
    pub boundary: u64,
    pub decided: u64,
    pub agreed: u64,
    pub contextual: u64,
    pub disagreements: Vec<CaseOutcome>,
}

impl CrossCheckSummary {
    pub fn all_agree(&self) -> bool {
        self.agreed == self.decided
    }
}

pub fn random_cross_validation(
    seed: u64,
    count: u64,
    band: f64,
    decision_tol: f64,
    feasibility_tol: f64,
) -> CliResult<CrossCheckSummary> {
    let outcomes: Vec<CaseOutcome> = (0..count)
        .into_par_iter()
        .map(|index| {
            let case = random_case(seed, index);
            let table = simulate_table(&case.mode, &case.angles, &case.noise)?;
            let check = cross_validate(&table, decision_tol, feasibility_tol)?;
            Ok(CaseOutcome {
                index,
                margin: check.report.margin,
                inequality_contextual: check.report.contextual,
                oracle_contextual: check.verdict.contextual(),
                infeasibility: check.verdict.infeasibility,
            })
        })
        .collect::<CliResult<_>>()?;
    let mut summary = CrossCheckSummary {
        seed,
        count,
        boundary: 0,
        decided: 0,
        agreed: 0,
        contextual: 0,
        disagreements: Vec::new(),
    };
    for o in outcomes {
        if o.margin.abs() <= band {
            summary.boundary += 1;
            continue;
        }
        summary.decided += 1;
        if o.inequality_contextual {
            summary.contextual += 1;
        }
        if o.inequality_contextual == o.oracle_contextual {
            summary.agreed += 1;
        } else {
            summary.disagreements.push(o);
        }
    }
    Ok(summary)
}

pub fn cross_check_text(s: &CrossCheckSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed: {}", s.seed);
    let _ = writeln!(out, "tables: {}", s.count);
    let _ = writeln!(out, "inside boundary band: {}", s.boundary);
    let _ = writeln!(out, "decided: {} ({} contextual)", s.decided, s.contextual);
    let _ = writeln!(out, "agreeing: {}", s.agreed);
    for d in &s.disagreements {
        let _ = writeln!(
            out,
            "disagreement: case {} margin {:e} inequality={} coupling={} infeasibility {:e}",
            d.index, d.margin, d.inequality_contextual, d.oracle_contextual, d.infeasibility
        );
    }
    out
}
