//! Four-output intensity records and their reduction to correlators.
//!
//! Port mapping after the parity sorter: the even output's PBS transmits
//! `|Hh⟩` (`I₊₊`) and reflects `|Vv⟩` (`I₋₋`); the odd output's PBS transmits
//! `|Hv⟩` (`I₊₋`) and reflects `|Vh⟩` (`I₋₊`). The first sign is the
//! polarization outcome `A`, the second the transverse outcome `B`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bench::{dove_prism, hwp, mzim_sort, BetaSetting, NoiseModel, PbsPort};
use crate::error::{Error, Result};
use crate::mode::{ModeVector, SpinOrbitMode};

/// Tolerance on `Σ I = 1` for a record to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Angles closer than this are treated as the same analyzer setting.
pub const ANGLE_MATCH_TOL: f64 = 1e-12;

/// One measurement context `(α_i, β_j)`, `i, j ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Context {
    pub i: usize,
    pub j: usize,
}

impl Context {
    pub const ALL: [Context; 4] = [
        Context { i: 1, j: 1 },
        Context { i: 1, j: 2 },
        Context { i: 2, j: 1 },
        Context { i: 2, j: 2 },
    ];

    /// Position of the context in [`Context::ALL`].
    pub fn slot(self) -> usize {
        2 * (self.i - 1) + (self.j - 1)
    }

    pub fn beta_setting(self) -> BetaSetting {
        BetaSetting::from_index(self.j).expect("context indices are 1 or 2")
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(α{},β{})", self.i, self.j)
    }
}

/// Analyzer angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSet {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl AngleSet {
    /// The CHSH-optimal set `α₁ = π/8, α₂ = 3π/8, β₁ = 0, β₂ = π/4`.
    pub const fn preset() -> Self {
        AngleSet {
            alpha1: PI / 8.0,
            alpha2: 3.0 * PI / 8.0,
            beta1: 0.0,
            beta2: PI / 4.0,
        }
    }

    pub fn new(alpha1: f64, alpha2: f64, beta1: f64, beta2: f64) -> Result<Self> {
        let set = AngleSet {
            alpha1,
            alpha2,
            beta1,
            beta2,
        };
        if set.as_array().iter().any(|a| !a.is_finite()) {
            return Err(Error::MalformedData(format!("angles must be finite: {set:?}")));
        }
        Ok(set)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha1, self.alpha2, self.beta1, self.beta2]
    }

    pub fn alpha(&self, i: usize) -> f64 {
        if i == 1 {
            self.alpha1
        } else {
            self.alpha2
        }
    }

    pub fn beta(&self, j: usize) -> f64 {
        if j == 1 {
            self.beta1
        } else {
            self.beta2
        }
    }

    pub fn context_angles(&self, ctx: Context) -> (f64, f64) {
        (self.alpha(ctx.i), self.beta(ctx.j))
    }

    /// The context whose angles match `(alpha, beta)`, if any.
    pub fn locate(&self, alpha: f64, beta: f64) -> Option<Context> {
        Context::ALL.into_iter().find(|ctx| {
            let (a, b) = self.context_angles(*ctx);
            (a - alpha).abs() <= ANGLE_MATCH_TOL && (b - beta).abs() <= ANGLE_MATCH_TOL
        })
    }
}

impl Default for AngleSet {
    fn default() -> Self {
        AngleSet::preset()
    }
}

/// Normalized intensities of the four outputs for one context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord")]
pub struct IntensityRecord {
    alpha: f64,
    beta: f64,
    i_pp: f64,
    i_pm: f64,
    i_mp: f64,
    i_mm: f64,
}

#[derive(Deserialize)]
struct RawRecord {
    alpha: f64,
    beta: f64,
    i_pp: f64,
    i_pm: f64,
    i_mp: f64,
    i_mm: f64,
}

impl TryFrom<RawRecord> for IntensityRecord {
    type Error = Error;

    fn try_from(raw: RawRecord) -> Result<Self> {
        normalize_record([raw.i_pp, raw.i_pm, raw.i_mp, raw.i_mm], raw.alpha, raw.beta)
    }
}

impl IntensityRecord {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn i_pp(&self) -> f64 {
        self.i_pp
    }

    pub fn i_pm(&self) -> f64 {
        self.i_pm
    }

    pub fn i_mp(&self) -> f64 {
        self.i_mp
    }

    pub fn i_mm(&self) -> f64 {
        self.i_mm
    }

    /// `[I₊₊, I₊₋, I₋₊, I₋₋]`.
    pub fn intensities(&self) -> [f64; 4] {
        [self.i_pp, self.i_pm, self.i_mp, self.i_mm]
    }

    pub fn total(&self) -> f64 {
        self.intensities().iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.intensities().iter().all(|x| *x >= 0.0)
            && (self.total() - 1.0).abs() <= NORMALIZATION_TOL
    }
}

/// Divides four raw port intensities by their sum.
pub fn normalize_record(raw: [f64; 4], alpha: f64, beta: f64) -> Result<IntensityRecord> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::MalformedData(format!(
            "non-finite angle ({alpha}, {beta})"
        )));
    }
    for (label, value) in ["i_pp", "i_pm", "i_mp", "i_mm"].iter().zip(raw) {
        if !value.is_finite() {
            return Err(Error::MalformedData(format!("{label} is not finite: {value}")));
        }
        if value < 0.0 {
            return Err(Error::MalformedData(format!("{label} is negative: {value}")));
        }
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateRecord { alpha, beta });
    }
    let [i_pp, i_pm, i_mp, i_mm] = raw.map(|x| x / total);
    Ok(IntensityRecord {
        alpha,
        beta,
        i_pp,
        i_pm,
        i_mp,
        i_mm,
    })
}

/// Record with prescribed marginals `⟨A⟩ = a`, `⟨B⟩ = b` and correlator
/// `⟨AB⟩ = m`.
pub fn record_from_moments(alpha: f64, beta: f64, a: f64, b: f64, m: f64) -> Result<IntensityRecord> {
    let raw = [
        (1.0 + a + b + m) / 4.0,
        (1.0 + a - b - m) / 4.0,
        (1.0 - a + b - m) / 4.0,
        (1.0 - a - b + m) / 4.0,
    ];
    if raw.iter().any(|x| *x < -1e-15) {
        return Err(Error::MalformedData(format!(
            "moments (a={a}, b={b}, m={m}) do not define a probability distribution"
        )));
    }
    normalize_record(raw.map(|x| x.max(0.0)), alpha, beta)
}

/// Runs one context through the bench: `HWP@α/2`, `DP@β/2`, parity sorter,
/// then the two output PBSs.
pub fn measure_intensities(
    mode: &SpinOrbitMode,
    alpha: f64,
    beta: f64,
    setting: BetaSetting,
    noise: &NoiseModel,
) -> Result<IntensityRecord> {
    let field: ModeVector = *mode.as_vector();
    let field = hwp(alpha / 2.0).apply(&field);
    let field = dove_prism(beta / 2.0, noise).apply(&field);
    let split = mzim_sort(&field, noise, setting);
    let raw = [
        split.even.port_intensity(PbsPort::TransmitH),
        split.odd.port_intensity(PbsPort::TransmitH),
        split.odd.port_intensity(PbsPort::ReflectV),
        split.even.port_intensity(PbsPort::ReflectV),
    ];
    normalize_record(raw, alpha, beta)
}

/// `M = I₊₊ + I₋₋ − I₊₋ − I₋₊`.
pub fn correlation_m(record: &IntensityRecord) -> f64 {
    record.i_pp + record.i_mm - record.i_pm - record.i_mp
}

/// Single-side expectations and the joint correlator of one context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectations {
    pub a: f64,
    pub b: f64,
    pub ab: f64,
}

pub fn expectations(record: &IntensityRecord) -> Expectations {
    Expectations {
        a: record.i_pp - record.i_mm + record.i_pm - record.i_mp,
        b: record.i_pp - record.i_mm - record.i_pm + record.i_mp,
        ab: correlation_m(record),
    }
}

/// The four records of a 2×2 experiment, indexed by [`Context`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    angles: AngleSet,
    records: [Option<IntensityRecord>; 4],
}

impl ExperimentTable {
    pub fn new(angles: AngleSet) -> Self {
        ExperimentTable {
            angles,
            records: [None; 4],
        }
    }

    pub fn from_records(
        angles: AngleSet,
        records: impl IntoIterator<Item = IntensityRecord>,
    ) -> Result<Self> {
        let mut table = ExperimentTable::new(angles);
        for r in records {
            table.insert(r)?;
        }
        Ok(table)
    }

    pub fn angles(&self) -> &AngleSet {
        &self.angles
    }

    /// Places a record in the slot of the context its angles belong to.
    pub fn insert(&mut self, record: IntensityRecord) -> Result<Context> {
        let ctx = self
            .angles
            .locate(record.alpha, record.beta)
            .ok_or(Error::UnknownContext {
                alpha: record.alpha,
                beta: record.beta,
            })?;
        let slot = &mut self.records[ctx.slot()];
        if slot.is_some() {
            return Err(Error::DuplicateContext(ctx));
        }
        *slot = Some(record);
        Ok(ctx)
    }

    pub fn get(&self, ctx: Context) -> Option<&IntensityRecord> {
        self.records[ctx.slot()].as_ref()
    }

    pub fn record(&self, ctx: Context) -> Result<&IntensityRecord> {
        self.get(ctx).ok_or(Error::IncompleteTable(ctx))
    }

    pub fn is_complete(&self) -> bool {
        self.records.iter().all(Option::is_some)
    }

    /// All four records in [`Context::ALL`] order.
    pub fn complete_records(&self) -> Result<[IntensityRecord; 4]> {
        let mut out = [self.record(Context::ALL[0])?.to_owned(); 4];
        for ctx in Context::ALL {
            out[ctx.slot()] = *self.record(ctx)?;
        }
        Ok(out)
    }

    /// Relabels the `±` outcomes of one measured property in every context
    /// where it appears.
    pub fn flip(&self, property: Property) -> ExperimentTable {
        let mut out = self.clone();
        for ctx in Context::ALL {
            let Some(r) = out.records[ctx.slot()].as_mut() else {
                continue;
            };
            match property {
                Property::A(i) if ctx.i == i => {
                    std::mem::swap(&mut r.i_pp, &mut r.i_mp);
                    std::mem::swap(&mut r.i_pm, &mut r.i_mm);
                }
                Property::B(j) if ctx.j == j => {
                    std::mem::swap(&mut r.i_pp, &mut r.i_pm);
                    std::mem::swap(&mut r.i_mp, &mut r.i_mm);
                }
                _ => {}
            }
        }
        out
    }
}

/// A measured property: polarization analyzer `A_i` or transverse analyzer
/// `B_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Property {
    A(usize),
    B(usize),
}

/// Simulates all four contexts of an angle set.
pub fn simulate_table(
    mode: &SpinOrbitMode,
    angles: &AngleSet,
    noise: &NoiseModel,
) -> Result<ExperimentTable> {
    let mut table = ExperimentTable::new(*angles);
    for ctx in Context::ALL {
        let (alpha, beta) = angles.context_angles(ctx);
        let record = measure_intensities(mode, alpha, beta, ctx.beta_setting(), noise)?;
        table.records[ctx.slot()] = Some(record);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextCorrelation {
    pub context: Context,
    pub m: f64,
    pub a: f64,
    pub b: f64,
    pub ab: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSet {
    pub entries: [ContextCorrelation; 4],
}

impl CorrelationSet {
    pub fn get(&self, ctx: Context) -> &ContextCorrelation {
        &self.entries[ctx.slot()]
    }

    pub fn m_values(&self) -> [f64; 4] {
        self.entries.map(|e| e.m)
    }
}

pub fn correlation_set(table: &ExperimentTable) -> Result<CorrelationSet> {
    let records = table.complete_records()?;
    let entries = Context::ALL.map(|ctx| {
        let r = &records[ctx.slot()];
        let e = expectations(r);
        ContextCorrelation {
            context: ctx,
            m: correlation_m(r),
            a: e.a,
            b: e.b,
            ab: e.ab,
        }
    });
    Ok(CorrelationSet { entries })
}
