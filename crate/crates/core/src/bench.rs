//! Optical elements of the measurement bench as operators on mode vectors.
//!
//! Every element acts on the polarization factor, the transverse factor, or
//! both, and is stored as the 4×4 matrix on the `|Hh⟩, |Hv⟩, |Vh⟩, |Vv⟩`
//! basis. Matrix conventions:
//!
//! * half-wave plate at `θ`: reflection `[[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]`
//!   on `(ê_H, ê_V)`;
//! * Dove prism at `θ`: reflection `[[cos 2θ, −sin 2θ], [−sin 2θ, −cos 2θ]]`
//!   on `(h, v)`, i.e. the image flips about the opposite-handed axis;
//! * polarizing beam splitter ports: orthogonal projectors on `ê_H` / `ê_V`.
//!
//! With `HWP@α/2` followed by `DP@β/2`, the prepared `Ψ₋` gives the
//! correlation law `M(α, β) = cos 2(β − α)` and a product `|Hh⟩` gives
//! `cos 2α · cos 2β`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::{bell_mode, BellLabel, ModeVector, Polarization, SpinOrbitMode, HH, HV, VH, VV};

pub type Matrix4 = [[Complex64; 4]; 4];
pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn real2(m: [[f64; 2]; 2]) -> Matrix2 {
    m.map(|row| row.map(|x| Complex64::new(x, 0.0)))
}

const IDENTITY2: Matrix2 = [[ONE, ZERO], [ZERO, ONE]];

/// `polarization ⊗ transverse` with polarization as the outer factor.
pub fn kron(pol: &Matrix2, transverse: &Matrix2) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for p in 0..2 {
        for q in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    out[2 * p + m][2 * q + n] = pol[p][q] * transverse[m][n];
                }
            }
        }
    }
    out
}

fn matmul(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn max_deviation(a: &Matrix4, b: &Matrix4) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    HalfWavePlate,
    DovePrism,
    PbsPort,
    SpatialFilter,
    Identity,
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalElement {
    pub kind: ElementKind,
    pub matrix: Matrix4,
}

impl OpticalElement {
    pub fn identity() -> Self {
        OpticalElement {
            kind: ElementKind::Identity,
            matrix: kron(&IDENTITY2, &IDENTITY2),
        }
    }

    pub fn apply(&self, mode: &ModeVector) -> ModeVector {
        let mut out = ModeVector::zero();
        for i in 0..4 {
            out[i] = (0..4).map(|k| self.matrix[i][k] * mode[k]).sum();
        }
        out
    }

    /// The element obtained by passing through `self` first and `next` second.
    pub fn then(&self, next: &OpticalElement) -> OpticalElement {
        OpticalElement {
            kind: ElementKind::Composite,
            matrix: matmul(&next.matrix, &self.matrix),
        }
    }

    pub fn adjoint(&self) -> OpticalElement {
        let m: Matrix4 = std::array::from_fn(|i| std::array::from_fn(|j| self.matrix[j][i].conj()));
        OpticalElement {
            kind: self.kind,
            matrix: m,
        }
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let product = matmul(&self.adjoint().matrix, &self.matrix);
        max_deviation(&product, &OpticalElement::identity().matrix)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        let squared = matmul(&self.matrix, &self.matrix);
        max_deviation(&squared, &self.matrix) <= tol
            && max_deviation(&self.adjoint().matrix, &self.matrix) <= tol
    }
}

/// Free-function form of [`OpticalElement::apply`].
pub fn apply(element: &OpticalElement, mode: &ModeVector) -> ModeVector {
    element.apply(mode)
}

/// Which of the two transverse analyzer settings a context uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BetaSetting {
    First,
    Second,
}

impl BetaSetting {
    pub fn from_index(j: usize) -> Option<BetaSetting> {
        match j {
            1 => Some(BetaSetting::First),
            2 => Some(BetaSetting::Second),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            BetaSetting::First => 1,
            BetaSetting::Second => 2,
        }
    }
}

/// Bench imperfections: interferometer sorting contrast per transverse
/// setting and polarization crosstalk of a rotated Dove prism.
///
/// `crosstalk` is the intensity fraction of an `ê_H` (or `ê_V`) input that
/// leaves the rotated prism with the orthogonal polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    visibility: [f64; 2],
    crosstalk: f64,
}

impl NoiseModel {
    pub fn new(visibility_beta1: f64, visibility_beta2: f64, crosstalk: f64) -> Result<Self> {
        for (name, value) in [
            ("visibility b1", visibility_beta1),
            ("visibility b2", visibility_beta2),
            ("crosstalk", crosstalk),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::MalformedData(format!(
                    "{name} must lie in [0, 1], got {value}"
                )));
            }
        }
        Ok(NoiseModel {
            visibility: [visibility_beta1, visibility_beta2],
            crosstalk,
        })
    }

    pub const fn ideal() -> Self {
        NoiseModel {
            visibility: [1.0, 1.0],
            crosstalk: 0.0,
        }
    }

    pub fn visibility(&self, setting: BetaSetting) -> f64 {
        self.visibility[setting.index() - 1]
    }

    pub fn crosstalk(&self) -> f64 {
        self.crosstalk
    }

    pub fn is_ideal(&self) -> bool {
        self.visibility == [1.0, 1.0] && self.crosstalk == 0.0
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::ideal()
    }
}

/// Half-wave plate with its fast axis at `theta` from horizontal.
pub fn hwp(theta: f64) -> OpticalElement {
    let (s, c) = (2.0 * theta).sin_cos();
    OpticalElement {
        kind: ElementKind::HalfWavePlate,
        matrix: kron(&real2([[c, s], [s, -c]]), &IDENTITY2),
    }
}

fn is_rotated(theta: f64) -> bool {
    let r = theta.rem_euclid(PI);
    r > 1e-12 && PI - r > 1e-12
}

/// Dove prism rotated by `theta`; the transverse doublet turns by `2θ`.
///
/// A rotated prism (θ not a multiple of π) also leaks the fraction
/// `noise.crosstalk()` of each linear polarization into the orthogonal one,
/// modelled as the retarder `[[√(1−ε), i√ε], [i√ε, √(1−ε)]]`.
pub fn dove_prism(theta: f64, noise: &NoiseModel) -> OpticalElement {
    let (s, c) = (2.0 * theta).sin_cos();
    let transverse = real2([[c, -s], [-s, -c]]);
    let eps = noise.crosstalk();
    let pol = if eps > 0.0 && is_rotated(theta) {
        let keep = Complex64::new((1.0 - eps).sqrt(), 0.0);
        let flip = Complex64::new(0.0, eps.sqrt());
        [[keep, flip], [flip, keep]]
    } else {
        IDENTITY2
    };
    OpticalElement {
        kind: ElementKind::DovePrism,
        matrix: kron(&pol, &transverse),
    }
}

/// Mode cleaner of the preparation stage. The abstract states carry no
/// higher-order content, so it acts as the identity.
pub fn spatial_filter() -> OpticalElement {
    OpticalElement {
        kind: ElementKind::SpatialFilter,
        ..OpticalElement::identity()
    }
}

/// Output of the S-plate for a linearly polarized fundamental Gaussian input.
pub fn s_plate(input: Polarization) -> SpinOrbitMode {
    match input {
        Polarization::V => bell_mode(BellLabel::PsiMinus),
        Polarization::H => bell_mode(BellLabel::PsiPlus),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PbsPort {
    TransmitH,
    ReflectV,
}

impl PbsPort {
    pub fn element(self) -> OpticalElement {
        let pol = match self {
            PbsPort::TransmitH => real2([[1.0, 0.0], [0.0, 0.0]]),
            PbsPort::ReflectV => real2([[0.0, 0.0], [0.0, 1.0]]),
        };
        OpticalElement {
            kind: ElementKind::PbsPort,
            matrix: kron(&pol, &IDENTITY2),
        }
    }
}

/// Unnormalized projected field together with its intensity weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub vector: ModeVector,
    pub weight: f64,
}

pub fn pbs_project(mode: &ModeVector, port: PbsPort) -> Projection {
    let vector = port.element().apply(mode);
    Projection {
        weight: vector.norm_sqr(),
        vector,
    }
}

/// Field content of one interferometer output.
///
/// `sorted` carries the components of the port's own parity and `leaked`
/// the components of the other parity that reach it through imperfect
/// contrast. The two add incoherently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortField {
    pub sorted: ModeVector,
    pub leaked: ModeVector,
}

impl PortField {
    pub fn weight(&self) -> f64 {
        self.sorted.norm_sqr() + self.leaked.norm_sqr()
    }

    /// Intensity leaving the given PBS port placed after this output.
    pub fn port_intensity(&self, port: PbsPort) -> f64 {
        pbs_project(&self.sorted, port).weight + pbs_project(&self.leaked, port).weight
    }
}

/// The two outputs of the parity-sorting interferometer. Even parity is
/// `{Hh, Vv}`, odd parity `{Hv, Vh}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParitySplit {
    pub even: PortField,
    pub odd: PortField,
    pub visibility: f64,
}

impl ParitySplit {
    pub fn total_weight(&self) -> f64 {
        self.even.weight() + self.odd.weight()
    }
}

fn parity_parts(mode: &ModeVector) -> (ModeVector, ModeVector) {
    let mut even = ModeVector::zero();
    let mut odd = ModeVector::zero();
    even[HH] = mode[HH];
    even[VV] = mode[VV];
    odd[HV] = mode[HV];
    odd[VH] = mode[VH];
    (even, odd)
}

/// Parity sorting with sorting contrast `V`: each output receives `(1+V)/2`
/// of its own parity and `(1−V)/2` of the other.
pub fn mzim_sort(mode: &ModeVector, noise: &NoiseModel, setting: BetaSetting) -> ParitySplit {
    let v = noise.visibility(setting);
    let (even, odd) = parity_parts(mode);
    let keep = Complex64::new(((1.0 + v) / 2.0).sqrt(), 0.0);
    let leak = Complex64::new(((1.0 - v) / 2.0).sqrt(), 0.0);
    ParitySplit {
        even: PortField {
            sorted: even.scale(keep),
            leaked: odd.scale(leak),
        },
        odd: PortField {
            sorted: odd.scale(keep),
            leaked: even.scale(leak),
        },
        visibility: v,
    }
}

/// Angles `(α', β')` of the rotated product basis that the bench projects
/// onto when its plate sits at `α/2` and its prism at `β/2`.
///
/// The bench output `I_{s t}` (polarization sign `s`, transverse sign `t`)
/// equals `|d_{t s}(α', β')|²` of [`crate::mode::rotated_decomposition`].
pub fn analyzer_angles(alpha: f64, beta: f64) -> (f64, f64) {
    (PI / 2.0 - alpha, PI / 2.0 + beta)
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ElementKind::HalfWavePlate => "HWP",
            ElementKind::DovePrism => "DP",
            ElementKind::PbsPort => "PBS",
            ElementKind::SpatialFilter => "SF",
            ElementKind::Identity => "I",
            ElementKind::Composite => "composite",
        };
        f.write_str(s)
    }
}
