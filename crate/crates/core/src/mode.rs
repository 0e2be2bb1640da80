//! Spin-orbit mode vectors.
//!
//! A spin-orbit mode lives in the tensor product of the linear polarization
//! doublet `{ê_H, ê_V}` and the first-order Hermite-Gaussian doublet
//! `{HG10 = h, HG01 = v}`. Amplitudes are stored in the fixed order
//! `|Hh⟩, |Hv⟩, |Vh⟩, |Vv⟩`, which is also the logical order
//! `|00⟩, |01⟩, |10⟩, |11⟩` (polarization is the first qubit).
//!
//! The field expansion `c1·HG01·ê_V + c2·HG01·ê_H + c3·HG10·ê_V + c4·HG10·ê_H`
//! maps onto this storage as `c1 = a_vv`, `c2 = a_hv`, `c3 = a_vh`,
//! `c4 = a_hh`.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HH: usize = 0;
pub const HV: usize = 1;
pub const VH: usize = 2;
pub const VV: usize = 3;

/// Linear polarization of a beam component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Index of the basis component with the given polarization and transverse
/// mode (`horizontal_mode` selects `h = HG10` over `v = HG01`).
pub const fn basis_index(pol: Polarization, horizontal_mode: bool) -> usize {
    let p = match pol {
        Polarization::H => 0,
        Polarization::V => 1,
    };
    2 * p + if horizontal_mode { 0 } else { 1 }
}

/// Unnormalized four-component field amplitude vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeVector(pub [Complex64; 4]);

impl ModeVector {
    pub const fn zero() -> Self {
        ModeVector([Complex64::new(0.0, 0.0); 4])
    }

    pub fn from_real(values: [f64; 4]) -> Self {
        ModeVector(values.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Per-component intensities `|a_k|²`.
    pub fn intensities(&self) -> [f64; 4] {
        self.0.map(|c| c.norm_sqr())
    }

    /// Hermitian inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &ModeVector) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, factor: Complex64) -> ModeVector {
        ModeVector(self.0.map(|c| c * factor))
    }

    pub fn normalize(&self) -> Result<SpinOrbitMode> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroMode);
        }
        Ok(SpinOrbitMode(ModeVector(self.0.map(|c| c / norm))))
    }
}

impl Index<usize> for ModeVector {
    type Output = Complex64;

    fn index(&self, index: usize) -> &Complex64 {
        &self.0[index]
    }
}

impl IndexMut<usize> for ModeVector {
    fn index_mut(&mut self, index: usize) -> &mut Complex64 {
        &mut self.0[index]
    }
}

/// A normalized spin-orbit mode.
///
/// The only ways to obtain one are [`make_mode`], [`bell_mode`],
/// [`ModeVector::normalize`] and the bench sources, so the unit norm holds
/// for every value of this type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModeVector", into = "ModeVector")]
pub struct SpinOrbitMode(ModeVector);

impl SpinOrbitMode {
    pub fn a_hh(&self) -> Complex64 {
        self.0[HH]
    }

    pub fn a_hv(&self) -> Complex64 {
        self.0[HV]
    }

    pub fn a_vh(&self) -> Complex64 {
        self.0[VH]
    }

    pub fn a_vv(&self) -> Complex64 {
        self.0[VV]
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.0 .0
    }

    pub fn as_vector(&self) -> &ModeVector {
        &self.0
    }

    /// Global-phase-insensitive overlap `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &SpinOrbitMode) -> f64 {
        self.0.inner(&other.0).norm()
    }

    /// True when the two modes agree up to a global phase.
    pub fn same_ray(&self, other: &SpinOrbitMode, tol: f64) -> bool {
        (1.0 - self.overlap(other)).abs() <= tol
    }
}

impl From<SpinOrbitMode> for ModeVector {
    fn from(mode: SpinOrbitMode) -> Self {
        mode.0
    }
}

impl TryFrom<ModeVector> for SpinOrbitMode {
    type Error = Error;

    fn try_from(vector: ModeVector) -> Result<Self> {
        vector.normalize()
    }
}

impl fmt::Display for SpinOrbitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = ["Hh", "Hv", "Vh", "Vv"];
        let mut first = true;
        for (label, c) in labels.iter().zip(self.0 .0.iter()) {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|{}⟩", c.re, c.im, label)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Builds a normalized mode from raw amplitudes, preserving relative phases.
pub fn make_mode(
    a_hh: Complex64,
    a_hv: Complex64,
    a_vh: Complex64,
    a_vv: Complex64,
) -> Result<SpinOrbitMode> {
    ModeVector([a_hh, a_hv, a_vh, a_vv]).normalize()
}

/// The four maximally non-separable Bell-analogue modes.
///
/// `Ψ±` carry radial polarization and `Φ±` azimuthal polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellLabel {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PsiPlus => "psi-plus",
            BellLabel::PsiMinus => "psi-minus",
            BellLabel::PhiPlus => "phi-plus",
            BellLabel::PhiMinus => "phi-minus",
        }
    }

    pub fn from_name(name: &str) -> Option<BellLabel> {
        BellLabel::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(name))
    }
}

pub fn bell_mode(label: BellLabel) -> SpinOrbitMode {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = ModeVector::zero();
    match label {
        // HG10·ê_H ± HG01·ê_V
        BellLabel::PsiPlus => {
            v[HH] = r.into();
            v[VV] = r.into();
        }
        BellLabel::PsiMinus => {
            v[HH] = r.into();
            v[VV] = (-r).into();
        }
        // HG10·ê_V ± HG01·ê_H
        BellLabel::PhiPlus => {
            v[VH] = r.into();
            v[HV] = r.into();
        }
        BellLabel::PhiMinus => {
            v[VH] = r.into();
            v[HV] = (-r).into();
        }
    }
    SpinOrbitMode(v)
}

/// Non-separability `C = 2|c1·c4 − c2·c3| = 2|a_vv·a_hh − a_hv·a_vh|`.
pub fn concurrence(mode: &SpinOrbitMode) -> f64 {
    let c = 2.0 * (mode.a_vv() * mode.a_hh() - mode.a_hv() * mode.a_vh()).norm();
    c.min(1.0)
}

/// Coefficients of a mode on the rotated product basis
/// `{HG₊ê_{α+}, HG₊ê_{α−}, HG₋ê_{α+}, HG₋ê_{α−}}`.
///
/// The first sign of each coefficient name labels the transverse factor and
/// the second the polarization factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedDecomposition {
    pub alpha: f64,
    pub beta: f64,
    pub d_pp: Complex64,
    pub d_pm: Complex64,
    pub d_mp: Complex64,
    pub d_mm: Complex64,
}

impl RotatedDecomposition {
    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.d_pp, self.d_pm, self.d_mp, self.d_mm]
    }

    pub fn intensities(&self) -> [f64; 4] {
        self.coefficients().map(|c| c.norm_sqr())
    }

    /// `|d_pp|² + |d_mm|² − |d_pm|² − |d_mp|²`.
    pub fn correlation(&self) -> f64 {
        let [pp, pm, mp, mm] = self.intensities();
        pp + mm - pm - mp
    }
}

/// Rotated polarization basis vectors on `(ê_H, ê_V)` components:
/// `ê_{α+} = cos α·ê_V + sin α·ê_H`, `ê_{α−} = −sin α·ê_V + cos α·ê_H`.
pub fn polarization_basis(alpha: f64) -> [[f64; 2]; 2] {
    let (s, c) = alpha.sin_cos();
    [[s, c], [c, -s]]
}

/// Rotated transverse basis vectors on `(h, v)` components:
/// `HG₊ = cos β·HG01 + sin β·HG10`, `HG₋ = sin β·HG01 − cos β·HG10`.
pub fn transverse_basis(beta: f64) -> [[f64; 2]; 2] {
    let (s, c) = beta.sin_cos();
    [[s, c], [-c, s]]
}

pub fn rotated_decomposition(mode: &SpinOrbitMode, alpha: f64, beta: f64) -> RotatedDecomposition {
    let pol = polarization_basis(alpha);
    let tr = transverse_basis(beta);
    let a = mode.amplitudes();
    // ⟨HG_t ê_s | ψ⟩ with real basis vectors.
    let coeff = |t: usize, s: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..2 {
            for m in 0..2 {
                acc += a[2 * p + m] * (pol[s][p] * tr[t][m]);
            }
        }
        acc
    };
    RotatedDecomposition {
        alpha,
        beta,
        d_pp: coeff(0, 0),
        d_pm: coeff(0, 1),
        d_mp: coeff(1, 0),
        d_mm: coeff(1, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn basis_vector_is_already_normalized() {
        let m = make_mode(c(1.0), c(0.0), c(0.0), c(0.0)).unwrap();
        assert_eq!(m.a_hh(), c(1.0));
        assert!((m.as_vector().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_invariance() {
        let a = make_mode(c(2.0), c(0.0), c(0.0), c(0.0)).unwrap();
        let b = make_mode(c(1.0), c(0.0), c(0.0), c(0.0)).unwrap();
        assert!(a.same_ray(&b, 1e-12));
    }

    #[test]
    fn hh_minus_vv_is_psi_minus() {
        let m = make_mode(c(1.0), c(0.0), c(0.0), c(-1.0)).unwrap();
        assert!((m.a_hh().re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((m.a_vv().re + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(m.same_ray(&bell_mode(BellLabel::PsiMinus), 1e-12));
    }

    #[test]
    fn zero_mode_is_rejected() {
        let z = c(0.0);
        assert_eq!(make_mode(z, z, z, z), Err(Error::ZeroMode));
    }

    #[test]
    fn relative_phase_survives_normalization() {
        let m = make_mode(c(3.0), Complex64::new(0.0, 3.0), c(0.0), c(0.0)).unwrap();
        let ratio = m.a_hv() / m.a_hh();
        assert!((ratio - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn bell_modes_match_their_definitions() {
        let psi_m = bell_mode(BellLabel::PsiMinus);
        assert_eq!(psi_m.a_hh().re, FRAC_1_SQRT_2);
        assert_eq!(psi_m.a_vv().re, -FRAC_1_SQRT_2);
        let phi_p = bell_mode(BellLabel::PhiPlus);
        assert_eq!(phi_p.a_hv().re, FRAC_1_SQRT_2);
        assert_eq!(phi_p.a_vh().re, FRAC_1_SQRT_2);
        let phi_m = bell_mode(BellLabel::PhiMinus);
        assert_eq!(phi_m.a_vh().re, FRAC_1_SQRT_2);
        assert_eq!(phi_m.a_hv().re, -FRAC_1_SQRT_2);
    }

    #[test]
    fn bell_modes_are_orthonormal_and_maximally_nonseparable() {
        for (i, a) in BellLabel::ALL.iter().enumerate() {
            let ma = bell_mode(*a);
            assert!((concurrence(&ma) - 1.0).abs() < 1e-12);
            for (j, b) in BellLabel::ALL.iter().enumerate() {
                let ov = ma.overlap(&bell_mode(*b));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ov - expected).abs() < 1e-12, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn label_names_round_trip() {
        for l in BellLabel::ALL {
            assert_eq!(BellLabel::from_name(l.name()), Some(l));
        }
        assert_eq!(BellLabel::from_name("Psi-Minus"), Some(BellLabel::PsiMinus));
        assert_eq!(BellLabel::from_name("chi"), None);
    }

    #[test]
    fn separable_mode_has_zero_concurrence() {
        let m = make_mode(c(1.0), c(0.0), c(0.0), c(0.0)).unwrap();
        assert_eq!(concurrence(&m), 0.0);
    }

    #[test]
    fn psi_plus_aligned_analyzers_see_only_diagonal_terms() {
        let psi = bell_mode(BellLabel::PsiPlus);
        for &angle in &[0.0, 0.3, 1.1, -2.0] {
            let d = rotated_decomposition(&psi, angle, angle);
            let [pp, pm, mp, mm] = d.intensities();
            assert!((pp + mm - 1.0).abs() < 1e-12);
            assert!(pm < 1e-12 && mp < 1e-12);
        }
    }

    #[test]
    fn zero_rotation_is_a_signed_permutation() {
        let m = make_mode(c(0.1), Complex64::new(0.2, 0.3), c(-0.4), Complex64::new(0.0, 0.5)).unwrap();
        let d = rotated_decomposition(&m, 0.0, 0.0);
        let got = d.intensities();
        let a = m.as_vector().intensities();
        // pp ↔ Vv, pm ↔ Hv, mp ↔ Vh, mm ↔ Hh
        let want = [a[VV], a[HV], a[VH], a[HH]];
        for k in 0..4 {
            assert!((got[k] - want[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn quarter_turn_offset_spreads_psi_plus_evenly() {
        let d = rotated_decomposition(&bell_mode(BellLabel::PsiPlus), 0.0, FRAC_PI_4);
        for i in d.intensities() {
            assert!((i - 0.25).abs() < 1e-12);
        }
    }
}
