//! The four reference experiments: CHSH and KD runs on the maximally
//! non-separable mode and on the separable mode.

use std::fmt;
use std::str::FromStr;

use spinorbit::bench::{pbs_project, s_plate, PbsPort};
use spinorbit::mode::{Polarization, SpinOrbitMode};
use spinorbit::simulate_table;

use crate::config::{ModeSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::report::ReportBundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    ChshNonseparable,
    ChshSeparable,
    KdNonseparable,
    KdSeparable,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::ChshNonseparable,
        Preset::ChshSeparable,
        Preset::KdNonseparable,
        Preset::KdSeparable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::ChshNonseparable => "chsh-nonseparable",
            Preset::ChshSeparable => "chsh-separable",
            Preset::KdNonseparable => "kd-nonseparable",
            Preset::KdSeparable => "kd-separable",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Preset::ChshNonseparable => "CHSH inequality, maximally non-separable mode",
            Preset::ChshSeparable => "CHSH inequality, separable mode",
            Preset::KdNonseparable => "KD inequalities, maximally non-separable mode",
            Preset::KdSeparable => "KD inequalities, separable mode",
        }
    }

    pub fn nonseparable(self) -> bool {
        matches!(self, Preset::ChshNonseparable | Preset::KdNonseparable)
    }

    /// Prepares the input the way the bench does: a V-polarized beam through
    /// the S-plate, and for the separable runs a PBS that keeps the
    /// transmitted `|Hh⟩` component.
    pub fn prepare(self) -> CliResult<SpinOrbitMode> {
        let vortex = s_plate(Polarization::V);
        if self.nonseparable() {
            return Ok(vortex);
        }
        Ok(pbs_project(vortex.as_vector(), PbsPort::TransmitH).vector.normalize()?)
    }

    pub fn mode_spec(self) -> ModeSpec {
        if self.nonseparable() {
            ModeSpec::Bell(spinorbit::BellLabel::PsiMinus)
        } else {
            ModeSpec::Separable
        }
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                CliError::Usage(format!("unknown preset `{s}` (one of {})", names.join(", ")))
            })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Angles, noise and tolerances come from `config`; its mode is replaced by
/// the preset's prepared mode.
pub fn run_preset(preset: Preset, config: &RunConfig) -> CliResult<ReportBundle> {
    let mode = preset.prepare()?;
    let table = simulate_table(&mode, &config.angles, &config.noise)?;
    let mut echo = RunConfig {
        mode: preset.mode_spec(),
        ..config.clone()
    }
    .echo();
    echo.insert("preset".into(), preset.name().into());
    ReportBundle::build(preset.title(), table, config.decision_tol, config.feasibility_tol, echo)
}
