//! Run configuration assembled from a flat `key = value` file and flags.
//!
//! Both sources are reduced to the same string map before validation, so a
//! value means the same thing wherever it comes from. Flags win.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use spinorbit::mode::{bell_mode, make_mode, BellLabel, SpinOrbitMode};
use spinorbit::{AngleSet, BetaSetting, NoiseModel, DEFAULT_DECISION_TOL, DEFAULT_FEASIBILITY_TOL};

use crate::error::{CliError, CliResult};

pub const KEYS: [&str; 9] = [
    "mode",
    "angles",
    "units",
    "visibility",
    "crosstalk",
    "decision_tol",
    "feasibility_tol",
    "format",
    "seed",
];

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeSpec {
    Bell(BellLabel),
    /// The product mode `|Hh⟩`.
    Separable,
    /// Amplitudes in the order `Hh, Hv, Vh, Vv`; normalized on use.
    Amplitudes([Complex64; 4]),
}

impl ModeSpec {
    pub fn build(&self) -> CliResult<SpinOrbitMode> {
        match self {
            ModeSpec::Bell(label) => Ok(bell_mode(*label)),
            ModeSpec::Separable => Ok(make_mode(1.0.into(), 0.0.into(), 0.0.into(), 0.0.into())?),
            ModeSpec::Amplitudes([a, b, c, d]) => Ok(make_mode(*a, *b, *c, *d)?),
        }
    }
}

impl FromStr for ModeSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let s = s.trim();
        if let Some(label) = BellLabel::from_name(s) {
            return Ok(ModeSpec::Bell(label));
        }
        if s.eq_ignore_ascii_case("hh") || s.eq_ignore_ascii_case("separable") {
            return Ok(ModeSpec::Separable);
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(CliError::Usage(format!(
                "mode `{s}` is neither a known mode name nor four comma-separated amplitudes"
            )));
        }
        let mut amps = [Complex64::new(0.0, 0.0); 4];
        for (slot, text) in amps.iter_mut().zip(&parts) {
            *slot = Complex64::from_str(text)
                .map_err(|_| CliError::Usage(format!("cannot parse amplitude `{text}`")))?;
            if !slot.re.is_finite() || !slot.im.is_finite() {
                return Err(CliError::Usage(format!("amplitude `{text}` is not finite")));
            }
        }
        if amps.iter().all(|a| a.norm_sqr() == 0.0) {
            return Err(CliError::Usage("all four amplitudes are zero".into()));
        }
        Ok(ModeSpec::Amplitudes(amps))
    }
}

impl fmt::Display for ModeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeSpec::Bell(label) => f.write_str(label.name()),
            ModeSpec::Separable => f.write_str("hh"),
            ModeSpec::Amplitudes(a) => write!(f, "{},{},{},{}", a[0], a[1], a[2], a[3]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Plain,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" | "plain-table" | "table" => Ok(OutputFormat::Plain),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::Usage(format!("unknown output format `{other}` (plain, csv, json)"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Plain => "plain",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: ModeSpec,
    /// Always radians; degree input is converted while parsing.
    pub angles: AngleSet,
    pub noise: NoiseModel,
    pub decision_tol: f64,
    pub feasibility_tol: f64,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: ModeSpec::Bell(BellLabel::PsiMinus),
            angles: AngleSet::preset(),
            noise: NoiseModel::ideal(),
            decision_tol: DEFAULT_DECISION_TOL,
            feasibility_tol: DEFAULT_FEASIBILITY_TOL,
            format: OutputFormat::Plain,
            seed: DEFAULT_SEED,
        }
    }
}

impl RunConfig {
    /// Validates a merged settings map; absent keys keep their defaults.
    pub fn from_settings(settings: &BTreeMap<String, String>) -> CliResult<Self> {
        if let Some(key) = settings.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown configuration key `{key}`")));
        }
        let mut cfg = RunConfig::default();
        if let Some(v) = settings.get("mode") {
            cfg.mode = v.parse()?;
        }
        let degrees = match settings.get("units").map(|u| u.trim().to_ascii_lowercase()) {
            None => false,
            Some(u) if u == "rad" || u == "radians" => false,
            Some(u) if u == "deg" || u == "degrees" => true,
            Some(u) => return Err(CliError::Usage(format!("unknown angle unit `{u}` (rad, deg)"))),
        };
        if let Some(v) = settings.get("angles") {
            cfg.angles = parse_angles(v, degrees)?;
        }
        let crosstalk = match settings.get("crosstalk") {
            Some(v) => parse_number("crosstalk", v)?,
            None => 0.0,
        };
        let visibility = match settings.get("visibility") {
            Some(v) => parse_visibility(v)?,
            None => [1.0, 1.0],
        };
        cfg.noise = NoiseModel::new(visibility[0], visibility[1], crosstalk)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(v) = settings.get("decision_tol") {
            cfg.decision_tol = parse_tolerance("decision_tol", v)?;
        }
        if let Some(v) = settings.get("feasibility_tol") {
            cfg.feasibility_tol = parse_tolerance("feasibility_tol", v)?;
        }
        if let Some(v) = settings.get("format") {
            cfg.format = v.parse()?;
        }
        if let Some(v) = settings.get("seed") {
            cfg.seed = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("seed `{v}` is not an unsigned integer")))?;
        }
        Ok(cfg)
    }

    /// Flat rendering used in report provenance; radians, full precision.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let a = self.angles.as_array();
        let mut out = BTreeMap::new();
        out.insert("mode".into(), self.mode.to_string());
        out.insert("angles".into(), format!("{},{},{},{}", a[0], a[1], a[2], a[3]));
        out.insert(
            "visibility".into(),
            format!("b1={},b2={}", self.noise.visibility(BetaSetting::First), self.noise.visibility(BetaSetting::Second)),
        );
        out.insert("crosstalk".into(), self.noise.crosstalk().to_string());
        out.insert("decision_tol".into(), self.decision_tol.to_string());
        out.insert("feasibility_tol".into(), self.feasibility_tol.to_string());
        out.insert("seed".into(), self.seed.to_string());
        out
    }
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected `key = value`", n + 1)));
        };
        let key = key.trim().replace('-', "_");
        let key = match key.as_str() {
            "tol_decision" => "decision_tol".to_string(),
            "tol_feasibility" => "feasibility_tol".to_string(),
            _ => key,
        };
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", n + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: `{key}` set twice", n + 1)));
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text)
}

fn parse_number(name: &str, text: &str) -> CliResult<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{name} `{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("{name} must be finite")));
    }
    Ok(v)
}

fn parse_tolerance(name: &str, text: &str) -> CliResult<f64> {
    let v = parse_number(name, text)?;
    if v <= 0.0 {
        return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
    }
    Ok(v)
}

pub fn parse_angles(text: &str, degrees: bool) -> CliResult<AngleSet> {
    let values: Vec<f64> = text
        .split(',')
        .map(|p| parse_number("angle", p))
        .collect::<CliResult<_>>()?;
    let [a1, a2, b1, b2] = values[..] else {
        return Err(CliError::Usage(format!(
            "--angles takes four values a1,a2,b1,b2, got {}",
            values.len()
        )));
    };
    let scale = if degrees { PI / 180.0 } else { 1.0 };
    if a1 == a2 || b1 == b2 {
        return Err(CliError::Usage("the two settings on each side must differ".into()));
    }
    AngleSet::new(a1 * scale, a2 * scale, b1 * scale, b2 * scale).map_err(|e| CliError::Usage(e.to_string()))
}

/// Accepts `b1=V1,b2=V2` or a single value applied to both settings.
pub fn parse_visibility(text: &str) -> CliResult<[f64; 2]> {
    if !text.contains('=') {
        let v = parse_number("visibility", text)?;
        return Ok([v, v]);
    }
    let mut out = [1.0, 1.0];
    let mut seen = [false; 2];
    for part in text.split(',') {
        let Some((key, value)) = part.split_once('=') else {
            return Err(CliError::Usage(format!("visibility entry `{part}` is not `bN=V`")));
        };
        let slot = match key.trim() {
            "b1" => 0,
            "b2" => 1,
            other => return Err(CliError::Usage(format!("unknown visibility setting `{other}` (b1, b2)"))),
        };
        if seen[slot] {
            return Err(CliError::Usage(format!("visibility for {} given twice", key.trim())));
        }
        seen[slot] = true;
        out[slot] = parse_number("visibility", value)?;
    }
    Ok(out)
}
