//! Argument parsing and subcommand dispatch.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{read_config_file, OutputFormat, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::ingest_file;
use crate::presets::{run_preset, Preset};
use crate::report::{emit_report, ReportBundle};
use crate::sweep::{
    angle_sweep, best_fit, cross_check_text, random_cross_validation, sweep_csv, visibility_sweep,
    AngleSlot, Grid, REFERENCE_CORRELATORS,
};

#[derive(Debug, Parser)]
#[command(name = "spinorbit", version, about = "Simulate polarization and transverse-mode analyzers and test CHSH and KD inequalities")]
pub struct Cli {
    #[command(flatten)]
    pub opts: SharedOpts,

    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Values stay as text until merged with
/// the config file, so both sources are validated identically.
#[derive(Debug, Clone, Default, Args)]
pub struct SharedOpts {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Mode name (psi-plus, psi-minus, phi-plus, phi-minus, hh) or four
    /// complex amplitudes `Hh,Hv,Vh,Vv`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mode: Option<String>,

    /// Analyzer settings `a1,a2,b1,b2` in radians.
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "A1,A2,B1,B2")]
    pub angles: Option<String>,

    /// Read `--angles` in degrees.
    #[arg(long, global = true)]
    pub degrees: bool,

    /// Sorting visibility `b1=V1,b2=V2`, or one value for both.
    #[arg(long, global = true)]
    pub visibility: Option<String>,

    /// Polarization crosstalk of a rotated Dove prism, in [0, 1].
    #[arg(long, global = true)]
    pub crosstalk: Option<String>,

    /// plain, csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,

    #[arg(long = "tol-decision", global = true)]
    pub tol_decision: Option<String>,

    #[arg(long = "tol-feasibility", global = true)]
    pub tol_feasibility: Option<String>,

    /// Seed for randomized sweeps.
    #[arg(long, global = true)]
    pub seed: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a mode on the bench and report all inequalities.
    Simulate,
    /// Analyze a measured table (CSV, or the JSON report format).
    Analyze { file: PathBuf },
    /// Decide whether a multimaximal coupling exists for a measured table.
    Oracle { file: PathBuf },
    /// Run a reference experiment: chsh-nonseparable, chsh-separable,
    /// kd-nonseparable or kd-separable.
    Preset { name: String },
    /// Parameter sweeps.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
}

#[derive(Debug, Subcommand)]
pub enum SweepKind {
    /// Both sorting visibilities over a square grid.
    Visibility {
        #[arg(long, default_value_t = 0.8)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        /// Correlators `m11,m12,m21,m22` to fit; defaults to the reference
        /// bench measurement.
        #[arg(long, allow_hyphen_values = true)]
        fit: Option<String>,
    },
    /// One analyzer setting over a range.
    Angle {
        /// a1, a2, b1 or b2.
        #[arg(long)]
        which: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 91)]
        steps: usize,
    },
    /// Random tables checked by both contextuality criteria.
    Random {
        #[arg(long, default_value_t = 1000)]
        count: u64,
        /// Cases with |margin| at or below this are not counted.
        #[arg(long, default_value_t = 1e-6)]
        band: f64,
    },
}

impl SharedOpts {
    fn flag_settings(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        let pairs = [
            ("mode", &self.mode),
            ("angles", &self.angles),
            ("visibility", &self.visibility),
            ("crosstalk", &self.crosstalk),
            ("format", &self.format),
            ("decision_tol", &self.tol_decision),
            ("feasibility_tol", &self.tol_feasibility),
            ("seed", &self.seed),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                out.insert(key.to_string(), v.clone());
            }
        }
        if self.degrees {
            out.insert("units".into(), "deg".into());
        }
        out
    }

    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut settings = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        settings.extend(self.flag_settings());
        RunConfig::from_settings(&settings)
    }
}

fn parse_four(text: &str) -> CliResult<[f64; 4]> {
    let values: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("`{text}` is not four comma-separated numbers")))?;
    values
        .try_into()
        .map_err(|_| CliError::Usage(format!("`{text}` is not four comma-separated numbers")))
}

fn analyze(file: &Path, cfg: &RunConfig) -> CliResult<ReportBundle> {
    let table = ingest_file(file)?;
    let mut echo = cfg.echo();
    echo.remove("mode");
    echo.remove("angles");
    echo.remove("visibility");
    echo.remove("crosstalk");
    echo.insert("input".into(), file.display().to_string());
    ReportBundle::build(format!("Analysis of {}", file.display()), table, cfg.decision_tol, cfg.feasibility_tol, echo)
}

/// Runs one invocation and returns the text to print.
pub fn run(cli: &Cli) -> CliResult<String> {
    let cfg = cli.opts.resolve()?;
    match &cli.command {
        Command::Simulate => {
            let mode = cfg.mode.build()?;
            let table = spinorbit::simulate_table(&mode, &cfg.angles, &cfg.noise)?;
            let bundle = ReportBundle::build(
                format!("Simulation of mode {}", cfg.mode),
                table,
                cfg.decision_tol,
                cfg.feasibility_tol,
                cfg.echo(),
            )?;
            emit_report(&bundle, cfg.format)
        }
        Command::Analyze { file } => emit_report(&analyze(file, &cfg)?, cfg.format),
        Command::Oracle { file } => {
            let bundle = analyze(file, &cfg)?;
            Ok(oracle_text(&bundle, cfg.format))
        }
        Command::Preset { name } => {
            let preset: Preset = name.parse()?;
            emit_report(&run_preset(preset, &cfg)?, cfg.format)
        }
        Command::Sweep { kind } => run_sweep(kind, &cfg),
    }
}

fn oracle_text(bundle: &ReportBundle, format: OutputFormat) -> String {
    let o = &bundle.oracle;
    let r = &bundle.inequality;
    match format {
        OutputFormat::Json => {
            let value = serde_json::json!({
                "coupling_exists": o.feasible,
                "contextual": o.contextual(),
                "infeasibility": o.infeasibility,
                "max_constraint_residual": o.max_constraint_residual,
                "feasibility_tol": o.feasibility_tol,
                "inequality_contextual": r.contextual,
                "margin": r.margin,
                "agree": bundle.oracle_agrees(),
                "witness": o.witness,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap_or_default())
        }
        OutputFormat::Csv => format!(
            "coupling_exists,contextual,infeasibility,max_constraint_residual,inequality_contextual,margin,agree\n{},{},{},{},{},{},{}\n",
            o.feasible,
            o.contextual(),
            o.infeasibility,
            o.max_constraint_residual,
            r.contextual,
            r.margin,
            bundle.oracle_agrees()
        ),
        OutputFormat::Plain => format!(
            "{}\nmultimaximal coupling: {}\nverdict: {}\ninfeasibility: {:e} (tolerance {:e})\nwitness residual: {:e}\ninequality check: {} (margin {:e}){}\n",
            bundle.title,
            if o.feasible { "exists" } else { "does not exist" },
            if o.contextual() { "contextual" } else { "noncontextual" },
            o.infeasibility,
            o.feasibility_tol,
            o.max_constraint_residual,
            if r.contextual { "contextual" } else { "noncontextual" },
            r.margin,
            if bundle.oracle_agrees() { "" } else { "\nwarning: the two criteria disagree" }
        ),
    }
}

fn run_sweep(kind: &SweepKind, cfg: &RunConfig) -> CliResult<String> {
    let mode = cfg.mode.build()?;
    match kind {
        SweepKind::Visibility { from, to, steps, fit } => {
            if !(0.0..=1.0).contains(from) || !(0.0..=1.0).contains(to) {
                return Err(CliError::Usage("visibilities must lie in [0, 1]".into()));
            }
            let target = match fit {
                Some(text) => parse_four(text)?,
                None => REFERENCE_CORRELATORS,
            };
            let points = visibility_sweep(&mode, &cfg.angles, cfg.noise.crosstalk(), Grid::new(*from, *to, *steps)?, cfg.decision_tol)?;
            let fit = best_fit(&points, target);
            match cfg.format {
                OutputFormat::Json => json_text(&serde_json::json!({ "points": points, "best_fit": fit })),
                _ => Ok(sweep_csv(&points, fit.as_ref())),
            }
        }
        SweepKind::Angle { which, from, to, steps } => {
            let slot: AngleSlot = which.parse()?;
            let points = angle_sweep(&mode, &cfg.angles, &cfg.noise, slot, Grid::new(*from, *to, *steps)?, cfg.decision_tol)?;
            match cfg.format {
                OutputFormat::Json => json_text(&serde_json::json!({ "points": points })),
                _ => Ok(sweep_csv(&points, None)),
            }
        }
        SweepKind::Random { count, band } => {
            if band.is_nan() || *band < 0.0 {
                return Err(CliError::Usage("band must be nonnegative".into()));
            }
            let summary = random_cross_validation(cfg.seed, *count, *band, cfg.decision_tol, cfg.feasibility_tol)?;
            match cfg.format {
                OutputFormat::Json => json_text(&summary),
                _ => Ok(cross_check_text(&summary)),
            }
        }
    }
}

fn json_text<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(format!("json encoding: {e}")))?;
    s.push('\n');
    Ok(s)
}
