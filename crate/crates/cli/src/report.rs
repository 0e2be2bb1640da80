//! Report bundles and their plain, CSV and JSON renderings.
//!
//! Output is deterministic for a given bundle; only the timestamp in the
//! provenance block varies between runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use spinorbit::{
    correlation_set, cross_validate, Context, CorrelationSet, ExperimentTable, InequalityReport,
    OracleVerdict,
};

use crate::config::OutputFormat;
use crate::error::CliResult;
use crate::ingest::{table_rows, TableRow, CSV_HEADER};

pub const TOOL_VERSION: &str = concat!("spinorbit ", env!("CARGO_PKG_VERSION"));

/// Magnitudes below this print as zero in plain tables.
const DISPLAY_ZERO: f64 = 5e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config: BTreeMap<String, String>,
    pub tool_version: String,
    pub timestamp: String,
}

impl Provenance {
    pub fn now(config: BTreeMap<String, String>) -> Self {
        Provenance {
            config,
            tool_version: TOOL_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub title: String,
    pub table: ExperimentTable,
    pub correlations: CorrelationSet,
    pub inequality: InequalityReport,
    pub oracle: OracleVerdict,
    pub provenance: Provenance,
}

impl ReportBundle {
    pub fn build(
        title: impl Into<String>,
        table: ExperimentTable,
        decision_tol: f64,
        feasibility_tol: f64,
        config: BTreeMap<String, String>,
    ) -> CliResult<Self> {
        let correlations = correlation_set(&table)?;
        let check = cross_validate(&table, decision_tol, feasibility_tol)?;
        Ok(ReportBundle {
            title: title.into(),
            table,
            correlations,
            inequality: check.report,
            oracle: check.verdict,
            provenance: Provenance::now(config),
        })
    }

    pub fn oracle_agrees(&self) -> bool {
        self.inequality.contextual == self.oracle.contextual()
    }
}

/// Six significant digits; float noise near zero prints as zero.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x.abs() < DISPLAY_ZERO {
        return "0.00000".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

fn context_label(ctx: Context) -> String {
    format!("(α{},β{})", ctx.i, ctx.j)
}

pub fn emit_report(bundle: &ReportBundle, format: OutputFormat) -> CliResult<String> {
    match format {
        OutputFormat::Plain => Ok(emit_plain(bundle)),
        OutputFormat::Csv => emit_csv(bundle),
        OutputFormat::Json => emit_json(bundle),
    }
}

fn verdict_lines(bundle: &ReportBundle) -> Vec<String> {
    let r = &bundle.inequality;
    let mut out = Vec::new();
    out.push(format!(
        "CHSH: {}",
        if r.chsh_violated { "violated (|S| > 2)" } else { "satisfied (|S| ≤ 2)" }
    ));
    if r.contextual {
        out.push(format!(
            "contextuality: contextual (S_KD{} exceeds 2(1+Δ₀) by margin {}, Δ₀ = {})",
            r.leading_inequality(),
            sig6(r.margin),
            sig6(r.delta0)
        ));
    } else {
        out.push(format!("contextuality: noncontextual (margin {}, Δ₀ = {})", sig6(r.margin), sig6(r.delta0)));
    }
    let o = &bundle.oracle;
    out.push(format!(
        "multimaximal coupling: {} (infeasibility {:.3e}, tolerance {:e}){}",
        if o.feasible { "exists" } else { "does not exist" },
        o.infeasibility,
        o.feasibility_tol,
        if bundle.oracle_agrees() { "" } else { " DISAGREES with the inequality verdict" }
    ));
    out
}

fn emit_plain(bundle: &ReportBundle) -> String {
    let r = &bundle.inequality;
    let mut s = String::new();
    let _ = writeln!(s, "{}", bundle.title);
    let a = bundle.table.angles();
    let _ = writeln!(
        s,
        "angles (rad): α1 = {}, α2 = {}, β1 = {}, β2 = {}",
        sig6(a.alpha1),
        sig6(a.alpha2),
        sig6(a.beta1),
        sig6(a.beta2)
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<12} {:>10} {:>10} {:>10} {:>10}", "context", "I++", "I+-", "I-+", "I--");
    for ctx in Context::ALL {
        if let Some(rec) = bundle.table.get(ctx) {
            let _ = writeln!(
                s,
                "{:<12} {:>10} {:>10} {:>10} {:>10}",
                context_label(ctx),
                sig6(rec.i_pp()),
                sig6(rec.i_pm()),
                sig6(rec.i_mp()),
                sig6(rec.i_mm())
            );
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<12} {:>10}", "quantity", "value");
    for ctx in Context::ALL {
        let c = bundle.correlations.get(ctx);
        let _ = writeln!(s, "{:<12} {:>10}", format!("M{}", context_label(ctx)), sig6(c.m));
    }
    let _ = writeln!(s, "{:<12} {:>10}", "S", sig6(r.s_chsh));
    let _ = writeln!(s);
    for (k, v) in r.s_kd.iter().enumerate() {
        let _ = writeln!(s, "{:<12} {:>10}", format!("S_KD{}", k + 1), sig6(*v));
    }
    let _ = writeln!(s, "{:<12} {:>10}", "Δ₀", sig6(r.delta0));
    let _ = writeln!(s, "{:<12} {:>10}", "2(1+Δ₀)", sig6(r.kd_bound));
    let _ = writeln!(s);
    for line in verdict_lines(bundle) {
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "tool: {}", bundle.provenance.tool_version);
    let _ = writeln!(s, "timestamp: {}", bundle.provenance.timestamp);
    for (k, v) in &bundle.provenance.config {
        let _ = writeln!(s, "config.{k}: {v}");
    }
    s
}

fn emit_csv(bundle: &ReportBundle) -> CliResult<String> {
    let r = &bundle.inequality;
    let mut s = String::new();
    let _ = writeln!(s, "# title: {}", bundle.title);
    let _ = writeln!(s, "# s_chsh: {}", r.s_chsh);
    for (k, v) in r.s_kd.iter().enumerate() {
        let _ = writeln!(s, "# s_kd{}: {}", k + 1, v);
    }
    let _ = writeln!(s, "# delta0: {}", r.delta0);
    let _ = writeln!(s, "# kd_bound: {}", r.kd_bound);
    let _ = writeln!(s, "# margin: {}", r.margin);
    let _ = writeln!(s, "# chsh_violated: {}", r.chsh_violated);
    let _ = writeln!(s, "# contextual: {}", r.contextual);
    let _ = writeln!(s, "# coupling_exists: {}", bundle.oracle.feasible);
    let _ = writeln!(s, "# tool: {}", bundle.provenance.tool_version);
    let _ = writeln!(s, "# timestamp: {}", bundle.provenance.timestamp);
    for (k, v) in &bundle.provenance.config {
        let _ = writeln!(s, "# config.{k}: {v}");
    }
    let _ = writeln!(s, "{}", CSV_HEADER.join(","));
    for row in table_rows(&bundle.table)? {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            row.alpha_rad, row.beta_rad, row.i_pp, row.i_pm, row.i_mp, row.i_mm
        );
    }
    Ok(s)
}

#[derive(Serialize)]
struct JsonCorrelation {
    context: String,
    m: f64,
    a: f64,
    b: f64,
}

#[derive(Serialize)]
struct JsonVerdicts {
    chsh_violated: bool,
    contextual: bool,
    coupling_exists: bool,
    oracle_agrees: bool,
}

#[derive(Serialize)]
struct JsonOracle {
    feasible: bool,
    infeasibility: f64,
    max_constraint_residual: f64,
    feasibility_tol: f64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    title: &'a str,
    s_chsh: f64,
    s_kd: [f64; 4],
    delta0: f64,
    kd_bound: f64,
    margin: f64,
    decision_tol: f64,
    verdicts: JsonVerdicts,
    correlations: Vec<JsonCorrelation>,
    oracle: JsonOracle,
    table: Vec<TableRow>,
    provenance: &'a Provenance,
}

fn emit_json(bundle: &ReportBundle) -> CliResult<String> {
    let r = &bundle.inequality;
    let report = JsonReport {
        title: &bundle.title,
        s_chsh: r.s_chsh,
        s_kd: r.s_kd,
        delta0: r.delta0,
        kd_bound: r.kd_bound,
        margin: r.margin,
        decision_tol: r.decision_tol,
        verdicts: JsonVerdicts {
            chsh_violated: r.chsh_violated,
            contextual: r.contextual,
            coupling_exists: bundle.oracle.feasible,
            oracle_agrees: bundle.oracle_agrees(),
        },
        correlations: Context::ALL
            .iter()
            .map(|ctx| {
                let c = bundle.correlations.get(*ctx);
                JsonCorrelation {
                    context: format!("{}{}", ctx.i, ctx.j),
                    m: c.m,
                    a: c.a,
                    b: c.b,
                }
            })
            .collect(),
        oracle: JsonOracle {
            feasible: bundle.oracle.feasible,
            infeasibility: bundle.oracle.infeasibility,
            max_constraint_residual: bundle.oracle.max_constraint_residual,
            feasibility_tol: bundle.oracle.feasibility_tol,
        },
        table: table_rows(&bundle.table)?,
        provenance: &bundle.provenance,
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| crate::error::CliError::Data(format!("json encoding: {e}")))?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(2.0 * 2f64.sqrt()), "2.82843");
        assert_eq!(sig6(-std::f64::consts::FRAC_1_SQRT_2), "-0.707107");
        assert_eq!(sig6(1e-17), "0.00000");
        assert_eq!(sig6(-3e-15), "0.00000");
        assert_eq!(sig6(0.000123456789), "0.000123457");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(2.5e7), "2.50000e7");
        assert_eq!(sig6(f64::NAN), "NaN");
    }
}
