//! Loading measured intensity tables.
//!
//! CSV layout: the exact header `alpha_rad,beta_rad,i_pp,i_pm,i_mp,i_mm`,
//! then one row per context. Lines starting with `#` are ignored anywhere.
//! The angle set is read off the rows: the first distinct α seen is α₁, the
//! second α₂, and likewise for β.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spinorbit::measurement::{normalize_record, ANGLE_MATCH_TOL};
use spinorbit::{AngleSet, Context, ExperimentTable, IntensityRecord};

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: [&str; 6] = ["alpha_rad", "beta_rad", "i_pp", "i_pm", "i_mp", "i_mm"];

/// One table row as it appears on disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub alpha_rad: f64,
    pub beta_rad: f64,
    pub i_pp: f64,
    pub i_pm: f64,
    pub i_mp: f64,
    pub i_mm: f64,
}

impl TableRow {
    pub fn from_record(r: &IntensityRecord) -> Self {
        TableRow {
            alpha_rad: r.alpha(),
            beta_rad: r.beta(),
            i_pp: r.i_pp(),
            i_pm: r.i_pm(),
            i_mp: r.i_mp(),
            i_mm: r.i_mm(),
        }
    }

    fn values(&self) -> [f64; 6] {
        [self.alpha_rad, self.beta_rad, self.i_pp, self.i_pm, self.i_mp, self.i_mm]
    }
}

/// Rows in context order `11, 12, 21, 22`, so re-ingestion recovers the
/// same angle assignment.
pub fn table_rows(table: &ExperimentTable) -> CliResult<Vec<TableRow>> {
    Ok(table.complete_records()?.iter().map(TableRow::from_record).collect())
}

pub fn ingest_file(path: &Path) -> CliResult<ExperimentTable> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{');
    if is_json {
        ingest_json_str(&text)
    } else {
        ingest_csv_str(&text)
    }
}

pub fn ingest_csv(path: &Path) -> CliResult<ExperimentTable> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ingest_csv_str(&text)
}

pub fn ingest_csv_str(text: &str) -> CliResult<ExperimentTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let mut header_seen = false;
    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| CliError::Data(format!("csv: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if !header_seen {
            let fields: Vec<&str> = record.iter().collect();
            if fields != CSV_HEADER {
                return Err(CliError::Data(format!(
                    "line {line}: header must be exactly `{}`, found `{}`",
                    CSV_HEADER.join(","),
                    fields.join(",")
                )));
            }
            header_seen = true;
            continue;
        }
        if record.len() != CSV_HEADER.len() {
            return Err(CliError::Data(format!(
                "line {line}: expected {} columns, found {}",
                CSV_HEADER.len(),
                record.len()
            )));
        }
        let mut values = [0.0; 6];
        for (k, (slot, field)) in values.iter_mut().zip(record.iter()).enumerate() {
            *slot = field.parse::<f64>().map_err(|_| {
                CliError::Data(format!("line {line}, column {}: `{field}` is not a number", CSV_HEADER[k]))
            })?;
        }
        rows.push((line, values));
    }
    if !header_seen {
        return Err(CliError::Data(format!("empty input: missing header `{}`", CSV_HEADER.join(","))));
    }
    assemble(&rows)
}

#[derive(Deserialize)]
struct JsonTable {
    table: Vec<TableRow>,
}

/// Reads the `table` array of a JSON report.
pub fn ingest_json_str(text: &str) -> CliResult<ExperimentTable> {
    let parsed: JsonTable =
        serde_json::from_str(text).map_err(|e| CliError::Data(format!("json: {e}")))?;
    let rows: Vec<(u64, [f64; 6])> = parsed
        .table
        .iter()
        .enumerate()
        .map(|(k, r)| (k as u64 + 1, r.values()))
        .collect();
    assemble(&rows)
}

fn push_distinct(seen: &mut Vec<f64>, x: f64) -> usize {
    if let Some(k) = seen.iter().position(|s| (s - x).abs() <= ANGLE_MATCH_TOL) {
        return k;
    }
    seen.push(x);
    seen.len() - 1
}

/// Validates rows (`line`, values) and builds the table.
fn assemble(rows: &[(u64, [f64; 6])]) -> CliResult<ExperimentTable> {
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    for (line, values) in rows {
        for (k, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(CliError::Data(format!("line {line}, column {}: value is not finite", CSV_HEADER[k])));
            }
            if k >= 2 && *v < 0.0 {
                return Err(CliError::Data(format!(
                    "line {line}, column {}: negative intensity {v}",
                    CSV_HEADER[k]
                )));
            }
        }
        if push_distinct(&mut alphas, values[0]) > 1 {
            return Err(CliError::Data(format!("line {line}, column alpha_rad: a third distinct α setting")));
        }
        if push_distinct(&mut betas, values[1]) > 1 {
            return Err(CliError::Data(format!("line {line}, column beta_rad: a third distinct β setting")));
        }
    }
    if alphas.len() < 2 || betas.len() < 2 {
        return Err(CliError::Data(format!(
            "incomplete table: {} row(s) name {} α and {} β setting(s); four contexts need two of each",
            rows.len(),
            alphas.len(),
            betas.len()
        )));
    }
    let angles = AngleSet::new(alphas[0], alphas[1], betas[0], betas[1])?;
    let mut table = ExperimentTable::new(angles);
    for (line, v) in rows {
        let record = normalize_record([v[2], v[3], v[4], v[5]], v[0], v[1])
            .map_err(|e| CliError::Data(format!("line {line}: {e}")))?;
        table.insert(record).map_err(|e| CliError::Data(format!("line {line}: {e}")))?;
    }
    if let Some(missing) = Context::ALL.into_iter().find(|c| table.get(*c).is_none()) {
        return Err(CliError::Data(format!("incomplete table: no row for context {missing}")));
    }
    Ok(table)
}
