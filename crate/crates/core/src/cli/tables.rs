//! CSV schemas written by the experiment and policy-map commands.
//!
//! Reals use 17 significant digits so files are byte-stable and round-trip
//! exactly. Action indices are one-based.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// Scientific notation with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruningCsvRow {
    pub depth: usize,
    pub n_samples: usize,
    pub mean_pruned_frac: f64,
    pub min: f64,
    pub max: f64,
    pub mean_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    #[serde(rename = "S")]
    pub states: usize,
    #[serde(rename = "A")]
    pub actions: usize,
    pub min_pct: f64,
    pub mean_pct: f64,
    pub max_pct: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCsvRow {
    pub n_samples: usize,
    pub mean_width: f64,
    pub reference_depth: Option<usize>,
    pub mean_upper_distance: Option<f64>,
    pub mean_lower_distance: Option<f64>,
    pub contained_fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyMapRow {
    pub belief: Vec<f64>,
    pub lower: usize,
    pub upper: usize,
    pub agree: bool,
}

pub const PRUNING_HEADER: [&str; 6] = ["depth", "n_samples", "mean_pruned_frac", "min", "max", "mean_ms"];
pub const SWEEP_HEADER: [&str; 6] = ["S", "A", "min_pct", "mean_pct", "max_pct", "feasible"];
pub const GAP_HEADER: [&str; 6] = [
    "n_samples",
    "mean_width",
    "reference_depth",
    "mean_upper_distance",
    "mean_lower_distance",
    "contained_fraction",
];

pub fn write_pruning(out: impl Write, rows: &[PruningCsvRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PRUNING_HEADER)?;
    for r in rows {
        w.write_record([
            r.depth.to_string(),
            r.n_samples.to_string(),
            fmt_real(r.mean_pruned_frac),
            fmt_real(r.min),
            fmt_real(r.max),
            fmt_real(r.mean_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(out: impl Write, rows: &[SweepCsvRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.states.to_string(),
            r.actions.to_string(),
            fmt_real(r.min_pct),
            fmt_real(r.mean_pct),
            fmt_real(r.max_pct),
            r.feasible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_gap(out: impl Write, rows: &[GapCsvRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GAP_HEADER)?;
    for r in rows {
        w.write_record([
            r.n_samples.to_string(),
            fmt_real(r.mean_width),
            r.reference_depth.map(|d| d.to_string()).unwrap_or_default(),
            fmt_opt(r.mean_upper_distance),
            fmt_opt(r.mean_lower_distance),
            fmt_opt(r.contained_fraction),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_policy_map(out: impl Write, num_states: usize, rows: &[PolicyMapRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=num_states).map(|i| format!("b{i}")).collect();
    header.extend(["lower", "upper", "agree"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec: Vec<String> = r.belief.iter().map(|&x| fmt_real(x)).collect();
        rec.push(r.lower.to_string());
        rec.push(r.upper.to_string());
        rec.push(r.agree.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: Read, Row: for<'de> Deserialize<'de>>(input: R, header: &[&str]) -> csv::Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(input);
    let found = r.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header {found:?}"),
        )));
    }
    r.deserialize().collect()
}

pub fn read_pruning(input: impl Read) -> csv::Result<Vec<PruningCsvRow>> {
    read_rows(input, &PRUNING_HEADER)
}

pub fn read_sweep(input: impl Read) -> csv::Result<Vec<SweepCsvRow>> {
    read_rows(input, &SWEEP_HEADER)
}

pub fn read_gap(input: impl Read) -> csv::Result<Vec<GapCsvRow>> {
    read_rows(input, &GAP_HEADER)
}

pub fn read_policy_map(input: impl Read) -> csv::Result<Vec<PolicyMapRow>> {
    let invalid = |msg: String| csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, msg));
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let n = header.len();
    let expected_belief = (1..n.saturating_sub(2)).map(|i| format!("b{i}"));
    let tail = ["lower", "upper", "agree"];
    if n < 4
        || header.iter().take(n - 3).ne(expected_belief)
        || header.iter().skip(n - 3).ne(tail.iter().copied())
    {
        return Err(invalid(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| invalid(format!("column {i}: {e}")));
        let int = |i: usize| rec[i].parse::<usize>().map_err(|e| invalid(format!("column {i}: {e}")));
        rows.push(PolicyMapRow {
            belief: (0..n - 3).map(num).collect::<Result<_, _>>()?,
            lower: int(n - 3)?,
            upper: int(n - 2)?,
            agree: rec[n - 1].parse().map_err(|e| invalid(format!("agree: {e}")))?,
        });
    }
    Ok(rows)
}
