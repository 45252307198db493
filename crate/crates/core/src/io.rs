//! Distance-matrix text formats and the JSON run report.
//!
//! CSV: a header row of comma-separated labels followed by `n` rows of `n`
//! comma-separated values. PHYLIP (square): a line holding `n`, then `n`
//! lines of `label v1 ... vn` separated by whitespace.

use serde::{Deserialize, Serialize, Serializer};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Phylip,
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "phylip" => Ok(MatrixFormat::Phylip),
            other => Err(Error::argument(format!("unknown matrix format {other:?}"))),
        }
    }
}

fn parse_value(text: &str, row: usize, col: usize) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::format(format!("row {row}, column {col}: {text:?} is not a number")))
}

pub fn parse_distance_matrix(text: &str, format: MatrixFormat) -> Result<DistanceMatrix> {
    if text.trim().is_empty() {
        return Err(Error::format("input is empty"));
    }
    match format {
        MatrixFormat::Csv => parse_csv(text),
        MatrixFormat::Phylip => parse_phylip(text),
    }
}

fn parse_csv(text: &str) -> Result<DistanceMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::format(format!("csv: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        records.push(record);
    }
    let (header, rows) = records
        .split_first()
        .ok_or_else(|| Error::format("csv: missing header row"))?;
    let labels: Vec<String> = header.iter().map(str::to_string).collect();
    let n = labels.len();
    if n < 4 {
        return Err(Error::Size(format!("need at least 4 objects, got {n}")));
    }
    if rows.len() != n {
        return Err(Error::format(format!(
            "csv: expected {n} data rows, found {}",
            rows.len()
        )));
    }
    let mut values = Vec::with_capacity(n * n);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::format(format!(
                "csv: row {} has {} values, expected {n}",
                r + 1,
                row.len()
            )));
        }
        for (c, cell) in row.iter().enumerate() {
            values.push(parse_value(cell, r + 1, c + 1)?);
        }
    }
    DistanceMatrix::new(labels, values)
}

fn parse_phylip(text: &str) -> Result<DistanceMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines
        .next()
        .ok_or_else(|| Error::format("phylip: missing size line"))?;
    let n: usize = first
        .trim()
        .parse()
        .map_err(|_| Error::format(format!("phylip: bad size line {first:?}")))?;
    if n < 4 {
        return Err(Error::Size(format!("need at least 4 objects, got {n}")));
    }
    let mut labels = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * n);
    for r in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::format(format!("phylip: expected {n} rows, found {r}")))?;
        let mut fields = line.split_whitespace();
        labels.push(fields.next().expect("line is not blank").to_string());
        let row: Vec<&str> = fields.collect();
        if row.len() != n {
            return Err(Error::format(format!(
                "phylip: row {} has {} values, expected {n}",
                r + 1,
                row.len()
            )));
        }
        for (c, cell) in row.iter().enumerate() {
            values.push(parse_value(cell, r + 1, c + 1)?);
        }
    }
    if let Some(extra) = lines.next() {
        return Err(Error::format(format!(
            "phylip: unexpected trailing line {extra:?}"
        )));
    }
    DistanceMatrix::new(labels, values)
}

pub fn write_distance_matrix(dist: &DistanceMatrix, format: MatrixFormat) -> String {
    let n = dist.n();
    let mut out = String::new();
    match format {
        MatrixFormat::Csv => {
            out.push_str(&dist.labels().join(","));
            out.push('\n');
            for a in 0..n {
                let row: Vec<String> = (0..n).map(|b| dist.get(a, b).to_string()).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        MatrixFormat::Phylip => {
            out.push_str(&format!("{n}\n"));
            for a in 0..n {
                out.push_str(&dist.labels()[a]);
                for b in 0..n {
                    out.push(' ');
                    out.push_str(&dist.get(a, b).to_string());
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Machine-readable summary of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub mode: String,
    pub input_digest: String,
    #[serde(serialize_with = "seventeen_digits")]
    pub best_cost: f64,
    #[serde(serialize_with = "seventeen_digits")]
    pub normalized_score: f64,
    pub newick: String,
    pub shapes_evaluated: u64,
    pub assignments_evaluated: u64,
    pub elapsed_ms: u64,
    pub seed: Option<u64>,
    pub tool_version: String,
}

/// Writes a double with 17 significant digits, enough to round-trip.
fn seventeen_digits<S: Serializer>(value: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::Error as _;
    if !value.is_finite() {
        return Err(S::Error::custom("non-finite cost"));
    }
    let raw = serde_json::value::RawValue::from_string(format!("{value:.16e}")).map_err(S::Error::custom)?;
    raw.serialize(serializer)
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format(format!("report: {e}")))
    }
}
