//! Numeric CSV ingestion and dataset dumps.
//!
//! Dialect: comma separated, `.` decimal point, no quoting, one optional
//! header row (recognized by any non-numeric field in the first row).

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use cpjoint::Dataset;

/// Parsed numeric CSV body, header row dropped.
#[derive(Debug)]
pub struct Table {
    pub n: usize,
    pub p: usize,
    pub values: Vec<f64>,
}

pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .quoting(false)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut n = 0;
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let record = record.with_context(|| format!("row {line}: unreadable record"))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        if idx == 0 && parsed.iter().any(Option::is_none) {
            width = Some(record.len());
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                bail!("row {line}: expected {w} columns, found {}", record.len())
            }
            None => width = Some(record.len()),
            _ => {}
        }
        for (col, (field, v)) in record.iter().zip(parsed).enumerate() {
            match v {
                Some(v) => values.push(v),
                None => bail!("row {line}, column {}: cannot parse {field:?} as a number", col + 1),
            }
        }
        n += 1;
    }
    let Some(p) = width else { bail!("input contains no rows") };
    Ok(Table { n, p, values })
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let table = read_table(file)?;
    Ok(Dataset::from_row_major(table.n, table.p, table.values)?)
}

/// Writes one row per observation using the shortest decimal form that
/// parses back to the same double.
pub fn write_dataset<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    for row in data.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
