//! Reading observations and tabulated CDFs from CSV.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Raw bytes and their SHA-256 digest.
pub struct Input {
    pub bytes: Vec<u8>,
    pub sha256: String,
}

pub fn read_input(path: &Path) -> Result<Input, CliError> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let sha256 = hex(&Sha256::digest(&bytes));
    Ok(Input { bytes, sha256 })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parsed numeric columns of a CSV with an optional header row.
struct Table {
    header: Option<Vec<String>>,
    /// Rows with their 1-based line numbers.
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(bytes: &[u8], name: &str) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut header = None;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::input(format!("{name}: malformed CSV: {e}")))?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let fields: Vec<String> = record.iter().map(str::to_owned).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        // a leading row that does not parse is a header
        if i == 0 && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(fields);
            continue;
        }
        rows.push((line, fields));
    }
    Ok(Table { header, rows })
}

fn parse_cell(name: &str, line: u64, cell: Option<&String>) -> Result<f64, CliError> {
    let cell = cell.map(String::as_str).unwrap_or("");
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::input(format!("{name}: line {line}: non-numeric value {cell:?}"))),
    }
}

/// Observations from the first column, or from the column named `column`.
pub fn parse_observations(bytes: &[u8], name: &str, column: Option<&str>) -> Result<Vec<f64>, CliError> {
    let table = read_table(bytes, name)?;
    let idx = match column {
        None => 0,
        Some(col) => table
            .header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == col))
            .ok_or_else(|| CliError::input(format!("{name}: no column named {col:?}")))?,
    };
    let values = table
        .rows
        .iter()
        .map(|(line, fields)| parse_cell(name, *line, fields.get(idx)))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::input(format!("{name}: no observations")));
    }
    Ok(values)
}

/// A tabulated CDF: the first two columns hold `x` and `F(x)`.
pub fn read_cdf_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let input = read_input(path)?;
    let name = path.display().to_string();
    let table = read_table(&input.bytes, &name)?;
    let mut xs = Vec::with_capacity(table.rows.len());
    let mut fs = Vec::with_capacity(table.rows.len());
    for (line, fields) in &table.rows {
        xs.push(parse_cell(&name, *line, fields.first())?);
        fs.push(parse_cell(&name, *line, fields.get(1))?);
    }
    Ok((xs, fs))
}
