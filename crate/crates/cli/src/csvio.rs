//! Result CSV schema. Floats carry 12 significant digits; infinities are the
//! literal `inf`. Round-tripping parse/emit is byte-stable.

use std::io::Write;
use std::path::Path;

use crate::sweep::ResultRow;
use crate::CliError;

pub const CSV_HEADER: &str =
    "gamma1,noise1,gamma2,noise2,n,epsilon,mode,quantity,value,gap,iterations,status";

/// 12-significant-digit float formatting shared by every CSV column.
pub fn format_sig12(v: f64) -> String {
    if v == f64::INFINITY {
        return "inf".into();
    }
    if v == f64::NEG_INFINITY {
        return "-inf".into();
    }
    format!("{:.11e}", v)
}

fn parse_float(s: &str) -> Result<f64, CliError> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other.parse::<f64>().map_err(|_| CliError::Config(format!(
            "bad float '{other}' in CSV"
        ))),
    }
}

pub fn emit_row(row: &ResultRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        format_sig12(row.gamma1),
        format_sig12(row.noise1),
        format_sig12(row.gamma2),
        format_sig12(row.noise2),
        row.n,
        format_sig12(row.epsilon),
        row.mode,
        row.quantity,
        format_sig12(row.value),
        format_sig12(row.gap),
        row.iterations,
        row.status
    )
}

pub fn emit_rows(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&emit_row(row));
        out.push('\n');
    }
    out
}

pub fn parse_rows(text: &str) -> Result<Vec<ResultRow>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => {
            return Err(CliError::Config(format!(
                "unexpected CSV header '{h}'"
            )))
        }
        None => return Ok(Vec::new()),
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(CliError::Config(format!(
                "CSV line {} has {} fields, expected 12",
                ln + 2,
                f.len()
            )));
        }
        rows.push(ResultRow {
            gamma1: parse_float(f[0])?,
            noise1: parse_float(f[1])?,
            gamma2: parse_float(f[2])?,
            noise2: parse_float(f[3])?,
            n: f[4]
                .parse()
                .map_err(|_| CliError::Config(format!("bad n '{}'", f[4])))?,
            epsilon: parse_float(f[5])?,
            mode: f[6].to_string(),
            quantity: f[7].to_string(),
            value: parse_float(f[8])?,
            gap: parse_float(f[9])?,
            iterations: f[10]
                .parse()
                .map_err(|_| CliError::Config(format!("bad iterations '{}'", f[10])))?,
            status: f[11].to_string(),
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse_rows(&text)
}

pub fn append_rows(path: &Path, rows: &[ResultRow], write_header: bool) -> Result<(), CliError> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    let mut out = String::new();
    if write_header {
        out.push_str(CSV_HEADER);
        out.push('\n');
    }
    for row in rows {
        out.push_str(&emit_row(row));
        out.push('\n');
    }
    file.write_all(out.as_bytes())?;
    file.flush()?;
    Ok(())
}
