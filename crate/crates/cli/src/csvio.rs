//! Dataset files: a header `x_<name>,...,y`, then one row per sample with
//! 17 significant digits. Lines starting with `#` are comments.

use std::fs;
use std::io::Read;
use std::path::Path;

use plrnet_core::RawData;

use crate::error::{CliError, Result};

pub const INPUT_PREFIX: &str = "x_";

/// Scientific notation with 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv_string(raw: &RawData, config_hash: &str) -> String {
    let mut out = format!("# config_hash = {config_hash}\n");
    let header: Vec<String> = raw.names.iter().map(|n| format!("{INPUT_PREFIX}{n}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",y\n");
    for i in 0..raw.len() {
        for v in raw.row(i) {
            out.push_str(&fmt_float(*v));
            out.push(',');
        }
        out.push_str(&fmt_float(raw.targets[i]));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, raw: &RawData, config_hash: &str) -> Result<()> {
    fs::write(path, to_csv_string(raw, config_hash)).map_err(|e| CliError::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<RawData> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(file).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_csv<R: Read>(reader: R) -> Result<RawData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let line_of = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line());
    let csv_err = |e: csv::Error| CliError::Data(format!("malformed csv: {e}"));

    let header = match records.next() {
        Some(r) => r.map_err(csv_err)?,
        None => return Err(CliError::Data("missing header: file has no rows".into())),
    };
    let line = line_of(&header);
    if header.len() < 2 {
        return Err(CliError::Data(format!(
            "line {line}: header needs at least one input column and a target column"
        )));
    }
    if header.iter().all(|c| c.parse::<f64>().is_ok()) {
        return Err(CliError::Data(format!("line {line}: missing header (first row is numeric)")));
    }
    let columns: Vec<String> = header.iter().map(str::to_string).collect();
    if let Some(k) = columns.iter().position(String::is_empty) {
        return Err(CliError::Data(format!("line {line}: header column {} is empty", k + 1)));
    }
    let n = columns.len() - 1;
    let names = columns[..n]
        .iter()
        .map(|c| c.strip_prefix(INPUT_PREFIX).unwrap_or(c).to_string())
        .collect();

    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for record in records {
        let record = record.map_err(csv_err)?;
        let line = line_of(&record);
        if record.len() != n + 1 {
            return Err(CliError::Data(format!("line {line}: expected {} cells, found {}", n + 1, record.len())));
        }
        for (k, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!("line {line}, column `{}`: `{cell}` is not a number", columns[k]))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!("line {line}, column `{}`: non-finite value", columns[k])));
            }
            if k < n {
                inputs.push(v);
            } else {
                targets.push(v);
            }
        }
    }
    if targets.is_empty() {
        return Err(CliError::Data("no data rows after the header".into()));
    }
    Ok(RawData::new(names, inputs, targets)?)
}
