//! Diagnostics time series as CSV plus a schema sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::functionals::DiagnosticsRecord;
use crate::grid::Field;

/// Column descriptions, in CSV order.
pub const SCHEMA: [(&str, &str); 19] = [
    ("t", "time"),
    ("mass", "integral of u"),
    ("mean", "mass / |domain|"),
    ("energy", "free energy E[u]"),
    ("entropy", "integral of u log u - u + 1"),
    (
        "entropy_relative",
        "integral of u log(u / mean); NaN for u = 0",
    ),
    ("min_u", "minimum density"),
    ("max_u", "maximum density"),
    (
        "ckp_gap",
        "4 |domain| mean * relative entropy - |u - mean|_1^2; NaN for u = 0",
    ),
    (
        "degiorgi_excess",
        "positive part of max u - (p_H^(1/gamma) + 2 gamma^(-1/3))",
    ),
    ("graph_residual", "L1 norm of p (1 - u)"),
    (
        "complementarity_residual",
        "L1 norm of p times the limit pressure operator",
    ),
    ("pairing", "|<du/dt, p>| over the last step"),
    ("dissipation_flux", "integral of u |grad mu|^2 (upwind)"),
    (
        "dissipation_entropy_nonlocal",
        "nonlocal entropy dissipation term",
    ),
    (
        "dissipation_entropy_porous",
        "porous-medium entropy dissipation 4 gamma/((gamma+1)^2 c) |grad u^((gamma+1)/2)|^2",
    ),
    ("entropy_source", "source contribution to d(entropy)/dt"),
    ("energy_source", "integral of u mu G(p)"),
    ("tumor_zone", "measure of {p > 1e-3 p_H}"),
];

/// Path of the schema file next to a series CSV.
pub fn schema_path(csv: &Path) -> PathBuf {
    let mut name = csv
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".schema.txt");
    csv.with_file_name(name)
}

fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text for `records`, 17 significant digits per value.
pub fn series_to_string(records: &[DiagnosticsRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DiagnosticsRecord::COLUMNS)?;
    for r in records {
        w.write_record(r.to_row().iter().map(|&v| format_value(v)))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

/// Writes the CSV and its schema sidecar.
pub fn write_series(records: &[DiagnosticsRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if records.is_empty() {
        return Err(Error::InvalidParams(
            "refusing to write an empty series".into(),
        ));
    }
    fs::write(path, series_to_string(records)?)?;
    let mut schema = String::from("column,description\n");
    for (name, desc) in SCHEMA {
        schema.push_str(&format!("{name},\"{desc}\"\n"));
    }
    fs::write(schema_path(path), schema)?;
    Ok(())
}

pub fn parse_series(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(DiagnosticsRecord::COLUMNS) {
        return Err(Error::InvalidField(format!(
            "unexpected series header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records()
        .map(|row| {
            let row = row?;
            let mut vals = [0.0; 19];
            for (slot, cell) in vals.iter_mut().zip(row.iter()) {
                *slot = cell
                    .parse()
                    .map_err(|_| Error::InvalidField(format!("bad number '{cell}' in series")))?;
            }
            Ok(DiagnosticsRecord::from_row(&vals))
        })
        .collect()
}

pub fn read_series(path: impl AsRef<Path>) -> Result<Vec<DiagnosticsRecord>> {
    parse_series(&fs::read_to_string(path)?)
}

/// Density profile as CSV: `x,u` in 1D, `x,y,u` in 2D.
pub fn write_profile(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    let g = field.grid();
    let mut w = csv::Writer::from_path(path)?;
    if g.dim() == 1 {
        w.write_record(["x", "u"])?;
    } else {
        w.write_record(["x", "y", "u"])?;
    }
    for (i, &v) in field.values().iter().enumerate() {
        let c = g.center(i);
        let mut row: Vec<String> = c[..g.dim()].iter().map(|&x| format_value(x)).collect();
        row.push(format_value(v));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
