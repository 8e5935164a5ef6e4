//! Fixed-notation JSON, CSV tables and the plain-text field grid.
//!
//! Every floating-point number is written as `{:.11e}`: scientific notation
//! with twelve significant digits. Writing, reading and writing again gives
//! the same bytes.

use std::fmt::Write;

use serde::Serialize;
use serde_json::Value;

use crate::magnetostatic::{FieldMap, StructuredGrid};

/// Scientific notation with twelve significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// Pretty JSON with fixed-notation floats and sorted keys.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize to JSON");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else {
                out.push_str(&sci(n.as_f64().expect("JSON numbers are f64")));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                indent(out, level + 1);
                write_value(out, item, level + 1);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, level);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                indent(out, level + 1);
                out.push_str(&serde_json::to_string(key).expect("strings serialize"));
                out.push_str(": ");
                write_value(out, item, level + 1);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, level);
            out.push('}');
        }
    }
}

/// Header plus rows, as CSV text.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// Header and rows of a CSV text.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), csv::Error> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

pub const FIELD_CSV_HEADER: [&str; 5] = ["r_m", "z_m", "B_r_T", "B_z_T", "B_magnitude_T"];

/// One row per mesh node.
pub fn field_csv(field: &FieldMap) -> String {
    let rows: Vec<Vec<String>> = (0..field.nodes.len())
        .map(|i| {
            vec![
                sci(field.nodes[i][0]),
                sci(field.nodes[i][1]),
                sci(field.b_r[i]),
                sci(field.b_z[i]),
                sci(field.b_magnitude[i]),
            ]
        })
        .collect();
    csv_text(&FIELD_CSV_HEADER, &rows)
}

/// Nodal values on the tensor grid of a rectilinear mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: StructuredGrid,
    /// Row-major over z then r: value `(i, j)` is at `j * r.len() + i`.
    pub b_r: Vec<f64>,
    pub b_z: Vec<f64>,
}

impl GridField {
    pub fn from_field(field: &FieldMap) -> Option<Self> {
        let grid = field.grid.clone()?;
        Some(GridField {
            grid,
            b_r: field.b_r.clone(),
            b_z: field.b_z.clone(),
        })
    }
}

/// Plain-text grid file:
///
/// ```text
/// cryoshield-grid 1
/// nr <count>
/// nz <count>
/// r_m <nr values>
/// z_m <nz values>
/// B_r_T
/// <nz lines of nr values>
/// B_z_T
/// <nz lines of nr values>
/// ```
pub fn grid_text(g: &GridField) -> String {
    let (nr, nz) = (g.grid.r.len(), g.grid.z.len());
    let line = |v: &[f64]| v.iter().map(|x| sci(*x)).collect::<Vec<_>>().join(" ");
    let mut out = format!("cryoshield-grid 1\nnr {nr}\nnz {nz}\n");
    let _ = writeln!(out, "r_m {}", line(&g.grid.r));
    let _ = writeln!(out, "z_m {}", line(&g.grid.z));
    for (name, values) in [("B_r_T", &g.b_r), ("B_z_T", &g.b_z)] {
        let _ = writeln!(out, "{name}");
        for row in values.chunks(nr) {
            let _ = writeln!(out, "{}", line(row));
        }
    }
    out
}

/// Parses [`grid_text`] output.
pub fn read_grid(text: &str) -> Result<GridField, String> {
    let mut lines = text.lines();
    let mut next = |what: &str| lines.next().ok_or_else(|| format!("missing {what}"));
    if next("header")?.trim() != "cryoshield-grid 1" {
        return Err("not a cryoshield grid file".into());
    }
    let count = |l: &str, key: &str| -> Result<usize, String> {
        l.strip_prefix(key)
            .and_then(|s| s.trim().parse().ok())
            .filter(|n| *n > 0)
            .ok_or_else(|| format!("bad `{key}` line"))
    };
    let nr = count(next("nr")?, "nr")?;
    let nz = count(next("nz")?, "nz")?;
    if nr.checked_mul(nz).is_none_or(|n| n > 1 << 26) {
        return Err("grid too large".into());
    }
    let values = |l: &str, n: usize| -> Result<Vec<f64>, String> {
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        if v.len() == n {
            Ok(v)
        } else {
            Err(format!("expected {n} values, got {}", v.len()))
        }
    };
    let r = values(next("r_m")?.strip_prefix("r_m").ok_or("bad r_m line")?, nr)?;
    let z = values(next("z_m")?.strip_prefix("z_m").ok_or("bad z_m line")?, nz)?;
    let mut block = |name: &str| -> Result<Vec<f64>, String> {
        if next(name)?.trim() != name {
            return Err(format!("expected `{name}`"));
        }
        let mut out = Vec::with_capacity(nr * nz);
        for _ in 0..nz {
            out.extend(values(next(name)?, nr)?);
        }
        Ok(out)
    };
    let b_r = block("B_r_T")?;
    let b_z = block("B_z_T")?;
    Ok(GridField {
        grid: StructuredGrid { r, z },
        b_r,
        b_z,
    })
}
