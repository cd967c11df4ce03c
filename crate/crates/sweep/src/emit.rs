//! Output files.
//!
//! CSV files start with `#` manifest lines, then a header naming the swept
//! parameters and the observable columns; complex columns are split into
//! `_re`/`_im`. Numbers use Rust's shortest round-trip exponent form, `NA`
//! marks a value that does not exist and `ERR` a failed evaluation (see the
//! JSON diagnostics).
//!
//! Images are written for two-axis sweeps (first axis along x) and for Q
//! grids. Pixel row `r` holds the `r`-th y sample, so row 0 is the smallest y.
//! PGM is binary P5 with max value 255. The colour variant is binary P6 with
//! a piecewise-linear map through black, blue, cyan, yellow and white at
//! levels 0, ¼, ½, ¾, 1. Intensity is linear in the value between the grid
//! minimum and maximum, or with `intensity = "log"` linear in log10 over the
//! six decades below the maximum. Failed cells are drawn at level 0.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use fpsteady::qgrid::QGrid;

use crate::config::{Intensity, OutputFormat};
use crate::error::Result;
use crate::observable::ColumnKind;
use crate::run::{Cell, SweepResult};

const LOG_DECADES: f64 = 6.0;

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

fn manifest_lines(r: &SweepResult) -> Result<String> {
    let m = &r.manifest;
    let mut s = String::new();
    writeln!(s, "# tool = {} {}", m.tool, m.version).unwrap();
    writeln!(s, "# schema_version = {}", m.schema_version).unwrap();
    if !m.config.name.is_empty() {
        writeln!(s, "# name = {}", m.config.name).unwrap();
    }
    if let Some(t) = m.generated_unix {
        writeln!(s, "# generated_unix = {t}").unwrap();
    }
    writeln!(s, "# units = {}", serde_json::to_string(&m.config.units)?).unwrap();
    writeln!(s, "# intensity = {}", serde_json::to_string(&m.config.output.intensity)?).unwrap();
    writeln!(s, "# config = {}", serde_json::to_string(&m.config)?).unwrap();
    Ok(s)
}

pub fn csv_string(r: &SweepResult) -> Result<String> {
    let mut s = manifest_lines(r)?;
    let mut header: Vec<String> = r.axis_names.clone();
    for c in &r.columns {
        match c.kind {
            ColumnKind::Complex => {
                header.push(format!("{}_re", c.name));
                header.push(format!("{}_im", c.name));
            }
            _ => header.push(c.name.clone()),
        }
    }
    s.push_str(&header.join(","));
    s.push('\n');
    for p in &r.points {
        let mut row: Vec<String> = p.coords.iter().map(|&v| fmt_f64(v)).collect();
        for (cell, col) in p.cells.iter().zip(&r.columns) {
            let complex = col.kind == ColumnKind::Complex;
            match *cell {
                Cell::Real(v) => row.push(fmt_f64(v)),
                Cell::Integer(v) => row.push(v.to_string()),
                Cell::Complex(z) => {
                    row.push(fmt_f64(z.re));
                    row.push(fmt_f64(z.im));
                }
                Cell::Missing | Cell::Failed => {
                    let tag = if *cell == Cell::Missing { "NA" } else { "ERR" };
                    row.push(tag.into());
                    if complex {
                        row.push(tag.into());
                    }
                }
            }
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    Ok(s)
}

fn json_num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or_else(|| Value::String(fmt_f64(v)))
}

fn cell_json(c: &Cell) -> Value {
    match *c {
        Cell::Real(v) => json_num(v),
        Cell::Integer(v) => json!(v),
        Cell::Complex(z) => json!({"re": json_num(z.re), "im": json_num(z.im)}),
        Cell::Missing => Value::Null,
        Cell::Failed => json!("ERR"),
    }
}

fn qgrid_json(q: &QGrid) -> Value {
    json!({
        "x_axis": q.x_axis.iter().map(|&v| json_num(v)).collect::<Vec<_>>(),
        "y_axis": q.y_axis.iter().map(|&v| json_num(v)).collect::<Vec<_>>(),
        "values": q.values.iter().map(|row| row.iter().map(|&v| json_num(v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "normalization_estimate": json_num(q.normalization_estimate),
    })
}

pub fn json_value(r: &SweepResult) -> Result<Value> {
    let rows: Vec<Value> = r
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut obj = Map::new();
            obj.insert("index".into(), json!(i));
            obj.insert("coords".into(), Value::Array(p.coords.iter().map(|&v| json_num(v)).collect()));
            let mut vals = Map::new();
            for (c, cell) in r.columns.iter().zip(&p.cells) {
                vals.insert(c.name.clone(), cell_json(cell));
            }
            obj.insert("values".into(), Value::Object(vals));
            obj.insert("diagnostics".into(), serde_json::to_value(&p.diagnostics)?);
            if let Some(q) = &p.qgrid {
                obj.insert("qgrid".into(), qgrid_json(q));
            }
            Ok(Value::Object(obj))
        })
        .collect::<Result<_>>()?;
    Ok(json!({
        "manifest": serde_json::to_value(&r.manifest)?,
        "axes": r.axis_names.iter().zip(&r.axis_points).map(|(n, p)| json!({"param": n, "points": p.iter().map(|&v| json_num(v)).collect::<Vec<_>>()})).collect::<Vec<_>>(),
        "columns": r.columns.iter().map(|c| json!({"name": c.name, "kind": format!("{:?}", c.kind).to_lowercase()})).collect::<Vec<_>>(),
        "rows": rows,
        "oracle_checks": serde_json::to_value(&r.oracle_checks)?,
    }))
}

/// Values mapped to 0..=255.
pub fn to_levels(values: &[f64], intensity: Intensity) -> Vec<u8> {
    let f = |v: f64| match intensity {
        Intensity::Linear => v,
        Intensity::Log => v.log10(),
    };
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = match intensity {
        Intensity::Linear => (finite.iter().copied().fold(f64::INFINITY, f64::min), hi),
        Intensity::Log => {
            let top = if hi > 0.0 { hi.log10() } else { 0.0 };
            (top - LOG_DECADES, top)
        }
    };
    values
        .iter()
        .map(|&v| {
            if !v.is_finite() || (intensity == Intensity::Log && v <= 0.0) {
                return 0;
            }
            let t = if hi > lo { (f(v) - lo) / (hi - lo) } else { 1.0 };
            (t.clamp(0.0, 1.0) * 255.0).round() as u8
        })
        .collect()
}

pub fn pgm_bytes(width: usize, height: usize, levels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(levels);
    out
}

const COLOUR_STOPS: [[f64; 3]; 5] = [[0.0, 0.0, 0.0], [0.0, 0.0, 255.0], [0.0, 255.0, 255.0], [255.0, 255.0, 0.0], [255.0, 255.0, 255.0]];

pub fn colour(level: u8) -> [u8; 3] {
    let t = level as f64 / 255.0 * 4.0;
    let i = (t.floor() as usize).min(3);
    let frac = t - i as f64;
    let (a, b) = (COLOUR_STOPS[i], COLOUR_STOPS[i + 1]);
    [0, 1, 2].map(|k| (a[k] + (b[k] - a[k]) * frac).round() as u8)
}

pub fn ppm_bytes(width: usize, height: usize, levels: &[u8]) -> Vec<u8> {
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    for &l in levels {
        out.extend_from_slice(&colour(l));
    }
    out
}

fn qgrid_csv(q: &QGrid) -> String {
    let mut s = String::from("x,y,q\n");
    for (iy, row) in q.values.iter().enumerate() {
        for (ix, v) in row.iter().enumerate() {
            writeln!(s, "{},{},{}", fmt_f64(q.x_axis[ix]), fmt_f64(q.y_axis[iy]), fmt_f64(*v)).unwrap();
        }
    }
    s
}

fn write(path: PathBuf, bytes: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, bytes)?;
    written.push(path);
    Ok(())
}

/// Writes every configured output into `dir`; returns the paths in write order.
pub fn emit(r: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let out = &r.manifest.config.output;
    let prefix = &out.prefix;
    let mut written = Vec::new();
    if out.formats.contains(&OutputFormat::Csv) {
        write(dir.join(format!("{prefix}.csv")), csv_string(r)?.as_bytes(), &mut written)?;
    }
    if out.formats.contains(&OutputFormat::Json) {
        let mut text = serde_json::to_string_pretty(&json_value(r)?)?;
        text.push('\n');
        write(dir.join(format!("{prefix}.json")), text.as_bytes(), &mut written)?;
    }
    let images = out.formats.contains(&OutputFormat::Pgm);
    if images && r.axis_points.len() == 2 {
        let (w, h) = (r.axis_points[0].len(), r.axis_points[1].len());
        for c in r.columns.iter().filter(|c| c.kind != ColumnKind::Complex) {
            let vals = r.real_column(&c.name).expect("column exists");
            // points are ordered with the first axis outermost; images want x fastest
            let transposed: Vec<f64> = (0..h).flat_map(|iy| (0..w).map(move |ix| (ix, iy))).map(|(ix, iy)| vals[ix * h + iy]).collect();
            let levels = to_levels(&transposed, out.intensity);
            write(dir.join(format!("{prefix}_{}.pgm", c.name)), &pgm_bytes(w, h, &levels), &mut written)?;
            write(dir.join(format!("{prefix}_{}.ppm", c.name)), &ppm_bytes(w, h, &levels), &mut written)?;
        }
    }
    for (i, p) in r.points.iter().enumerate() {
        let Some(q) = &p.qgrid else { continue };
        let stem = if r.points.len() == 1 { format!("{prefix}_q") } else { format!("{prefix}_q_{i:04}") };
        if out.formats.contains(&OutputFormat::Csv) {
            write(dir.join(format!("{stem}.csv")), qgrid_csv(q).as_bytes(), &mut written)?;
        }
        if images {
            let flat: Vec<f64> = q.values.iter().flatten().copied().collect();
            let levels = to_levels(&flat, out.intensity);
            let (w, h) = (q.x_axis.len(), q.y_axis.len());
            write(dir.join(format!("{stem}.pgm")), &pgm_bytes(w, h, &levels), &mut written)?;
            write(dir.join(format!("{stem}.ppm")), &ppm_bytes(w, h, &levels), &mut written)?;
        }
    }
    Ok(written)
}
