//! Text serialization. Everything here is deterministic: fixed float
//! formatting, fixed key order, no locale.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use berrylab_core::model::{level_map, LevelMap};
use berrylab_core::RECONSTRUCTION_DISCLAIMER;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::{PlotSpec, RunConfig};
use crate::run::{Cell, Table};

/// Run metadata carried by every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub config: RunConfig,
    pub disclaimer: String,
    pub coupling: String,
    /// Level assignment of the zero-coupling pair at the first grid point.
    pub level_map: Option<LevelMap>,
}

impl Meta {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            config: config.clone(),
            disclaimer: RECONSTRUCTION_DISCLAIMER.to_string(),
            coupling: config.params.coupling.name().to_string(),
            level_map: level_map(&config.params).ok(),
        }
    }
}

/// JSON document layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Document {
    pub meta: Meta,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// Twelve significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Float(x) => format_float(*x),
        Cell::Int(i) => i.to_string(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Float(x) if x.is_finite() => Value::from(*x),
        Cell::Float(x) => Value::from(x.to_string()),
        Cell::Int(i) => Value::from(*i),
    }
}

pub fn to_csv(meta: &Meta, table: &Table) -> String {
    let mut out = String::new();
    let config = serde_json::to_string(&meta.config).expect("config serializes");
    let _ = writeln!(out, "# config: {config}");
    let _ = writeln!(out, "# disclaimer: {}", meta.disclaimer);
    let _ = writeln!(out, "# coupling: {}", meta.coupling);
    if let Some(map) = &meta.level_map {
        let _ = writeln!(
            out,
            "# level_map: {}",
            serde_json::to_string(map).expect("level map serializes")
        );
    }
    let _ = writeln!(out, "{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(format_cell).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn to_json(meta: &Meta, table: &Table) -> String {
    let doc = Document {
        meta: meta.clone(),
        columns: table.columns.iter().map(|c| c.to_string()).collect(),
        rows: table
            .rows
            .iter()
            .map(|r| r.iter().map(json_cell).collect())
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
    s.push('\n');
    s
}

/// Path of the data file for one plot.
pub fn plot_path(dir: &Path, table: &Table, spec: &PlotSpec) -> PathBuf {
    dir.join(format!(
        "{}_{}_vs_{}.dat",
        table.command.name(),
        spec.y,
        spec.x
    ))
}

/// Whitespace-separated `x y` lines. `None` for unknown columns.
pub fn plot_data(table: &Table, spec: &PlotSpec) -> Option<String> {
    let xs = table.column(&spec.x)?;
    let ys = table.column(&spec.y)?;
    let mut out = format!("# {} {}\n", spec.x, spec.y);
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{} {}", format_cell(x), format_cell(y));
    }
    Some(out)
}
