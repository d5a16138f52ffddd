//! CSV and JSON serialization of tomograms.

use std::io::{BufRead, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Kind, Tomogram};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Formats with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header `X,eta,value`, one record per grid node, `η` varying fastest.
pub fn write_csv<W: Write>(t: &Tomogram, mut out: W) -> Result<()> {
    writeln!(out, "X,eta,value")?;
    for (i, x) in t.x_grid.points().into_iter().enumerate() {
        for (j, eta) in t.param_grid.points().into_iter().enumerate() {
            writeln!(out, "{},{},{}", fmt_f64(x), fmt_f64(eta), fmt_f64(t.values[[i, j]]))?;
        }
    }
    Ok(())
}

/// Reads what [`write_csv`] writes. The grids are inferred from the records
/// and must be uniform.
pub fn read_csv<R: BufRead>(kind: Kind, input: R) -> Result<Tomogram> {
    let mut rows = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if n == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Io(format!("line {}: {e}", n + 1)))?;
        if fields.len() != 3 {
            return Err(Error::Io(format!("line {}: expected 3 fields", n + 1)));
        }
        rows.push([fields[0], fields[1], fields[2]]);
    }
    let n_eta = rows.iter().take_while(|r| r[0] == rows[0][0]).count();
    if n_eta < GridSpec::MIN_POINTS || rows.len() % n_eta != 0 {
        return Err(Error::Io("records do not form a rectangular grid".into()));
    }
    let n_x = rows.len() / n_eta;
    let x_grid = GridSpec::new(rows[0][0], rows[rows.len() - 1][0], n_x)?;
    let param_grid = GridSpec::new(rows[0][1], rows[n_eta - 1][1], n_eta)?;
    let values = Array2::from_shape_fn((n_x, n_eta), |(i, j)| rows[i * n_eta + j][2]);
    Tomogram::new(kind, x_grid, param_grid, values)
}

/// Self-describing JSON form. `values` is row-major in `[x, eta]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomogramEnvelope {
    pub kind: Kind,
    pub x_grid: GridSpec,
    pub param_grid: GridSpec,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<serde_json::Value>,
}

impl TomogramEnvelope {
    pub fn from_tomogram(t: &Tomogram) -> Self {
        TomogramEnvelope {
            kind: t.kind,
            x_grid: t.x_grid,
            param_grid: t.param_grid,
            values: t.values.iter().copied().collect(),
            distribution: None,
        }
    }

    pub fn into_tomogram(self) -> Result<Tomogram> {
        let shape = (self.x_grid.len(), self.param_grid.len());
        let values = Array2::from_shape_vec(shape, self.values).map_err(|e| Error::GridMismatch(e.to_string()))?;
        Tomogram::new(self.kind, self.x_grid, self.param_grid, values)
    }
}

pub fn write_json<W: Write>(env: &TomogramEnvelope, out: W) -> Result<()> {
    serde_json::to_writer(out, env).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_json<R: std::io::Read>(input: R) -> Result<TomogramEnvelope> {
    serde_json::from_reader(input).map_err(|e| Error::Io(e.to_string()))
}
