//! Partial symplectic tomograms.
//!
//! `M1(X, ν)` is the distribution of `q + νp`, `M2(X, μ)` the distribution
//! of `μq + p`. Both are slices of the full symplectic tomogram `M(X, μ, ν)`
//! at `μ = 1` and `ν = 1` respectively.

mod engine;
mod gaussian;
pub mod io;
mod radon;
mod reconstruct;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub use engine::{fresnel_column, partial_tomogram, symplectic_column, StateColumns, Tomographer};
pub use gaussian::{gaussian_tomogram_oracle, GaussianMoments};
pub use radon::{radon_line, symplectic_tomogram};
pub use reconstruct::{density_from_tomogram, reconstruct_wigner, ReconstructionOptions};
pub(crate) use reconstruct::ramp_at;

/// Column normalization tolerance for physical tomograms.
pub const COLUMN_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    /// `X = q + νp`
    M1,
    /// `X = μq + p`
    M2,
}

impl Kind {
    pub fn parameter_name(self) -> &'static str {
        match self {
            Kind::M1 => "nu",
            Kind::M2 => "mu",
        }
    }

    /// `(μ, ν)` of the full symplectic tomogram this column belongs to.
    pub fn symplectic_parameters(self, eta: f64) -> (f64, f64) {
        match self {
            Kind::M1 => (1.0, eta),
            Kind::M2 => (eta, 1.0),
        }
    }

    pub fn other(self) -> Kind {
        match self {
            Kind::M1 => Kind::M2,
            Kind::M2 => Kind::M1,
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "M1" => Ok(Kind::M1),
            "M2" => Ok(Kind::M2),
            _ => Err(Error::Domain(format!("unknown representation kind '{s}'"))),
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kind::M1 => write!(f, "M1"),
            Kind::M2 => write!(f, "M2"),
        }
    }
}

/// `F(X_i, η_j)` on an `X × η` grid, indexed `[x, eta]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tomogram {
    pub kind: Kind,
    pub x_grid: GridSpec,
    pub param_grid: GridSpec,
    pub values: Array2<f64>,
}

impl Tomogram {
    pub fn new(kind: Kind, x_grid: GridSpec, param_grid: GridSpec, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (x_grid.len(), param_grid.len()) {
            return Err(Error::GridMismatch(format!(
                "tomogram values are {:?}, grids are {} x {}",
                values.dim(),
                x_grid.len(),
                param_grid.len()
            )));
        }
        Ok(Tomogram { kind, x_grid, param_grid, values })
    }

    /// `∫ F(X, η_j) dX` for every column.
    pub fn column_integrals(&self) -> Vec<f64> {
        self.values
            .columns()
            .into_iter()
            .map(|c| self.x_grid.integrate(c.iter().copied()))
            .collect()
    }

    /// Fails with a grid-resolution error naming the first column whose
    /// integral is off by more than `tol`.
    pub fn check_normalization(&self, tol: f64) -> Result<()> {
        for (j, integral) in self.column_integrals().into_iter().enumerate() {
            if !((integral - 1.0).abs() <= tol) {
                return Err(Error::GridResolution { eta: self.param_grid.point(j), integral, tolerance: tol });
            }
        }
        Ok(())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn column_at(&self, j: usize) -> TomogramColumn {
        TomogramColumn {
            kind: self.kind,
            x_grid: self.x_grid,
            eta: self.param_grid.point(j),
            values: self.values.column(j).to_vec(),
        }
    }
}

/// A single tomogram column at an arbitrary parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct TomogramColumn {
    pub kind: Kind,
    pub x_grid: GridSpec,
    pub eta: f64,
    pub values: Vec<f64>,
}

impl TomogramColumn {
    pub fn integral(&self) -> f64 {
        self.x_grid.integrate(self.values.iter().copied())
    }

    /// `∫ X^k F(X) dX`.
    pub fn moment(&self, k: i32) -> f64 {
        self.x_grid.integrate(self.x_grid.points().iter().zip(&self.values).map(|(x, v)| x.powi(k) * v))
    }
}

/// Anything that can hand out tomogram columns at given parameter values.
pub trait ColumnSource {
    fn kind(&self) -> Kind;
    fn x_grid(&self) -> &GridSpec;
    fn column(&self, eta: f64) -> Result<TomogramColumn>;
}

impl ColumnSource for Tomogram {
    fn kind(&self) -> Kind {
        self.kind
    }

    fn x_grid(&self) -> &GridSpec {
        &self.x_grid
    }

    /// Only exact grid columns are served; there is no interpolation in `η`.
    fn column(&self, eta: f64) -> Result<TomogramColumn> {
        self.param_grid.index_of(eta).map(|j| self.column_at(j)).ok_or(Error::MissingColumn(eta))
    }
}
