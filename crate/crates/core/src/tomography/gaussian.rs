//! Closed-form tomograms of Gaussian states.

use std::f64::consts::PI;

use ndarray::Array2;

use super::{Kind, Tomogram};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// First and second moments of a Gaussian state. `cov_qp` is the symmetrized
/// covariance `⟨qp + pq⟩/2 - ⟨q⟩⟨p⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMoments {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub cov_qp: f64,
}

impl GaussianMoments {
    /// Validates positivity and the uncertainty relation `det Σ ≥ 1/4`.
    pub fn new(mean_q: f64, mean_p: f64, var_q: f64, var_p: f64, cov_qp: f64) -> Result<Self> {
        let det = var_q * var_p - cov_qp * cov_qp;
        if !(var_q > 0.0 && var_p > 0.0 && det > 0.0) {
            return Err(Error::Domain("covariance matrix is not positive definite".into()));
        }
        if det < 0.25 - 1e-12 {
            return Err(Error::Domain(format!("covariance determinant {det} violates the uncertainty bound 1/4")));
        }
        Ok(GaussianMoments { mean_q, mean_p, var_q, var_p, cov_qp })
    }

    pub fn coherent(q0: f64, p0: f64) -> Self {
        GaussianMoments { mean_q: q0, mean_p: p0, var_q: 0.5, var_p: 0.5, cov_qp: 0.0 }
    }

    /// Minimum-uncertainty packet with position variance `σ²/2`.
    pub fn squeezed(q0: f64, p0: f64, sigma: f64) -> Result<Self> {
        Self::new(q0, p0, 0.5 * sigma * sigma, 0.5 / (sigma * sigma), 0.0)
    }

    /// `M(X, μ, ν)`.
    pub fn symplectic(&self, x: f64, mu: f64, nu: f64) -> f64 {
        let mean = mu * self.mean_q + nu * self.mean_p;
        let var = mu * mu * self.var_q + 2.0 * mu * nu * self.cov_qp + nu * nu * self.var_p;
        (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
    }
}

/// Closed-form partial tomogram of a Gaussian state.
pub fn gaussian_tomogram_oracle(m: &GaussianMoments, kind: Kind, x_grid: &GridSpec, param_grid: &GridSpec) -> Result<Tomogram> {
    let values = Array2::from_shape_fn((x_grid.len(), param_grid.len()), |(i, j)| {
        let (mu, nu) = kind.symplectic_parameters(param_grid.point(j));
        m.symplectic(x_grid.point(i), mu, nu)
    });
    Tomogram::new(kind, *x_grid, *param_grid, values)
}
