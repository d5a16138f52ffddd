//! Wigner functions and Weyl symbols on phase-space grids.
//!
//! For a kernel sampled on a state grid with spacing `h`, the relative
//! coordinate `u = x_a - x_b` runs in steps of `2h` along each anti-diagonal
//! `a + b = const`, so the natural position grid of the Wigner function is
//! the refined grid (spacing `h/2`) and its momentum period is `π/h`.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::state::QuantumState;

/// Real field `W(q_i, p_j)` on a product grid.
#[derive(Debug, Clone)]
pub struct PhaseSpaceField {
    pub q_grid: GridSpec,
    pub p_grid: GridSpec,
    /// Indexed `[q, p]`.
    pub values: Array2<f64>,
}

impl PhaseSpaceField {
    pub fn new(q_grid: GridSpec, p_grid: GridSpec, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (q_grid.len(), p_grid.len()) {
            return Err(Error::GridMismatch(format!(
                "field is {:?}, grids are {} x {}",
                values.dim(),
                q_grid.len(),
                p_grid.len()
            )));
        }
        Ok(PhaseSpaceField { q_grid, p_grid, values })
    }

    /// `∬ W dq dp` by the trapezoid rule.
    pub fn integral(&self) -> f64 {
        let rows: Vec<f64> = self
            .values
            .axis_iter(Axis(0))
            .map(|row| self.p_grid.integrate(row.iter().copied()))
            .collect();
        self.q_grid.integrate(rows)
    }

    /// `∫ W(q, p) dp` at every q node.
    pub fn position_marginal(&self) -> Vec<f64> {
        self.values
            .axis_iter(Axis(0))
            .map(|row| self.p_grid.integrate(row.iter().copied()))
            .collect()
    }

    /// `∫ W(q, p) dq` at every p node.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        self.values
            .axis_iter(Axis(1))
            .map(|col| self.q_grid.integrate(col.iter().copied()))
            .collect()
    }

    /// `∬ f(q, p) W dq dp`.
    pub fn average(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let qs = self.q_grid.points();
        let ps = self.p_grid.points();
        let rows: Vec<f64> = qs
            .iter()
            .enumerate()
            .map(|(i, &q)| self.p_grid.integrate(ps.iter().enumerate().map(|(j, &p)| f(q, p) * self.values[[i, j]])))
            .collect();
        self.q_grid.integrate(rows)
    }
}

fn check_nyquist(grid: &GridSpec, p_grid: &GridSpec) -> Result<()> {
    let limit = PI / (2.0 * grid.spacing());
    if p_grid.abs_max() > limit * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "momentum grid reaches {:.4}, beyond the aliasing limit {limit:.4} of the position grid",
            p_grid.abs_max()
        )));
    }
    Ok(())
}

/// Weyl symbol `(1/2π) ∫ K(q + u/2, q - u/2) e^{-ipu} du` of an arbitrary
/// kernel, on `grid.refined() × p_grid`. For `K = ρ` this is the Wigner function.
pub fn weyl_symbol(kernel: &Array2<C64>, grid: &GridSpec, p_grid: &GridSpec) -> Result<Array2<C64>> {
    let n = grid.len();
    if kernel.dim() != (n, n) {
        return Err(Error::GridMismatch(format!("kernel is {:?}, grid has {n} points", kernel.dim())));
    }
    check_nyquist(grid, p_grid)?;
    let h = grid.spacing();
    let ps = p_grid.points();
    // phase[m + n - 1][j] = exp(-i p_j m h)
    let phase: Vec<Vec<C64>> = (0..2 * n - 1)
        .map(|mi| {
            let m = mi as f64 - (n - 1) as f64;
            ps.iter().map(|&p| C64::from_polar(1.0, -p * m * h)).collect()
        })
        .collect();
    let weight = 2.0 * h / (2.0 * PI);
    let rows: Vec<Vec<C64>> = (0..2 * n - 1)
        .into_par_iter()
        .map(|s| {
            let mut row = vec![C64::new(0.0, 0.0); ps.len()];
            let a_lo = s.saturating_sub(n - 1);
            let a_hi = s.min(n - 1);
            for a in a_lo..=a_hi {
                let b = s - a;
                let k = kernel[[a, b]];
                if k == C64::new(0.0, 0.0) {
                    continue;
                }
                let ph = &phase[a + n - 1 - b];
                for (r, e) in row.iter_mut().zip(ph) {
                    *r += k * e;
                }
            }
            row.iter_mut().for_each(|r| *r *= weight);
            row
        })
        .collect();
    Ok(Array2::from_shape_fn((2 * n - 1, ps.len()), |(i, j)| rows[i][j]))
}

/// Wigner function of a state, on `state.grid().refined() × p_grid`.
pub fn wigner_from_density(state: &QuantumState, p_grid: &GridSpec) -> Result<PhaseSpaceField> {
    let grid = *state.grid();
    let w = weyl_symbol(&state.rho(), &grid, p_grid)?;
    let scale = w.iter().map(|c| c.re.abs()).fold(0.0, f64::max).max(1.0);
    let residue = w.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if residue > 1e-10 * scale {
        return Err(Error::Numerical(format!("Wigner function has imaginary residue {residue:.3e}")));
    }
    PhaseSpaceField::new(grid.refined(), *p_grid, w.mapv(|c| c.re))
}

/// Inverse Weyl transform `K(q + u/2, q - u/2) = ∫ W(q, p) e^{ipu} dp` back
/// onto the state grid. No normalization checks.
pub fn density_kernel_from_wigner(w: &PhaseSpaceField) -> Result<Array2<C64>> {
    let grid = w.q_grid.coarsened()?;
    let n = grid.len();
    let h = grid.spacing();
    let ps = w.p_grid.points();
    let dp = w.p_grid.spacing();
    let np = ps.len();
    let trap: Vec<f64> = (0..np).map(|j| if j == 0 || j + 1 == np { 0.5 * dp } else { dp }).collect();
    let phase: Vec<Vec<C64>> = (0..2 * n - 1)
        .map(|mi| {
            let m = mi as f64 - (n - 1) as f64;
            ps.iter().zip(&trap).map(|(&p, &t)| C64::from_polar(t, p * m * h)).collect()
        })
        .collect();
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            (0..n)
                .map(|b| {
                    let ph = &phase[a + n - 1 - b];
                    w.values.row(a + b).iter().zip(ph).map(|(&v, e)| e * v).sum()
                })
                .collect()
        })
        .collect();
    Ok(Array2::from_shape_fn((n, n), |(a, b)| rows[a][b]))
}

/// Density matrix of a Wigner function that integrates to one within `1e-4`.
pub fn density_from_wigner(w: &PhaseSpaceField) -> Result<QuantumState> {
    let total = w.integral();
    if (total - 1.0).abs() > 1e-4 {
        return Err(Error::Domain(format!("Wigner function integrates to {total:.6}, expected 1")));
    }
    let grid = w.q_grid.coarsened()?;
    QuantumState::mixed(grid, density_kernel_from_wigner(w)?)
}
