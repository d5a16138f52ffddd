//! Filtered back-projection from partial tomograms to Wigner functions and
//! density matrices.
//!
//! For `M1`, `W(q, p) = (1/4π²) ∫dν ∫dX M1(X, ν) h(X - q - νp)` with the ramp
//! kernel `h(x) = ∫|r| e^{irx} dr`; `M2` is the same with `q ↔ p`. A finite
//! window `η ∈ [η_min, η_max]` leaves out the projection directions close to
//! the other axis. Those are parametrized by `η' = 1/η`, where the
//! tomogram reads `M_c(Y, η') = |η| M(ηY, η)`, and the missing slice
//! `η' ∈ (1/η_min, 1/η_max)` is filled by polynomial interpolation in `η'`
//! through the outermost available columns.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{Kind, Tomogram};
use crate::error::{Error, Result};
use crate::grid::{interpolate, GridSpec};
use crate::state::QuantumState;
use crate::wigner::{density_kernel_from_wigner, PhaseSpaceField};

/// Knobs of the back-projection. `q_grid` is the position grid of the
/// result: the Wigner grid for [`reconstruct_wigner`], the state grid for
/// [`density_from_tomogram`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionOptions {
    pub q_grid: GridSpec,
    pub p_grid: GridSpec,
    /// Smallest accepted `min(|η_min|, |η_max|)`.
    pub min_coverage: f64,
    /// Interpolation nodes per side used to fill the missing directions.
    pub gap_nodes: usize,
    /// Quadrature points across the missing slice.
    pub gap_points: usize,
    /// Accepted deviation of `∬W` from one.
    pub norm_tol: f64,
    /// Accepted excess of `|W|` over the bound `1/π`.
    pub bound_tol: f64,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        let g = GridSpec::new(-10.0, 10.0, 256).expect("static grid");
        ReconstructionOptions {
            q_grid: g,
            p_grid: g,
            min_coverage: 3.0,
            gap_nodes: 3,
            gap_points: 33,
            norm_tol: 2e-3,
            bound_tol: 2e-2,
        }
    }
}

const TAPER_START: f64 = 0.8;
const BACKPROJECT_ORDER: usize = 4;

const GL8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// Band-limited ramp `h(x) = ∫_{-R}^{R} |r| T(r) e^{irx} dr` with a
/// raised-cosine taper `T` above `0.8R`.
pub(crate) fn ramp_at(x: f64, r_max: f64) -> f64 {
    let x = x.abs();
    let a = TAPER_START * r_max;
    let b = r_max - a;
    let ax = a * x;
    let flat = if ax < 1e-2 {
        let t = ax * ax;
        a * a * (1.0 - t / 4.0 + t * t / 72.0 - t * t * t / 2880.0)
    } else {
        2.0 * (a * ax.sin() / x + (ax.cos() - 1.0) / (x * x))
    };
    let panels = ((b * x).ceil() as usize).max(4);
    let w = b / panels as f64;
    let mut taper = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * w;
        for &(t, wt) in &GL8 {
            for r in [mid - 0.5 * w * t, mid + 0.5 * w * t] {
                let shape = 0.5 * (1.0 + (PI * (r - a) / b).cos());
                taper += wt * r * shape * (r * x).cos();
            }
        }
    }
    flat + taper * w
}

/// [`ramp_at`] at `x = m dx`, `m = 0..n`, with `R = π/dx`.
pub(crate) fn ramp_kernel(dx: f64, n: usize) -> Vec<f64> {
    (0..n).map(|m| ramp_at(m as f64 * dx, PI / dx)).collect()
}

/// `g(s_m) = Σ_i F(x_i) h(x_i - s_m) dx` with `s_m = x_{m - pad}`, i.e. on the
/// input grid extended by `pad` nodes on both sides.
fn ramp_filter(values: &[f64], kernel: &[f64], dx: f64, pad: usize) -> Vec<f64> {
    let n = values.len();
    (0..n + 2 * pad)
        .map(|m| values.iter().enumerate().map(|(i, v)| v * kernel[(i + pad).abs_diff(m)]).sum::<f64>() * dx)
        .collect()
}

/// Extension of `grid` by whole steps so that it reaches `±reach`.
fn padded(grid: &GridSpec, reach: f64) -> Result<(GridSpec, usize)> {
    let h = grid.spacing();
    let short = (reach - grid.min().abs().min(grid.max().abs())).max(0.0);
    let pad = (short / h).ceil() as usize + BACKPROJECT_ORDER;
    let g = GridSpec::new(grid.min() - pad as f64 * h, grid.max() + pad as f64 * h, grid.len() + 2 * pad)?;
    Ok((g, pad))
}

/// Filtered projections for one family of lines.
struct Projections {
    grid: GridSpec,
    /// `(η, quadrature weight, filtered column)`.
    columns: Vec<(f64, f64, Vec<f64>)>,
}

impl Projections {
    /// `Σ w g(a + ηb, η)`.
    fn back_project(&self, a: f64, b: f64, swap: bool) -> f64 {
        self.columns
            .iter()
            .map(|(eta, w, g)| {
                let s = if swap { eta * a + b } else { a + eta * b };
                w * interpolate(g, &self.grid, s, BACKPROJECT_ORDER)
            })
            .sum()
    }
}

fn trapezoid_weights(n: usize, d: f64) -> Vec<f64> {
    (0..n).map(|j| if j == 0 || j + 1 == n { 0.5 * d } else { d }).collect()
}

fn nearest_index(grid: &GridSpec, x: f64) -> usize {
    (((x - grid.min()) / grid.spacing()).round().max(0.0) as usize).min(grid.len() - 1)
}

/// Main and gap-filling projections of a tomogram, filtered on grids wide
/// enough for back-projection onto `|a| ≤ a_max`, `|b| ≤ b_max`.
fn filtered_projections(t: &Tomogram, opts: &ReconstructionOptions, a_max: f64, b_max: f64) -> Result<(Projections, Projections)> {
    let (eta_lo, eta_hi) = (t.param_grid.min(), t.param_grid.max());
    let coverage = eta_lo.abs().min(eta_hi.abs());
    if !(eta_lo < 0.0 && eta_hi > 0.0) || coverage < opts.min_coverage {
        return Err(Error::ReconstructionQuality(format!(
            "{} range [{eta_lo}, {eta_hi}] does not reach ±{} on both sides",
            t.kind.parameter_name(),
            opts.min_coverage
        )));
    }
    let xg = t.x_grid;
    let dx = xg.spacing();
    let (sg, pad) = padded(&xg, a_max + eta_lo.abs().max(eta_hi) * b_max)?;
    let kernel = ramp_kernel(dx, sg.len());
    let weights = trapezoid_weights(t.param_grid.len(), t.param_grid.spacing());
    let main_cols: Vec<(f64, f64, Vec<f64>)> = (0..t.param_grid.len())
        .into_par_iter()
        .map(|j| {
            let col = t.values.column(j).to_vec();
            (t.param_grid.point(j), weights[j], ramp_filter(&col, &kernel, dx, pad))
        })
        .collect();

    // Interpolation nodes 1/η at η ≈ η_edge/k, k = 1..gap_nodes, on each side.
    let m = opts.gap_nodes.max(1);
    let mut nodes: Vec<usize> = Vec::new();
    for edge in [eta_lo, eta_hi] {
        for k in 1..=m {
            let j = nearest_index(&t.param_grid, edge / k as f64);
            if t.param_grid.point(j) * edge <= 0.0 || nodes.contains(&j) {
                return Err(Error::ReconstructionQuality("parameter grid too coarse to fill the missing directions".into()));
            }
            nodes.push(j);
        }
    }
    let node_eta: Vec<f64> = nodes.iter().map(|&j| t.param_grid.point(j)).collect();
    let node_inv: Vec<f64> = node_eta.iter().map(|e| 1.0 / e).collect();

    let x_reach = xg.min().abs().min(xg.max().abs());
    let y_max = x_reach / eta_lo.abs().max(eta_hi);
    let yg = GridSpec::new(-y_max, y_max, xg.len())?;
    let dy = yg.spacing();
    let ys = yg.points();
    let node_cols: Vec<Vec<f64>> = nodes
        .iter()
        .zip(&node_eta)
        .map(|(&j, &eta)| {
            let col = t.values.column(j).to_vec();
            ys.iter().map(|y| eta.abs() * interpolate(&col, &xg, eta * y, 6)).collect()
        })
        .collect();

    let (g_lo, g_hi) = (1.0 / eta_lo, 1.0 / eta_hi);
    let k = opts.gap_points.max(3);
    let dg = (g_hi - g_lo) / (k - 1) as f64;
    let gap_weights = trapezoid_weights(k, dg);
    let (syg, ypad) = padded(&yg, g_lo.abs().max(g_hi) * a_max + b_max)?;
    let gap_kernel = ramp_kernel(dy, syg.len());
    let gap_cols: Vec<(f64, f64, Vec<f64>)> = (0..k)
        .into_par_iter()
        .map(|c| {
            let g = g_lo + c as f64 * dg;
            let lagrange: Vec<f64> = (0..node_inv.len())
                .map(|a| {
                    (0..node_inv.len())
                        .filter(|&b| b != a)
                        .map(|b| (g - node_inv[b]) / (node_inv[a] - node_inv[b]))
                        .product()
                })
                .collect();
            let col: Vec<f64> = (0..ys.len())
                .map(|i| lagrange.iter().zip(&node_cols).map(|(l, c)| l * c[i]).sum())
                .collect();
            (g, gap_weights[c], ramp_filter(&col, &gap_kernel, dy, ypad))
        })
        .collect();

    Ok((Projections { grid: sg, columns: main_cols }, Projections { grid: syg, columns: gap_cols }))
}

fn wigner_on(t: &Tomogram, q_grid: &GridSpec, p_grid: &GridSpec, opts: &ReconstructionOptions) -> Result<PhaseSpaceField> {
    let (a_max, b_max) = match t.kind {
        Kind::M1 => (q_grid.abs_max(), p_grid.abs_max()),
        Kind::M2 => (p_grid.abs_max(), q_grid.abs_max()),
    };
    let (main, gap) = filtered_projections(t, opts, a_max, b_max)?;
    let ps = p_grid.points();
    let norm = 1.0 / (4.0 * PI * PI);
    let rows: Vec<Vec<f64>> = q_grid
        .points()
        .into_par_iter()
        .map(|q| {
            ps.iter()
                .map(|&p| {
                    let (a, b) = match t.kind {
                        Kind::M1 => (q, p),
                        Kind::M2 => (p, q),
                    };
                    norm * (main.back_project(a, b, false) + gap.back_project(a, b, true))
                })
                .collect()
        })
        .collect();
    let values = ndarray::Array2::from_shape_fn((q_grid.len(), ps.len()), |(i, j)| rows[i][j]);
    let w = PhaseSpaceField::new(*q_grid, *p_grid, values)?;

    let total = w.integral();
    if !((total - 1.0).abs() <= opts.norm_tol) {
        return Err(Error::ReconstructionQuality(format!(
            "reconstructed Wigner function integrates to {total:.6} (tolerance {})",
            opts.norm_tol
        )));
    }
    let peak = w.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if peak > 1.0 / PI + opts.bound_tol {
        return Err(Error::ReconstructionQuality(format!("|W| reaches {peak:.4}, above the bound 1/π")));
    }
    Ok(w)
}

/// Wigner function on `opts.q_grid × opts.p_grid`.
pub fn reconstruct_wigner(t: &Tomogram, opts: &ReconstructionOptions) -> Result<PhaseSpaceField> {
    wigner_on(t, &opts.q_grid, &opts.p_grid, opts)
}

/// Density matrix on the state grid `opts.q_grid`, via the Wigner function
/// on its refined grid and the inverse Weyl transform.
pub fn density_from_tomogram(t: &Tomogram, opts: &ReconstructionOptions) -> Result<QuantumState> {
    let limit = PI / (2.0 * opts.q_grid.spacing());
    if opts.p_grid.abs_max() > limit * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("momentum grid exceeds the aliasing limit {limit:.4} of the state grid")));
    }
    let w = wigner_on(t, &opts.q_grid.refined(), &opts.p_grid, opts)?;
    let kernel = density_kernel_from_wigner(&w)?;
    QuantumState::estimated(opts.q_grid, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_kernel_matches_quadrature() {
        let dx = 0.1;
        let h = ramp_kernel(dx, 40);
        let r_max = PI / dx;
        for m in [0usize, 1, 7, 39] {
            let x = m as f64 * dx;
            // brute-force midpoint rule
            let n = 400_000;
            let dr = r_max / n as f64;
            let mut acc = 0.0;
            for k in 0..n {
                let r = (k as f64 + 0.5) * dr;
                let t = if r < 0.8 * r_max { 1.0 } else { 0.5 * (1.0 + (PI * (r - 0.8 * r_max) / (0.2 * r_max)).cos()) };
                acc += 2.0 * r * t * (r * x).cos() * dr;
            }
            assert!((h[m] - acc).abs() < 1e-6 * r_max * r_max, "m={m}: {} vs {acc}", h[m]);
        }
    }
}
