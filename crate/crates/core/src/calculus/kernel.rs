//! Operator symbols and the integral kernel of operator action on small
//! grids. Everything here is dense linear algebra meant for diagnostics.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::{Array2, Axis};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::ComplexTomogramField;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::spectral::{momentum_matrix, position_matrix};
use crate::tomography::{density_from_tomogram, radon_line, ramp_at, Kind, ReconstructionOptions, Tomogram};
use crate::wigner::{density_kernel_from_wigner, weyl_symbol, PhaseSpaceField};

/// Largest position grid accepted by [`operator_symbol`].
pub const SYMBOL_MAX_POINTS: usize = 128;
/// Largest position grid and number of evaluation points for kernel values.
pub const KERNEL_MAX_POINTS: usize = 64;

fn guard(what: &str, n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::SizeGuard(format!("{what} has {n} entries, at most {max} allowed")));
    }
    Ok(())
}

/// Momentum grid matched to a position grid: inside the Weyl aliasing limit
/// and no wider than the position window.
fn matched_p_grid(grid: &GridSpec) -> Result<GridSpec> {
    let half = (PI / (2.0 * grid.spacing())).min(grid.abs_max());
    GridSpec::new(-half, half, 2 * grid.len() - 1)
}

/// Tomographic symbol `Tr(Â Û(X, η))` of an operator given by its position
/// kernel, as the Radon transform of its Weyl symbol.
pub fn operator_symbol(a: &Array2<C64>, grid: &GridSpec, kind: Kind, x_grid: &GridSpec, param_grid: &GridSpec) -> Result<ComplexTomogramField> {
    guard("position grid", grid.len(), SYMBOL_MAX_POINTS)?;
    let p_grid = matched_p_grid(grid)?;
    let w = weyl_symbol(a, grid, &p_grid)?;
    let q_grid = grid.refined();
    let xs = x_grid.points();
    let cols: Vec<Vec<C64>> = param_grid
        .points()
        .into_iter()
        .map(|eta| {
            let (mu, nu) = kind.symplectic_parameters(eta);
            radon_line(&w, &q_grid, &p_grid, mu, nu, &xs)
        })
        .collect::<Result<_>>()?;
    let values = Array2::from_shape_fn((xs.len(), cols.len()), |(i, j)| cols[j][i]);
    ComplexTomogramField::new(kind, *x_grid, *param_grid, values)
}

/// `(X, η)` at which the symbol is read and `(X', η')` at which the
/// tomogram is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub x: f64,
    pub eta: f64,
    pub x_prime: f64,
    pub eta_prime: f64,
}

fn hermitian_eigen(m: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let n = m.nrows();
    let d = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[[i, j]] + m[[j, i]].conj()));
    let e = d.symmetric_eigen();
    let v = Array2::from_shape_fn((n, n), |(i, k)| e.eigenvectors[(i, k)]);
    (e.eigenvalues.iter().copied().collect(), v)
}

/// `V diag(d) V†`.
fn spectral_function(values: &[f64], v: &Array2<C64>, d: impl Fn(f64) -> f64) -> Array2<C64> {
    let scaled = Array2::from_shape_fn(v.dim(), |(i, k)| v[[i, k]] * d(values[k]));
    scaled.dot(&v.t().mapv(|c| c.conj()))
}

/// Quantizer `Û(X, η) = δ(X - Â_η)` with `Â_η = q̂ + ηp̂` (`M1`) or
/// `ηq̂ + p̂` (`M2`), band-limited to `π/(h√(1+η²))`, as a matrix acting on
/// grid samples.
pub fn quantizer_matrix(kind: Kind, grid: &GridSpec, x: f64, eta: f64) -> Array2<C64> {
    let (mu, nu) = kind.symplectic_parameters(eta);
    let a = position_matrix(grid) * C64::new(mu, 0.0) + momentum_matrix(grid) * C64::new(nu, 0.0);
    let (lam, v) = hermitian_eigen(&a);
    let r = PI / (grid.spacing() * (1.0 + eta * eta).sqrt());
    spectral_function(&lam, &v, |l| {
        let u = x - l;
        if (r * u).abs() < 1e-12 {
            r / PI
        } else {
            (r * u).sin() / (PI * u)
        }
    })
}

/// Dequantizer `D̂(X', η')` as a matrix acting on grid samples: the operator
/// whose Wigner function is `(1/4π²) h(X' - q - η'p)` (with the roles of `q`
/// and `p` exchanged for `M2`), `h` the ramp band-limited to `π/ΔX`.
fn dequantizer_matrix(kind: Kind, grid: &GridSpec, p_grid: &GridSpec, dx: f64, x_prime: f64, eta_prime: f64) -> Result<Array2<C64>> {
    let q_grid = grid.refined();
    let (mu, nu) = kind.symplectic_parameters(eta_prime);
    let r_max = PI / dx;
    let norm = 1.0 / (4.0 * PI * PI);
    let ps = p_grid.points();
    let values = Array2::from_shape_fn((q_grid.len(), ps.len()), |(i, j)| {
        norm * ramp_at(x_prime - mu * q_grid.point(i) - nu * ps[j], r_max)
    });
    let w = PhaseSpaceField::new(q_grid, *p_grid, values)?;
    Ok(density_kernel_from_wigner(&w)? * C64::new(grid.spacing(), 0.0))
}

/// Kernel `K(X, η; X', η') = Tr(Û(X, η) Â D̂(X', η'))` of `Â` acting on
/// tomograms, `F_{Âρ̂}(X, η) = ∬ K M(X', η') dX' dη'`. `a` is the position
/// kernel of `Â` and `dx` the spacing of the tomogram's `X` grid.
pub fn operator_kernel(a: &Array2<C64>, grid: &GridSpec, kind: Kind, dx: f64, points: &[KernelPoint]) -> Result<Vec<C64>> {
    guard("position grid", grid.len(), KERNEL_MAX_POINTS)?;
    guard("evaluation list", points.len(), KERNEL_MAX_POINTS)?;
    let a_op = a * C64::new(grid.spacing(), 0.0);
    let p_grid = matched_p_grid(grid)?;
    points
        .par_iter()
        .map(|k| {
            let u = quantizer_matrix(kind, grid, k.x, k.eta);
            let d = dequantizer_matrix(kind, grid, &p_grid, dx, k.x_prime, k.eta_prime)?;
            Ok(trace_of_product(&u.dot(&a_op), &d))
        })
        .collect()
}

fn trace_of_product(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    a.axis_iter(Axis(0)).enumerate().map(|(i, row)| row.iter().zip(b.column(i)).map(|(x, y)| x * y).sum::<C64>()).sum()
}

/// `∬ K(X, η; X', η') M(X', η') dX' dη'` at the listed `(X, η)`. By
/// linearity the contraction over the primed variables is the reconstructed
/// density operator, so this is `Tr(Û(X, η) Â ρ̂_rec)`.
pub fn kernel_contraction(a: &Array2<C64>, grid: &GridSpec, t: &Tomogram, points: &[(f64, f64)]) -> Result<Vec<C64>> {
    guard("position grid", grid.len(), KERNEL_MAX_POINTS)?;
    guard("evaluation list", points.len(), KERNEL_MAX_POINTS)?;
    let opts = ReconstructionOptions { q_grid: *grid, p_grid: matched_p_grid(grid)?, ..Default::default() };
    let rho = density_from_tomogram(t, &opts)?;
    let h = C64::new(grid.spacing(), 0.0);
    let a_rho = (a * h).dot(&(rho.rho() * h));
    Ok(points.par_iter().map(|&(x, eta)| trace_of_product(&quantizer_matrix(t.kind, grid, x, eta), &a_rho)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{state_from_preset, Preset};
    use crate::tomography::partial_tomogram;

    #[test]
    fn density_symbol_is_tomogram() {
        let g = GridSpec::new(-8.0, 8.0, 96).unwrap();
        let s = state_from_preset(&Preset::Coherent { q0: 1.0, p0: -0.5 }, &g).unwrap();
        let xg = GridSpec::symmetric(14.0, 0.1).unwrap();
        let pg = GridSpec::symmetric(2.0, 0.25).unwrap();
        let sym = operator_symbol(&s.rho(), &g, Kind::M1, &xg, &pg).unwrap();
        let t = partial_tomogram(&s, Kind::M1, &xg, &pg).unwrap();
        let err = sym.values.iter().zip(t.values.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn zero_operator_has_zero_kernel() {
        let g = GridSpec::new(-6.0, 6.0, 32).unwrap();
        let pts = [KernelPoint { x: 0.5, eta: 0.3, x_prime: -0.2, eta_prime: 1.0 }];
        let k = operator_kernel(&Array2::zeros((32, 32)), &g, Kind::M1, 0.25, &pts).unwrap();
        assert_eq!(k[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn size_guards() {
        let g = GridSpec::new(-6.0, 6.0, 130).unwrap();
        let a = Array2::zeros((130, 130));
        let xg = GridSpec::symmetric(4.0, 0.5).unwrap();
        assert!(matches!(operator_symbol(&a, &g, Kind::M1, &xg, &xg), Err(Error::SizeGuard(_))));
        assert!(matches!(operator_kernel(&a, &g, Kind::M1, 0.1, &[]), Err(Error::SizeGuard(_))));
    }
}
