//! Radon transform of phase-space fields along the lines `X = μq + νp`.

use std::ops::{Add, Mul};

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{interpolate, GridSpec};
use crate::wigner::PhaseSpaceField;

const LINE_ORDER: usize = 8;

/// `∬ F(q, p) δ(X - μq - νp) dq dp` at every `X` in `xs`, for a field
/// indexed `[q, p]`. The integral runs along whichever axis keeps the
/// slope at most one; the other coordinate is interpolated.
pub fn radon_line<T>(values: &Array2<T>, q_grid: &GridSpec, p_grid: &GridSpec, mu: f64, nu: f64, xs: &[f64]) -> Result<Vec<T>>
where
    T: Copy + Default + Send + Sync + Add<Output = T> + Mul<f64, Output = T>,
{
    if mu == 0.0 && nu == 0.0 {
        return Err(Error::Domain("mu and nu cannot both vanish".into()));
    }
    if values.dim() != (q_grid.len(), p_grid.len()) {
        return Err(Error::GridMismatch(format!("field is {:?}", values.dim())));
    }
    // Lines are parametrized by the coordinate along `outer`; `inner` is solved for.
    let (outer, inner, slices, lead, cross): (&GridSpec, &GridSpec, Vec<Vec<T>>, f64, f64) = if mu.abs() >= nu.abs() {
        (p_grid, q_grid, values.axis_iter(Axis(1)).map(|c| c.to_vec()).collect(), mu, nu)
    } else {
        (q_grid, p_grid, values.axis_iter(Axis(0)).map(|r| r.to_vec()).collect(), nu, mu)
    };
    let ts = outer.points();
    Ok(xs
        .par_iter()
        .map(|&x| {
            let line = ts.iter().zip(&slices).map(|(&t, slice)| interpolate(slice, inner, (x - cross * t) / lead, LINE_ORDER));
            outer.integrate(line) * (1.0 / lead.abs())
        })
        .collect())
}

/// Full symplectic tomogram `M(X, μ, ν)` of a Wigner function on `x_grid`.
pub fn symplectic_tomogram(w: &PhaseSpaceField, x_grid: &GridSpec, mu: f64, nu: f64) -> Result<Vec<f64>> {
    radon_line(&w.values, &w.q_grid, &w.p_grid, mu, nu, &x_grid.points())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_projection() {
        let g = GridSpec::new(-8.0, 8.0, 321).unwrap();
        let values = Array2::from_shape_fn((321, 321), |(i, j)| {
            let (q, p) = (g.point(i), g.point(j));
            (-q * q - p * p).exp() / PI
        });
        let w = PhaseSpaceField::new(g, g, values).unwrap();
        let xg = GridSpec::new(-5.0, 5.0, 101).unwrap();
        for (mu, nu) in [(1.0, 0.0), (1.0, 0.5), (0.3, 1.0), (-2.0, 1.5)] {
            let m = symplectic_tomogram(&w, &xg, mu, nu).unwrap();
            let s2: f64 = mu * mu + nu * nu;
            for (x, v) in xg.points().iter().zip(&m) {
                let exact = (-x * x / s2).exp() / (PI * s2).sqrt();
                assert!((v - exact).abs() < 1e-8, "({mu},{nu}) at {x}: {v} vs {exact}");
            }
        }
        assert!(symplectic_tomogram(&w, &xg, 0.0, 0.0).is_err());
    }
}
