//! Exact tomogram columns from wavefunctions.
//!
//! `q + νp` is the Heisenberg-picture position after free motion for a time
//! `ν`, so `M1(X, ν) = |ψ_ν(X)|²` with `ψ_ν = exp(-iνp̂²/2) ψ`. Likewise
//! `μq + p` is the momentum after the kick `exp(iμq̂²/2)`, so `M2(X, μ)` is
//! the momentum density of the kicked state. Both are evaluated as Fourier
//! sums at arbitrary `X`, sampled finely enough that the trapezoid rule
//! stays below its aliasing limit. Mixed states are handled through their
//! eigen-ensemble.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{ColumnSource, Kind, Tomogram, TomogramColumn, COLUMN_NORM_TOL};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::spectral::{fourier_at, support_extent, synthesize_at};
use crate::state::QuantumState;

const SUPPORT_REL: f64 = 1e-13;

#[derive(Debug, Clone)]
struct Part {
    weight: f64,
    psi: Vec<C64>,
    /// Momentum amplitude on the probe grid `[-π/h, π/h]`.
    phi: Vec<C64>,
    /// Half-widths of the momentum and position supports.
    k_extent: f64,
    q_extent: f64,
}

/// Precomputed spectral data of a state, ready to emit tomogram columns.
#[derive(Debug, Clone)]
pub struct Tomographer {
    grid: GridSpec,
    probe_k0: f64,
    probe_dk: f64,
    parts: Vec<Part>,
}

impl Tomographer {
    pub fn new(state: &QuantumState) -> Self {
        let grid = *state.grid();
        let n = grid.len();
        let kmax = PI / grid.spacing();
        let np = 2 * n;
        let dk = 2.0 * kmax / (np - 1) as f64;
        let probe: Vec<f64> = (0..np).map(|m| -kmax + m as f64 * dk).collect();
        let xs = grid.points();
        let parts = state
            .ensemble()
            .into_iter()
            .map(|(weight, psi)| {
                let psi = psi.to_vec();
                let phi = fourier_at(&psi, &grid, &probe, -1.0);
                Part {
                    weight,
                    k_extent: support_extent(&phi, &probe, SUPPORT_REL).max(1.0),
                    q_extent: support_extent(&psi, &xs, SUPPORT_REL).max(1.0),
                    psi,
                    phi,
                }
            })
            .collect();
        Tomographer { grid, probe_k0: -kmax, probe_dk: dk, parts }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `M1(X, ν)` or `M2(X, μ)` at arbitrary points.
    pub fn column(&self, kind: Kind, eta: f64, xs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; xs.len()];
        let xmax = xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for part in &self.parts {
            let amp = match kind {
                Kind::M1 => self.free_amplitude(part, eta, xs, xmax),
                Kind::M2 => self.kicked_amplitude(part, eta, xs, xmax),
            };
            for (o, a) in out.iter_mut().zip(amp) {
                *o += part.weight * a.norm_sqr();
            }
        }
        out
    }

    /// `ψ_ν(X) = (1/√2π) ∫ φ(k) e^{-iνk²/2} e^{ikX} dk`.
    fn free_amplitude(&self, part: &Part, nu: f64, xs: &[f64], xmax: f64) -> Vec<C64> {
        let bandwidth = xmax + nu.abs() * part.k_extent + part.q_extent;
        let (k0, dk, ks) = sample_points(part.k_extent, bandwidth);
        let phi = fourier_at(&part.psi, &self.grid, &ks, -1.0);
        let amps: Vec<C64> = phi
            .iter()
            .zip(&ks)
            .map(|(a, &k)| a * C64::from_polar(1.0, -0.5 * nu * k * k))
            .collect();
        synthesize_at(&amps, k0, dk, xs, 1.0)
    }

    /// `(1/√2π) ∫ ψ(q) e^{iμq²/2} e^{-iXq} dq`.
    fn kicked_amplitude(&self, part: &Part, mu: f64, xs: &[f64], xmax: f64) -> Vec<C64> {
        let bandwidth = xmax + mu.abs() * part.q_extent + part.k_extent;
        let (q0, dq, qs) = sample_points(part.q_extent, bandwidth);
        let psi = self.resample_position(part, &qs);
        let amps: Vec<C64> = psi
            .iter()
            .zip(&qs)
            .map(|(a, &q)| a * C64::from_polar(1.0, 0.5 * mu * q * q))
            .collect();
        synthesize_at(&amps, q0, dq, xs, -1.0)
    }

    /// Band-limited resampling of `ψ` at arbitrary positions.
    fn resample_position(&self, part: &Part, qs: &[f64]) -> Vec<C64> {
        synthesize_at(&part.phi, self.probe_k0, self.probe_dk, qs, 1.0)
    }

    /// Position-space Fresnel route `M1(X, ν) = (1/2π|ν|) |∫ψ(y) e^{i(X-y)²/2ν} dy|²`.
    pub fn fresnel_column(&self, nu: f64, xs: &[f64]) -> Result<Vec<f64>> {
        if nu == 0.0 {
            return Err(Error::Domain("the Fresnel route needs nu != 0".into()));
        }
        let xmax = xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let mut out = vec![0.0; xs.len()];
        for part in &self.parts {
            let bandwidth = (xmax + part.q_extent) / nu.abs() + part.k_extent;
            let (y0, dy, ys) = sample_points(part.q_extent, bandwidth);
            let psi = self.resample_position(part, &ys);
            let amps: Vec<C64> = psi
                .iter()
                .zip(&ys)
                .map(|(a, &y)| a * C64::from_polar(1.0, y * y / (2.0 * nu)))
                .collect();
            let scaled: Vec<f64> = xs.iter().map(|x| x / nu).collect();
            let integral = synthesize_at(&amps, y0, dy, &scaled, -1.0);
            for (o, v) in out.iter_mut().zip(integral) {
                *o += part.weight * v.norm_sqr() / nu.abs();
            }
        }
        Ok(out)
    }
}

/// Symmetric sample positions over `[-extent, extent]` fine enough for a
/// trapezoid sum whose integrand has frequencies up to `bandwidth`.
fn sample_points(extent: f64, bandwidth: f64) -> (f64, f64, Vec<f64>) {
    let target = 2.0 * PI / (1.1 * bandwidth + 2.0);
    let n = ((2.0 * extent / target).ceil() as usize).max(8) + 1;
    let d = 2.0 * extent / (n - 1) as f64;
    let pts = (0..n).map(|m| -extent + m as f64 * d).collect();
    (-extent, d, pts)
}

/// Full symplectic column `M(X, μ, ν)` from the state, reduced to a partial
/// column by the scaling `M(X, μ, ν) = M1(X/μ, ν/μ)/|μ| = M2(X/ν, μ/ν)/|ν|`
/// (whichever denominator is larger).
pub fn symplectic_column(engine: &Tomographer, xs: &[f64], mu: f64, nu: f64) -> Result<Vec<f64>> {
    if mu == 0.0 && nu == 0.0 {
        return Err(Error::Domain("mu and nu cannot both vanish".into()));
    }
    let (kind, scale, eta) = if mu.abs() >= nu.abs() { (Kind::M1, mu, nu / mu) } else { (Kind::M2, nu, mu / nu) };
    let scaled: Vec<f64> = xs.iter().map(|x| x / scale).collect();
    Ok(engine.column(kind, eta, &scaled).into_iter().map(|v| v / scale.abs()).collect())
}

/// Fresnel-route column of a state (requires `ν ≠ 0`).
pub fn fresnel_column(state: &QuantumState, x_grid: &GridSpec, nu: f64) -> Result<TomogramColumn> {
    let values = Tomographer::new(state).fresnel_column(nu, &x_grid.points())?;
    Ok(TomogramColumn { kind: Kind::M1, x_grid: *x_grid, eta: nu, values })
}

/// Tomogram of `state` on `x_grid × param_grid`; every column must integrate
/// to one within [`COLUMN_NORM_TOL`] or the grid is reported as too small.
pub fn partial_tomogram(state: &QuantumState, kind: Kind, x_grid: &GridSpec, param_grid: &GridSpec) -> Result<Tomogram> {
    let engine = Tomographer::new(state);
    let t = engine.tomogram(kind, x_grid, param_grid);
    t.check_normalization(COLUMN_NORM_TOL)?;
    Ok(t)
}

impl Tomographer {
    /// Tomogram without the normalization check.
    pub fn tomogram(&self, kind: Kind, x_grid: &GridSpec, param_grid: &GridSpec) -> Tomogram {
        let xs = x_grid.points();
        let columns: Vec<Vec<f64>> = param_grid
            .points()
            .into_par_iter()
            .map(|eta| self.column(kind, eta, &xs))
            .collect();
        let values = Array2::from_shape_fn((xs.len(), columns.len()), |(i, j)| columns[j][i]);
        Tomogram { kind, x_grid: *x_grid, param_grid: *param_grid, values }
    }
}

/// Columns of a state evaluated on demand at exact parameter values.
#[derive(Debug, Clone)]
pub struct StateColumns {
    engine: Tomographer,
    kind: Kind,
    x_grid: GridSpec,
}

impl StateColumns {
    pub fn new(state: &QuantumState, kind: Kind, x_grid: GridSpec) -> Self {
        StateColumns { engine: Tomographer::new(state), kind, x_grid }
    }
}

impl ColumnSource for StateColumns {
    fn kind(&self) -> Kind {
        self.kind
    }

    fn x_grid(&self) -> &GridSpec {
        &self.x_grid
    }

    fn column(&self, eta: f64) -> Result<TomogramColumn> {
        let values = self.engine.column(self.kind, eta, &self.x_grid.points());
        let col = TomogramColumn { kind: self.kind, x_grid: self.x_grid, eta, values };
        let integral = col.integral();
        if (integral - 1.0).abs() > COLUMN_NORM_TOL {
            return Err(Error::GridResolution { eta, integral, tolerance: COLUMN_NORM_TOL });
        }
        Ok(col)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{state_from_preset, Preset};

    fn state(p: Preset) -> QuantumState {
        state_from_preset(&p, &GridSpec::new(-10.0, 10.0, 256).unwrap()).unwrap()
    }

    #[test]
    fn ground_state_m1_matches_closed_form() {
        let s = state(Preset::HoEigenstate { n: 0 });
        let xg = GridSpec::new(-30.0, 30.0, 301).unwrap();
        let pg = GridSpec::symmetric(6.0, 0.1).unwrap();
        let t = partial_tomogram(&s, Kind::M1, &xg, &pg).unwrap();
        let xs = xg.points();
        let mut worst: f64 = 0.0;
        for (j, nu) in pg.points().into_iter().enumerate() {
            let s2 = 1.0 + nu * nu;
            for (i, x) in xs.iter().enumerate() {
                let exact = (-x * x / s2).exp() / (PI * s2).sqrt();
                worst = worst.max((t.values[[i, j]] - exact).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn position_column_is_density() {
        let s = state(Preset::HoEigenstate { n: 3 });
        let xg = *s.grid();
        let col = Tomographer::new(&s).column(Kind::M1, 0.0, &xg.points());
        for (c, psi) in col.iter().zip(s.psi().unwrap()) {
            assert!((c - psi.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn fresnel_route_agrees() {
        let s = state(Preset::Superposition {
            components: vec![
                crate::state::Component::real(1.0, Preset::HoEigenstate { n: 0 }),
                crate::state::Component::real(0.7, Preset::Coherent { q0: 1.0, p0: -1.0 }),
            ],
        });
        let engine = Tomographer::new(&s);
        let xs: Vec<f64> = (0..161).map(|i| -20.0 + 0.25 * i as f64).collect();
        for nu in [-3.0, -0.05, 0.3, 1.0, 4.5] {
            let a = engine.column(Kind::M1, nu, &xs);
            let b = engine.fresnel_column(nu, &xs).unwrap();
            let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "nu={nu}: {err}");
        }
    }

    #[test]
    fn too_narrow_x_grid_is_reported() {
        let s = state(Preset::HoEigenstate { n: 0 });
        let xg = GridSpec::new(-3.0, 3.0, 61).unwrap();
        let pg = GridSpec::symmetric(6.0, 0.5).unwrap();
        let err = partial_tomogram(&s, Kind::M1, &xg, &pg).unwrap_err();
        assert!(matches!(err, Error::GridResolution { eta, .. } if eta == -6.0));
    }

    #[test]
    fn symplectic_requires_nonzero_direction() {
        let s = state(Preset::HoEigenstate { n: 0 });
        assert!(symplectic_column(&Tomographer::new(&s), &[0.0], 0.0, 0.0).is_err());
    }
}
