//! Evolution and stationary-state equations in the tomographic picture.
//!
//! For `Ĥ = p̂²/2 + V(q̂)` the von Neumann equation becomes
//! `∂ₜM = 2 Im [Ĥ([q̂], [p̂])] M` and an eigenstate with energy `E`
//! satisfies `Re [Ĥ] M = E M` and `Im [Ĥ] M = 0`. The generic route
//! applies the correspondence rules word by word; the expanded routes write
//! the kinetic part out explicitly:
//!
//! | kind | `2 Im` kinetic | `Re` kinetic |
//! |------|----------------|--------------|
//! | M1 | `∂_ν` | `½∂_ν²∂_X⁻² - ⅛∂_X²` |
//! | M2 | `-(μ + μX∂_X + μ²∂_μ)` | `X²/2 + Xμ∂_μ∂_X⁻¹ + (μ²/2)∂_μ²∂_X⁻² - (μ²/8)∂_X²` |

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::calculus::{apply_momentum, apply_position, ComplexTomogramField, INTERIOR_TRIM};
use crate::error::{Error, Result};
use crate::evolve::{evolve_state_oracle, HamiltonianSpec};
use crate::grid::GridSpec;
use crate::state::QuantumState;
use crate::tomography::{partial_tomogram, Kind, Tomogram};

/// Default step of the centered time difference.
pub const DEFAULT_DT_FD: f64 = 1e-3;

fn real_part(f: &ComplexTomogramField, part: impl Fn(C64) -> f64) -> Tomogram {
    Tomogram { kind: f.kind, x_grid: f.x_grid, param_grid: f.param_grid, values: f.values.mapv(part) }
}

/// `Σ_{k≥1} c_k [q̂]^k f`.
pub fn potential_action(f: &ComplexTomogramField, h: &HamiltonianSpec) -> Result<ComplexTomogramField> {
    let mut acc = f.scaled(C64::new(h.coefficient(0), 0.0));
    let mut power = f.clone();
    for k in 1..=h.degree() {
        power = apply_position(&power)?;
        let c = h.coefficient(k);
        if c != 0.0 {
            acc = acc.plus(&power.scaled(C64::new(c, 0.0)))?;
        }
    }
    Ok(acc)
}

/// `[Ĥ] f = ½[p̂][p̂] f + V([q̂]) f`.
pub fn hamiltonian_action(f: &ComplexTomogramField, h: &HamiltonianSpec) -> Result<ComplexTomogramField> {
    let kinetic = apply_momentum(&apply_momentum(f)?)?.scaled(C64::new(HamiltonianSpec::KINETIC_COEFFICIENT, 0.0));
    kinetic.plus(&potential_action(f, h)?)
}

/// `∂ₜ M = 2 Im [Ĥ] M` by the generic word expansion.
pub fn evolution_rhs(t: &Tomogram, h: &HamiltonianSpec) -> Result<Tomogram> {
    let hf = hamiltonian_action(&ComplexTomogramField::from_tomogram(t), h)?;
    Ok(real_part(&hf, |c| 2.0 * c.im))
}

fn eta_field(f: &ComplexTomogramField, g: impl Fn(f64, f64) -> f64) -> ComplexTomogramField {
    f.times(|x, e| C64::new(g(x, e), 0.0))
}

/// `∂ₜ M1 = ∂_ν M1 + 2 Im V([q̂]) M1`.
pub fn expanded_rhs_m1(t: &Tomogram, h: &HamiltonianSpec) -> Result<Tomogram> {
    expect_kind(t, Kind::M1)?;
    let f = ComplexTomogramField::from_tomogram(t);
    let v = potential_action(&f, h)?;
    let d = f.d_eta();
    let values = Array2::from_shape_fn(t.values.dim(), |(i, j)| d.values[[i, j]].re + 2.0 * v.values[[i, j]].im);
    Ok(Tomogram { values, ..t.clone() })
}

/// `∂ₜ M2 = -(μ + μX∂_X + μ²∂_μ) M2 + 2 Im V([q̂]) M2`.
pub fn expanded_rhs_m2(t: &Tomogram, h: &HamiltonianSpec) -> Result<Tomogram> {
    expect_kind(t, Kind::M2)?;
    let f = ComplexTomogramField::from_tomogram(t);
    let v = potential_action(&f, h)?;
    let kinetic = eta_field(&f, |_, mu| mu)
        .plus(&eta_field(&f.d_x(), |x, mu| mu * x))?
        .plus(&eta_field(&f.d_eta(), |_, mu| mu * mu))?;
    let values = Array2::from_shape_fn(t.values.dim(), |(i, j)| -kinetic.values[[i, j]].re + 2.0 * v.values[[i, j]].im);
    Ok(Tomogram { values, ..t.clone() })
}

/// Expanded right-hand side for either kind.
pub fn expanded_rhs(t: &Tomogram, h: &HamiltonianSpec) -> Result<Tomogram> {
    match t.kind {
        Kind::M1 => expanded_rhs_m1(t, h),
        Kind::M2 => expanded_rhs_m2(t, h),
    }
}

fn expect_kind(t: &Tomogram, kind: Kind) -> Result<()> {
    if t.kind != kind {
        return Err(Error::Domain(format!("expected an {kind} tomogram, got {}", t.kind)));
    }
    Ok(())
}

/// `Re [Ĥ] M` with the kinetic part written out explicitly.
pub fn expanded_stationary_action(t: &Tomogram, h: &HamiltonianSpec) -> Result<Tomogram> {
    let f = ComplexTomogramField::from_tomogram(t);
    let v = potential_action(&f, h)?;
    let kinetic = match t.kind {
        Kind::M1 => f.inv_x(2)?.d_eta2().scaled(C64::new(0.5, 0.0)).plus(&f.d_x2().scaled(C64::new(-0.125, 0.0)))?,
        Kind::M2 => eta_field(&f, |x, _| 0.5 * x * x)
            .plus(&eta_field(&f.inv_x(1)?.d_eta(), |x, mu| x * mu))?
            .plus(&eta_field(&f.inv_x(2)?.d_eta2(), |_, mu| 0.5 * mu * mu))?
            .plus(&eta_field(&f.d_x2(), |_, mu| -0.125 * mu * mu))?,
    };
    Ok(real_part(&kinetic.plus(&v)?, |c| c.re))
}

/// Largest `|a - b|` over the interior, `INTERIOR_TRIM` layers dropped.
pub fn interior_max_diff(a: &Tomogram, b: &Tomogram) -> f64 {
    let (nx, ne) = a.values.dim();
    let mut worst: f64 = 0.0;
    for i in INTERIOR_TRIM..nx - INTERIOR_TRIM {
        for j in INTERIOR_TRIM..ne - INTERIOR_TRIM {
            worst = worst.max((a.values[[i, j]] - b.values[[i, j]]).abs());
        }
    }
    worst
}

fn interior_norm(values: &Array2<f64>) -> f64 {
    let (nx, ne) = values.dim();
    let mut acc = 0.0;
    for i in INTERIOR_TRIM..nx - INTERIOR_TRIM {
        for j in INTERIOR_TRIM..ne - INTERIOR_TRIM {
            acc += values[[i, j]] * values[[i, j]];
        }
    }
    acc.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub kind: Kind,
    pub times: Vec<f64>,
    /// Interior max-abs of `RHS - ∂ₜM` at each time.
    pub rhs_vs_fd_error: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl EvolutionReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,error,tolerance,passed\n");
        for (t, e) in self.times.iter().zip(&self.rhs_vs_fd_error) {
            s.push_str(&format!("{t:.16e},{e:.16e},{:.16e},{}\n", self.tolerance, *e <= self.tolerance));
        }
        s
    }
}

/// Grids and tolerance of an evolution check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionCheck {
    pub kind: Kind,
    pub x_grid: GridSpec,
    pub param_grid: GridSpec,
    pub dt_fd: f64,
    pub tolerance: f64,
}

/// Compares `evolution_rhs` of the oracle-evolved tomogram at each time with
/// the centered difference of tomograms at `t ± dt_fd`.
pub fn check_evolution(state0: &QuantumState, h: &HamiltonianSpec, times: &[f64], check: &EvolutionCheck) -> Result<EvolutionReport> {
    if !(check.dt_fd > 0.0) {
        return Err(Error::Domain("dt_fd must be positive".into()));
    }
    let tomo = |t: f64| -> Result<Tomogram> {
        let s = evolve_state_oracle(state0, h, t)?;
        partial_tomogram(&s, check.kind, &check.x_grid, &check.param_grid)
    };
    let mut errors = Vec::with_capacity(times.len());
    for &t in times {
        let rhs = evolution_rhs(&tomo(t)?, h)?;
        let ahead = tomo(t + check.dt_fd)?;
        let behind = tomo(t - check.dt_fd)?;
        let fd = Tomogram { values: (&ahead.values - &behind.values) / (2.0 * check.dt_fd), ..ahead };
        errors.push(interior_max_diff(&rhs, &fd));
    }
    let passed = errors.iter().all(|e| e.is_finite() && *e <= check.tolerance);
    Ok(EvolutionReport { kind: check.kind, times: times.to_vec(), rhs_vs_fd_error: errors, tolerance: check.tolerance, passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Generic,
    Expanded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    pub kind: Kind,
    pub route: Route,
    pub energy: f64,
    /// `‖Re[Ĥ]M - E M‖ / ‖M‖` over the interior.
    pub residual_real: f64,
    /// `‖Im[Ĥ]M‖ / ‖M‖` over the interior.
    pub residual_imag: f64,
}

impl StationaryReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.residual_real <= tol && self.residual_imag <= tol
    }
}

/// Eigenvalue and stationarity residuals of a candidate eigenstate tomogram.
/// The expanded route takes both parts from the explicit forms, the
/// imaginary one as half the expanded right-hand side.
pub fn stationary_residual(t: &Tomogram, h: &HamiltonianSpec, energy: f64, route: Route) -> Result<StationaryReport> {
    if !energy.is_finite() {
        return Err(Error::Domain("energy must be finite".into()));
    }
    let norm = interior_norm(&t.values);
    if !(norm > 0.0) {
        return Err(Error::Numerical("stationary residual of a zero field is undefined".into()));
    }
    let hf = hamiltonian_action(&ComplexTomogramField::from_tomogram(t), h)?;
    let re = match route {
        Route::Generic => real_part(&hf, |c| c.re).values,
        Route::Expanded => expanded_stationary_action(t, h)?.values,
    };
    let residual_real = interior_norm(&(re - &t.values * energy)) / norm;
    let imag = match route {
        Route::Generic => hf.values.mapv(|c| c.im),
        Route::Expanded => expanded_rhs(t, h)?.values * 0.5,
    };
    let residual_imag = interior_norm(&imag) / norm;
    Ok(StationaryReport { kind: t.kind, route, energy, residual_real, residual_imag })
}
