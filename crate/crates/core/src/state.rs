//! Reference quantum states sampled on a position grid.
//!
//! Units are fixed to `ħ = m = ω = 1`. A pure state stores `ψ(x_i)`, a
//! mixed state stores the kernel `ρ(x_i, x_j)`; operator traces carry the
//! grid measure explicitly (`Tr ρ̂ = Σ ρ_ii h`).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Largest deviation of a grid norm from one that is accepted (and then
/// corrected); anything worse is rejected.
pub const NORM_REJECT: f64 = 1e-6;
const HERMITIAN_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = -1e-9;
const MAX_PRESET_LEVEL: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
}

#[derive(Debug, Clone)]
enum Repr {
    Pure(Array1<C64>),
    Mixed { rho: Array2<C64>, ensemble: Vec<(f64, Array1<C64>)> },
}

#[derive(Debug, Clone)]
pub struct QuantumState {
    grid: GridSpec,
    repr: Repr,
}

impl QuantumState {
    /// Wraps a wavefunction, rejecting it when its grid norm is off by more
    /// than [`NORM_REJECT`].
    pub fn pure(grid: GridSpec, psi: Array1<C64>) -> Result<Self> {
        if psi.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "wavefunction has {} samples, grid has {}",
                psi.len(),
                grid.len()
            )));
        }
        let norm: f64 = grid.integrate(psi.iter().map(|c| c.norm_sqr()));
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_REJECT {
            return Err(Error::NotNormalized { norm, tolerance: NORM_REJECT });
        }
        let psi = psi.mapv(|c| c / norm.sqrt());
        Ok(QuantumState { grid, repr: Repr::Pure(psi) })
    }

    /// Wraps a density kernel after checking hermiticity, trace and positivity.
    pub fn mixed(grid: GridSpec, rho: Array2<C64>) -> Result<Self> {
        let n = grid.len();
        if rho.dim() != (n, n) {
            return Err(Error::GridMismatch(format!(
                "density matrix is {:?}, grid has {n} points",
                rho.dim()
            )));
        }
        let scale = rho.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        for i in 0..n {
            for j in 0..=i {
                if (rho[[i, j]] - rho[[j, i]].conj()).norm() > HERMITIAN_TOL * scale {
                    return Err(Error::Domain(format!("density matrix not Hermitian at ({i}, {j})")));
                }
            }
        }
        let h = grid.spacing();
        let trace: f64 = (0..n).map(|i| rho[[i, i]].re).sum::<f64>() * h;
        if !trace.is_finite() || (trace - 1.0).abs() > NORM_REJECT {
            return Err(Error::NotNormalized { norm: trace, tolerance: NORM_REJECT });
        }
        let rho = rho.mapv(|c| c / trace);
        let ensemble = eigen_ensemble(&rho, h, false)?;
        Ok(QuantumState { grid, repr: Repr::Mixed { rho, ensemble } })
    }

    /// Density kernel estimated from data: Hermitized and rescaled to unit
    /// trace, with small negative eigenvalues kept (signed) in the ensemble.
    pub fn estimated(grid: GridSpec, kernel: Array2<C64>) -> Result<Self> {
        let n = grid.len();
        if kernel.dim() != (n, n) {
            return Err(Error::GridMismatch(format!("kernel is {:?}, grid has {n} points", kernel.dim())));
        }
        let h = grid.spacing();
        let herm = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (kernel[[i, j]] + kernel[[j, i]].conj()));
        let trace: f64 = (0..n).map(|i| herm[[i, i]].re).sum::<f64>() * h;
        if !trace.is_finite() || trace <= 0.0 {
            return Err(Error::Numerical(format!("estimated density has trace {trace}")));
        }
        let rho = herm.mapv(|c| c / trace);
        let ensemble = eigen_ensemble(&rho, h, true)?;
        Ok(QuantumState { grid, repr: Repr::Mixed { rho, ensemble } })
    }

    /// Incoherent mixture `Σ w_k ρ_k` of states on a common grid.
    pub fn mixture(parts: &[(f64, QuantumState)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::Domain("empty mixture".into()));
        };
        let grid = first.grid;
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || total <= 0.0 {
            return Err(Error::Domain("mixture weights must be non-negative".into()));
        }
        let n = grid.len();
        let mut rho = Array2::zeros((n, n));
        for (w, s) in parts {
            if !s.grid.same_as(&grid) {
                return Err(Error::GridMismatch("mixture components on different grids".into()));
            }
            rho.scaled_add(C64::new(*w / total, 0.0), &s.rho());
        }
        Self::mixed(grid, rho)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kind(&self) -> StateKind {
        match self.repr {
            Repr::Pure(_) => StateKind::Pure,
            Repr::Mixed { .. } => StateKind::Mixed,
        }
    }

    pub fn psi(&self) -> Option<&Array1<C64>> {
        match &self.repr {
            Repr::Pure(psi) => Some(psi),
            Repr::Mixed { .. } => None,
        }
    }

    /// Density kernel `ρ(x_i, x_j)`.
    pub fn rho(&self) -> Array2<C64> {
        match &self.repr {
            Repr::Pure(psi) => outer(psi),
            Repr::Mixed { rho, .. } => rho.clone(),
        }
    }

    /// `ρ̂ = Σ_k w_k |ψ_k⟩⟨ψ_k|` with grid-normalized `ψ_k`.
    pub fn ensemble(&self) -> Vec<(f64, &Array1<C64>)> {
        match &self.repr {
            Repr::Pure(psi) => vec![(1.0, psi)],
            Repr::Mixed { ensemble, .. } => ensemble.iter().map(|(w, v)| (*w, v)).collect(),
        }
    }

    /// The same state held as a density kernel.
    pub fn to_mixed(&self) -> QuantumState {
        match &self.repr {
            Repr::Pure(psi) => QuantumState {
                grid: self.grid,
                repr: Repr::Mixed { rho: outer(psi), ensemble: vec![(1.0, psi.clone())] },
            },
            Repr::Mixed { .. } => self.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        let h = self.grid.spacing();
        match &self.repr {
            Repr::Pure(psi) => self.grid.integrate(psi.iter().map(|c| c.norm_sqr())),
            Repr::Mixed { rho, .. } => (0..self.grid.len()).map(|i| rho[[i, i]].re).sum::<f64>() * h,
        }
    }

    /// `Tr(ρ̂²)`.
    pub fn purity(&self) -> f64 {
        let h = self.grid.spacing();
        match &self.repr {
            Repr::Pure(_) => self.trace().powi(2),
            Repr::Mixed { rho, .. } => rho.iter().map(|c| c.norm_sqr()).sum::<f64>() * h * h,
        }
    }

    /// `Tr(Â ρ̂)` for an operator given as a matrix acting on grid samples.
    pub fn expectation(&self, op: &Array2<C64>) -> C64 {
        let h = self.grid.spacing();
        match &self.repr {
            Repr::Pure(psi) => {
                let a_psi = op.dot(psi);
                psi.iter().zip(a_psi.iter()).map(|(p, a)| p.conj() * a).sum::<C64>() * h
            }
            Repr::Mixed { rho, .. } => {
                let prod = op.dot(rho);
                (0..self.grid.len()).map(|i| prod[[i, i]]).sum::<C64>() * h
            }
        }
    }

    /// `⟨ψ|ρ̂|ψ⟩` for a normalized wavefunction on the same grid.
    pub fn fidelity_with(&self, psi: &Array1<C64>) -> f64 {
        let h = self.grid.spacing();
        match &self.repr {
            Repr::Pure(own) => {
                let overlap: C64 = own.iter().zip(psi).map(|(a, b)| a.conj() * b).sum::<C64>() * h;
                overlap.norm_sqr()
            }
            Repr::Mixed { rho, .. } => {
                let r_psi = rho.dot(psi);
                (psi.iter().zip(r_psi.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() * h * h).re
            }
        }
    }
}

fn outer(psi: &Array1<C64>) -> Array2<C64> {
    let n = psi.len();
    Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj())
}

/// Eigen-decomposition of `ρ̂` (the matrix `ρ h`), keeping components with
/// non-negligible weight.
fn eigen_ensemble(rho: &Array2<C64>, h: f64, signed: bool) -> Result<Vec<(f64, Array1<C64>)>> {
    let n = rho.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| (rho[[i, j]] + rho[[j, i]].conj()) * (0.5 * h));
    let eig = m.symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !signed && min < EIGEN_FLOOR {
        return Err(Error::Domain(format!("density matrix has negative eigenvalue {min:.3e}")));
    }
    let mut parts: Vec<(f64, Array1<C64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &w)| if signed { w.abs() > 1e-14 } else { w > 1e-14 })
        .map(|(k, &w)| {
            let v = Array1::from_iter(eig.eigenvectors.column(k).iter().map(|c| c / h.sqrt()));
            (w, v)
        })
        .collect();
    parts.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(parts)
}

/// Reference states used throughout the validation suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Preset {
    /// Harmonic-oscillator eigenstate `ψ_n`.
    HoEigenstate { n: usize },
    /// `π^(-1/4) exp(-(q-q0)²/2 + i p0 q)`.
    Coherent { q0: f64, p0: f64 },
    /// `π^(-1/4) σ^(-1/2) exp(-(q-q0)²/(2σ²) + i p0 q)`; position variance `σ²/2`.
    Gaussian { q0: f64, p0: f64, sigma: f64 },
    /// Coherent sum `Σ c_k ψ_k`, renormalized. Weights are `[re, im]` pairs.
    Superposition { components: Vec<Component> },
    /// Incoherent mixture `Σ w_k |ψ_k⟩⟨ψ_k|` with weights normalized to one.
    Mixture { components: Vec<Component> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: [f64; 2],
    pub state: Preset,
}

impl Component {
    pub fn real(weight: f64, state: Preset) -> Self {
        Component { weight: [weight, 0.0], state }
    }
}

/// Builds a normalized state from a preset.
pub fn state_from_preset(preset: &Preset, grid: &GridSpec) -> Result<QuantumState> {
    match preset {
        Preset::Mixture { components } => {
            if components.is_empty() {
                return Err(Error::Domain("mixture needs at least one component".into()));
            }
            let parts = components
                .iter()
                .map(|c| {
                    if c.weight[1] != 0.0 {
                        return Err(Error::Domain("mixture weights must be real".into()));
                    }
                    Ok((c.weight[0], state_from_preset(&c.state, grid)?))
                })
                .collect::<Result<Vec<_>>>()?;
            QuantumState::mixture(&parts)
        }
        _ => {
            let psi = preset_wavefunction(preset, grid)?;
            QuantumState::pure(*grid, psi)
        }
    }
}

fn preset_wavefunction(preset: &Preset, grid: &GridSpec) -> Result<Array1<C64>> {
    let xs = grid.points();
    let psi = match preset {
        Preset::HoEigenstate { n } => {
            if *n > MAX_PRESET_LEVEL {
                return Err(Error::Domain(format!("level {n} exceeds {MAX_PRESET_LEVEL}")));
            }
            Array1::from_iter(xs.iter().map(|&x| C64::new(hermite_functions(*n, x)[*n], 0.0)))
        }
        Preset::Coherent { q0, p0 } => gaussian_packet(&xs, *q0, *p0, 1.0),
        Preset::Gaussian { q0, p0, sigma } => {
            if !(*sigma > 0.0) {
                return Err(Error::Domain(format!("gaussian width {sigma} must be positive")));
            }
            gaussian_packet(&xs, *q0, *p0, *sigma)
        }
        Preset::Superposition { components } => {
            if components.is_empty() {
                return Err(Error::Domain("superposition needs at least one component".into()));
            }
            let mut acc = Array1::zeros(xs.len());
            for c in components {
                let part = preset_wavefunction(&c.state, grid)?;
                acc.scaled_add(C64::new(c.weight[0], c.weight[1]), &part);
            }
            let norm: f64 = grid.integrate(acc.iter().map(|c: &C64| c.norm_sqr()));
            if norm <= 0.0 {
                return Err(Error::Domain("superposition vanishes".into()));
            }
            return check_norm(acc.mapv(|c| c / norm.sqrt()), grid);
        }
        Preset::Mixture { .. } => {
            return Err(Error::Domain("a mixture has no wavefunction".into()));
        }
    };
    check_norm(psi, grid)
}

/// Analytically normalized states must keep their norm on the grid.
fn check_norm(psi: Array1<C64>, grid: &GridSpec) -> Result<Array1<C64>> {
    let norm: f64 = grid.integrate(psi.iter().map(|c| c.norm_sqr()));
    if (norm - 1.0).abs() > NORM_REJECT {
        return Err(Error::Domain(format!(
            "grid [{}, {}] too small to hold the state (norm {norm:.9})",
            grid.min(),
            grid.max()
        )));
    }
    Ok(psi)
}

fn gaussian_packet(xs: &[f64], q0: f64, p0: f64, sigma: f64) -> Array1<C64> {
    let amp = PI.powf(-0.25) / sigma.sqrt();
    Array1::from_iter(xs.iter().map(|&x| {
        let d = x - q0;
        C64::from_polar(amp * (-d * d / (2.0 * sigma * sigma)).exp(), p0 * x)
    }))
}

/// Hermite functions `ψ_0(x) .. ψ_n(x)` by the stable three-term recurrence.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(PI.powf(-0.25) * (-x * x / 2.0).exp());
    if n >= 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for k in 1..n {
        let next = (2.0 / (k + 1) as f64).sqrt() * x * out[k] - (k as f64 / (k + 1) as f64).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// `ρ = ψψ*` as a mixed-state value.
pub fn density_from_state(state: &QuantumState) -> Result<QuantumState> {
    match state.kind() {
        StateKind::Pure => Ok(state.to_mixed()),
        StateKind::Mixed => Err(Error::Domain("state is already a density matrix".into())),
    }
}
