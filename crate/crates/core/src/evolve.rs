//! Hamiltonians `p²/2 + V(q)` with polynomial `V` and a reference
//! Schrödinger propagator used as the oracle for the tomographic
//! evolution equations.

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::spectral::{fourier_at, synthesize_at};
use crate::state::{hermite_functions, QuantumState, StateKind};

pub const MAX_POTENTIAL_DEGREE: usize = 4;
const NORM_DRIFT: f64 = 1e-8;
const HERMITE_BASIS: usize = 48;
const SPLIT_STEP_TOL: f64 = 1e-11;

/// `Ĥ = p̂²/2 + Σ_k c_k q̂^k` with `k ≤ 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    /// Potential coefficients `c_0, c_1, ...`.
    pub potential: Vec<f64>,
}

impl HamiltonianSpec {
    pub const KINETIC_COEFFICIENT: f64 = 0.5;

    pub fn new(potential: Vec<f64>) -> Result<Self> {
        let mut potential = potential;
        if potential.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("potential coefficients must be finite".into()));
        }
        while potential.last() == Some(&0.0) {
            potential.pop();
        }
        if potential.len() > MAX_POTENTIAL_DEGREE + 1 {
            return Err(Error::Domain(format!(
                "potential degree {} exceeds {MAX_POTENTIAL_DEGREE}",
                potential.len() - 1
            )));
        }
        Ok(HamiltonianSpec { potential })
    }

    pub fn free() -> Self {
        HamiltonianSpec { potential: vec![] }
    }

    /// `V = q²/2`.
    pub fn harmonic() -> Self {
        HamiltonianSpec { potential: vec![0.0, 0.0, 0.5] }
    }

    /// `V = c q⁴`.
    pub fn quartic(c: f64) -> Self {
        HamiltonianSpec { potential: vec![0.0, 0.0, 0.0, 0.0, c] }
    }

    pub fn coefficient(&self, k: usize) -> f64 {
        self.potential.get(k).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.potential.len().saturating_sub(1)
    }

    pub fn potential_at(&self, q: f64) -> f64 {
        self.potential.iter().rev().fold(0.0, |acc, c| acc * q + c)
    }

    fn is_free(&self) -> bool {
        self.potential.iter().skip(1).all(|&c| c == 0.0)
    }

    fn is_harmonic(&self) -> bool {
        self.coefficient(1) == 0.0 && self.coefficient(2) == 0.5 && self.degree() == 2
    }
}

/// Evolves `state` for time `t` under `h`.
///
/// Free particle and `V = q²/2` (plus a constant) use exact propagators;
/// any other polynomial potential uses fourth-order split-step Fourier with
/// step doubling until successive results agree to `1e-11`.
pub fn evolve_state_oracle(state: &QuantumState, h: &HamiltonianSpec, t: f64) -> Result<QuantumState> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("time {t} is not finite")));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let grid = *state.grid();
    let evolved: Vec<(f64, Array1<C64>)> = state
        .ensemble()
        .into_iter()
        .map(|(w, psi)| Ok((w, evolve_wavefunction(psi, &grid, h, t)?)))
        .collect::<Result<_>>()?;
    match state.kind() {
        StateKind::Pure => QuantumState::pure(grid, evolved.into_iter().next().unwrap().1),
        StateKind::Mixed => {
            let n = grid.len();
            let mut rho = ndarray::Array2::zeros((n, n));
            for (w, psi) in &evolved {
                for i in 0..n {
                    for j in 0..n {
                        rho[[i, j]] += psi[i] * psi[j].conj() * *w;
                    }
                }
            }
            QuantumState::mixed(grid, rho)
        }
    }
}

fn evolve_wavefunction(psi: &Array1<C64>, grid: &GridSpec, h: &HamiltonianSpec, t: f64) -> Result<Array1<C64>> {
    let out = if h.is_free() {
        free_propagate(psi, grid, t)
    } else if h.is_harmonic() {
        match harmonic_propagate(psi, grid, t) {
            Some(v) => v,
            None => split_step(psi, grid, h, t)?,
        }
    } else {
        split_step(psi, grid, h, t)?
    };
    let phase = C64::from_polar(1.0, -h.coefficient(0) * t);
    let out = out.mapv(|c| c * phase);
    let before: f64 = grid.integrate(psi.iter().map(|c| c.norm_sqr()));
    let after: f64 = grid.integrate(out.iter().map(|c| c.norm_sqr()));
    if (after - before).abs() > NORM_DRIFT {
        return Err(Error::Numerical(format!(
            "norm drifted from {before:.12} to {after:.12} at t = {t}; grid too small for the evolved state"
        )));
    }
    Ok(out)
}

fn free_propagate(psi: &Array1<C64>, grid: &GridSpec, t: f64) -> Array1<C64> {
    let n = grid.len();
    let kmax = PI / grid.spacing();
    let np = 2 * n;
    let dk = 2.0 * kmax / (np - 1) as f64;
    let ks: Vec<f64> = (0..np).map(|m| -kmax + m as f64 * dk).collect();
    let phi = fourier_at(psi.as_slice().unwrap(), grid, &ks, -1.0);
    let amps: Vec<C64> = phi.iter().zip(&ks).map(|(a, &k)| a * C64::from_polar(1.0, -0.5 * k * k * t)).collect();
    Array1::from(synthesize_at(&amps, -kmax, dk, &grid.points(), 1.0))
}

fn harmonic_propagate(psi: &Array1<C64>, grid: &GridSpec, t: f64) -> Option<Array1<C64>> {
    let xs = grid.points();
    let table: Vec<Vec<f64>> = xs.iter().map(|&x| hermite_functions(HERMITE_BASIS, x)).collect();
    let coeffs: Vec<C64> = (0..=HERMITE_BASIS)
        .map(|m| grid.integrate(table.iter().zip(psi.iter()).map(|(row, &v)| v * row[m])))
        .collect();
    let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let norm: f64 = grid.integrate(psi.iter().map(|c| c.norm_sqr()));
    if (captured - norm).abs() > 1e-12 {
        return None;
    }
    let phased: Vec<C64> = coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| c * C64::from_polar(1.0, -(m as f64 + 0.5) * t))
        .collect();
    Some(Array1::from_iter(
        table.iter().map(|row| row.iter().zip(&phased).map(|(&f, c)| c * f).sum::<C64>()),
    ))
}

fn split_step(psi: &Array1<C64>, grid: &GridSpec, h: &HamiltonianSpec, t: f64) -> Result<Array1<C64>> {
    let n = grid.len();
    let dx = grid.spacing();
    let potential: Vec<f64> = grid.points().iter().map(|&x| h.potential_at(x) - h.coefficient(0)).collect();
    let k2: Vec<f64> = (0..n)
        .map(|m| {
            let m = if 2 * m < n { m as f64 } else { m as f64 - n as f64 };
            let k = 2.0 * PI * m / (n as f64 * dx);
            k * k
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let strang = |buf: &mut Vec<C64>, tau: f64| {
        for (b, v) in buf.iter_mut().zip(&potential) {
            *b *= C64::from_polar(1.0, -0.5 * v * tau);
        }
        fwd.process(buf);
        for (b, k) in buf.iter_mut().zip(&k2) {
            *b *= C64::from_polar(1.0, -0.5 * k * tau) / n as f64;
        }
        inv.process(buf);
        for (b, v) in buf.iter_mut().zip(&potential) {
            *b *= C64::from_polar(1.0, -0.5 * v * tau);
        }
    };
    let cbrt2 = 2f64.powf(1.0 / 3.0);
    let w1 = 1.0 / (2.0 - cbrt2);
    let w0 = -cbrt2 / (2.0 - cbrt2);
    let run = |steps: usize| -> Vec<C64> {
        let tau = t / steps as f64;
        let mut buf = psi.to_vec();
        for _ in 0..steps {
            strang(&mut buf, w1 * tau);
            strang(&mut buf, w0 * tau);
            strang(&mut buf, w1 * tau);
        }
        buf
    };

    let mut steps = ((t.abs() / 0.01).ceil() as usize).max(4);
    let mut coarse = run(steps);
    for _ in 0..12 {
        steps *= 2;
        let fine = run(steps);
        let diff = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if diff < SPLIT_STEP_TOL {
            return Ok(Array1::from(fine));
        }
        coarse = fine;
    }
    Err(Error::Numerical(format!("split-step did not converge for t = {t} with {steps} steps")))
}
