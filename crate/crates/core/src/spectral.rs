//! Fourier sums evaluated at arbitrary points.
//!
//! Everything here treats grid samples as band-limited data, so trapezoid
//! sums are spectrally accurate as long as the integrand's frequencies stay
//! below `2π / h`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::grid::GridSpec;

/// `(1/√2π) Σ_j v_j exp(sign·i·k·x_j) h` for every `k` in `ks`.
pub fn fourier_at(values: &[C64], grid: &GridSpec, ks: &[f64], sign: f64) -> Vec<C64> {
    let h = grid.spacing();
    let x0 = grid.min();
    let norm = h / (2.0 * PI).sqrt();
    ks.iter()
        .map(|&k| {
            let step = C64::from_polar(1.0, sign * k * h);
            let mut z = C64::from_polar(1.0, sign * k * x0);
            let mut acc = C64::new(0.0, 0.0);
            for &v in values {
                acc += v * z;
                z *= step;
            }
            acc * norm
        })
        .collect()
}

/// Like [`fourier_at`] but the sample positions are `k0 + m·dk` and the
/// evaluation points are arbitrary: `(1/√2π) Σ_m a_m exp(sign·i·k_m·x) dk`.
pub fn synthesize_at(amps: &[C64], k0: f64, dk: f64, xs: &[f64], sign: f64) -> Vec<C64> {
    let norm = dk / (2.0 * PI).sqrt();
    xs.iter()
        .map(|&x| {
            let step = C64::from_polar(1.0, sign * dk * x);
            let mut z = C64::from_polar(1.0, sign * k0 * x);
            let mut acc = C64::new(0.0, 0.0);
            for &a in amps {
                acc += a * z;
                z *= step;
            }
            acc * norm
        })
        .collect()
}

/// Largest `|x|` among samples whose magnitude exceeds `rel` times the peak,
/// padded by one spacing.
pub fn support_extent(values: &[C64], points: &[f64], rel: f64) -> f64 {
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let h = if points.len() > 1 { (points[1] - points[0]).abs() } else { 0.0 };
    values
        .iter()
        .zip(points)
        .filter(|(v, _)| v.norm() > rel * peak)
        .map(|(_, x)| x.abs())
        .fold(0.0, f64::max)
        + h
}

/// Momentum operator `-i d/dx` on the grid as a dense matrix, built from the
/// periodic spectral derivative (the Nyquist mode is dropped).
pub fn momentum_matrix(grid: &GridSpec) -> Array2<C64> {
    let n = grid.len();
    let h = grid.spacing();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let wavenumbers: Vec<f64> = (0..n)
        .map(|m| {
            let m = m as isize;
            let n = n as isize;
            if 2 * m == n {
                0.0
            } else if 2 * m < n {
                2.0 * PI * m as f64 / (n as f64 * h)
            } else {
                2.0 * PI * (m - n) as f64 / (n as f64 * h)
            }
        })
        .collect();
    let mut out = Array2::zeros((n, n));
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for col in 0..n {
        buf.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
        buf[col] = C64::new(1.0, 0.0);
        fwd.process(&mut buf);
        for (b, &k) in buf.iter_mut().zip(&wavenumbers) {
            *b *= k / n as f64;
        }
        inv.process(&mut buf);
        for row in 0..n {
            out[[row, col]] = buf[row];
        }
    }
    out
}

/// Position operator as a diagonal matrix.
pub fn position_matrix(grid: &GridSpec) -> Array2<C64> {
    let n = grid.len();
    let mut out = Array2::zeros((n, n));
    for (i, x) in grid.points().into_iter().enumerate() {
        out[[i, i]] = C64::new(x, 0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_transform_is_gaussian() {
        let g = GridSpec::new(-10.0, 10.0, 256).unwrap();
        let psi: Vec<C64> = g
            .points()
            .iter()
            .map(|&x| C64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0))
            .collect();
        let ks = [0.0, 0.7, -2.3, 5.0];
        let phi = fourier_at(&psi, &g, &ks, -1.0);
        for (k, v) in ks.iter().zip(phi) {
            let exact = PI.powf(-0.25) * (-k * k / 2.0).exp();
            assert!((v - exact).norm() < 1e-13, "k={k}: {v}");
        }
    }

    #[test]
    fn momentum_matrix_differentiates() {
        let g = GridSpec::new(-10.0, 10.0, 128).unwrap();
        let p = momentum_matrix(&g);
        let xs = g.points();
        let f: Vec<C64> = xs.iter().map(|&x| C64::new((-x * x).exp(), 0.0)).collect();
        for (i, &x) in xs.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..xs.len() {
                acc += p[[i, j]] * f[j];
            }
            // -i d/dx e^{-x²} = 2ix e^{-x²}
            let exact = C64::new(0.0, 2.0 * x * (-x * x).exp());
            assert!((acc - exact).norm() < 1e-10);
        }
    }
}
