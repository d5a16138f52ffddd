//! Finite differences and cumulative antiderivatives on uniform grids.
//!
//! All stencils are fourth order, including the one-sided closures used on
//! the two outermost nodes at each end.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Left-boundary magnitude, relative to `max(1, max|f|)`, above which `∂⁻¹`
/// is refused.
pub const DECAY_TOL: f64 = 1e-8;

const D1_INTERIOR: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D1_EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const D1_EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

const D2_INTERIOR: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D2_EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
const D2_EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];

pub trait Sample: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>> Sample for T {}

fn dot<T: Sample>(f: &[T], start: usize, w: &[f64], sign: f64, reversed: bool) -> T {
    let mut acc = T::default();
    for (k, &c) in w.iter().enumerate() {
        let idx = if reversed { start - k } else { start + k };
        acc = acc + f[idx] * (c * sign);
    }
    acc
}

/// `∂f/∂x`; needs at least six samples.
pub fn derivative<T: Sample>(f: &[T], h: f64) -> Vec<T> {
    let n = f.len();
    assert!(n >= 6, "derivative needs at least six samples");
    let s = 1.0 / (12.0 * h);
    (0..n)
        .map(|i| match i {
            0 => dot(f, 0, &D1_EDGE0, s, false),
            1 => dot(f, 0, &D1_EDGE1, s, false),
            _ if i == n - 1 => dot(f, n - 1, &D1_EDGE0, -s, true),
            _ if i == n - 2 => dot(f, n - 1, &D1_EDGE1, -s, true),
            _ => dot(f, i - 2, &D1_INTERIOR, s, false),
        })
        .collect()
}

/// `∂²f/∂x²`; needs at least six samples.
pub fn second_derivative<T: Sample>(f: &[T], h: f64) -> Vec<T> {
    let n = f.len();
    assert!(n >= 6, "second derivative needs at least six samples");
    let s = 1.0 / (12.0 * h * h);
    (0..n)
        .map(|i| match i {
            0 => dot(f, 0, &D2_EDGE0, s, false),
            1 => dot(f, 0, &D2_EDGE1, s, false),
            _ if i == n - 1 => dot(f, n - 1, &D2_EDGE0, s, true),
            _ if i == n - 2 => dot(f, n - 1, &D2_EDGE1, s, true),
            _ => dot(f, i - 2, &D2_INTERIOR, s, false),
        })
        .collect()
}

/// `F(x_k) = ∫_{x_0}^{x_k} f dx` with fourth-order cumulative Newton–Cotes
/// panels, `F(x_0) = 0`.
fn antiderivative<T: Sample>(f: &[T], h: f64) -> Vec<T> {
    let n = f.len();
    let w = h / 24.0;
    let mut out = Vec::with_capacity(n);
    let mut acc = T::default();
    out.push(acc);
    for k in 0..n - 1 {
        let piece = if k == 0 {
            f[0] * 9.0 + f[1] * 19.0 + f[2] * -5.0 + f[3]
        } else if k == n - 2 {
            f[n - 4] + f[n - 3] * -5.0 + f[n - 2] * 19.0 + f[n - 1] * 9.0
        } else {
            f[k - 1] * -1.0 + f[k] * 13.0 + f[k + 1] * 13.0 + f[k + 2] * -1.0
        };
        acc = acc + piece * w;
        out.push(acc);
    }
    out
}

/// `∂ₓ⁻ⁿ f (x) = (1/(n-1)!) ∫_{-∞}^{x} (x - x')^{n-1} f(x') dx'`, truncated at
/// the left grid edge. Refused when `|f(x_min)|` exceeds [`DECAY_TOL`]
/// scaled by `max(1, max|f|)`.
pub fn inverse_derivative<T: Sample>(f: &[T], h: f64, n: usize, magnitude: impl Fn(&T) -> f64) -> Result<Vec<T>> {
    if f.len() < 6 {
        return Err(Error::InvalidGrid("inverse derivative needs at least six samples".into()));
    }
    let edge = magnitude(&f[0]);
    let scale = f.iter().map(&magnitude).fold(1.0, f64::max);
    if !(edge < DECAY_TOL * scale) {
        return Err(Error::BoundaryDecay { magnitude: edge });
    }
    let mut out = f.to_vec();
    for _ in 0..n {
        out = antiderivative(&out, h);
    }
    Ok(out)
}
