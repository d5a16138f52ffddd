//! Uniform one-dimensional sample grids and the quadrature/interpolation
//! rules used on them.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `min, min + h, ..., max` with `n_points` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    min: f64,
    max: f64,
    n_points: usize,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 8;

    pub fn new(min: f64, max: f64, n_points: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite bounds [{min}, {max}]")));
        }
        if max <= min {
            return Err(Error::InvalidGrid(format!("max {max} must exceed min {min}")));
        }
        if n_points < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{n_points} points, need at least {}",
                Self::MIN_POINTS
            )));
        }
        Ok(GridSpec { min, max, n_points })
    }

    /// Grid symmetric about zero with the given spacing: `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, spacing: f64) -> Result<Self> {
        let intervals = (2.0 * half_width / spacing).round() as usize;
        Self::new(-half_width, half_width, intervals + 1)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    pub fn abs_max(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }

    /// Index of the node equal to `x` (to within a tiny fraction of the spacing).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let h = self.spacing();
        let t = (x - self.min) / h;
        let i = t.round();
        if i < 0.0 || i > (self.n_points - 1) as f64 || (t - i).abs() > 1e-9 {
            None
        } else {
            Some(i as usize)
        }
    }

    /// Grid with the same bounds and half the spacing (`2n - 1` points).
    ///
    /// Wigner functions of a density matrix sampled on `self` live on this grid:
    /// the midpoint `(x_a + x_b) / 2` of every pair of nodes is a node of it.
    pub fn refined(&self) -> GridSpec {
        GridSpec { min: self.min, max: self.max, n_points: 2 * self.n_points - 1 }
    }

    /// Inverse of [`GridSpec::refined`].
    pub fn coarsened(&self) -> Result<GridSpec> {
        if self.n_points % 2 == 0 {
            return Err(Error::GridMismatch(format!(
                "{} points cannot be the refinement of a state grid",
                self.n_points
            )));
        }
        GridSpec::new(self.min, self.max, self.n_points.div_ceil(2))
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.n_points == other.n_points
            && (self.min - other.min).abs() <= 1e-12 * self.spacing()
            && (self.max - other.max).abs() <= 1e-12 * self.spacing()
    }

    /// Trapezoid rule over the whole grid.
    pub fn integrate<T>(&self, values: impl IntoIterator<Item = T>) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        trapezoid(values, self.spacing())
    }
}

/// Trapezoid rule on a uniform grid with spacing `h`.
pub fn trapezoid<T>(values: impl IntoIterator<Item = T>, h: f64) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let mut iter = values.into_iter();
    let Some(first) = iter.next() else {
        return T::default();
    };
    let mut sum = first * 0.5;
    let mut last = None;
    for v in iter {
        if let Some(prev) = last {
            sum = sum + prev;
        }
        last = Some(v);
    }
    match last {
        Some(v) => (sum + v * 0.5) * h,
        None => T::default(),
    }
}

/// Lagrange interpolation of samples on `grid` at `x` using `order` nodes
/// centred on `x`. Returns zero outside the grid.
pub fn interpolate<T>(values: &[T], grid: &GridSpec, x: f64, order: usize) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    debug_assert_eq!(values.len(), grid.len());
    let n = grid.len();
    let h = grid.spacing();
    let t = (x - grid.min()) / h;
    if t < -1e-9 || t > (n - 1) as f64 + 1e-9 {
        return T::default();
    }
    let base = t.floor() as isize;
    if (t - t.round()).abs() < 1e-12 {
        return values[(t.round() as usize).min(n - 1)];
    }
    let order = order.max(2).min(n);
    let mut start = base - (order as isize - 1) / 2;
    start = start.clamp(0, (n - order) as isize);
    let start = start as usize;

    let mut acc = T::default();
    for j in 0..order {
        let tj = (start + j) as f64;
        let mut w = 1.0;
        for m in 0..order {
            if m != j {
                let tm = (start + m) as f64;
                w *= (t - tm) / (tj - tm);
            }
        }
        acc = acc + values[start + j] * w;
    }
    acc
}
