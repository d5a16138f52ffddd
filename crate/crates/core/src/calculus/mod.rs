//! Correspondence-rule operators acting on tomograms.
//!
//! In the `M1` representation
//! `[q̂] = X + ν∂_ν∂_X⁻¹ + (iν/2)∂_X` and `[p̂] = -∂_ν∂_X⁻¹ - (i/2)∂_X`;
//! in `M2`
//! `[q̂] = -∂_μ∂_X⁻¹ + (i/2)∂_X` and `[p̂] = X + μ∂_μ∂_X⁻¹ - (iμ/2)∂_X`.
//! Applied to the tomogram of `ρ̂` they produce the symbol of `q̂ρ̂` or
//! `p̂ρ̂`, so `∫ [Â]M dX = Tr(Âρ̂)` at every parameter value.

pub mod fd;
mod kernel;
mod moments;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::tomography::{Kind, Tomogram};

pub use fd::inverse_derivative;
pub use kernel::{kernel_contraction, operator_kernel, operator_symbol, quantizer_matrix, KernelPoint, SYMBOL_MAX_POINTS, KERNEL_MAX_POINTS};
pub use moments::{dual_moment, trace_moment, DualMoment, Moment};

/// Longest operator word accepted by [`apply_word`].
pub const MAX_WORD_LEN: usize = 8;

/// Layers dropped at every edge when comparing fields.
pub const INTERIOR_TRIM: usize = 3;

/// Complex field `F(X_i, η_j)` indexed `[x, eta]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTomogramField {
    pub kind: Kind,
    pub x_grid: GridSpec,
    pub param_grid: GridSpec,
    pub values: Array2<C64>,
}

impl ComplexTomogramField {
    pub fn from_tomogram(t: &Tomogram) -> Self {
        ComplexTomogramField {
            kind: t.kind,
            x_grid: t.x_grid,
            param_grid: t.param_grid,
            values: t.values.mapv(|v| C64::new(v, 0.0)),
        }
    }

    pub fn new(kind: Kind, x_grid: GridSpec, param_grid: GridSpec, values: Array2<C64>) -> Result<Self> {
        if values.dim() != (x_grid.len(), param_grid.len()) {
            return Err(Error::GridMismatch(format!("field is {:?}", values.dim())));
        }
        Ok(ComplexTomogramField { kind, x_grid, param_grid, values })
    }

    fn with_values(&self, values: Array2<C64>) -> Self {
        ComplexTomogramField { kind: self.kind, x_grid: self.x_grid, param_grid: self.param_grid, values }
    }

    pub fn scaled(&self, c: C64) -> Self {
        self.with_values(self.values.mapv(|v| v * c))
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with_values(&self.values + &other.values))
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with_values(&self.values - &other.values))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.kind != other.kind || !self.x_grid.same_as(&other.x_grid) || !self.param_grid.same_as(&other.param_grid) {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    /// `∫ F(X, η_j) dX` for every column.
    pub fn x_integrals(&self) -> Vec<C64> {
        self.values.columns().into_iter().map(|c| self.x_grid.integrate(c.iter().copied())).collect()
    }

    /// Largest `|F - G|` after trimming `trim` layers on every edge.
    pub fn interior_max_diff(&self, other: &Self, trim: usize) -> Result<f64> {
        self.check_same(other)?;
        let (nx, ne) = self.values.dim();
        let mut worst: f64 = 0.0;
        for i in trim..nx.saturating_sub(trim) {
            for j in trim..ne.saturating_sub(trim) {
                worst = worst.max((self.values[[i, j]] - other.values[[i, j]]).norm());
            }
        }
        Ok(worst)
    }

    /// Applies `op` to each `X` column.
    fn map_columns(&self, op: impl Fn(&[C64]) -> Result<Vec<C64>> + Sync) -> Result<Self> {
        let cols: Vec<Vec<C64>> = (0..self.param_grid.len())
            .into_par_iter()
            .map(|j| op(&self.values.column(j).to_vec()))
            .collect::<Result<_>>()?;
        Ok(self.with_values(Array2::from_shape_fn(self.values.dim(), |(i, j)| cols[j][i])))
    }

    /// Applies `op` along `η` for each `X` row.
    fn map_rows(&self, op: impl Fn(&[C64]) -> Vec<C64> + Sync) -> Self {
        let rows: Vec<Vec<C64>> = (0..self.x_grid.len()).into_par_iter().map(|i| op(&self.values.row(i).to_vec())).collect();
        self.with_values(Array2::from_shape_fn(self.values.dim(), |(i, j)| rows[i][j]))
    }

    pub fn d_x(&self) -> Self {
        let h = self.x_grid.spacing();
        self.map_columns(|c| Ok(fd::derivative(c, h))).expect("derivative cannot fail")
    }

    pub fn d_x2(&self) -> Self {
        let h = self.x_grid.spacing();
        self.map_columns(|c| Ok(fd::second_derivative(c, h))).expect("derivative cannot fail")
    }

    pub fn d_eta(&self) -> Self {
        let h = self.param_grid.spacing();
        self.map_rows(|r| fd::derivative(r, h))
    }

    pub fn d_eta2(&self) -> Self {
        let h = self.param_grid.spacing();
        self.map_rows(|r| fd::second_derivative(r, h))
    }

    /// `∂_X⁻ⁿ` column by column.
    pub fn inv_x(&self, n: usize) -> Result<Self> {
        let h = self.x_grid.spacing();
        self.map_columns(|c| fd::inverse_derivative(c, h, n, |v| v.norm()))
    }

    /// Pointwise product with `g(X, η)`.
    pub fn times(&self, g: impl Fn(f64, f64) -> C64) -> Self {
        let xs = self.x_grid.points();
        let es = self.param_grid.points();
        self.with_values(Array2::from_shape_fn(self.values.dim(), |(i, j)| self.values[[i, j]] * g(xs[i], es[j])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Atom {
    Q,
    P,
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `[q̂] f`.
pub fn apply_position(f: &ComplexTomogramField) -> Result<ComplexTomogramField> {
    let flow = f.inv_x(1)?.d_eta();
    let dx = f.d_x();
    let out = match f.kind {
        Kind::M1 => f
            .times(|x, _| C64::new(x, 0.0))
            .plus(&flow.times(|_, nu| C64::new(nu, 0.0)))?
            .plus(&dx.times(|_, nu| I * (0.5 * nu)))?,
        Kind::M2 => flow.scaled(C64::new(-1.0, 0.0)).plus(&dx.scaled(I * 0.5))?,
    };
    Ok(out)
}

/// `[p̂] f`.
pub fn apply_momentum(f: &ComplexTomogramField) -> Result<ComplexTomogramField> {
    let flow = f.inv_x(1)?.d_eta();
    let dx = f.d_x();
    let out = match f.kind {
        Kind::M1 => flow.scaled(C64::new(-1.0, 0.0)).plus(&dx.scaled(I * -0.5))?,
        Kind::M2 => f
            .times(|x, _| C64::new(x, 0.0))
            .plus(&flow.times(|_, mu| C64::new(mu, 0.0)))?
            .plus(&dx.times(|_, mu| I * (-0.5 * mu)))?,
    };
    Ok(out)
}

pub fn apply_atom(f: &ComplexTomogramField, atom: Atom) -> Result<ComplexTomogramField> {
    match atom {
        Atom::Q => apply_position(f),
        Atom::P => apply_momentum(f),
    }
}

/// `c Â₁Â₂…Âₖ` as a product of canonical operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorWord {
    pub kind: Kind,
    pub atoms: Vec<Atom>,
    pub coefficient: C64,
}

impl OperatorWord {
    pub fn new(kind: Kind, atoms: Vec<Atom>, coefficient: C64) -> Result<Self> {
        if atoms.len() > MAX_WORD_LEN {
            return Err(Error::Domain(format!("operator word of length {} exceeds {MAX_WORD_LEN}", atoms.len())));
        }
        Ok(OperatorWord { kind, atoms, coefficient })
    }

    pub fn unit(kind: Kind, atoms: &[Atom]) -> Result<Self> {
        Self::new(kind, atoms.to_vec(), C64::new(1.0, 0.0))
    }

    /// Dense matrix of the word on a position grid, acting on samples.
    pub fn matrix(&self, q: &Array2<C64>, p: &Array2<C64>) -> Array2<C64> {
        let n = q.nrows();
        let mut m = Array2::<C64>::eye(n);
        for atom in &self.atoms {
            m = m.dot(match atom {
                Atom::Q => q,
                Atom::P => p,
            });
        }
        m * self.coefficient
    }
}

/// `c [Â₁][Â₂]…[Âₖ] f`; the rightmost atom acts first.
pub fn apply_word(f: &ComplexTomogramField, w: &OperatorWord) -> Result<ComplexTomogramField> {
    if w.atoms.len() > MAX_WORD_LEN {
        return Err(Error::Domain(format!("operator word of length {} exceeds {MAX_WORD_LEN}", w.atoms.len())));
    }
    if w.kind != f.kind {
        return Err(Error::Domain(format!("{} word applied to a {} field", w.kind, f.kind)));
    }
    let mut out = f.clone();
    for &atom in w.atoms.iter().rev() {
        out = apply_atom(&out, atom)?;
    }
    Ok(out.scaled(w.coefficient))
}

/// `Σ_k [ŵ_k] f`, a polynomial in the canonical operators.
pub fn apply_polynomial(f: &ComplexTomogramField, words: &[OperatorWord]) -> Result<ComplexTomogramField> {
    let mut acc = f.scaled(C64::new(0.0, 0.0));
    for w in words {
        acc = acc.plus(&apply_word(f, w)?)?;
    }
    Ok(acc)
}
