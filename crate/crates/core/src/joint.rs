//! Joint probability representation: a conditional tomogram `M(X | η)`
//! multiplied by a Gaussian distribution `P(η)` of its parameter,
//! `M̃(X, η) = M(X, η) P(η)`, normalized over both variables.
//!
//! Operators act on `M̃` through the conjugated rules `P [Â] P⁻¹`. For a
//! Gaussian `P` that only replaces `∂_η` by `∂_η + 2(η - c)/w²`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::calculus::{apply_atom, Atom, ComplexTomogramField, DualMoment, Moment, INTERIOR_TRIM};
use crate::dynamics::{Route, StationaryReport};
use crate::error::{Error, Result};
use crate::evolve::HamiltonianSpec;
use crate::grid::GridSpec;
use crate::tomography::io::TomogramEnvelope;
use crate::tomography::{ColumnSource, Kind, Tomogram, TomogramColumn};

/// Smallest density accepted anywhere on a parameter grid.
pub const DENSITY_FLOOR: f64 = 1e-300;
/// Largest `P`, `P'` or `P''` allowed at the ends of a parameter grid.
pub const EDGE_DECAY_TOL: f64 = 1e-10;
/// Widths the parameter grid must reach on both sides of the center.
pub const MIN_WIDTHS: f64 = 6.0;
/// Tolerance on `∫ P dη` over the grid.
pub const DENSITY_NORM_TOL: f64 = 1e-8;
/// Tolerance on `∬ M̃ dX dη`.
pub const JOINT_NORM_TOL: f64 = 1e-6;

/// `P(η) = exp(-(η - c)²/w²) / (√π w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParamDist {
    pub kind: Kind,
    pub center: f64,
    pub width: f64,
}

impl GaussianParamDist {
    pub fn new(kind: Kind, center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() || !(width > 0.0) || !width.is_finite() {
            return Err(Error::Distribution(format!("center {center} and width {width} must be finite with width > 0")));
        }
        Ok(GaussianParamDist { kind, center, width })
    }

    pub fn density(&self, eta: f64) -> f64 {
        let u = (eta - self.center) / self.width;
        (-u * u).exp() / (PI.sqrt() * self.width)
    }

    /// `-P'/P = 2(η - c)/w²`.
    pub fn log_slope(&self, eta: f64) -> f64 {
        2.0 * (eta - self.center) / (self.width * self.width)
    }

    fn first_derivative(&self, eta: f64) -> f64 {
        -self.log_slope(eta) * self.density(eta)
    }

    fn second_derivative(&self, eta: f64) -> f64 {
        let s = self.log_slope(eta);
        (s * s - 2.0 / (self.width * self.width)) * self.density(eta)
    }

    /// Checks that `grid` can carry this distribution: it reaches
    /// `MIN_WIDTHS` widths on both sides, `P` and its first two derivatives
    /// have decayed at both ends, `P` stays above the floor and integrates
    /// to one.
    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        let reach = MIN_WIDTHS * self.width;
        if grid.min() > self.center - reach || grid.max() < self.center + reach {
            return Err(Error::Distribution(format!(
                "parameter grid [{}, {}] does not reach {MIN_WIDTHS} widths around {}",
                grid.min(),
                grid.max(),
                self.center
            )));
        }
        for eta in [grid.min(), grid.max()] {
            let edge = [self.density(eta), self.first_derivative(eta), self.second_derivative(eta)];
            if edge.iter().any(|v| v.abs() >= EDGE_DECAY_TOL) {
                return Err(Error::Distribution(format!("density has not decayed at eta = {eta}: {edge:?}")));
            }
            if self.density(eta) < DENSITY_FLOOR {
                return Err(Error::Domain(format!(
                    "density underflows at eta = {eta}; trim the parameter grid to the distribution's support"
                )));
            }
        }
        let total = grid.integrate(grid.points().into_iter().map(|e| self.density(e)));
        if (total - 1.0).abs() > DENSITY_NORM_TOL {
            return Err(Error::Distribution(format!("density integrates to {total:.12} on the grid")));
        }
        Ok(())
    }

    /// `√π w exp((η - c)²/w²)`, the weight that turns a joint slice back into
    /// a conditional one.
    pub fn inverse_density(&self, eta: f64) -> f64 {
        let u = (eta - self.center) / self.width;
        PI.sqrt() * self.width * (u * u).exp()
    }
}

/// Product of independent parameter distributions, one per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductParamDist {
    pub factors: Vec<GaussianParamDist>,
}

impl ProductParamDist {
    pub fn density(&self, etas: &[f64]) -> Result<f64> {
        if etas.len() != self.factors.len() {
            return Err(Error::Domain(format!("{} parameters for {} factors", etas.len(), self.factors.len())));
        }
        Ok(self.factors.iter().zip(etas).map(|(d, &e)| d.density(e)).product())
    }

    /// Weight of a singular slice in coordinate `j`: the bystander
    /// coordinates are pinned to their distribution centers.
    pub fn slice_weight(&self, j: usize, eta: f64) -> Result<f64> {
        let mut etas: Vec<f64> = self.factors.iter().map(|d| d.center).collect();
        let slot = etas.get_mut(j).ok_or_else(|| Error::Domain(format!("no coordinate {j}")))?;
        *slot = eta;
        Ok(1.0 / self.density(&etas)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointTomogram {
    pub base: Tomogram,
    pub dist: GaussianParamDist,
    /// `M̃(X, η)`, indexed like `base.values`.
    pub values: Array2<f64>,
}

impl JointTomogram {
    pub fn kind(&self) -> Kind {
        self.base.kind
    }

    pub fn densities(&self) -> Vec<f64> {
        self.base.param_grid.points().into_iter().map(|e| self.dist.density(e)).collect()
    }

    /// `∬ M̃ dX dη`.
    pub fn total(&self) -> f64 {
        let cols: Vec<f64> = self.values.columns().into_iter().map(|c| self.base.x_grid.integrate(c.iter().copied())).collect();
        self.base.param_grid.integrate(cols)
    }

    /// `M̃ / P` as a tomogram.
    pub fn conditional(&self) -> Tomogram {
        let ps = self.densities();
        let values = Array2::from_shape_fn(self.values.dim(), |(i, j)| self.values[[i, j]] / ps[j]);
        Tomogram { values, ..self.base.clone() }
    }

    /// `P(η) F(X, η)` for a field on the same grids.
    pub fn weighted(&self, f: &Tomogram) -> Tomogram {
        let ps = self.densities();
        let values = Array2::from_shape_fn(f.values.dim(), |(i, j)| f.values[[i, j]] * ps[j]);
        Tomogram { values, ..f.clone() }
    }

    /// `M̃` as a tomogram-shaped field.
    pub fn as_tomogram(&self) -> Tomogram {
        Tomogram { values: self.values.clone(), ..self.base.clone() }
    }

    /// JSON envelope of `M̃` with the distribution block filled in.
    pub fn to_envelope(&self) -> TomogramEnvelope {
        let mut env = TomogramEnvelope::from_tomogram(&self.as_tomogram());
        env.distribution = Some(serde_json::json!({
            "kind": self.dist.kind,
            "center": self.dist.center,
            "width": self.dist.width,
        }));
        env
    }

    /// Inverse of [`JointTomogram::to_envelope`]; the conditional is
    /// recovered as `M̃ / P`.
    pub fn from_envelope(env: TomogramEnvelope) -> Result<Self> {
        let block = env.distribution.clone().ok_or_else(|| Error::Io("envelope has no distribution block".into()))?;
        let dist: GaussianParamDist = serde_json::from_value(block).map_err(|e| Error::Io(e.to_string()))?;
        let dist = GaussianParamDist::new(dist.kind, dist.center, dist.width)?;
        let joint = env.into_tomogram()?;
        if joint.kind != dist.kind {
            return Err(Error::Domain(format!("a distribution for {} cannot weight an {} tomogram", dist.kind, joint.kind)));
        }
        dist.check_grid(&joint.param_grid)?;
        let ps: Vec<f64> = joint.param_grid.points().into_iter().map(|e| dist.density(e)).collect();
        let base = Tomogram { values: Array2::from_shape_fn(joint.values.dim(), |(i, j)| joint.values[[i, j]] / ps[j]), ..joint.clone() };
        Ok(JointTomogram { base, dist, values: joint.values })
    }
}

/// `M̃(X, η) = M(X, η) P(η)`.
pub fn joint_from_conditional(t: &Tomogram, d: &GaussianParamDist) -> Result<JointTomogram> {
    if t.kind != d.kind {
        return Err(Error::Domain(format!("a distribution for {} cannot weight an {} tomogram", d.kind, t.kind)));
    }
    d.check_grid(&t.param_grid)?;
    let ps: Vec<f64> = t.param_grid.points().into_iter().map(|e| d.density(e)).collect();
    let values = Array2::from_shape_fn(t.values.dim(), |(i, j)| t.values[[i, j]] * ps[j]);
    let j = JointTomogram { base: t.clone(), dist: *d, values };
    let total = j.total();
    if (total - 1.0).abs() > JOINT_NORM_TOL {
        return Err(Error::GridResolution { eta: f64::NAN, integral: total, tolerance: JOINT_NORM_TOL });
    }
    Ok(j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conjugation {
    /// Divide by `P`, apply the plain rule, multiply by `P`.
    Generic,
    /// The rules with `∂_η + 2(η - c)/w²` written in.
    ClosedForm,
}

fn check_field(f: &ComplexTomogramField, d: &GaussianParamDist) -> Result<()> {
    if f.kind != d.kind {
        return Err(Error::Domain(format!("a distribution for {} cannot act on an {} field", d.kind, f.kind)));
    }
    d.check_grid(&f.param_grid)
}

/// `P ∂_η P⁻¹ ∂_X⁻¹ f`.
fn conjugated_flow(f: &ComplexTomogramField, d: &GaussianParamDist) -> Result<ComplexTomogramField> {
    let g = f.inv_x(1)?;
    g.d_eta().plus(&g.times(|_, e| C64::new(d.log_slope(e), 0.0)))
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn closed_form(f: &ComplexTomogramField, d: &GaussianParamDist, which: Atom) -> Result<ComplexTomogramField> {
    let flow = conjugated_flow(f, d)?;
    let dx = f.d_x();
    // M1 `q` and M2 `p` share one shape, as do M1 `p` and M2 `q`.
    match (f.kind, which) {
        (Kind::M1, Atom::Q) => f
            .times(|x, _| C64::new(x, 0.0))
            .plus(&flow.times(|_, e| C64::new(e, 0.0)))?
            .plus(&dx.times(|_, e| I * (0.5 * e))),
        (Kind::M2, Atom::P) => f
            .times(|x, _| C64::new(x, 0.0))
            .plus(&flow.times(|_, e| C64::new(e, 0.0)))?
            .plus(&dx.times(|_, e| I * (-0.5 * e))),
        (Kind::M1, Atom::P) => flow.scaled(C64::new(-1.0, 0.0)).plus(&dx.scaled(I * -0.5)),
        (Kind::M2, Atom::Q) => flow.scaled(C64::new(-1.0, 0.0)).plus(&dx.scaled(I * 0.5)),
    }
}

fn generic(f: &ComplexTomogramField, d: &GaussianParamDist, which: Atom) -> Result<ComplexTomogramField> {
    let plain = apply_atom(&f.times(|_, e| C64::new(1.0 / d.density(e), 0.0)), which)?;
    Ok(plain.times(|_, e| C64::new(d.density(e), 0.0)))
}

/// `⌈Â⌉ f = P [Â] P⁻¹ f` for `Â = q̂` or `p̂`.
pub fn conjugated_apply(f: &ComplexTomogramField, d: &GaussianParamDist, which: Atom, route: Conjugation) -> Result<ComplexTomogramField> {
    check_field(f, d)?;
    match route {
        Conjugation::Generic => generic(f, d, which),
        Conjugation::ClosedForm => closed_form(f, d, which),
    }
}

/// Moments from the joint field with regular weights: for `M̃1`
/// `⟨q⟩ = ∬ (X - 2c(ν - c)X/w²) M̃1` and `⟨p⟩ = ∬ 2(ν - c)X/w² M̃1`;
/// `M̃2` exchanges `q` and `p`.
pub fn joint_moment_regular(j: &JointTomogram, which: Moment) -> Result<f64> {
    let d = &j.dist;
    let w2 = d.width * d.width;
    let along = matches!((j.kind(), which), (Kind::M1, Moment::Q) | (Kind::M2, Moment::P));
    let across = matches!((j.kind(), which), (Kind::M1, Moment::P) | (Kind::M2, Moment::Q));
    if !along && !across {
        return Err(Error::Domain(format!("no regular joint symbol for {}", which.label())));
    }
    let xs = j.base.x_grid.points();
    let cols: Vec<f64> = j
        .base
        .param_grid
        .points()
        .into_iter()
        .enumerate()
        .map(|(k, eta)| {
            let weight = if along { 1.0 - 2.0 * d.center * (eta - d.center) / w2 } else { 2.0 * (eta - d.center) / w2 };
            weight * j.base.x_grid.integrate(xs.iter().zip(j.values.column(k)).map(|(x, v)| x * v))
        })
        .collect();
    Ok(j.base.param_grid.integrate(cols))
}

/// Joint slices reweighted by `1/P(η)`.
struct ReweightedSlices<'a>(&'a JointTomogram);

impl ColumnSource for ReweightedSlices<'_> {
    fn kind(&self) -> Kind {
        self.0.kind()
    }

    fn x_grid(&self) -> &GridSpec {
        &self.0.base.x_grid
    }

    fn column(&self, eta: f64) -> Result<TomogramColumn> {
        let j = self.0.base.param_grid.index_of(eta).ok_or(Error::MissingColumn(eta))?;
        let w = self.0.dist.inverse_density(eta);
        Ok(TomogramColumn {
            kind: self.0.kind(),
            x_grid: self.0.base.x_grid,
            eta,
            values: self.0.values.column(j).iter().map(|v| v * w).collect(),
        })
    }
}

/// Moments from δ-slices of the joint field at `η ∈ {-1, 0, 1}`, each
/// weighted by `√π w exp((η - c)²/w²)`.
pub fn joint_moment_singular(j: &JointTomogram, m: DualMoment) -> Result<f64> {
    if m.kind != j.kind() {
        return Err(Error::Domain(format!("{} moment requested from an {} joint tomogram", m.kind, j.kind())));
    }
    crate::calculus::dual_moment(&ReweightedSlices(j), m.which)
}

fn joint_hamiltonian_action(f: &ComplexTomogramField, d: &GaussianParamDist, h: &HamiltonianSpec, route: Conjugation) -> Result<ComplexTomogramField> {
    let apply = |g: &ComplexTomogramField, atom: Atom| match route {
        Conjugation::Generic => generic(g, d, atom),
        Conjugation::ClosedForm => closed_form(g, d, atom),
    };
    let p = apply(f, Atom::P)?;
    let mut acc = apply(&p, Atom::P)?.scaled(C64::new(HamiltonianSpec::KINETIC_COEFFICIENT, 0.0));
    acc = acc.plus(&f.scaled(C64::new(h.coefficient(0), 0.0)))?;
    let mut power = f.clone();
    for k in 1..=h.degree() {
        power = apply(&power, Atom::Q)?;
        let c = h.coefficient(k);
        if c != 0.0 {
            acc = acc.plus(&power.scaled(C64::new(c, 0.0)))?;
        }
    }
    Ok(acc)
}

/// `∂ₜ M̃ = 2 Im ⌈Ĥ⌉ M̃`.
///
/// On the closed-form route `(∂_η + 2(η - c)/w²)` annihilates `P` only to
/// the order of the `η` stencil, and the following `∂_X⁻¹` turns that
/// residue into a term growing linearly in `X`. The generic route divides
/// by `P` first and has no such term.
pub fn joint_evolution_rhs(j: &JointTomogram, h: &HamiltonianSpec, route: Conjugation) -> Result<Tomogram> {
    let f = ComplexTomogramField::from_tomogram(&j.as_tomogram());
    check_field(&f, &j.dist)?;
    let hf = joint_hamiltonian_action(&f, &j.dist, h, route)?;
    Ok(Tomogram { values: hf.values.mapv(|c| 2.0 * c.im), ..j.base.clone() })
}

fn interior_norm(values: &Array2<f64>) -> f64 {
    let (nx, ne) = values.dim();
    let mut acc = 0.0;
    for i in INTERIOR_TRIM..nx - INTERIOR_TRIM {
        for k in INTERIOR_TRIM..ne - INTERIOR_TRIM {
            acc += values[[i, k]] * values[[i, k]];
        }
    }
    acc.sqrt()
}

/// `Re ⌈Ĥ⌉ M̃ = E M̃` and `Im ⌈Ĥ⌉ M̃ = 0`, as relative interior residuals.
pub fn joint_stationary_residual(j: &JointTomogram, h: &HamiltonianSpec, energy: f64, route: Conjugation) -> Result<StationaryReport> {
    if !energy.is_finite() {
        return Err(Error::Domain("energy must be finite".into()));
    }
    let norm = interior_norm(&j.values);
    if !(norm > 0.0) {
        return Err(Error::Numerical("stationary residual of a zero field is undefined".into()));
    }
    let f = ComplexTomogramField::from_tomogram(&j.as_tomogram());
    check_field(&f, &j.dist)?;
    let hf = joint_hamiltonian_action(&f, &j.dist, h, route)?;
    let re = hf.values.mapv(|c| c.re) - &j.values * energy;
    let im = hf.values.mapv(|c| c.im);
    Ok(StationaryReport {
        kind: j.kind(),
        route: match route {
            Conjugation::Generic => Route::Generic,
            Conjugation::ClosedForm => Route::Expanded,
        },
        energy,
        residual_real: interior_norm(&re) / norm,
        residual_imag: interior_norm(&im) / norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_normalizes_and_guards() {
        let d = GaussianParamDist::new(Kind::M1, 0.3, 1.2).unwrap();
        let g = GridSpec::symmetric(8.0, 0.05).unwrap();
        d.check_grid(&g).unwrap();
        let second = g.integrate(g.points().into_iter().map(|e| (e - 0.3) * (e - 0.3) * d.density(e)));
        assert!((second - 0.72).abs() < 1e-10, "{second}");
        assert!(d.check_grid(&GridSpec::symmetric(6.0, 0.05).unwrap()).is_err());
        assert!(GaussianParamDist::new(Kind::M1, 0.0, 0.0).is_err());
    }

    #[test]
    fn envelope_round_trip() {
        let xg = GridSpec::new(-4.0, 4.0, 9).unwrap();
        let pg = GridSpec::symmetric(7.0, 0.5).unwrap();
        let d = GaussianParamDist::new(Kind::M2, 0.0, 1.0).unwrap();
        let values = Array2::from_shape_fn((9, pg.len()), |(i, j)| 0.1 * (i + 2 * j) as f64);
        let j = JointTomogram { base: Tomogram::new(Kind::M2, xg, pg, values.clone()).unwrap(), dist: d, values: values.clone() };
        let text = serde_json::to_string(&j.to_envelope()).unwrap();
        assert!(text.contains("\"distribution\""));
        let back = JointTomogram::from_envelope(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.values, values);
        assert_eq!(back.dist, d);
    }

    #[test]
    fn density_floor_is_enforced() {
        let d = GaussianParamDist::new(Kind::M2, 0.0, 0.1).unwrap();
        let e = d.check_grid(&GridSpec::symmetric(4.0, 0.01).unwrap()).unwrap_err();
        assert!(matches!(e, Error::Domain(_)), "{e}");
    }

    #[test]
    fn product_slices_pin_bystanders_to_centers() {
        let a = GaussianParamDist::new(Kind::M1, 0.0, 1.0).unwrap();
        let b = GaussianParamDist::new(Kind::M1, 0.5, 0.8).unwrap();
        let p = ProductParamDist { factors: vec![a, b] };
        let w = p.slice_weight(0, 1.0).unwrap();
        assert!((w * a.density(1.0) * b.density(0.5) - 1.0).abs() < 1e-12);
        let g = GridSpec::symmetric(7.0, 0.05).unwrap();
        let pts = g.points();
        let rows: Vec<f64> = pts.iter().map(|&x| g.integrate(pts.iter().map(|&y| p.density(&[x, y]).unwrap()))).collect();
        assert!((g.integrate(rows) - 1.0).abs() < 1e-8);
    }
}
