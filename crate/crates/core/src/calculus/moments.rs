//! First and second moments from exact tomogram slices.
//!
//! With `M1` columns at `ν ∈ {-1, 0, 1}`:
//! `⟨q⟩ = ∫X M1(X,0)`, `⟨p⟩ = ∫X [M1(X,1) - M1(X,0)]`, `⟨q²⟩ = ∫X² M1(X,0)`,
//! `⟨p²⟩ = ½∫X² [M1(X,1) + M1(X,-1) - 2M1(X,0)]`,
//! `⟨qp+pq⟩ = ½∫X² [M1(X,1) - M1(X,-1)]`; `M2` swaps the roles of `q` and `p`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::{momentum_matrix, position_matrix};
use crate::state::QuantumState;
use crate::tomography::{ColumnSource, Kind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    Q,
    P,
    Q2,
    P2,
    /// `⟨qp + pq⟩`
    Qp,
}

impl Moment {
    pub const ALL: [Moment; 5] = [Moment::Q, Moment::P, Moment::Q2, Moment::P2, Moment::Qp];

    pub fn label(self) -> &'static str {
        match self {
            Moment::Q => "q",
            Moment::P => "p",
            Moment::Q2 => "q2",
            Moment::P2 => "p2",
            Moment::Qp => "qp+pq",
        }
    }

    /// The same moment with `q` and `p` exchanged.
    fn swapped(self) -> Moment {
        match self {
            Moment::Q => Moment::P,
            Moment::P => Moment::Q,
            Moment::Q2 => Moment::P2,
            Moment::P2 => Moment::Q2,
            Moment::Qp => Moment::Qp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DualMoment {
    pub which: Moment,
    pub kind: Kind,
}

/// Moment of the state behind `src`, read off exact columns at `η ∈ {-1, 0, 1}`.
pub fn dual_moment(src: &dyn ColumnSource, which: Moment) -> Result<f64> {
    // The M2 formulas are the M1 ones with q and p exchanged.
    let m = match src.kind() {
        Kind::M1 => which,
        Kind::M2 => which.swapped(),
    };
    let c0 = || src.column(0.0);
    let c1 = || src.column(1.0);
    let cm = || src.column(-1.0);
    Ok(match m {
        Moment::Q => c0()?.moment(1),
        Moment::P => c1()?.moment(1) - c0()?.moment(1),
        Moment::Q2 => c0()?.moment(2),
        Moment::P2 => 0.5 * (c1()?.moment(2) + cm()?.moment(2) - 2.0 * c0()?.moment(2)),
        Moment::Qp => 0.5 * (c1()?.moment(2) - cm()?.moment(2)),
    })
}

/// `Tr(Âρ̂)` for the moment operator with dense grid matrices.
pub fn trace_moment(state: &QuantumState, which: Moment) -> f64 {
    let q = position_matrix(state.grid());
    let p = momentum_matrix(state.grid());
    let op = match which {
        Moment::Q => q,
        Moment::P => p,
        Moment::Q2 => q.dot(&q),
        Moment::P2 => p.dot(&p),
        Moment::Qp => q.dot(&p) + p.dot(&q),
    };
    state.expectation(&op).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::state::{state_from_preset, Preset};
    use crate::tomography::StateColumns;

    #[test]
    fn ground_state_second_moments() {
        let s = state_from_preset(&Preset::HoEigenstate { n: 0 }, &GridSpec::new(-10.0, 10.0, 256).unwrap()).unwrap();
        for kind in [Kind::M1, Kind::M2] {
            let src = StateColumns::new(&s, kind, GridSpec::symmetric(20.0, 0.05).unwrap());
            assert!((dual_moment(&src, Moment::Q2).unwrap() - 0.5).abs() < 1e-6);
            assert!((dual_moment(&src, Moment::P2).unwrap() - 0.5).abs() < 1e-6);
            assert!(dual_moment(&src, Moment::Qp).unwrap().abs() < 1e-6);
        }
    }
}
