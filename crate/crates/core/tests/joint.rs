use num_complex::Complex64 as C64;

use partomo::calculus::{trace_moment, Atom, ComplexTomogramField, DualMoment, Moment, INTERIOR_TRIM};
use partomo::dynamics::{evolution_rhs, interior_max_diff};
use partomo::evolve::HamiltonianSpec;
use partomo::joint::{
    conjugated_apply, joint_evolution_rhs, joint_from_conditional, joint_moment_regular, joint_moment_singular,
    joint_stationary_residual, Conjugation, GaussianParamDist, JointTomogram,
};
use partomo::state::{state_from_preset, Component, Preset, QuantumState};
use partomo::tomography::{density_from_tomogram, partial_tomogram, Kind, ReconstructionOptions, Tomogram};
use partomo::{Error, GridSpec};

fn state(p: Preset) -> QuantumState {
    state_from_preset(&p, &GridSpec::new(-10.0, 10.0, 256).unwrap()).unwrap()
}

const DISTS: [(f64, f64); 2] = [(0.0, 1.0), (0.3, 1.2)];

fn wide(s: &QuantumState, kind: Kind, (c, w): (f64, f64)) -> JointTomogram {
    let t = partial_tomogram(s, kind, &GridSpec::symmetric(45.0, 0.1).unwrap(), &GridSpec::symmetric(8.0, 0.05).unwrap()).unwrap();
    joint_from_conditional(&t, &GaussianParamDist::new(kind, c, w).unwrap()).unwrap()
}

/// Grids fine enough for the differential rules.
fn fine(s: &QuantumState, kind: Kind) -> JointTomogram {
    fine_with(s, kind, 0.05)
}

fn fine_with(s: &QuantumState, kind: Kind, d_eta: f64) -> JointTomogram {
    let t = partial_tomogram(s, kind, &GridSpec::symmetric(40.0, 0.05).unwrap(), &GridSpec::symmetric(6.5, d_eta).unwrap()).unwrap();
    joint_from_conditional(&t, &GaussianParamDist::new(kind, 0.0, 1.0).unwrap()).unwrap()
}

fn field(j: &JointTomogram) -> ComplexTomogramField {
    ComplexTomogramField::from_tomogram(&j.as_tomogram())
}

#[test]
fn joint_distributions_are_normalized() {
    let presets = [
        Preset::HoEigenstate { n: 0 },
        Preset::HoEigenstate { n: 3 },
        Preset::Coherent { q0: 1.5, p0: -0.5 },
        Preset::Mixture {
            components: vec![Component::real(0.5, Preset::HoEigenstate { n: 0 }), Component::real(0.5, Preset::HoEigenstate { n: 1 })],
        },
    ];
    for p in presets {
        let s = state(p.clone());
        for kind in [Kind::M1, Kind::M2] {
            for d in DISTS {
                let j = wide(&s, kind, d);
                assert!((j.total() - 1.0).abs() < 1e-6, "{p:?} {kind} {d:?}: {}", j.total());
                let back = j.conditional();
                let err = back.values.iter().zip(j.base.values.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-10, "{err}");
            }
        }
    }
}

#[test]
fn joint_construction_guards() {
    let s = state(Preset::HoEigenstate { n: 0 });
    let t = partial_tomogram(&s, Kind::M1, &GridSpec::symmetric(30.0, 0.1).unwrap(), &GridSpec::symmetric(4.0, 0.1).unwrap()).unwrap();
    let d = GaussianParamDist::new(Kind::M1, 0.0, 1.0).unwrap();
    assert!(matches!(joint_from_conditional(&t, &d), Err(Error::Distribution(_))));
    let d2 = GaussianParamDist::new(Kind::M2, 0.0, 0.5).unwrap();
    assert!(matches!(joint_from_conditional(&t, &d2), Err(Error::Domain(_))));
}

#[test]
fn narrow_distribution_concentrates_mass() {
    let s = state(Preset::Coherent { q0: 0.5, p0: 0.5 });
    let t = partial_tomogram(&s, Kind::M1, &GridSpec::symmetric(30.0, 0.1).unwrap(), &GridSpec::symmetric(6.0, 0.05).unwrap()).unwrap();
    let j = joint_from_conditional(&t, &GaussianParamDist::new(Kind::M1, 2.0, 0.5).unwrap()).unwrap();
    let g = j.base.param_grid;
    let near: f64 = g.integrate(g.points().into_iter().enumerate().map(|(k, e)| {
        let col = j.base.x_grid.integrate(j.values.column(k).iter().copied());
        if (e - 2.0).abs() <= 1.0 { col } else { 0.0 }
    }));
    assert!(near > 0.99, "{near}");
}

#[test]
fn conjugation_routes_agree() {
    let s = state(Preset::HoEigenstate { n: 0 });
    for kind in [Kind::M1, Kind::M2] {
        let j = fine(&s, kind);
        let f = field(&j);
        for atom in [Atom::Q, Atom::P] {
            let a = conjugated_apply(&f, &j.dist, atom, Conjugation::Generic).unwrap();
            let b = conjugated_apply(&f, &j.dist, atom, Conjugation::ClosedForm).unwrap();
            let err = a.interior_max_diff(&b, INTERIOR_TRIM).unwrap();
            assert!(err < 5e-4, "{kind} {atom:?}: {err:.3e}");
        }
    }
}

#[test]
fn conjugated_position_integrates_to_mean() {
    let s = state(Preset::Coherent { q0: 1.5, p0: 0.0 });
    for kind in [Kind::M1, Kind::M2] {
        let j = fine(&s, kind);
        let g = conjugated_apply(&field(&j), &j.dist, Atom::Q, Conjugation::ClosedForm).unwrap();
        let total = j.base.param_grid.integrate(g.x_integrals());
        assert!((total - C64::new(1.5, 0.0)).norm() < 1e-4, "{kind}: {total}");
    }
}

#[test]
fn zero_field_stays_zero() {
    let s = state(Preset::HoEigenstate { n: 0 });
    let mut j = fine(&s, Kind::M1);
    j.values.fill(0.0);
    for route in [Conjugation::Generic, Conjugation::ClosedForm] {
        let g = conjugated_apply(&field(&j), &j.dist, Atom::Q, route).unwrap();
        assert!(g.values.iter().all(|c| c.norm() == 0.0));
    }
    let rhs = joint_evolution_rhs(&j, &HamiltonianSpec::harmonic(), Conjugation::ClosedForm).unwrap();
    assert!(rhs.values.iter().all(|v| *v == 0.0));
}

#[test]
fn regular_moments_match_trace() {
    let s = state(Preset::Coherent { q0: 1.5, p0: -0.5 });
    for kind in [Kind::M1, Kind::M2] {
        for d in DISTS {
            let j = wide(&s, kind, d);
            for m in [Moment::Q, Moment::P] {
                let v = joint_moment_regular(&j, m).unwrap();
                assert!((v - trace_moment(&s, m)).abs() < 1e-4, "{kind} {d:?} {m:?}: {v}");
            }
        }
    }
    let g = state(Preset::HoEigenstate { n: 0 });
    let j = wide(&g, Kind::M1, (0.3, 1.2));
    assert!(joint_moment_regular(&j, Moment::Q).unwrap().abs() < 1e-6);
    assert!(joint_moment_regular(&j, Moment::P).unwrap().abs() < 1e-6);
    let c = state(Preset::Coherent { q0: 0.0, p0: 2.0 });
    let j = wide(&c, Kind::M2, (0.0, 1.0));
    assert!((joint_moment_regular(&j, Moment::P).unwrap() - 2.0).abs() < 1e-4);
    assert!(joint_moment_regular(&j, Moment::Q2).is_err());
}

#[test]
fn singular_moments_match_trace_and_regular_route() {
    let s = state(Preset::Coherent { q0: 1.5, p0: 0.0 });
    let j = wide(&s, Kind::M1, (0.3, 1.2));
    let q = joint_moment_singular(&j, DualMoment { which: Moment::Q, kind: Kind::M1 }).unwrap();
    assert!((q - 1.5).abs() < 1e-5, "{q}");
    let s = state(Preset::Coherent { q0: 0.0, p0: 0.7 });
    let j = wide(&s, Kind::M1, (0.0, 1.0));
    let p = joint_moment_singular(&j, DualMoment { which: Moment::P, kind: Kind::M1 }).unwrap();
    assert!((p - 0.7).abs() < 1e-5, "{p}");

    let presets = [Preset::HoEigenstate { n: 1 }, Preset::Coherent { q0: 1.5, p0: -0.5 }, Preset::Gaussian { q0: 0.3, p0: 0.2, sigma: 0.8 }];
    for pr in presets {
        let s = state(pr.clone());
        for kind in [Kind::M1, Kind::M2] {
            for d in DISTS {
                let j = wide(&s, kind, d);
                for m in [Moment::Q, Moment::P] {
                    let a = joint_moment_singular(&j, DualMoment { which: m, kind }).unwrap();
                    let b = joint_moment_regular(&j, m).unwrap();
                    let o = trace_moment(&s, m);
                    assert!((a - b).abs() < 1e-4 && (a - o).abs() < 1e-4, "{pr:?} {kind} {d:?} {m:?}: {a} {b} {o}");
                }
            }
        }
    }
}

/// The closed form needs the finer `η` step: see `joint_evolution_rhs`.
fn route_grids() -> [(Conjugation, f64); 2] {
    [(Conjugation::Generic, 0.05), (Conjugation::ClosedForm, 0.025)]
}

#[test]
fn joint_rhs_factorizes() {
    let s = state(Preset::Gaussian { q0: 0.0, p0: 0.0, sigma: 1.0 });
    for (route, step) in route_grids() {
        for kind in [Kind::M1, Kind::M2] {
            let j = fine_with(&s, kind, step);
            for h in [HamiltonianSpec::free(), HamiltonianSpec::harmonic(), HamiltonianSpec::quartic(0.1)] {
                let joint = joint_evolution_rhs(&j, &h, route).unwrap();
                let cond = j.weighted(&evolution_rhs(&j.base, &h).unwrap());
                let err = interior_max_diff(&joint, &cond);
                assert!(err < 5e-4, "{route:?} {kind} {h:?}: {err:.3e}");
            }
        }
        let j = fine_with(&s, Kind::M1, step);
        let d = ComplexTomogramField::from_tomogram(&j.base).d_eta();
        let d = j.weighted(&Tomogram { values: d.values.mapv(|c| c.re), ..j.base.clone() });
        let err = interior_max_diff(&joint_evolution_rhs(&j, &HamiltonianSpec::free(), route).unwrap(), &d);
        assert!(err < 5e-4, "{route:?}: {err:.3e}");
    }
}

#[test]
fn joint_eigenstates_are_stationary() {
    for (route, step) in route_grids() {
        for n in 0..2 {
            let s = state(Preset::HoEigenstate { n });
            for kind in [Kind::M1, Kind::M2] {
                let j = fine_with(&s, kind, step);
                let r = joint_stationary_residual(&j, &HamiltonianSpec::harmonic(), n as f64 + 0.5, route).unwrap();
                assert!(r.passed(1e-3), "{route:?} n={n} {kind}: {r:?}");
            }
        }
    }
    let j = fine(&state(Preset::HoEigenstate { n: 0 }), Kind::M1);
    let r = joint_stationary_residual(&j, &HamiltonianSpec::harmonic(), 1.0, Conjugation::Generic).unwrap();
    assert!(r.residual_real >= 0.4, "{r:?}");
}

#[test]
fn joint_tomogram_reconstructs_state() {
    let s = state(Preset::HoEigenstate { n: 1 });
    let t = partial_tomogram(&s, Kind::M1, &GridSpec::symmetric(45.0, 0.1).unwrap(), &GridSpec::symmetric(6.0, 0.1).unwrap()).unwrap();
    let j = joint_from_conditional(&t, &GaussianParamDist::new(Kind::M1, 0.0, 1.0).unwrap()).unwrap();
    let rho = density_from_tomogram(&j.conditional(), &ReconstructionOptions::default()).unwrap();
    let err = (&rho.rho() - &s.rho()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(err < 5e-3, "{err:.3e}");
}
