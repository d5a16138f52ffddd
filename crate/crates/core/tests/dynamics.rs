use partomo::calculus::ComplexTomogramField;
use partomo::dynamics::{
    check_evolution, evolution_rhs, expanded_rhs, interior_max_diff, stationary_residual, EvolutionCheck, Route, DEFAULT_DT_FD,
};
use partomo::evolve::{evolve_state_oracle, HamiltonianSpec};
use partomo::state::{state_from_preset, Preset, QuantumState};
use partomo::tomography::{partial_tomogram, Kind, Tomogram};
use partomo::{Error, GridSpec};

fn state(p: Preset) -> QuantumState {
    state_from_preset(&p, &GridSpec::new(-10.0, 10.0, 256).unwrap()).unwrap()
}

fn fd_grids() -> (GridSpec, GridSpec) {
    (GridSpec::symmetric(12.0, 0.05).unwrap(), GridSpec::symmetric(1.5, 0.05).unwrap())
}

fn tomo(s: &QuantumState, kind: Kind) -> Tomogram {
    let (xg, pg) = fd_grids();
    partial_tomogram(s, kind, &xg, &pg).unwrap()
}

#[test]
fn free_rhs_is_parameter_derivative() {
    let t = tomo(&state(Preset::Coherent { q0: 1.0, p0: 0.5 }), Kind::M1);
    let rhs = evolution_rhs(&t, &HamiltonianSpec::free()).unwrap();
    let d = ComplexTomogramField::from_tomogram(&t).d_eta();
    let d = Tomogram { values: d.values.mapv(|c| c.re), ..t.clone() };
    let err = interior_max_diff(&rhs, &d);
    assert!(err < 5e-4, "{err:.3e}");
}

#[test]
fn free_rhs_routes_agree() {
    for kind in [Kind::M1, Kind::M2] {
        let t = tomo(&state(Preset::Gaussian { q0: 0.5, p0: -0.3, sigma: 0.8 }), kind);
        let h = HamiltonianSpec::free();
        let err = interior_max_diff(&evolution_rhs(&t, &h).unwrap(), &expanded_rhs(&t, &h).unwrap());
        assert!(err < 5e-4, "{kind}: {err:.3e}");
    }
}

#[test]
fn free_evolution_shifts_parameter() {
    let s0 = state(Preset::HoEigenstate { n: 1 });
    let xg = GridSpec::symmetric(12.0, 0.05).unwrap();
    let t = 0.4;
    let st = evolve_state_oracle(&s0, &HamiltonianSpec::free(), t).unwrap();
    let shifted = GridSpec::new(-0.6 + t, 0.6 + t, 13).unwrap();
    let pg = GridSpec::new(-0.6, 0.6, 13).unwrap();
    let a = partial_tomogram(&st, Kind::M1, &xg, &pg).unwrap();
    let b = partial_tomogram(&s0, Kind::M1, &xg, &shifted).unwrap();
    let err = a.values.iter().zip(b.values.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(err < 1e-5, "{err:.3e}");
}

#[test]
fn evolution_matches_finite_difference() {
    // the quartic force turns position tails into exponential momentum tails
    let xg = GridSpec::symmetric(30.0, 0.05).unwrap();
    let pg = fd_grids().1;
    let coherent = state(Preset::Coherent { q0: 1.0, p0: 0.0 });
    // a displaced packet in the bare quartic well builds ν structure finer than
    // the 0.05 step, so that case starts from the oscillator ground state
    let ground = state(Preset::HoEigenstate { n: 0 });
    let cases = [
        (HamiltonianSpec::free(), &coherent, 1e-3),
        (HamiltonianSpec::harmonic(), &coherent, 2e-3),
        (HamiltonianSpec::quartic(0.1), &ground, 2e-3),
    ];
    for (h, s0, tol) in cases {
        for kind in [Kind::M1, Kind::M2] {
            let check = EvolutionCheck { kind, x_grid: xg, param_grid: pg, dt_fd: DEFAULT_DT_FD, tolerance: tol };
            let r = check_evolution(s0, &h, &[0.0, 0.5, 1.0], &check).unwrap_or_else(|e| panic!("{h:?} {kind}: {e}"));
            assert!(r.passed, "{h:?} {kind}: {:?}", r.rhs_vs_fd_error);
        }
    }
}

#[test]
fn eigenstates_are_stationary() {
    let h = HamiltonianSpec::harmonic();
    for n in 0..3 {
        let s = state(Preset::HoEigenstate { n });
        for kind in [Kind::M1, Kind::M2] {
            let t = tomo(&s, kind);
            for route in [Route::Generic, Route::Expanded] {
                let r = stationary_residual(&t, &h, n as f64 + 0.5, route).unwrap();
                assert!(r.passed(1e-3), "n={n} {kind} {route:?}: {r:?}");
            }
        }
    }
}

#[test]
fn wrong_energy_is_detected() {
    let t = tomo(&state(Preset::HoEigenstate { n: 1 }), Kind::M1);
    for route in [Route::Generic, Route::Expanded] {
        let r = stationary_residual(&t, &HamiltonianSpec::harmonic(), 1.0, route).unwrap();
        assert!(r.residual_real >= 0.4, "{route:?}: {r:?}");
    }
}

#[test]
fn rhs_conserves_normalization() {
    let t = tomo(&state(Preset::Coherent { q0: 0.7, p0: 0.4 }), Kind::M2);
    let rhs = evolution_rhs(&t, &HamiltonianSpec::quartic(0.1)).unwrap();
    let f = ComplexTomogramField::from_tomogram(&rhs);
    for v in f.x_integrals() {
        assert!(v.norm() < 1e-5, "{v}");
    }
}

#[test]
fn zero_field_is_rejected() {
    let mut t = tomo(&state(Preset::HoEigenstate { n: 0 }), Kind::M1);
    t.values.fill(0.0);
    let r = stationary_residual(&t, &HamiltonianSpec::harmonic(), 0.5, Route::Generic);
    assert!(matches!(r, Err(Error::Numerical(_))));
}
