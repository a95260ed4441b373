use proptest::prelude::*;
use relclock::analysis::distance;
use relclock::clock::{ClockModel, QuasiIdealParams};
use relclock::constraint::{history_state_coupled, Ensemble, SystemModel};
use relclock::dynamics::*;
use relclock::linalg::{commutator, max_abs, projector, trace};
use relclock::{CMat, CVec, Error, C64};

fn plus() -> CVec {
    CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]) / C64::new(2f64.sqrt(), 0.0)
}

fn unit2(a: f64, b: f64, phase: f64) -> CVec {
    let n = (a * a + b * b).sqrt();
    CVec::from_vec(vec![C64::new(a / n, 0.0), C64::from_polar(b / n, phase)])
}

struct Setup {
    clock: ClockModel,
    p: QuasiIdealParams,
    sys: SystemModel,
    ens: Ensemble,
    g: f64,
}

fn setup(d: usize, sigma: f64, levels: [usize; 2], g: f64, psi0: &CVec) -> Setup {
    let clock = ClockModel::new(d, 1.0).unwrap();
    let p = QuasiIdealParams::new(0.0, sigma, (d as f64 - 1.0) / 2.0).unwrap();
    let sys = SystemModel::clock_levels(&clock, g, &levels).unwrap();
    let ens = Ensemble::pure(history_state_coupled(&sys, &clock, g, psi0).unwrap());
    Setup { clock, p, sys, ens, g }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn potential_dual_form(d in 6usize..20, tau in -6.0f64..6.0, a in 0.1f64..1.0, b in 0.1f64..1.0,
                           ph in 0.0f64..std::f64::consts::TAU, g in 0.0f64..0.02, lo in 0usize..3) {
        let levels = [d / 2 - 1 - lo.min(d / 2 - 1), d / 2];
        let s = setup(d, (d as f64).sqrt(), levels, g, &unit2(a, b, ph));
        let psi = &s.ens.members[0].1;
        let v1 = build_potential(psi, &s.sys, &s.clock, &s.p, tau, s.g).unwrap().matrix;
        let v2 = build_potential_from_ticks(psi, &s.sys, &s.clock, &s.p, tau, s.g).unwrap().matrix;
        let scale = max_abs(&v1);
        prop_assert!(max_abs(&(&v1 - &v2)) <= 1e-10 * scale + 1e-300, "{} vs {}", max_abs(&(&v1 - &v2)), scale);
    }

    #[test]
    fn ourvon_matches_oursch_for_pure_states(e1 in -3.0f64..3.0, g in 0.0f64..0.05, a in 0.1f64..1.0, ph in 0.0f64..std::f64::consts::TAU) {
        let clock = ClockModel::new(8, 1.0).unwrap();
        let sys = SystemModel::diagonal(&[0.2, e1]).unwrap();
        let psi0 = unit2(a, 1.0 - a * 0.5, ph);
        let grid = uniform_grid(3.0, 0.1).unwrap();
        let cfg = IntegratorConfig::default();
        let sch = integrate_pure(&sys, &clock, g, &psi0, &grid, &cfg).unwrap();
        let von = integrate_commutator(&sys, &clock, g, &projector(&psi0), &grid, &cfg).unwrap();
        for (x, y) in sch.states.iter().zip(&von.states) {
            prop_assert!(max_abs(&(x - y)) <= 1e-12);
        }
    }
}

#[test]
fn rk4_is_fourth_order() {
    let clock = ClockModel::new(8, 1.0).unwrap();
    let sys = SystemModel::diagonal(&[0.0, 3.0]).unwrap();
    let grid = vec![0.0, 1.0, 2.0, 3.0, 4.0];
    let exact = integrate_pure(&sys, &clock, 0.01, &plus(), &grid, &IntegratorConfig::default()).unwrap();
    let err = |dt: f64| {
        let cfg = IntegratorConfig { dt, stepper: Stepper::Rk4, ..IntegratorConfig::default() };
        let t = integrate_pure(&sys, &clock, 0.01, &plus(), &grid, &cfg).unwrap();
        max_abs(&(t.last() - exact.last()))
    };
    let (e1, e2) = (err(0.2), err(0.1));
    let ratio = e1 / e2;
    assert!((8.0..=32.0).contains(&ratio), "errors {e1:e} {e2:e}, ratio {ratio}");
}

#[test]
fn ideal_limit_is_rescaled_ourvon() {
    let clock = ClockModel::new(12, 2.0).unwrap();
    let sys = SystemModel::diagonal(&[-0.4, 0.9]).unwrap();
    let rho0 = projector(&unit2(0.3, 0.7, 1.0));
    let grid = uniform_grid(3.0, 0.1).unwrap();
    let von = integrate_commutator(&sys, &clock, 0.03, &rho0, &grid, &IntegratorConfig::default()).unwrap();
    let phys: Vec<f64> = grid.iter().map(|t| t * clock.tick()).collect();
    let ideal = integrate_ideal(&sys, 0.03, &rho0, &phys, &IntegratorConfig::default()).unwrap();
    for (a, b) in von.states.iter().zip(&ideal.states) {
        assert!(max_abs(&(a - b)) <= 1e-12);
    }
}

#[test]
fn oracle_states_are_densities() {
    let s = setup(16, 4.0, [7, 8], 0.01, &plus());
    let grid = uniform_grid(4.0, 0.5).unwrap();
    let t = oracle_trajectory(&s.ens, &s.clock, &s.p, &grid).unwrap();
    for (rho, dg) in t.states.iter().zip(&t.diagnostics) {
        assert!(dg.trace_defect <= 1e-12 && dg.herm_defect <= 1e-12);
        assert!((dg.purity - 1.0).abs() <= 1e-12);
        assert!(dg.oracle_norm.unwrap() > 0.1);
        assert!(relclock::linalg::eigh(rho).unwrap().values.iter().all(|&x| x > -1e-12));
    }
}

#[test]
fn oracle_tracks_unitary_when_clock_is_good() {
    // at g = 0 and d = 32 the clock errors are ~1e-11, so conditioning reproduces
    // the unitary system evolution started from the oracle's own initial state
    let s = setup(32, 32f64.sqrt(), [15, 16], 0.0, &unit2(0.6, 0.8, 0.4));
    let grid = uniform_grid(4.0, 0.5).unwrap();
    let orc = oracle_trajectory(&s.ens, &s.clock, &s.p, &grid).unwrap();
    let von = integrate_commutator(&s.sys, &s.clock, 0.0, &orc.states[0], &grid, &IntegratorConfig::default()).unwrap();
    for (a, b) in orc.states.iter().zip(&von.states) {
        assert!(distance(a, b).unwrap().trace_distance <= 1e-8);
    }
}

#[test]
fn oracle_norm_floor() {
    let s = setup(64, 8.0, [0, 1], 0.0, &plus());
    let err = oracle_trajectory(&s.ens, &s.clock, &s.p, &[0.0, 1.0]).unwrap_err();
    assert!(matches!(err, Error::NormFloor { .. }), "{err:?}");
}

#[test]
fn master_reduces_to_ourvon_without_potential() {
    let s = setup(8, 2.0, [2, 3], 0.01, &plus());
    // with V = 0 only the RK4 error of the master stepper remains
    let cfg = IntegratorConfig { dt: 0.005, force_zero_potential: true, ..IntegratorConfig::default() };
    let grid = uniform_grid(1.0, 0.005).unwrap();
    let m = integrate_master(&s.ens, &s.sys, &s.clock, &s.p, s.g, &grid, &cfg).unwrap();
    let rho0 = initial_density(&s.ens, &s.clock, &s.p, 0.0).unwrap().0;
    let von = integrate_commutator(&s.sys, &s.clock, s.g, &rho0, &grid, &IntegratorConfig::default()).unwrap();
    for (a, b) in m.states.iter().zip(&von.states) {
        assert!(max_abs(&(a - b)) <= 1e-10);
    }
}

#[test]
fn master_conserves_trace() {
    for second_term in [SecondTerm::TruncatedBch, SecondTerm::ExactConjugation] {
        let s = setup(8, 8f64.sqrt(), [3, 4], 0.01, &unit2(0.4, 0.9, 0.7));
        let cfg = IntegratorConfig { dt: 0.02, second_term, ..IntegratorConfig::default() };
        let grid = uniform_grid(2.0, 0.02).unwrap();
        let m = integrate_master(&s.ens, &s.sys, &s.clock, &s.p, s.g, &grid, &cfg).unwrap();
        assert!(m.summary().max_trace_defect <= 1e-12, "{second_term:?}");
    }
}

#[test]
fn rhs_at_start_has_no_memory_term() {
    let s = setup(8, 2.0, [2, 3], 0.01, &plus());
    let hd = dilated_hamiltonian(&s.sys, &s.clock, s.g);
    let psi = &s.ens.members[0].1;
    let vs: Vec<CMat> = [0.0, 0.05, 0.1]
        .iter()
        .map(|&t| build_potential(psi, &s.sys, &s.clock, &s.p, t, s.g).unwrap().matrix)
        .collect();
    let rho = projector(&unit2(0.2, 0.9, 0.3));
    let rho0 = projector(&plus());
    let i = C64::new(0.0, 1.0);
    let expect = commutator(&hd.matrix, &rho) * (-i) + commutator(&vs[0], &rho0) * (-i);
    for st in [SecondTerm::TruncatedBch, SecondTerm::ExactConjugation] {
        let eq = MemoryKernelEquation::new(&hd, &vs, 0.05, st);
        let got = eq.rhs(0.0, &rho, &rho0);
        assert!(max_abs(&(got - &expect)) <= 1e-13);
        assert!(trace(&eq.rhs(0.07, &rho, &rho0)).norm() <= 1e-13);
    }
}

#[test]
fn master_grid_checks() {
    let s = setup(8, 2.0, [2, 3], 0.01, &plus());
    let cfg = IntegratorConfig { dt: 0.02, ..IntegratorConfig::default() };
    let bad = vec![0.0, 0.02, 0.05];
    assert!(integrate_master(&s.ens, &s.sys, &s.clock, &s.p, s.g, &bad, &cfg).is_err());
    let coarse = uniform_grid(1.0, 0.05).unwrap();
    assert!(integrate_master(&s.ens, &s.sys, &s.clock, &s.p, s.g, &coarse, &cfg).is_err());
    assert!(uniform_grid(1.0, 0.0).is_err());
}

#[test]
fn trajectory_csv_shape() {
    let s = setup(8, 2.0, [2, 3], 0.0, &plus());
    let grid = uniform_grid(1.0, 0.25).unwrap();
    let t = oracle_trajectory(&s.ens, &s.clock, &s.p, &grid).unwrap();
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), grid.len() + 1);
    assert_eq!(lines[0], Trajectory::csv_header(2));
    let cols = lines[0].split(',').count();
    assert!(lines[1..].iter().all(|l| l.split(',').count() == cols));
}

#[test]
fn invalid_densities_are_rejected() {
    let clock = ClockModel::new(8, 1.0).unwrap();
    let sys = SystemModel::diagonal(&[0.0, 1.0]).unwrap();
    let grid = [0.0, 1.0];
    let cfg = IntegratorConfig::default();
    let twice = projector(&plus()) * C64::new(2.0, 0.0);
    assert!(integrate_commutator(&sys, &clock, 0.0, &twice, &grid, &cfg).is_err());
    let big = CMat::identity(3, 3) / C64::new(3.0, 0.0);
    assert!(integrate_commutator(&sys, &clock, 0.0, &big, &grid, &cfg).is_err());
    let bad_cfg = IntegratorConfig { dt: -1.0, ..cfg };
    assert!(integrate_commutator(&sys, &clock, 0.0, &projector(&plus()), &grid, &bad_cfg).is_err());
}

#[test]
fn dilated_hamiltonian_examples() {
    let d = 8;
    // omega = 2 pi / d makes the tick 1
    let clock = ClockModel::new(d, std::f64::consts::TAU / d as f64).unwrap();
    let sys = SystemModel::diagonal(&[0.0, 1.0]).unwrap();
    let hd = dilated_hamiltonian(&sys, &clock, 0.01).matrix;
    assert!(
        (hd - CMat::from_diagonal(&CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.01, 0.0)]))).camax() <= 1e-12
    );
    let clock = ClockModel::new(6, 0.7).unwrap();
    let sys = SystemModel::new(CMat::from_row_slice(
        2,
        2,
        &[C64::new(0.3, 0.0), C64::new(0.2, -0.1), C64::new(0.2, 0.1), C64::new(-0.5, 0.0)],
    ))
    .unwrap();
    let h0 = dilated_hamiltonian(&sys, &clock, 0.0).matrix;
    assert!((h0 - sys.hamiltonian() * C64::new(clock.tick(), 0.0)).camax() <= 1e-15);
    let hg = dilated_hamiltonian(&sys, &clock, 0.05).matrix;
    assert!(max_abs(&commutator(&hg, sys.hamiltonian())) <= 1e-12);
}

#[test]
fn oracle_with_trivial_system_is_frozen() {
    let clock = ClockModel::new(16, 1.0).unwrap();
    let p = QuasiIdealParams::new(0.0, 4.0, 7.5).unwrap();
    let sys = SystemModel::diagonal(&[0.0, 0.0]).unwrap();
    let psi0 = unit2(0.6, 0.8, 1.1);
    let ens = Ensemble::pure(history_state_coupled(&sys, &clock, 0.02, &psi0).unwrap());
    let t = oracle_trajectory(&ens, &clock, &p, &uniform_grid(6.0, 0.5).unwrap()).unwrap();
    for rho in &t.states {
        assert!(max_abs(&(rho - projector(&psi0))) <= 1e-12);
    }
}

#[test]
fn oracle_approaches_unitary_with_dimension() {
    let mut prev = f64::INFINITY;
    for d in [16usize, 32, 64] {
        let s = setup(d, (d as f64).sqrt(), [d / 2 - 1, d / 2], 0.0, &plus());
        let grid = uniform_grid(d as f64 / 8.0, 0.25).unwrap();
        let orc = oracle_trajectory(&s.ens, &s.clock, &s.p, &grid).unwrap();
        let von = integrate_commutator(&s.sys, &s.clock, 0.0, &projector(&plus()), &grid, &IntegratorConfig::default())
            .unwrap();
        let worst =
            orc.states.iter().zip(&von.states).map(|(a, b)| distance(a, b).unwrap().trace_distance).fold(0.0, f64::max);
        assert!(worst < prev, "d = {d}: {worst} after {prev}");
        prev = worst;
    }
    assert!(prev <= 5e-2);
}

#[test]
fn equal_members_match_one_member() {
    let s = setup(16, 4.0, [7, 8], 0.01, &plus());
    let psi = s.ens.members[0].1.clone();
    let two = Ensemble::new(vec![(0.5, psi.clone()), (0.5, psi)]).unwrap();
    let grid = uniform_grid(3.0, 0.25).unwrap();
    let a = oracle_trajectory(&s.ens, &s.clock, &s.p, &grid).unwrap();
    let b = oracle_trajectory(&two, &s.clock, &s.p, &grid).unwrap();
    for (x, y) in a.states.iter().zip(&b.states) {
        assert!(max_abs(&(x - y)) <= 1e-14);
    }
}

#[test]
fn schrodinger_phases_and_norm() {
    let clock = ClockModel::new(10, 1.3).unwrap();
    let (e0, e1) = (0.4, -1.1);
    let sys = SystemModel::diagonal(&[e0, e1]).unwrap();
    let psi0 = unit2(0.6, 0.8, 0.3);
    let grid = uniform_grid(10.0, 0.01).unwrap();
    let run = |g: f64, stepper: Stepper| {
        let cfg = IntegratorConfig { dt: 0.01, stepper, ..IntegratorConfig::default() };
        integrate_pure(&sys, &clock, g, &psi0, &grid, &cfg).unwrap()
    };
    let tk = clock.tick();
    let closed = run(0.0, Stepper::ClosedForm);
    for (tau, rho) in grid.iter().zip(&closed.states) {
        // rho_01 = psi_0 psi_1^* carries e^{-i tk (E0 - E1) tau}
        let want = psi0[0] * psi0[1].conj() * C64::from_polar(1.0, -tk * (e0 - e1) * tau);
        assert!((rho[(0, 1)] - want).norm() <= 1e-12);
        assert!((trace(rho).re - 1.0).abs() <= 1e-10);
    }
    let rk = run(0.0, Stepper::Rk4);
    assert!(rk.states.iter().all(|r| (trace(r).re - 1.0).abs() <= 1e-8));
    let g = 0.01;
    let shifted = run(g, Stepper::ClosedForm);
    let phase = |r: &CMat| r[(1, 0)].arg();
    let shift = phase(shifted.last()) - phase(closed.last());
    let want = -tk * g * (e1 * e1 - e0 * e0) * 10.0;
    let wrap = (shift - want + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    assert!(wrap.abs() <= 1e-10, "{shift} vs {want}");
}

#[test]
fn commutator_equation_examples() {
    let clock = ClockModel::new(8, 0.9).unwrap();
    let (e0, e1) = (0.5, -0.8);
    let sys = SystemModel::diagonal(&[e0, e1]).unwrap();
    let rho0 = projector(&unit2(0.3, 0.9, 2.0));
    let g = 0.02;
    let grid = uniform_grid(5.0, 0.25).unwrap();
    let t = integrate_commutator(&sys, &clock, g, &rho0, &grid, &IntegratorConfig::default()).unwrap();
    for r in &t.states {
        assert!((r[(0, 0)] - rho0[(0, 0)]).norm() <= 1e-12 && (r[(1, 1)] - rho0[(1, 1)]).norm() <= 1e-12);
    }
    let tk = clock.tick();
    let want = rho0[(0, 1)] * C64::from_polar(1.0, -tk * ((e0 - e1) + g * (e0 * e0 - e1 * e1)) * 5.0);
    assert!((t.last()[(0, 1)] - want).norm() <= 1e-12);

    // a mixed four-level start keeps its purity
    let sys4 = SystemModel::diagonal(&[0.1, -0.7, 1.3, 0.4]).unwrap();
    let vs =
        [unit4(&[0.2, 0.5, -0.3, 0.8], 0.4), unit4(&[0.9, -0.1, 0.4, 0.2], 1.7), unit4(&[0.3, 0.3, 0.6, -0.7], 2.9)];
    let rho = projector(&vs[0]) * C64::new(0.5, 0.0)
        + projector(&vs[1]) * C64::new(0.3, 0.0)
        + projector(&vs[2]) * C64::new(0.2, 0.0);
    let t = integrate_commutator(&sys4, &clock, 0.03, &rho, &grid, &IntegratorConfig::default()).unwrap();
    let p0 = t.diagnostics[0].purity;
    assert!(p0 < 0.99);
    assert!(t.diagnostics.iter().all(|dg| (dg.purity - p0).abs() <= 1e-10));
}

fn unit4(re: &[f64], phase: f64) -> CVec {
    let v = CVec::from_iterator(4, re.iter().enumerate().map(|(i, &a)| C64::from_polar(a, phase * i as f64)));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

#[test]
fn potential_examples() {
    let s = setup(16, 4.0, [7, 8], 0.01, &plus());
    let psi = &s.ens.members[0].1;
    let zero = potential_from_error(psi, &s.sys, &s.clock, &s.p, 0.7, s.g, &CVec::zeros(16)).unwrap();
    assert_eq!(max_abs(&zero.matrix), 0.0);

    let mut prev = f64::INFINITY;
    for d in [8usize, 16, 32, 64] {
        let s = setup(d, (d as f64).sqrt(), [d / 2 - 1, d / 2], 0.01, &plus());
        let v = build_potential(&s.ens.members[0].1, &s.sys, &s.clock, &s.p, 0.0, s.g).unwrap().matrix.norm();
        assert!(v < prev, "d = {d}");
        prev = v;
    }

    // with H_S = theta * 1 the prefactor is the scalar 1 + g theta (1 + d/T)
    let theta = 0.8;
    let flat = SystemModel::diagonal(&[theta, theta]).unwrap();
    let eps = relclock::clock::lemma1_error(&s.clock, &s.p, 0.7).unwrap().components.unwrap();
    let size = |g: f64| potential_from_error(psi, &flat, &s.clock, &s.p, 0.7, g, &eps).unwrap().matrix.norm();
    let h = 1e-4;
    let slope = (size(h) / size(0.0) - 1.0) / h;
    let want = theta * (1.0 + 16.0 / s.clock.period());
    assert!((slope - want).abs() <= 1e-6 * want, "{slope} vs {want}");
}

#[test]
fn truncated_second_term_differs_at_second_order() {
    let s = setup(8, 2.0, [2, 3], 0.01, &plus());
    let hd = dilated_hamiltonian(&s.sys, &s.clock, s.g);
    let psi = &s.ens.members[0].1;
    let dt = 0.01;
    let vs: Vec<CMat> = uniform_grid(0.2, dt)
        .unwrap()
        .iter()
        .map(|&t| build_potential(psi, &s.sys, &s.clock, &s.p, t, s.g).unwrap().matrix)
        .collect();
    let bch = MemoryKernelEquation::new(&hd, &vs, dt, SecondTerm::TruncatedBch);
    let exact = MemoryKernelEquation::new(&hd, &vs, dt, SecondTerm::ExactConjugation);
    let rho0 = initial_density(&s.ens, &s.clock, &s.p, 0.0).unwrap().0;
    let rho = projector(&unit2(0.5, 0.7, 0.2));
    let gap = |t: f64| max_abs(&(bch.rhs(t, &rho, &rho0) - exact.rhs(t, &rho, &rho0)));
    let ratio = gap(0.2) / gap(0.1);
    assert!((ratio / 4.0 - 1.0).abs() <= 0.3, "{ratio}");
}

#[test]
fn ideal_equation_examples() {
    let sys = SystemModel::diagonal(&[0.0, 1.0]).unwrap();
    let rho0 = projector(&plus());
    let grid = uniform_grid(3.0, 0.1).unwrap();
    let free = integrate_ideal(&sys, 0.0, &rho0, &grid, &IntegratorConfig::default()).unwrap();
    assert!(free.diagnostics.iter().all(|dg| (dg.purity - 1.0).abs() <= 1e-12));
    let t = integrate_ideal(&sys, 0.1, &rho0, &grid, &IntegratorConfig::default()).unwrap();
    // rho_10 rotates as e^{-i (1 + g) tau}
    let want = rho0[(1, 0)] * C64::from_polar(1.0, -1.1 * 3.0);
    assert!((t.last()[(1, 0)] - want).norm() <= 1e-12);
}
