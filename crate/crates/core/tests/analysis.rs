use proptest::prelude::*;
use relclock::analysis::*;
use relclock::linalg::projector;
use relclock::{CMat, CVec, C64};

fn density(n: usize, parts: &[(f64, f64)]) -> CMat {
    let a = CMat::from_fn(n, n, |i, j| {
        let (x, y) = parts[i * n + j];
        C64::new(x, y)
    });
    let m = &a * a.adjoint();
    let t = m.trace();
    m / t
}

fn parts() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)
        .prop_filter("non-degenerate", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 0.1)
}

proptest! {
    #[test]
    fn distance_is_a_metric(a in parts(), b in parts(), c in parts(), n in 2usize..4) {
        let (x, y, z) = (density(n, &a), density(n, &b), density(n, &c));
        let dxy = distance(&x, &y).unwrap();
        let dyx = distance(&y, &x).unwrap();
        prop_assert!((dxy.trace_distance - dyx.trace_distance).abs() <= 1e-12);
        prop_assert!((dxy.fidelity - dyx.fidelity).abs() <= 1e-8);
        prop_assert!((0.0..=1.0).contains(&dxy.fidelity));
        prop_assert!(dxy.trace_distance >= 0.0 && dxy.trace_distance <= 1.0 + 1e-12);
        let dxz = distance(&x, &z).unwrap().trace_distance;
        let dzy = distance(&z, &y).unwrap().trace_distance;
        prop_assert!(dxy.trace_distance <= dxz + dzy + 1e-12);
        // Fuchs-van de Graaf
        let f = dxy.fidelity.sqrt();
        prop_assert!(1.0 - f <= dxy.trace_distance + 1e-7);
        prop_assert!(dxy.trace_distance <= (1.0 - dxy.fidelity).max(0.0).sqrt() + 1e-7);
        let self_d = distance(&x, &x).unwrap();
        prop_assert!(self_d.trace_distance <= 1e-12 && (self_d.fidelity - 1.0).abs() <= 1e-7);
    }

    #[test]
    fn decay_fit_invariances(k in -3.0f64..-0.01, c in 1e-6f64..1e3, shift in -5.0f64..5.0) {
        let xs: Vec<f64> = (0..6).map(|i| 4.0 + 3.0 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| c * (k * x).exp()).collect();
        let f = decay_fit(&xs, &ys).unwrap();
        prop_assert!((f.slope - k).abs() <= 1e-10 && (f.r_squared - 1.0).abs() <= 1e-12);
        let scaled: Vec<f64> = ys.iter().map(|y| y * 7.5).collect();
        prop_assert!((decay_fit(&xs, &scaled).unwrap().slope - f.slope).abs() <= 1e-10);
        let moved: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        prop_assert!((decay_fit(&moved, &ys).unwrap().slope - f.slope).abs() <= 1e-10);
    }

    #[test]
    fn phase_frequency_recovers_rotation(w in -4.0f64..4.0, phi in -3.0f64..3.0) {
        let grid: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
        let states: Vec<CMat> = grid
            .iter()
            .map(|t| {
                let v = CVec::from_vec(vec![C64::new(0.6, 0.0), C64::from_polar(0.8, -(w * t + phi))]);
                projector(&v)
            })
            .collect();
        prop_assert!((phase_frequency(&grid, &states, 0, 1).unwrap() - w).abs() <= 1e-10);
    }
}

#[test]
fn metrics_of_known_states() {
    let pure = projector(&CVec::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]));
    let m = state_metrics(&pure).unwrap();
    assert!((m.purity - 1.0).abs() < 1e-15);
    assert!((m.l1_coherence - 2.0 * 0.48).abs() < 1e-15);
    let mixed = CMat::identity(4, 4) / C64::new(4.0, 0.0);
    let m = state_metrics(&mixed).unwrap();
    assert!((m.purity - 0.25).abs() < 1e-15 && m.l1_coherence == 0.0);
    let mut skew = mixed.clone();
    skew[(0, 1)] = C64::new(0.1, 0.0);
    assert!(state_metrics(&skew).is_err());
    // rotating the maximally coherent qubit into its own eigenbasis removes coherence
    let plus = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]) / C64::new(2f64.sqrt(), 0.0);
    let minus = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]) / C64::new(2f64.sqrt(), 0.0);
    let basis = CMat::from_columns(&[plus.clone(), minus]);
    let m = state_metrics_in_basis(&projector(&plus), &basis).unwrap();
    assert!(m.l1_coherence < 1e-15);
}

#[test]
fn orthogonal_pure_states() {
    let a = projector(&CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]));
    let b = projector(&CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]));
    let d = distance(&a, &b).unwrap();
    assert!((d.trace_distance - 1.0).abs() < 1e-14 && d.fidelity < 1e-14);
    assert!(distance(&a, &CMat::identity(3, 3)).is_err());
}

#[test]
fn fit_input_checks() {
    assert!(line_fit(&[1.0], &[1.0]).is_err());
    assert!(line_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    assert!(decay_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    assert!(decay_fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
    let flat = line_fit(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap();
    assert_eq!((flat.slope, flat.r_squared), (0.0, 1.0));
    assert_eq!(convergence_ratio(4.0, 1.0).unwrap(), 4.0);
    assert!(convergence_ratio(0.0, 1.0).is_err());
}

#[test]
fn listed_examples() {
    let half = C64::new(0.5, 0.0);
    let flip = CMat::from_row_slice(2, 2, &[half, half, half, half]);
    assert!((state_metrics(&flip).unwrap().l1_coherence - 1.0).abs() < 1e-15);
    let diag = |p: f64| CMat::from_diagonal(&CVec::from_vec(vec![C64::new(p, 0.0), C64::new(1.0 - p, 0.0)]));
    assert!((distance(&diag(0.7), &diag(0.4)).unwrap().trace_distance - 0.3).abs() < 1e-14);
    let same = distance(&flip, &flip).unwrap();
    assert!(same.trace_distance < 1e-14 && (same.fidelity - 1.0).abs() < 1e-12);

    let xs: Vec<f64> = (8..=64).step_by(8).map(f64::from).collect();
    let ys: Vec<f64> =
        xs.iter().map(|x| (1.0 + 0.5 * x + 0.02 * x * x) * (-std::f64::consts::PI * x / 4.0).exp()).collect();
    let fit = decay_fit(&xs, &ys).unwrap();
    assert!((fit.slope + std::f64::consts::PI / 4.0).abs() <= 0.3, "{}", fit.slope);
    let flat = decay_fit(&xs, &vec![0.3; xs.len()]).unwrap();
    assert!(flat.slope.abs() < 1e-15);
    assert_eq!(convergence_ratio(0.5, 0.5).unwrap(), 1.0);
}
