use goldfish_core::dynamics::{
    algebraic_polynomial, integrate_rk, integrate_with_stops, monitor_invariants, polynomial_roots, random_separated,
    solve_algebraic, track_algebraic, DynamicsError, InitialData, Trajectory,
};
use goldfish_core::symmetry::catalog_field;
use goldfish_core::variational::{first_integral, goldfish_lagrangian, noether_condition};
use goldfish_core::parse;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
}

#[test]
fn worked_examples() {
    let one = InitialData::new(vec![0.0], vec![1.0]).unwrap();
    assert!(close(&solve_algebraic(&one, 2.0).unwrap(), &[2.0], 1e-14));
    let (_, s) = integrate_rk(&one, 2.0, 1e-9).unwrap().last().map(|(t, s)| (t, s.clone())).unwrap();
    assert!(close(&s.positions, &[2.0], 1e-13));

    let resting = InitialData::new(vec![0.0, 5.0], vec![1.0, 0.0]).unwrap();
    assert!(close(&solve_algebraic(&resting, 3.0).unwrap(), &[3.0, 5.0], 1e-10));

    let pair = InitialData::new(vec![0.0, 1.0], vec![1.0, -1.0]).unwrap();
    let traj = integrate_with_stops(&pair, &[0.1], 1e-9).unwrap();
    assert!(close(&solve_algebraic(&pair, 0.1).unwrap(), &traj.at(0.1).unwrap().positions, 1e-6));
}

#[test]
fn zero_time_returns_initial_positions() {
    let d = InitialData::new(vec![0.0, 1.0, 3.0], vec![1.0, 0.5, -0.5]).unwrap();
    assert_eq!(solve_algebraic(&d, 0.0).unwrap(), d.positions);
}

#[test]
fn three_bodies_agree_with_integrator() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let times = [0.1, 0.5, 1.0];
    for _ in 0..5 {
        let d = random_separated(3, 1.0, 0.1, &mut rng);
        let exact = track_algebraic(&d, &times).unwrap();
        let traj = integrate_with_stops(&d, &times, 1e-9).unwrap();
        for (t, x) in times.iter().zip(&exact) {
            assert!(close(x, &traj.at(*t).unwrap().positions, 1e-6), "t = {t}");
        }
    }
}

#[test]
fn roots_are_real_and_simple_before_collision() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for n in 2..=5 {
        let d = random_separated(n, 1.0, 0.1, &mut rng);
        for t in [0.2, 0.6, 1.0] {
            let roots = polynomial_roots(&algebraic_polynomial(&d, t));
            assert_eq!(roots.len(), n);
            assert!(roots.iter().all(|z| z.im.abs() < 1e-9));
            let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
            re.sort_by(f64::total_cmp);
            assert!(re.windows(2).all(|w| w[1] - w[0] > 1e-6));
        }
    }
}

#[test]
fn time_reversal() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for n in [2, 3] {
        for _ in 0..4 {
            let d = random_separated(n, 1.0, 0.1, &mut rng);
            let t = 0.8;
            let traj = integrate_with_stops(&d, &[t], 1e-10).unwrap();
            let s = traj.at(t).unwrap();
            let back = InitialData::new(s.positions.clone(), s.velocities.clone()).unwrap();
            assert!(close(&solve_algebraic(&back, -t).unwrap(), &d.positions, 1e-6));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn permutation_equivariance(seed in 0u64..1000, perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_separated(3, 1.0, 0.1, &mut rng);
        let x = solve_algebraic(&d, 0.7).unwrap();
        let y = solve_algebraic(&d.permuted(&perm), 0.7).unwrap();
        let expected: Vec<f64> = perm.iter().map(|&k| x[k]).collect();
        prop_assert!(close(&y, &expected, 1e-9));
    }
}

#[test]
fn trajectory_invariants_and_export() {
    let d = InitialData::new(vec![-1.0, 0.5, 2.0], vec![0.3, -0.2, 0.1]).unwrap();
    let traj = integrate_rk(&d, 1.0, 1e-8).unwrap();
    assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    assert!(traj.states.iter().all(|s| s.positions.len() == 3 && s.velocities.len() == 3));
    let json = serde_json::to_string(&traj).unwrap();
    let back: Trajectory = serde_json::from_str(&json).unwrap();
    assert_eq!(back, traj);
    let csv = traj.to_csv();
    assert_eq!(csv.lines().count(), traj.times.len() + 1);
    assert_eq!(csv.lines().next().unwrap(), "t,x1,x2,x3,v1,v2,v3");

    let parsed: InitialData = serde_json::from_str(r#"{"positions": [0, 1], "velocities": [1, 2]}"#).unwrap();
    assert_eq!(parsed.n(), 2);
}

#[test]
fn head_on_collision_is_detected() {
    let d = InitialData::new(vec![-1.0, 1.0], vec![1.0, -1.0]).unwrap();
    let err = integrate_rk(&d, 1.0, 1e-9).unwrap_err();
    let traj = match err {
        DynamicsError::Collision { trajectory, .. } | DynamicsError::StepUnderflow { trajectory, .. } => trajectory,
        other => panic!("{other}"),
    };
    let event = &traj.events[0];
    assert!(event.time < 1.0 && event.pair == (0, 1));
    let (_, last) = traj.last().unwrap();
    assert!((last.positions[0] + last.positions[1]).abs() < 1e-6);
    // the algebraic oracle sees the roots coalesce at t = 1/2
    assert!(solve_algebraic(&d, 0.49).is_ok());
    assert!(solve_algebraic(&d, 0.51).is_err());
}

#[test]
fn invariant_monitoring() {
    let lag = goldfish_lagrangian();
    let vars = lag.vars().clone();
    let g7 = catalog_field(7).unwrap();
    let gauge = noether_condition(&g7, &lag).unwrap().gauge.unwrap();
    let energy = first_integral(&g7, &lag, &gauge).unwrap();
    let d = InitialData::new(vec![0.0, 1.5], vec![0.4, -0.3]).unwrap();
    let traj = integrate_rk(&d, 1.0, 1e-9).unwrap();
    let integrals = vec![
        ("energy".to_string(), energy),
        ("x1".to_string(), parse("x1", &vars).unwrap()),
        ("1/t".to_string(), parse("1/t", &vars).unwrap()),
    ];
    let report = monitor_invariants(&traj, &integrals, &vars).unwrap();
    assert!(report.integrals[0].max_drift < 1e-6);
    assert!(report.integrals[1].max_drift > 0.1);
    assert_eq!(report.integrals[2].skipped, 1);
    assert!(report.integrals.iter().all(|d| d.max_drift >= 0.0));
}
