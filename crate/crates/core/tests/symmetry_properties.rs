use goldfish_core::expr::Point;
use goldfish_core::symmetry::{
    commutator, generator_catalog, goldfish_system, prolong, prolong_raw, two_body_vars, verify_point_symmetry,
    VectorField,
};
use goldfish_core::{parse, Expr, Status, VariableSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rational(k: i64) -> Expr {
    Expr::rational(k, 3).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bracket_is_antisymmetric(a in 0usize..15, b in 0usize..15) {
        let vars = two_body_vars();
        let cat = generator_catalog();
        let vw = commutator(&cat[a], &cat[b], &vars);
        let wv = commutator(&cat[b], &cat[a], &vars);
        let sum = VectorField::linear_combination("sum", &[(Expr::one(), &vw), (Expr::one(), &wv)]);
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn jacobi_identity(a in 0usize..15, b in 0usize..15, c in 0usize..15) {
        let vars = two_body_vars();
        let cat = generator_catalog();
        let (u, v, w) = (&cat[a], &cat[b], &cat[c]);
        let t1 = commutator(u, &commutator(v, w, &vars), &vars);
        let t2 = commutator(v, &commutator(w, u, &vars), &vars);
        let t3 = commutator(w, &commutator(u, v, &vars), &vars);
        let one = Expr::one();
        let sum = VectorField::linear_combination("jacobi", &[(one.clone(), &t1), (one.clone(), &t2), (one, &t3)]);
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn prolongation_is_linear(a in 0usize..15, b in 0usize..15, ka in -6i64..6, kb in -6i64..6) {
        let sys = goldfish_system(2).unwrap();
        let cat = generator_catalog();
        let (ca, cb) = (rational(ka), rational(kb));
        let combined = VectorField::linear_combination("c", &[(ca.clone(), &cat[a]), (cb.clone(), &cat[b])]);
        let pc = prolong(&combined, &sys).unwrap();
        let pa = prolong(&cat[a], &sys).unwrap();
        let pb = prolong(&cat[b], &sys).unwrap();
        for k in 0..2 {
            let e1 = &(&ca * &pa.eta1[k]) + &(&cb * &pb.eta1[k]);
            let e2 = &(&ca * &pa.eta2[k]) + &(&cb * &pb.eta2[k]);
            prop_assert!((&pc.eta1[k] - &e1).is_zero());
            prop_assert!((&pc.eta2[k] - &e2).is_zero());
        }
    }
}

#[test]
fn randomized_perturbations_fail() {
    let sys = goldfish_system(2).unwrap();
    let vars = sys.vars().clone();
    let bump = parse("1 + x1", &vars).unwrap();
    let cat = generator_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tried = 0;
    while tried < 5 {
        let mut f = cat[rng.random_range(0..15)].clone();
        let k = rng.random_range(0..2);
        if f.etas[k].is_exactly_zero() {
            continue;
        }
        f.etas[k] = &f.etas[k] * &bump;
        tried += 1;
        let r = verify_point_symmetry(&f, &sys).unwrap();
        assert_eq!(r.status, Status::Fail, "{} with eta{} perturbed", f.name, k + 1);
    }
}

#[test]
fn time_translation_of_three_bodies() {
    let sys = goldfish_system(3).unwrap();
    let r = verify_point_symmetry(&VectorField::time_translation(3), &sys).unwrap();
    assert!(r.passed());
    assert!(r.residuals.iter().all(Expr::is_exactly_zero));
}

#[test]
fn bogus_field_residual_matches_hand_computation() {
    let sys = goldfish_system(2).unwrap();
    let vars = sys.vars();
    let f = VectorField::new("t d/dx1", Expr::zero(), vec![Expr::var(vars.time()), Expr::zero()]);
    let r = verify_point_symmetry(&f, &sys).unwrap();
    assert_eq!(r.status, Status::Fail);
    // R1 = -t ∂x1 f1 - ∂v1 f1 with f1 = 2 v1 v2/(x1 - x2)
    let (t, x1, x2, v1, v2) = (0.3, 1.7, -0.4, 0.9, -1.3);
    let d = x1 - x2;
    let expected = 2.0 * t * v1 * v2 / (d * d) - 2.0 * v2 / d;
    let mut point = Point::new(vars);
    point
        .set(vars.time(), t)
        .set(vars.position(0), x1)
        .set(vars.position(1), x2)
        .set(vars.velocity(0), v1)
        .set(vars.velocity(1), v2);
    let got = r.residuals[0].eval_numeric(&point).unwrap();
    assert!((got.re - expected).abs() < 1e-12 && got.im == 0.0);
    let got2 = r.residuals[1].eval_numeric(&point).unwrap();
    assert!((got2.re + expected).abs() < 1e-12);
}

/// Fourth-order central differences of `g` at `s`: (g', g'').
fn derivatives(g: &dyn Fn(f64) -> f64, s: f64) -> (f64, f64) {
    let h = 1e-3;
    let v = [g(s - 2.0 * h), g(s - h), g(s), g(s + h), g(s + 2.0 * h)];
    (
        (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h),
        (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h),
    )
}

/// Along a curve `x(s)`, moving points by `(ξ, η)` changes the slope by
/// `A − x'B` and the curvature by `A' − x'B' − 2x''B` to first order, where
/// `A = d/ds η(s, x(s))` and `B = d/ds ξ(s, x(s))`. These are compared with
/// the symbolic prolongation coefficients.
#[test]
fn prolongation_matches_curve_deformation() {
    let sys = goldfish_system(2).unwrap();
    let vars: VariableSet = sys.vars().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for field in generator_catalog() {
        let pr = prolong_raw(&field, &sys).unwrap();
        for _ in 0..3 {
            let c: Vec<[f64; 3]> = (0..2)
                .map(|k| [k as f64 * 2.0 - 1.0 + rng.random_range(-0.3..0.3), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let curve = |k: usize, s: f64| c[k][0] + c[k][1] * s + c[k][2] * s * s;
            let s0 = rng.random_range(0.1..0.6);
            let along = |e: &Expr, s: f64| -> f64 {
                let mut p = Point::new(&vars);
                p.set(vars.time(), s).set(vars.position(0), curve(0, s)).set(vars.position(1), curve(1, s));
                e.eval_numeric(&p).unwrap().re
            };
            let (b, db) = derivatives(&|s| along(&field.xi, s), s0);

            let mut p = Point::new(&pr.vars);
            p.set(pr.vars.time(), s0);
            for k in 0..2 {
                p.set(pr.vars.position(k), curve(k, s0))
                    .set(pr.vars.velocity(k), c[k][1] + 2.0 * c[k][2] * s0)
                    .set(pr.accelerations[k], 2.0 * c[k][2]);
            }
            for k in 0..2 {
                let (a, da) = derivatives(&|s| along(&field.etas[k], s), s0);
                let (x1, x2) = (c[k][1] + 2.0 * c[k][2] * s0, 2.0 * c[k][2]);
                let eta1 = a - x1 * b;
                let eta2 = da - x1 * db - 2.0 * x2 * b;
                let got1 = pr.eta1[k].eval_numeric(&p).unwrap().re;
                let got2 = pr.eta2[k].eval_numeric(&p).unwrap().re;
                let scale = 1.0 + got1.abs().max(got2.abs());
                assert!((got1 - eta1).abs() < 1e-6 * scale, "{} eta1[{k}]: {got1} vs {eta1}", field.name);
                assert!((got2 - eta2).abs() < 1e-6 * scale, "{} eta2[{k}]: {got2} vs {eta2}", field.name);
            }
        }
    }
}
