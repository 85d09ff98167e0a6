use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use goldfish_core::dynamics::{integrate_rk, solve_algebraic, InitialData};
use goldfish_core::quantize::{quantize, quantize_symbolic, verify_pde_symmetry, omega_catalog};
use goldfish_core::symmetry::{generator_catalog, goldfish_system, verify_point_symmetry};
use goldfish_core::{parse, Expr, VariableSet};

fn kernel(c: &mut Criterion) {
    let vars = VariableSet::new(3).unwrap();
    let a = parse("(x1 - x2)^3*(x1 + x3)^2*(x2*x3 + 1)", &vars).unwrap();
    let b = parse("(x1 - x2)^2*(x1 + x3)^3*(x1 - 2*x3)", &vars).unwrap();
    c.bench_function("rational sum with common factors", |bench| {
        bench.iter(|| black_box(&Expr::one().checked_div(&a).unwrap() + &Expr::one().checked_div(&b).unwrap()))
    });
}

fn symmetries(c: &mut Criterion) {
    let sys = goldfish_system(2).unwrap();
    let catalog = generator_catalog();
    c.bench_function("verify 15 generators", |bench| {
        bench.iter(|| {
            for f in &catalog {
                black_box(verify_point_symmetry(f, &sys).unwrap());
            }
        })
    });
    let pde = quantize_symbolic(2).unwrap();
    let omegas = omega_catalog();
    c.bench_function("verify 8 pde symmetries", |bench| {
        bench.iter(|| {
            for s in &omegas {
                black_box(verify_pde_symmetry(s, &pde).unwrap());
            }
        })
    });
}

fn quantization(c: &mut Criterion) {
    c.bench_function("quantize N = 3", |bench| bench.iter(|| black_box(quantize(3, &Expr::one()).unwrap())));
}

fn dynamics(c: &mut Criterion) {
    let init = InitialData::new(vec![-1.0, 0.0, 1.5], vec![0.2, -0.1, 0.3]).unwrap();
    c.bench_function("algebraic solve N = 3", |bench| bench.iter(|| black_box(solve_algebraic(&init, 1.0).unwrap())));
    c.bench_function("rk integrate N = 3", |bench| bench.iter(|| black_box(integrate_rk(&init, 1.0, 1e-9).unwrap())));
}

criterion_group!(benches, kernel, symmetries, quantization, dynamics);
criterion_main!(benches);
