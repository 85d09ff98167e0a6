//! Lagrangians, Noether symmetries and first integrals.
//!
//! The Noether condition is `X⁽¹⁾L + L·D_t ξ = D_t g` for a gauge `g(t, x)`.
//! With this convention the first integral of `X` is
//! `I = ξL + Σ (η_k − ξ v_k) ∂L/∂v_k − g`, so `∂t` yields `−L` for a
//! Lagrangian quadratic in the velocities.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use thiserror::Error;

use crate::expr::{ComplexRat, Expr, ExprError, ExprMatrix, Poly, RatFunc, Var, VariableSet};
use crate::symmetry::{total_derivative, with_accelerations, OdeSystem, SymmetryError, VectorField};
use crate::Status;

#[derive(Debug, Error)]
pub enum VariationalError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("Lagrangian must be polynomial of degree at most 2 in the velocities")]
    NotQuadratic,
    #[error("`{0}` may only depend on t and positions")]
    NotPointFunction(String),
    #[error("velocity Hessian is singular (determinant {determinant})")]
    SingularHessian { determinant: String },
    #[error("gauge integrand `{integrand}` is not polynomial in `{variable}`")]
    NonPolynomialIntegrand { integrand: String, variable: String },
    #[error("no regular base point found for gauge integration")]
    NoRegularBase,
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, VariationalError>;

/// `L(t, x, v)` together with a gauge term; the effective Lagrangian is
/// `L + D_t g`.
#[derive(Clone, Debug)]
pub struct Lagrangian {
    vars: VariableSet,
    pub l: Expr,
    pub gauge: Expr,
}

impl Lagrangian {
    pub fn new(vars: VariableSet, l: Expr) -> Result<Self> {
        let allowed = phase_vars(&vars);
        if l.variables().iter().any(|v| !allowed.contains(v)) {
            return Err(VariationalError::NotQuadratic);
        }
        if velocity_degree(&l, &vars).is_none() {
            return Err(VariationalError::NotQuadratic);
        }
        Ok(Lagrangian {
            vars,
            l,
            gauge: Expr::zero(),
        })
    }

    pub fn with_gauge(mut self, g: Expr) -> Result<Self> {
        check_point_function(&g, &self.vars)?;
        self.gauge = g;
        Ok(self)
    }

    pub fn vars(&self) -> &VariableSet {
        &self.vars
    }

    pub fn n(&self) -> usize {
        self.vars.n()
    }

    /// `L + D_t g`.
    pub fn effective(&self) -> Expr {
        &self.l + &total_derivative(&self.gauge, &self.vars, &[])
    }

    pub fn velocity_degree(&self) -> u32 {
        velocity_degree(&self.effective(), &self.vars).expect("checked on construction")
    }
}

fn phase_vars(vars: &VariableSet) -> Vec<Var> {
    let mut out = vec![vars.time()];
    out.extend(vars.positions());
    out.extend(vars.velocities());
    out
}

fn check_point_function(e: &Expr, vars: &VariableSet) -> Result<()> {
    let ok = e
        .variables()
        .iter()
        .all(|&v| v == vars.time() || vars.positions().contains(&v));
    if ok {
        Ok(())
    } else {
        Err(VariationalError::NotPointFunction(e.print(vars)))
    }
}

/// Degree in the velocities when `e` is a polynomial of degree ≤ 2 in them.
pub fn velocity_degree(e: &Expr, vars: &VariableSet) -> Option<u32> {
    let vel = vars.velocities();
    let mut layer = vec![e.clone()];
    for degree in 0u32..=3 {
        if layer.iter().all(Expr::is_zero) {
            return Some(degree.saturating_sub(1));
        }
        if degree == 3 {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|d| vel.iter().map(move |&v| d.differentiate(v)))
            .collect();
    }
    None
}

/// The two-body Lagrangian `½((v1 + v2)² + (x2 v1 + x1 v2)²)`.
pub fn goldfish_lagrangian() -> Lagrangian {
    let vars = VariableSet::new(2).expect("valid layout");
    let l = crate::expr::parse("((v1 + v2)^2 + (x2*v1 + x1*v2)^2)/2", &vars).expect("parses");
    Lagrangian::new(vars, l).expect("quadratic")
}

fn velocity_hessian(l: &Expr, vars: &VariableSet) -> ExprMatrix {
    let vel = vars.velocities();
    ExprMatrix::from_fn(vel.len(), vel.len(), |r, c| {
        l.differentiate(vel[r]).differentiate(vel[c])
    })
}

fn solve_hessian(h: &ExprMatrix, rhs: &ExprMatrix, vars: &VariableSet) -> Result<ExprMatrix> {
    h.solve(rhs, vars).map_err(|e| match e {
        ExprError::SingularMatrix { determinant } => VariationalError::SingularHessian { determinant },
        other => other.into(),
    })
}

/// Normal form of `d/dt ∂L/∂v_k = ∂L/∂x_k`.
pub fn euler_lagrange(lag: &Lagrangian) -> Result<OdeSystem> {
    let vars = lag.vars();
    let l = lag.effective();
    let n = vars.n();
    let h = velocity_hessian(&l, vars);
    let rhs = ExprMatrix::from_fn(n, 1, |k, _| {
        let p = l.differentiate(vars.velocity(k));
        // everything in d/dt ∂L/∂v_k except the acceleration terms
        let explicit = total_derivative(&p, vars, &[]);
        &l.differentiate(vars.position(k)) - &explicit
    });
    let acc = solve_hessian(&h, &rhs, vars)?;
    Ok(OdeSystem::new(vars.clone(), (0..n).map(|k| acc[(k, 0)].clone()).collect())?)
}

fn velocity_free(e: &Expr, vars: &VariableSet) -> Result<Expr> {
    let zero: HashMap<Var, Expr> = vars.velocities().into_iter().map(|v| (v, Expr::zero())).collect();
    Ok(e.substitute(&zero)?)
}

#[derive(Clone, Debug)]
pub struct NoetherResult {
    pub field: String,
    pub is_noether: bool,
    pub status: Status,
    /// `X⁽¹⁾L + L·D_t ξ`.
    pub condition: Expr,
    pub gauge: Option<Expr>,
    /// Zero on success; otherwise the first nonvanishing obstruction
    /// (velocity-nonlinear part or an integrability residual).
    pub obstruction: Expr,
}

/// First prolongation of a point field, `η⁽¹⁾_k = D_t η_k − v_k D_t ξ`.
pub fn first_prolongation(v: &VectorField, vars: &VariableSet) -> Vec<Expr> {
    let dxi = total_derivative(&v.xi, vars, &[]);
    v.etas
        .iter()
        .enumerate()
        .map(|(k, eta)| &total_derivative(eta, vars, &[]) - &(&Expr::var(vars.velocity(k)) * &dxi))
        .collect()
}

/// Tests the Noether condition and reconstructs the gauge on success.
pub fn noether_condition(v: &VectorField, lag: &Lagrangian) -> Result<NoetherResult> {
    let vars = lag.vars();
    v.check_point_field(vars)?;
    let l = lag.effective();
    let eta1 = first_prolongation(v, vars);
    let mut e = &v.apply(&l, vars) + &(&l * &total_derivative(&v.xi, vars, &[]));
    for (k, e1) in eta1.iter().enumerate() {
        e = &e + &(e1 * &l.differentiate(vars.velocity(k)));
    }

    let fail = |obstruction: Expr, condition: Expr, status: Status| NoetherResult {
        field: v.name.clone(),
        is_noether: false,
        status,
        condition,
        gauge: None,
        obstruction,
    };

    // E must be affine in the velocities: E = c0 + Σ c_k v_k.
    let c0 = velocity_free(&e, vars)?;
    let coeffs: Vec<Expr> = vars
        .velocities()
        .iter()
        .map(|&vk| velocity_free(&e.differentiate(vk), vars))
        .collect::<Result<_>>()?;
    let mut affine = c0.clone();
    for (k, c) in coeffs.iter().enumerate() {
        affine = &affine + &(c * &Expr::var(vars.velocity(k)));
    }
    let nonlinear = &e - &affine;
    match nonlinear.zero_test() {
        crate::ZeroTest::Zero => {}
        crate::ZeroTest::NonZero => return Ok(fail(nonlinear, e, Status::Fail)),
        crate::ZeroTest::Inconclusive => return Ok(fail(nonlinear, e, Status::Inconclusive)),
    }

    // Integrability of dg = c0 dt + Σ c_k dx_k.
    let n = vars.n();
    let mut residuals = Vec::new();
    for k in 0..n {
        residuals.push(&coeffs[k].differentiate(vars.time()) - &c0.differentiate(vars.position(k)));
        for j in k + 1..n {
            residuals.push(
                &coeffs[k].differentiate(vars.position(j)) - &coeffs[j].differentiate(vars.position(k)),
            );
        }
    }
    let status = Status::all_zero(residuals.iter().map(Expr::zero_test));
    if status != Status::Pass {
        let obstruction = residuals
            .into_iter()
            .find(|r| !r.is_zero())
            .unwrap_or_else(Expr::zero);
        return Ok(fail(obstruction, e, status));
    }

    let mut grad = vec![c0];
    grad.extend(coeffs);
    let g = integrate_gradient(&grad, vars)?;
    let check = &total_derivative(&g, vars, &[]) - &e;
    if !check.is_zero() {
        return Err(VariationalError::Inconsistent(format!(
            "reconstructed gauge misses the condition by {}",
            check.print(vars)
        )));
    }
    Ok(NoetherResult {
        field: v.name.clone(),
        is_noether: true,
        status: Status::Pass,
        condition: e,
        gauge: Some(g),
        obstruction: Expr::zero(),
    })
}

/// Default base point `(t, x) = (0, N, N−1, …, 1)` shifted by `k`.
fn base_point(n: usize, shift: usize) -> Vec<i64> {
    let mut b = vec![shift as i64];
    b.extend((0..n).map(|j| (n - j) as i64 + (shift * (j + 2)) as i64));
    b
}

const BASE_SHIFTS: usize = 8;

/// Potential of the closed form `Σ grad_j dq_j` over `q = (t, x1..xN)`,
/// integrated along coordinate segments from a regular base point.
pub fn integrate_gradient(grad: &[Expr], vars: &VariableSet) -> Result<Expr> {
    let coords: Vec<Var> = std::iter::once(vars.time()).chain(vars.positions()).collect();
    let mut last_err = VariationalError::NoRegularBase;
    for shift in 0..BASE_SHIFTS {
        match integrate_from(grad, vars, &coords, &base_point(vars.n(), shift)) {
            Ok(g) => return Ok(g),
            Err(VariationalError::Expr(
                ExprError::DivisionByZero | ExprError::SingularPoint { .. },
            )) => continue,
            Err(e @ VariationalError::NonPolynomialIntegrand { .. }) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

fn integrate_from(grad: &[Expr], vars: &VariableSet, coords: &[Var], base: &[i64]) -> Result<Expr> {
    let mut g = Expr::zero();
    for (j, &q) in coords.iter().enumerate() {
        if grad[j].is_exactly_zero() {
            continue;
        }
        let later: HashMap<Var, Expr> = coords[j + 1..]
            .iter()
            .zip(&base[j + 1..])
            .map(|(&v, &b)| (v, Expr::int(b)))
            .collect();
        let integrand = grad[j].substitute(&later)?;
        let anti = antiderivative(&integrand, q, vars)?;
        let at_base = anti.substitute(&HashMap::from([(q, Expr::int(base[j]))]))?;
        g = &g + &(&anti - &at_base);
    }
    Ok(g)
}

/// Antiderivative in `q` of an expression whose denominators are free of `q`.
fn antiderivative(e: &Expr, q: Var, vars: &VariableSet) -> Result<Expr> {
    let not_poly = || VariationalError::NonPolynomialIntegrand {
        integrand: e.print(vars),
        variable: vars.name(q).to_string(),
    };
    let c = e.as_rational().ok_or_else(not_poly)?;
    let part = |r: &RatFunc| -> Result<RatFunc> {
        if r.denom().contains(q) {
            return Err(not_poly());
        }
        let coeffs = r.numer().coeffs_in(q);
        let lcm = (1..=coeffs.len() as u64)
            .map(BigInt::from)
            .fold(BigInt::one(), |acc, k| acc.lcm(&k));
        let mut shifted = vec![Poly::zero()];
        for (k, ck) in coeffs.iter().enumerate() {
            shifted.push(ck.scale(&(&lcm / BigInt::from(k as u64 + 1))));
        }
        let num = Poly::from_coeffs_in(q, &shifted);
        Ok(RatFunc::new(num, r.denom().scale(&lcm)).expect("nonzero denominator"))
    };
    Ok(Expr::Rational(ComplexRat {
        re: part(&c.re)?,
        im: part(&c.im)?,
    }))
}

/// `I = ξL + Σ (η_k − ξ v_k) ∂L/∂v_k − g`, checked to be conserved.
pub fn first_integral(v: &VectorField, lag: &Lagrangian, g: &Expr) -> Result<Expr> {
    let vars = lag.vars();
    let l = lag.effective();
    let mut i = &v.xi * &l;
    for (k, eta) in v.etas.iter().enumerate() {
        let char_k = eta - &(&v.xi * &Expr::var(vars.velocity(k)));
        i = &i + &(&char_k * &l.differentiate(vars.velocity(k)));
    }
    let i = &i - g;
    let sys = euler_lagrange(lag)?;
    let drift = conservation_residual(&i, &sys)?;
    if !drift.is_zero() {
        return Err(VariationalError::Inconsistent(format!(
            "first integral of {} is not conserved: D_t I = {}",
            v.name,
            drift.print(vars)
        )));
    }
    Ok(i)
}

/// `D_t I` evaluated on solutions of `sys`.
pub fn conservation_residual(i: &Expr, sys: &OdeSystem) -> Result<Expr> {
    let (ext, acc) = with_accelerations(sys.vars())?;
    let d = total_derivative(i, &ext, &acc);
    let on_shell: HashMap<Var, Expr> = acc.into_iter().zip(sys.rhs().iter().cloned()).collect();
    Ok(d.substitute(&on_shell)?)
}

/// `H(t, x, p) = Σ p_k v_k − L` with `v` solved from `p = ∂L/∂v`.
pub fn legendre_transform(lag: &Lagrangian) -> Result<Expr> {
    let vars = lag.vars();
    let l = lag.effective();
    let n = vars.n();
    let h = velocity_hessian(&l, vars);
    // p_k = Σ_j H_kj v_j + b_k with b = ∂L/∂v at v = 0
    let rhs = ExprMatrix::from_fn(n, 1, |k, _| {
        let b = velocity_free(&l.differentiate(vars.velocity(k)), vars).expect("rational");
        &Expr::var(vars.momentum(k)) - &b
    });
    let v = solve_hessian(&h, &rhs, vars)?;
    let bindings: HashMap<Var, Expr> = (0..n).map(|k| (vars.velocity(k), v[(k, 0)].clone())).collect();
    let mut ham = -&l;
    for k in 0..n {
        ham = &ham + &(&Expr::var(vars.momentum(k)) * &Expr::var(vars.velocity(k)));
    }
    Ok(ham.substitute(&bindings)?)
}

/// Second-order system generated by Hamilton's equations of a Hamiltonian
/// quadratic in the momenta.
pub fn hamilton_equations(ham: &Expr, vars: &VariableSet) -> Result<OdeSystem> {
    let n = vars.n();
    let mom = vars.momenta();
    let dp: Vec<Expr> = mom.iter().map(|&p| ham.differentiate(p)).collect();
    let dx: Vec<Expr> = vars.positions().iter().map(|&x| ham.differentiate(x)).collect();
    // ẋ = ∂H/∂p = M p + c; invert for p in terms of v
    let zero_p: HashMap<Var, Expr> = mom.iter().map(|&p| (p, Expr::zero())).collect();
    let m = ExprMatrix::from_fn(n, n, |r, c| dp[r].differentiate(mom[c]));
    let rhs = ExprMatrix::from_fn(n, 1, |k, _| {
        &Expr::var(vars.velocity(k)) - &dp[k].substitute(&zero_p).expect("rational")
    });
    let p_of_v = solve_hessian(&m, &rhs, vars)?;
    let bind: HashMap<Var, Expr> = (0..n).map(|k| (mom[k], p_of_v[(k, 0)].clone())).collect();
    let acc = (0..n)
        .map(|k| {
            let mut a = dp[k].differentiate(vars.time());
            for m in 0..n {
                a = &a + &(&dp[k].differentiate(vars.position(m)) * &dp[m]);
                a = &a - &(&dp[k].differentiate(mom[m]) * &dx[m]);
            }
            a.substitute(&bind)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(OdeSystem::new(vars.clone(), acc)?)
}
