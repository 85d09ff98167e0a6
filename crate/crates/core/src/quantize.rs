//! Linearizing point transformations and the Schrödinger constructor.
//!
//! For the elementary symmetric map `y = (e_1(x), …, e_N(x))` the free
//! equation `2iψ_t + Δ_y ψ − E0²ψ = 0` pulls back to
//! `2i u_t + Σ f_kj u_{x_j x_k} + Σ h_k u_{x_k} + h0 u = 0` with
//! `f_kj = Σ_a B_ja B_ka`, `h_j = Σ_a Σ_m B_ma ∂B_ja/∂x_m`, `h0 = −E0²`, where
//! `B` is the inverse Jacobian.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, Expr, ExprError, ExprMatrix, Point, Var, VariableSet};
use crate::symmetry::{noether_generators, with_accelerations, OdeSystem, SymmetryError, SymmetryReport};
use crate::Status;

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("transformation is not invertible (Jacobian determinant {determinant})")]
    NotInvertible { determinant: String },
    #[error("transformed equation `{0}` cannot be written in the new variables without an inverse map")]
    NotExpressible(String),
    #[error("invalid PDE: {0}")]
    InvalidPde(String),
    #[error("sample point is within {0} of the collision set")]
    NearCollision(f64),
    #[error("malformed PDE JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QuantizeError>;

fn is_point_function(e: &Expr, vars: &VariableSet) -> bool {
    let pos = vars.positions();
    e.variables().iter().all(|v| pos.contains(v))
}

/// `y_a = y_a(x)` with Jacobian `J_aj = ∂y_a/∂x_j` and inverse `B = J⁻¹`.
#[derive(Clone, Debug)]
pub struct PointTransformation {
    vars: VariableSet,
    pub forward: Vec<Expr>,
    pub jacobian: ExprMatrix,
    pub inverse_jacobian: ExprMatrix,
    /// `x_j` as functions of `y`, written in the variables of
    /// [`PointTransformation::target_vars`], when a rational inverse exists.
    pub inverse: Option<Vec<Expr>>,
}

impl PointTransformation {
    pub fn new(vars: VariableSet, forward: Vec<Expr>) -> Result<Self> {
        let n = vars.n();
        if forward.len() != n {
            return Err(QuantizeError::InvalidPde(format!(
                "{} components for {n} coordinates",
                forward.len()
            )));
        }
        if let Some(bad) = forward.iter().find(|y| !is_point_function(y, &vars)) {
            return Err(QuantizeError::NotExpressible(bad.print(&vars)));
        }
        let jacobian =
            ExprMatrix::from_fn(n, n, |a, j| forward[a].differentiate(vars.position(j)));
        let inverse_jacobian = jacobian.inverse(&vars).map_err(|e| match e {
            ExprError::SingularMatrix { determinant } => QuantizeError::NotInvertible { determinant },
            other => other.into(),
        })?;
        Ok(PointTransformation {
            vars,
            forward,
            jacobian,
            inverse_jacobian,
            inverse: None,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let vars = VariableSet::new(n)?;
        let forward = vars.positions().into_iter().map(Expr::var).collect();
        let mut t = PointTransformation::new(vars, forward)?;
        let target = t.target_vars();
        t.inverse = Some(target.positions().into_iter().map(Expr::var).collect());
        Ok(t)
    }

    pub fn vars(&self) -> &VariableSet {
        &self.vars
    }

    pub fn n(&self) -> usize {
        self.vars.n()
    }

    pub fn determinant(&self) -> Expr {
        self.jacobian.determinant()
    }

    /// `t, y1..yN, w1..wN` with `w = ẏ`.
    pub fn target_vars(&self) -> VariableSet {
        VariableSet::with_names("t", "y", "w", self.n()).expect("valid layout")
    }

    /// Evaluates `y(x)` numerically.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let point = self.point(0.0, x);
        self.forward
            .iter()
            .map(|y| Ok(y.eval_numeric(&point)?.re))
            .collect()
    }

    fn point(&self, t: f64, x: &[f64]) -> Point<'_> {
        let mut p = Point::new(&self.vars);
        p.set(self.vars.time(), t);
        for (k, &xk) in x.iter().enumerate() {
            p.set(self.vars.position(k), xk);
        }
        p.set(self.vars.e0(), 0.0);
        p
    }
}

/// `y_a = e_a(x1, …, xN)`.
pub fn elementary_symmetric_map(n: usize) -> Result<PointTransformation> {
    let vars = VariableSet::new(n)?;
    // e_0..e_n of the first m positions, built up one position at a time
    let mut e = vec![Expr::one()];
    for k in 0..n {
        let x = Expr::var(vars.position(k));
        let mut next = e.clone();
        next.push(Expr::zero());
        for a in 1..=k + 1 {
            next[a] = &e.get(a).cloned().unwrap_or_else(Expr::zero) + &(&x * &e[a - 1]);
        }
        e = next;
    }
    let mut t = PointTransformation::new(vars, e[1..].to_vec())?;
    if n == 1 {
        t.inverse = Some(vec![Expr::var(t.target_vars().position(0))]);
    }
    Ok(t)
}

/// Rewrites `ẍ = F` in the coordinates `y = T(x)`.
pub fn push_ode(sys: &OdeSystem, map: &PointTransformation) -> Result<OdeSystem> {
    let vars = sys.vars();
    let n = sys.n();
    if n != map.n() {
        return Err(SymmetryError::DimensionMismatch {
            expected: n,
            found: map.n(),
        }
        .into());
    }
    let (vars_a, _) = with_accelerations(vars)?;
    let names: Vec<String> = (1..=n)
        .map(|k| format!("y{k}"))
        .chain((1..=n).map(|k| format!("w{k}")))
        .collect();
    let work = vars_a.extend(&names)?;
    let ys: Vec<Var> = names[..n].iter().map(|s| work.get(s).expect("added")).collect();
    let ws: Vec<Var> = names[n..].iter().map(|s| work.get(s).expect("added")).collect();

    let j = &map.jacobian;
    let b = &map.inverse_jacobian;
    // v = B w
    let v_of_w: HashMap<Var, Expr> = (0..n)
        .map(|jx| {
            let v: Expr = (0..n).map(|a| &b[(jx, a)] * &Expr::var(ws[a])).sum();
            (vars.velocity(jx), v)
        })
        .collect();
    let x_of_y: Option<HashMap<Var, Expr>> = map.inverse.as_ref().map(|inv| {
        let target = map.target_vars();
        let to_work: HashMap<Var, Expr> = (0..n).map(|a| (target.position(a), Expr::var(ys[a]))).collect();
        (0..n)
            .map(|k| (vars.position(k), inv[k].substitute(&to_work).expect("polynomial remap")))
            .collect()
    });

    let target = map.target_vars();
    let mut remap: HashMap<Var, Expr> = HashMap::new();
    remap.insert(vars.time(), Expr::var(target.time()));
    for a in 0..n {
        remap.insert(ys[a], Expr::var(target.position(a)));
        remap.insert(ws[a], Expr::var(target.velocity(a)));
    }

    let mut rhs = Vec::with_capacity(n);
    for a in 0..n {
        // ÿ_a = Σ_j J_aj ẍ_j + Σ_{j,m} ∂_m J_aj v_j v_m
        let mut acc = Expr::zero();
        for jx in 0..n {
            acc = &acc + &(&j[(a, jx)] * &sys.rhs()[jx]);
            for m in 0..n {
                let dj = j[(a, jx)].differentiate(vars.position(m));
                if dj.is_exactly_zero() {
                    continue;
                }
                let vv = &Expr::var(vars.velocity(jx)) * &Expr::var(vars.velocity(m));
                acc = &acc + &(&dj * &vv);
            }
        }
        let mut e = acc.substitute(&v_of_w)?;
        if let Some(xy) = &x_of_y {
            e = e.substitute(xy)?;
        }
        if vars.positions().iter().any(|&x| e.contains(x)) {
            return Err(QuantizeError::NotExpressible(e.print(&work)));
        }
        rhs.push(e.substitute(&remap)?);
    }
    Ok(OdeSystem::new(target, rhs)?)
}

/// `2i u_t + Σ f_kj u_{x_j x_k} + Σ h_k u_{x_k} + h0 u = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearEvolutionPde {
    vars: VariableSet,
    pub f: ExprMatrix,
    pub h: Vec<Expr>,
    pub h0: Expr,
}

impl LinearEvolutionPde {
    pub fn new(vars: VariableSet, f: ExprMatrix, h: Vec<Expr>, h0: Expr) -> Result<Self> {
        let n = vars.n();
        if f.rows() != n || f.cols() != n || h.len() != n {
            return Err(QuantizeError::InvalidPde(format!("coefficients do not match N = {n}")));
        }
        if f != f.transpose() {
            return Err(QuantizeError::InvalidPde("f is not symmetric".into()));
        }
        let allowed = |v: &Var| vars.positions().contains(v) || *v == vars.e0();
        for c in f.iter().chain(&h).chain(std::iter::once(&h0)) {
            if !c.variables().iter().all(allowed) {
                return Err(QuantizeError::InvalidPde(format!(
                    "coefficient `{}` depends on more than x and E0",
                    c.print(&vars)
                )));
            }
        }
        Ok(LinearEvolutionPde { vars, f, h, h0 })
    }

    pub fn vars(&self) -> &VariableSet {
        &self.vars
    }

    pub fn n(&self) -> usize {
        self.vars.n()
    }

    /// Replaces the symbol `E0` by `value`.
    pub fn bind_e0(&self, value: &Expr) -> Result<Self> {
        let bind = HashMap::from([(self.vars.e0(), value.clone())]);
        let sub = |e: &Expr| e.substitute(&bind);
        let mut f = self.f.clone();
        for r in 0..self.n() {
            for c in 0..self.n() {
                f[(r, c)] = sub(&self.f[(r, c)])?;
            }
        }
        Ok(LinearEvolutionPde {
            vars: self.vars.clone(),
            f,
            h: self.h.iter().map(sub).collect::<std::result::Result<_, _>>()?,
            h0: sub(&self.h0)?,
        })
    }

    pub fn to_json(&self) -> PdeJson {
        let n = self.n();
        PdeJson {
            n,
            f: (0..n)
                .map(|r| self.f.row(r).iter().map(|e| e.print(&self.vars)).collect())
                .collect(),
            h: self.h.iter().map(|e| e.print(&self.vars)).collect(),
            h0: self.h0.print(&self.vars),
        }
    }

    pub fn from_json(json: &PdeJson) -> Result<Self> {
        let vars = VariableSet::new(json.n)?;
        let n = json.n;
        if json.f.len() != n || json.f.iter().any(|r| r.len() != n) {
            return Err(QuantizeError::InvalidPde(format!("f must be {n}x{n}")));
        }
        let mut f = ExprMatrix::zeros(n, n);
        for (r, row) in json.f.iter().enumerate() {
            for (c, s) in row.iter().enumerate() {
                f[(r, c)] = parse(s, &vars)?;
            }
        }
        let h = json.h.iter().map(|s| parse(s, &vars)).collect::<std::result::Result<_, _>>()?;
        let h0 = parse(&json.h0, &vars)?;
        LinearEvolutionPde::new(vars, f, h, h0)
    }

    /// `2i u_t + Σ f u_xx + Σ h u_x + h0 u` for the given derivative values.
    fn apply_jet(&self, coeffs: &PdeValues, jet: &WaveJet) -> Complex64 {
        let n = self.n();
        let mut r = Complex64::new(0.0, 2.0) * jet.ut + coeffs.h0 * jet.u;
        for k in 0..n {
            r += coeffs.h[k] * jet.ux[k];
            for j in 0..n {
                r += coeffs.f[k][j] * jet.uxx[j][k];
            }
        }
        r
    }

    fn values_at(&self, x: &[f64]) -> Result<PdeValues> {
        let mut p = Point::new(&self.vars);
        for (k, &xk) in x.iter().enumerate() {
            p.set(self.vars.position(k), xk);
        }
        let ev = |e: &Expr| e.eval_numeric(&p);
        let n = self.n();
        Ok(PdeValues {
            f: (0..n)
                .map(|r| (0..n).map(|c| ev(&self.f[(r, c)])).collect::<std::result::Result<_, _>>())
                .collect::<std::result::Result<_, _>>()?,
            h: self.h.iter().map(ev).collect::<std::result::Result<_, _>>()?,
            h0: ev(&self.h0)?,
        })
    }

    /// `f` evaluated at a real point.
    pub fn f_at(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let v = self.values_at(x)?;
        Ok(v.f.iter().map(|r| r.iter().map(|z| z.re).collect()).collect())
    }
}

struct PdeValues {
    f: Vec<Vec<Complex64>>,
    h: Vec<Complex64>,
    h0: Complex64,
}

/// Serialized PDE: `{N, f[][], h[], h0}` with printed expressions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub f: Vec<Vec<String>>,
    pub h: Vec<String>,
    pub h0: String,
}

/// The Schrödinger equation whose solutions are `ψ(t, e(x))` for free `ψ`.
pub fn quantize(n: usize, e0: &Expr) -> Result<LinearEvolutionPde> {
    let map = elementary_symmetric_map(n)?;
    let vars = map.vars().clone();
    let b = &map.inverse_jacobian;
    let f = ExprMatrix::from_fn(n, n, |k, j| (0..n).map(|a| &b[(j, a)] * &b[(k, a)]).sum());
    let h = (0..n)
        .map(|j| {
            (0..n)
                .flat_map(|a| (0..n).map(move |m| (a, m)))
                .map(|(a, m)| &b[(m, a)] * &b[(j, a)].differentiate(vars.position(m)))
                .sum()
        })
        .collect();
    let h0 = -&(e0 * e0);
    LinearEvolutionPde::new(vars, f, h, h0)
}

/// `quantize` with `E0` kept symbolic.
pub fn quantize_symbolic(n: usize) -> Result<LinearEvolutionPde> {
    let vars = VariableSet::new(n)?;
    quantize(n, &Expr::var(vars.e0()))
}

/// `ξ ∂t + Σ η_k ∂x_k + μ u ∂u`.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeSymmetry {
    pub name: String,
    pub xi: Expr,
    pub etas: Vec<Expr>,
    pub mu: Expr,
}

const OMEGA_MU: [&str; 8] = [
    "0",
    "-1/2*i*E0^2*t",
    "0",
    "-i*(x1 + x2)",
    "0",
    "i*x1*x2",
    "0",
    "(i*x1*x2 - t) + i/2*(x1^2*x2^2 + x1^2 + x2^2 - t^2*E0^2)",
];

/// `Ω1..Ω8`: the eight Noether fields lifted with their `u`-coefficients.
pub fn omega_catalog() -> Vec<PdeSymmetry> {
    let vars = VariableSet::new(2).expect("valid layout");
    noether_generators()
        .into_iter()
        .zip(OMEGA_MU)
        .enumerate()
        .map(|(k, (g, mu))| PdeSymmetry {
            name: format!("Omega{}", k + 1),
            xi: g.xi,
            etas: g.etas,
            mu: parse(mu, &vars).expect("catalog entries parse"),
        })
        .collect()
}

/// `Ω9 = u ∂u`, admitted by every linear equation.
pub fn scaling_symmetry(n: usize) -> PdeSymmetry {
    PdeSymmetry {
        name: "Omega9".into(),
        xi: Expr::zero(),
        etas: vec![Expr::zero(); n],
        mu: Expr::one(),
    }
}

/// Jet coordinates `u_J` for multi-indices over `(t, x1..xN)` up to `order`.
struct Jets {
    base: Vec<Var>,
    syms: BTreeMap<Vec<usize>, Var>,
    order: usize,
}

impl Jets {
    fn new(vars: &VariableSet, prefix: &str, base_names: &[String], base: Vec<Var>, order: usize) -> Result<Self> {
        let mut indices: Vec<Vec<usize>> = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..order {
            let mut next = Vec::new();
            for idx in &frontier {
                let start = idx.last().copied().unwrap_or(0);
                for d in start..base.len() {
                    let mut j: Vec<usize> = idx.clone();
                    j.push(d);
                    next.push(j);
                }
            }
            indices.extend(next.iter().cloned());
            frontier = next;
        }
        let name = |idx: &Vec<usize>| {
            let mut s = prefix.to_string();
            for &d in idx {
                s.push_str(&base_names[d]);
            }
            s
        };
        let names: Vec<String> = indices.iter().map(name).collect();
        let fresh: Vec<&String> = names.iter().filter(|s| vars.get(s).is_none()).collect();
        let ext = vars.extend(&fresh)?;
        let syms = indices
            .into_iter()
            .zip(&names)
            .map(|(i, s)| (i, ext.get(s).expect("added")))
            .collect();
        Ok(Jets {
            base,
            syms,
            order,
        })
    }

    fn sym(&self, idx: &[usize]) -> Var {
        let mut k = idx.to_vec();
        k.sort_unstable();
        self.syms[&k]
    }

    fn u(&self, idx: &[usize]) -> Expr {
        Expr::var(self.sym(idx))
    }

    /// Total derivative in direction `d`.
    fn total(&self, e: &Expr, d: usize) -> Expr {
        let mut out = e.differentiate(self.base[d]);
        for (idx, &s) in &self.syms {
            if !e.contains(s) {
                continue;
            }
            assert!(idx.len() < self.order, "jet order exceeded");
            let mut up = idx.clone();
            up.push(d);
            out = &out + &(&self.u(&up) * &e.differentiate(s));
        }
        out
    }

    fn total_multi(&self, e: &Expr, dirs: &[usize]) -> Expr {
        dirs.iter().fold(e.clone(), |acc, &d| self.total(&acc, d))
    }
}

fn pde_jets(pde: &LinearEvolutionPde) -> Result<Jets> {
    let vars = pde.vars();
    let mut names = vec!["t".to_string()];
    names.extend((1..=pde.n()).map(|k| format!("x{k}")));
    let mut base = vec![vars.time()];
    base.extend(vars.positions());
    Jets::new(vars, "u", &names, base, 3)
}

/// The PDE operator written in jet coordinates.
fn pde_operator(pde: &LinearEvolutionPde, jets: &Jets) -> Expr {
    let n = pde.n();
    let mut d = &(&Expr::int(2) * &Expr::imaginary_unit()) * &jets.u(&[0]);
    d = &d + &(&pde.h0 * &jets.u(&[]));
    for k in 0..n {
        d = &d + &(&pde.h[k] * &jets.u(&[k + 1]));
        for j in 0..n {
            d = &d + &(&pde.f[(k, j)] * &jets.u(&[j + 1, k + 1]));
        }
    }
    d
}

/// `u_t` solved from the PDE.
fn evolution_rhs(pde: &LinearEvolutionPde, jets: &Jets) -> Expr {
    let full = pde_operator(pde, jets);
    let rest = &full - &(&(&Expr::int(2) * &Expr::imaginary_unit()) * &jets.u(&[0]));
    // 2i u_t = −rest  ⇒  u_t = (i/2) rest
    &(&Expr::imaginary_unit() * &Expr::rational(1, 2).expect("nonzero")) * &rest
}

/// Checks that `pr X` annihilates the PDE on its solutions.
pub fn verify_pde_symmetry(s: &PdeSymmetry, pde: &LinearEvolutionPde) -> Result<SymmetryReport> {
    let n = pde.n();
    if s.etas.len() != n {
        return Err(SymmetryError::DimensionMismatch {
            expected: n,
            found: s.etas.len(),
        }
        .into());
    }
    let jets = pde_jets(pde)?;
    let delta = pde_operator(pde, &jets);
    let coeff: Vec<&Expr> = std::iter::once(&s.xi).chain(&s.etas).collect();

    // characteristic Q = μu − ξ u_t − Σ η_m u_m
    let mut q = &s.mu * &jets.u(&[]);
    for (d, c) in coeff.iter().enumerate() {
        q = &q - &(*c * &jets.u(&[d]));
    }
    let omega = |idx: &[usize]| -> Expr {
        let mut w = jets.total_multi(&q, idx);
        for (d, c) in coeff.iter().enumerate() {
            let mut up = idx.to_vec();
            up.push(d);
            w = &w + &(*c * &jets.u(&up));
        }
        w
    };

    let mut residual = &s.xi * &delta.differentiate(jets.base[0]);
    for (k, eta) in s.etas.iter().enumerate() {
        residual = &residual + &(eta * &delta.differentiate(jets.base[k + 1]));
    }
    let mut targets: Vec<Vec<usize>> = vec![vec![], vec![0]];
    for k in 1..=n {
        targets.push(vec![k]);
        for j in k..=n {
            targets.push(vec![k, j]);
        }
    }
    for idx in &targets {
        let partial = delta.differentiate(jets.sym(idx));
        if partial.is_exactly_zero() {
            continue;
        }
        residual = &residual + &(&omega(idx) * &partial);
    }

    // evolution elimination: u_t, then u_{t x_k}
    let ut = evolution_rhs(pde, &jets);
    let mut on_shell = HashMap::from([(jets.sym(&[0]), ut.clone())]);
    for k in 1..=n {
        on_shell.insert(jets.sym(&[0, k]), jets.total(&ut, k));
    }
    let residual = residual.substitute(&on_shell)?;
    let status = Status::all_zero([residual.zero_test()]);
    Ok(SymmetryReport {
        field: s.name.clone(),
        residuals: vec![residual],
        status,
    })
}

/// Result of substituting `u = ψ(t, y(x))` into a PDE.
#[derive(Clone, Debug)]
pub struct ReductionReport {
    /// The pulled-back operator minus `2iψ_t + Σψ_aa − E0²ψ`, in ψ-jets.
    pub residual: Expr,
    pub status: Status,
}

/// Chain-rule substitution `u = ψ(t, y(x))` compared against the free
/// Schrödinger operator in `y`.
pub fn reduction_identity(pde: &LinearEvolutionPde, map: &PointTransformation) -> Result<ReductionReport> {
    let n = pde.n();
    let vars = pde.vars();
    let mut names = vec!["t".to_string()];
    names.extend((1..=n).map(|a| format!("y{a}")));
    let mut base = vec![vars.time()];
    base.extend(vars.positions());
    let psi = Jets::new(vars, "psi", &names, base, 2)?;
    let j = &map.jacobian;

    // u_k = Σ_a J_ak ψ_a ; u_jk = Σ_ab J_aj J_bk ψ_ab + Σ_a ∂_k J_aj ψ_a
    let uk = |k: usize| -> Expr { (0..n).map(|a| &j[(a, k)] * &psi.u(&[a + 1])).sum() };
    let ujk = |jx: usize, k: usize| -> Expr {
        let mut e = Expr::zero();
        for a in 0..n {
            for b in 0..n {
                e = &e + &(&(&j[(a, jx)] * &j[(b, k)]) * &psi.u(&[a + 1, b + 1]));
            }
            e = &e + &(&j[(a, jx)].differentiate(vars.position(k)) * &psi.u(&[a + 1]));
        }
        e
    };

    let two_i = &Expr::int(2) * &Expr::imaginary_unit();
    let mut pulled = &(&two_i * &psi.u(&[0])) + &(&pde.h0 * &psi.u(&[]));
    for k in 0..n {
        pulled = &pulled + &(&pde.h[k] * &uk(k));
        for jx in 0..n {
            pulled = &pulled + &(&pde.f[(k, jx)] * &ujk(jx, k));
        }
    }
    let e0 = Expr::var(vars.e0());
    let mut free = &(&two_i * &psi.u(&[0])) - &(&(&e0 * &e0) * &psi.u(&[]));
    for a in 1..=n {
        free = &free + &psi.u(&[a, a]);
    }
    let residual = &pulled - &free;
    let status = Status::all_zero([residual.zero_test()]);
    Ok(ReductionReport { residual, status })
}

/// Value and derivatives of a wave function at one point.
#[derive(Clone, Debug)]
pub struct WaveJet {
    pub u: Complex64,
    pub ut: Complex64,
    pub ux: Vec<Complex64>,
    pub uxx: Vec<Vec<Complex64>>,
}

pub trait WaveFunction {
    fn jet(&self, t: f64, x: &[f64]) -> Result<WaveJet>;
}

/// A symbolic `u(t, x)` with derivatives taken analytically.
#[derive(Clone, Debug)]
pub struct ExprWave {
    vars: VariableSet,
    pub u: Expr,
    ut: Expr,
    ux: Vec<Expr>,
    uxx: Vec<Vec<Expr>>,
}

impl ExprWave {
    pub fn new(vars: VariableSet, u: Expr) -> Self {
        let ux: Vec<Expr> = vars.positions().iter().map(|&x| u.differentiate(x)).collect();
        let uxx = ux
            .iter()
            .map(|d| vars.positions().iter().map(|&x| d.differentiate(x)).collect())
            .collect();
        ExprWave {
            ut: u.differentiate(vars.time()),
            ux,
            uxx,
            u,
            vars,
        }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<Complex64> {
        Ok(self.u.eval_numeric(&self.point(t, x))?)
    }

    fn point(&self, t: f64, x: &[f64]) -> Point<'_> {
        let mut p = Point::new(&self.vars);
        p.set(self.vars.time(), t);
        for (k, &xk) in x.iter().enumerate() {
            p.set(self.vars.position(k), xk);
        }
        p
    }
}

impl WaveFunction for ExprWave {
    fn jet(&self, t: f64, x: &[f64]) -> Result<WaveJet> {
        let p = self.point(t, x);
        let ev = |e: &Expr| e.eval_numeric(&p);
        Ok(WaveJet {
            u: ev(&self.u)?,
            ut: ev(&self.ut)?,
            ux: self.ux.iter().map(ev).collect::<std::result::Result<_, _>>()?,
            uxx: self
                .uxx
                .iter()
                .map(|r| r.iter().map(ev).collect::<std::result::Result<_, _>>())
                .collect::<std::result::Result<_, _>>()?,
        })
    }
}

/// `exp(i k·y(x) − ½ i (|k|² + E0²) t)`, a solution of the pulled-back free
/// equation. `k` and `E0` are taken exactly as binary fractions.
pub fn plane_wave(k: &[f64], e0: f64, map: &PointTransformation) -> ExprWave {
    let vars = map.vars().clone();
    let i = Expr::imaginary_unit();
    let ks: Vec<Expr> = k.iter().map(|&c| Expr::from_f64(c)).collect();
    let e0 = Expr::from_f64(e0);
    let phase: Expr = ks.iter().zip(&map.forward).map(|(c, y)| c * y).sum();
    let energy: Expr = &ks.iter().map(|c| c * c).sum::<Expr>() + &(&e0 * &e0);
    let half = Expr::rational(1, 2).expect("nonzero");
    let arg = &(&i * &phase) - &(&(&(&half * &i) * &energy) * &Expr::var(vars.time()));
    ExprWave::new(vars, Expr::exp(arg))
}

/// Minimum pairwise distance between positions.
pub fn collision_gap(x: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    for a in 0..x.len() {
        for b in a + 1..x.len() {
            gap = gap.min((x[a] - x[b]).abs());
        }
    }
    gap
}

pub const COLLISION_MARGIN: f64 = 1e-3;

/// Largest modulus of the PDE residual of `u` over `points` (pairs `(t, x)`).
/// `E0` must already be bound in `pde`.
pub fn pde_residual(pde: &LinearEvolutionPde, u: &dyn WaveFunction, points: &[(f64, Vec<f64>)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (t, x) in points {
        let gap = collision_gap(x);
        if gap <= COLLISION_MARGIN {
            return Err(QuantizeError::NearCollision(gap));
        }
        let coeffs = pde.values_at(x)?;
        let jet = u.jet(*t, x)?;
        worst = worst.max(pde.apply_jet(&coeffs, &jet).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::goldfish_system;

    fn p(s: &str, vars: &VariableSet) -> Expr {
        parse(s, vars).unwrap()
    }

    #[test]
    fn elementary_maps() {
        let m2 = elementary_symmetric_map(2).unwrap();
        let v = m2.vars();
        assert_eq!(m2.forward, vec![p("x1 + x2", v), p("x1*x2", v)]);
        let det = m2.determinant();
        assert!(det == p("x1 - x2", v) || det == p("x2 - x1", v));
        let m1 = elementary_symmetric_map(1).unwrap();
        assert_eq!(m1.forward, vec![p("x1", m1.vars())]);
        for n in 1..=4 {
            let m = elementary_symmetric_map(n).unwrap();
            assert!(m.jacobian.mul(&m.inverse_jacobian).is_identity(), "N = {n}");
        }
    }

    #[test]
    fn goldfish_linearizes() {
        for n in 2..=3 {
            let free = push_ode(&goldfish_system(n).unwrap(), &elementary_symmetric_map(n).unwrap()).unwrap();
            assert!(free.rhs().iter().all(Expr::is_exactly_zero), "N = {n}");
            assert_eq!(free.vars().name(free.vars().position(0)), "y1");
        }
    }

    #[test]
    fn identity_push_keeps_system() {
        let sys = goldfish_system(2).unwrap();
        let same = push_ode(&sys, &PointTransformation::identity(2).unwrap()).unwrap();
        let target = same.vars();
        let back: HashMap<Var, Expr> = (0..2)
            .flat_map(|k| {
                [
                    (target.position(k), Expr::var(sys.vars().position(k))),
                    (target.velocity(k), Expr::var(sys.vars().velocity(k))),
                ]
            })
            .collect();
        for (a, b) in same.rhs().iter().zip(sys.rhs()) {
            assert_eq!(&a.substitute(&back).unwrap(), b);
        }
    }

    #[test]
    fn non_rational_inverse_is_reported() {
        let vars = VariableSet::new(1).unwrap();
        let sys = OdeSystem::new(vars.clone(), vec![Expr::var(vars.velocity(0))]).unwrap();
        let square = PointTransformation::new(vars.clone(), vec![p("x1^2", &vars)]).unwrap();
        assert!(matches!(push_ode(&sys, &square), Err(QuantizeError::NotExpressible(_))));
        let flat = PointTransformation::new(vars.clone(), vec![Expr::int(3)]);
        assert!(matches!(flat, Err(QuantizeError::NotInvertible { .. })));
    }

    #[test]
    fn two_body_coefficients() {
        let pde = quantize_symbolic(2).unwrap();
        let v = pde.vars();
        let f11 = p("(x1^2 + 1)/(x1 - x2)^2", v);
        let f22 = p("(x2^2 + 1)/(x1 - x2)^2", v);
        assert_eq!(pde.f[(0, 0)], f11);
        assert_eq!(pde.f[(0, 1)], p("-(x1*x2 + 1)/(x1 - x2)^2", v));
        assert_eq!(pde.f[(1, 0)], pde.f[(0, 1)]);
        assert_eq!(pde.f[(1, 1)], f22);
        assert_eq!(pde.h[0], f11.differentiate(v.position(0)));
        assert_eq!(pde.h[1], f22.differentiate(v.position(1)));
        assert_eq!(pde.h0, p("-E0^2", v));
    }

    #[test]
    fn one_body_is_free() {
        let pde = quantize_symbolic(1).unwrap();
        assert_eq!(pde.f[(0, 0)], Expr::one());
        assert!(pde.h[0].is_exactly_zero());
    }

    #[test]
    fn pde_json_round_trip() {
        let pde = quantize_symbolic(2).unwrap();
        let text = serde_json::to_string(&pde.to_json()).unwrap();
        let back = LinearEvolutionPde::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, pde);
        let mut bad = pde.to_json();
        bad.f[0][1] = "x1".into();
        assert!(LinearEvolutionPde::from_json(&bad).is_err());
    }

    #[test]
    fn omega_values() {
        let cat = omega_catalog();
        let v = VariableSet::new(2).unwrap();
        assert_eq!(cat[2].xi, Expr::one());
        assert!(cat[2].mu.is_exactly_zero());
        assert_eq!(cat[3].mu, p("-i*(x1 + x2)", &v));
    }

    #[test]
    fn lifted_symmetries_hold() {
        let pde = quantize_symbolic(2).unwrap();
        for s in omega_catalog().iter().chain([&scaling_symmetry(2)]) {
            let r = verify_pde_symmetry(s, &pde).unwrap();
            assert!(r.passed(), "{}: {}", s.name, r.residuals[0].print(pde.vars()));
        }
    }

    #[test]
    fn perturbed_multiplier_fails() {
        let pde = quantize_symbolic(2).unwrap();
        let mut s = omega_catalog().swap_remove(3);
        s.mu = p("-i*(x1 + 2*x2)", pde.vars());
        assert_eq!(verify_pde_symmetry(&s, &pde).unwrap().status, Status::Fail);
    }

    #[test]
    fn reduces_to_free_particle() {
        let pde = quantize_symbolic(2).unwrap();
        let r = reduction_identity(&pde, &elementary_symmetric_map(2).unwrap()).unwrap();
        assert!(r.residual.is_exactly_zero());
    }

    #[test]
    fn plane_waves() {
        let map = elementary_symmetric_map(2).unwrap();
        let w = plane_wave(&[1.0, 1.0], 1.0, &map);
        let z = w.eval(0.0, &[2.0, 1.0]).unwrap();
        assert!((z - Complex64::new(0.0, 5.0).exp()).norm() < 1e-12);

        let pde = quantize_symbolic(2).unwrap().bind_e0(&Expr::one()).unwrap();
        let pts = vec![(0.3, vec![2.0, 1.0]), (0.7, vec![-0.5, 1.5])];
        assert!(pde_residual(&pde, &w, &pts).unwrap() < 1e-10);

        let not_solution = ExprWave::new(pde.vars().clone(), Expr::exp(&Expr::imaginary_unit() * &Expr::var(pde.vars().time())));
        let r = pde_residual(&pde, &not_solution, &pts).unwrap();
        assert!((r - 3.0).abs() < 1e-12);

        let flat = quantize_symbolic(2).unwrap().bind_e0(&Expr::zero()).unwrap();
        let one = ExprWave::new(flat.vars().clone(), Expr::one());
        assert_eq!(pde_residual(&flat, &one, &pts).unwrap(), 0.0);
        assert!(matches!(
            pde_residual(&flat, &one, &[(0.0, vec![1.0, 1.0005])]),
            Err(QuantizeError::NearCollision(_))
        ));
    }
}
