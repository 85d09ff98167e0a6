//! Point symmetries of second-order ODE systems.
//!
//! A generator `ξ(t,x)∂t + Σ η_k(t,x)∂x_k` is prolonged with the total
//! derivative `D_t = ∂t + Σ v_m ∂x_m + Σ a_m ∂v_m`, where `a_m` stands for
//! `ẍ_m`. The acceleration symbols only live inside [`ProlongedField`] and are
//! replaced by the system's right-hand sides before any zero test.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, Expr, ExprError, Var, VariableSet};
use crate::Status;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("field has {found} space coefficients, system has {expected} particles")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coefficient `{0}` depends on velocities; point symmetries must not")]
    VelocityDependent(String),
    #[error("right-hand side {0} refers to acceleration symbols")]
    SecondDerivativeInRhs(usize),
    #[error("variable sets of field and system differ")]
    VariableSetMismatch,
    #[error("malformed field JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// `ẍ_n = rhs_n(t, x, v)`.
#[derive(Clone, Debug)]
pub struct OdeSystem {
    vars: VariableSet,
    rhs: Vec<Expr>,
}

impl OdeSystem {
    pub fn new(vars: VariableSet, rhs: Vec<Expr>) -> Result<Self, SymmetryError> {
        if rhs.len() != vars.n() {
            return Err(SymmetryError::DimensionMismatch {
                expected: vars.n(),
                found: rhs.len(),
            });
        }
        let extras = vars.extras();
        for (n, f) in rhs.iter().enumerate() {
            if f.variables().iter().any(|v| extras.contains(&v.index())) {
                return Err(SymmetryError::SecondDerivativeInRhs(n));
            }
        }
        Ok(OdeSystem { vars, rhs })
    }

    pub fn vars(&self) -> &VariableSet {
        &self.vars
    }

    pub fn rhs(&self) -> &[Expr] {
        &self.rhs
    }

    pub fn n(&self) -> usize {
        self.vars.n()
    }

    /// Structural equality of right-hand sides (canonical forms).
    pub fn same_equations(&self, other: &OdeSystem) -> bool {
        self.rhs.len() == other.rhs.len()
            && self
                .rhs
                .iter()
                .zip(&other.rhs)
                .all(|(a, b)| (a - b).is_zero())
    }
}

/// The goldfish system `ẍ_n = 2 Σ_{m≠n} v_n v_m / (x_n − x_m)`.
pub fn goldfish_system(n: usize) -> Result<OdeSystem, SymmetryError> {
    let vars = VariableSet::new(n)?;
    let rhs = (0..n)
        .map(|i| {
            let mut sum = Expr::zero();
            for m in (0..n).filter(|&m| m != i) {
                let num = &Expr::var(vars.velocity(i)) * &Expr::var(vars.velocity(m));
                let den = &Expr::var(vars.position(i)) - &Expr::var(vars.position(m));
                sum = &sum + &num.checked_div(&den).expect("distinct positions");
            }
            &Expr::int(2) * &sum
        })
        .collect();
    OdeSystem::new(vars, rhs)
}

/// `ξ ∂t + Σ η_k ∂x_k` with velocity-free coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub name: String,
    pub xi: Expr,
    pub etas: Vec<Expr>,
}

impl VectorField {
    pub fn new(name: impl Into<String>, xi: Expr, etas: Vec<Expr>) -> Self {
        VectorField {
            name: name.into(),
            xi,
            etas,
        }
    }

    pub fn zero(n: usize) -> Self {
        VectorField::new("0", Expr::zero(), vec![Expr::zero(); n])
    }

    /// `∂t`.
    pub fn time_translation(n: usize) -> Self {
        VectorField::new("d/dt", Expr::one(), vec![Expr::zero(); n])
    }

    pub fn n(&self) -> usize {
        self.etas.len()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &Expr> {
        std::iter::once(&self.xi).chain(&self.etas)
    }

    /// Checks dimension and that no coefficient involves velocities or
    /// appended symbols.
    pub fn check_point_field(&self, vars: &VariableSet) -> Result<(), SymmetryError> {
        if self.n() != vars.n() {
            return Err(SymmetryError::DimensionMismatch {
                expected: vars.n(),
                found: self.n(),
            });
        }
        let allowed = |v: Var| v == vars.time() || vars.positions().contains(&v);
        for c in self.coefficients() {
            if c.variables().into_iter().any(|v| !allowed(v)) {
                return Err(SymmetryError::VelocityDependent(c.print(vars)));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients().all(Expr::is_zero)
    }

    /// `Σ c_i · field_i` with constant coefficients.
    pub fn linear_combination(name: impl Into<String>, terms: &[(Expr, &VectorField)]) -> Self {
        let n = terms.first().map_or(0, |(_, f)| f.n());
        let mut xi = Expr::zero();
        let mut etas = vec![Expr::zero(); n];
        for (c, f) in terms {
            xi = &xi + &(c * &f.xi);
            for (acc, e) in etas.iter_mut().zip(&f.etas) {
                *acc = &*acc + &(c * e);
            }
        }
        VectorField::new(name, xi, etas)
    }

    /// Applies the field as a derivation to a function of `(t, x)`.
    pub fn apply(&self, f: &Expr, vars: &VariableSet) -> Expr {
        let mut out = &self.xi * &f.differentiate(vars.time());
        for (k, eta) in self.etas.iter().enumerate() {
            out = &out + &(eta * &f.differentiate(vars.position(k)));
        }
        out
    }

    pub fn to_json(&self, vars: &VariableSet) -> FieldJson {
        FieldJson {
            name: Some(self.name.clone()),
            xi: self.xi.print(vars),
            etas: self.etas.iter().map(|e| e.print(vars)).collect(),
        }
    }

    pub fn from_json(json: &FieldJson, vars: &VariableSet) -> Result<Self, SymmetryError> {
        let field = VectorField::new(
            json.name.clone().unwrap_or_else(|| "field".into()),
            parse(&json.xi, vars)?,
            json.etas
                .iter()
                .map(|s| parse(s, vars))
                .collect::<Result<_, _>>()?,
        );
        field.check_point_field(vars)?;
        Ok(field)
    }
}

/// Serialized generator: `{name, xi, etas[]}` with printed expressions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub xi: String,
    pub etas: Vec<String>,
}

/// First and second prolongation coefficients.
#[derive(Clone, Debug)]
pub struct ProlongedField {
    pub base: VectorField,
    /// The system's variables extended with the acceleration symbols.
    pub vars: VariableSet,
    pub accelerations: Vec<Var>,
    pub eta1: Vec<Expr>,
    pub eta2: Vec<Expr>,
}

/// Extends `vars` with `a1..aN`, reusing them when already present.
pub fn with_accelerations(vars: &VariableSet) -> Result<(VariableSet, Vec<Var>), ExprError> {
    let names: Vec<String> = (1..=vars.n()).map(|k| format!("a{k}")).collect();
    if let Some(existing) = names.iter().map(|s| vars.get(s)).collect::<Option<Vec<_>>>() {
        return Ok((vars.clone(), existing));
    }
    let ext = vars.extend(&names)?;
    let acc = names.iter().map(|s| ext.get(s).expect("just added")).collect();
    Ok((ext, acc))
}

/// Total time derivative on `(t, x, v, a)`.
pub fn total_derivative(e: &Expr, vars: &VariableSet, accelerations: &[Var]) -> Expr {
    let mut out = e.differentiate(vars.time());
    for k in 0..vars.n() {
        out = &out + &(&Expr::var(vars.velocity(k)) * &e.differentiate(vars.position(k)));
        if let Some(&a) = accelerations.get(k) {
            out = &out + &(&Expr::var(a) * &e.differentiate(vars.velocity(k)));
        }
    }
    out
}

/// Second prolongation with the accelerations left symbolic.
pub fn prolong_raw(v: &VectorField, sys: &OdeSystem) -> Result<ProlongedField, SymmetryError> {
    v.check_point_field(sys.vars())?;
    let (vars, acc) = with_accelerations(sys.vars())?;
    let dxi = total_derivative(&v.xi, &vars, &acc);
    let eta1: Vec<Expr> = v
        .etas
        .iter()
        .enumerate()
        .map(|(k, eta)| {
            &total_derivative(eta, &vars, &acc) - &(&Expr::var(vars.velocity(k)) * &dxi)
        })
        .collect();
    let eta2 = eta1
        .iter()
        .enumerate()
        .map(|(k, e1)| &total_derivative(e1, &vars, &acc) - &(&Expr::var(acc[k]) * &dxi))
        .collect();
    Ok(ProlongedField {
        base: v.clone(),
        vars,
        accelerations: acc,
        eta1,
        eta2,
    })
}

/// Second prolongation evaluated on solutions (`a_m → rhs_m`).
pub fn prolong(v: &VectorField, sys: &OdeSystem) -> Result<ProlongedField, SymmetryError> {
    let mut p = prolong_raw(v, sys)?;
    let on_shell: HashMap<Var, Expr> = p
        .accelerations
        .iter()
        .copied()
        .zip(sys.rhs().iter().cloned())
        .collect();
    p.eta2 = p
        .eta2
        .iter()
        .map(|e| e.substitute(&on_shell))
        .collect::<Result<_, _>>()?;
    Ok(p)
}

#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub field: String,
    pub residuals: Vec<Expr>,
    pub status: Status,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        self.status.passed()
    }
}

/// Checks `pr⁽²⁾X (ẍ_n − f_n) = 0` on solutions for every equation.
pub fn verify_point_symmetry(
    v: &VectorField,
    sys: &OdeSystem,
) -> Result<SymmetryReport, SymmetryError> {
    let p = prolong(v, sys)?;
    let vars = sys.vars();
    let residuals: Vec<Expr> = sys
        .rhs()
        .iter()
        .zip(&p.eta2)
        .map(|(f, eta2)| {
            let mut action = v.apply(f, vars);
            for (k, e1) in p.eta1.iter().enumerate() {
                action = &action + &(e1 * &f.differentiate(vars.velocity(k)));
            }
            eta2 - &action
        })
        .collect();
    let status = Status::all_zero(residuals.iter().map(Expr::zero_test));
    Ok(SymmetryReport {
        field: v.name.clone(),
        residuals,
        status,
    })
}

/// Lie bracket `[v, w]` of point fields on `(t, x)`.
pub fn commutator(v: &VectorField, w: &VectorField, vars: &VariableSet) -> VectorField {
    let bracket = |cv: &Expr, cw: &Expr| &v.apply(cw, vars) - &w.apply(cv, vars);
    VectorField::new(
        format!("[{}, {}]", v.name, w.name),
        bracket(&v.xi, &w.xi),
        v.etas
            .iter()
            .zip(&w.etas)
            .map(|(a, b)| bracket(a, b))
            .collect(),
    )
}

/// Prefactor and bracketed components as printed for each two-body
/// generator: `Γ = P·(X ∂t + Y1 ∂x1 + Y2 ∂x2)`.
const CATALOG: [(&str, &str, &str, &str); 15] = [
    ("x1*x2/(x1 - x2)", "t*(x1 - x2)", "x1^2", "-x2^2"),
    ("1", "x1*x2", "0", "0"),
    ("1", "t*(x1 + x2)", "x1^2", "x2^2"),
    ("1", "x1 + x2", "0", "0"),
    ("-x1*x2/(x1 - x2)", "0", "x1", "-x2"),
    ("1/(2*(x1 - x2))", "2*t*(x1 - x2)", "x1^2", "-x2^2"),
    ("1", "1", "0", "0"),
    ("-t/(x1 - x2)", "0", "x1", "-x2"),
    ("-1/(x1 - x2)", "0", "x1", "-x2"),
    ("-t/(x1 - x2)", "0", "1", "-1"),
    ("-1/(x1 - x2)", "0", "1", "-1"),
    ("t/(x1 - x2)", "t*(x1 - x2)", "x1^2", "-x2^2"),
    ("-1/3", "0", "x1", "x2"),
    ("-1/(3*(x1 - x2))", "0", "2*x1 + x2", "-(x1 + 2*x2)"),
    ("-1/(3*(x1 - x2))", "0", "x1^2 + 2*x1*x2", "-(x2^2 + 2*x1*x2)"),
];

/// Variable set shared by the two-body catalog.
pub fn two_body_vars() -> VariableSet {
    VariableSet::new(2).expect("valid layout")
}

/// The fifteen point-symmetry generators of the two-body goldfish system,
/// `Gamma1..Gamma15`.
pub fn generator_catalog() -> Vec<VectorField> {
    let vars = two_body_vars();
    let p = |s: &str| parse(s, &vars).expect("catalog entries parse");
    CATALOG
        .iter()
        .enumerate()
        .map(|(k, (pre, xi, e1, e2))| {
            let pre = p(pre);
            VectorField::new(
                format!("Gamma{}", k + 1),
                &pre * &p(xi),
                vec![&pre * &p(e1), &pre * &p(e2)],
            )
        })
        .collect()
}

/// `Gamma{index}` from the catalog (1-based).
pub fn catalog_field(index: usize) -> Option<VectorField> {
    generator_catalog().into_iter().nth(index.checked_sub(1)?)
}

/// The eight Noether point symmetries of the two-body Lagrangian:
/// `Γ5 + 3Γ14` and `Γ6..Γ12`.
pub fn noether_generators() -> Vec<VectorField> {
    let cat = generator_catalog();
    let mut out = vec![VectorField::linear_combination(
        "Gamma5+3*Gamma14",
        &[(Expr::one(), &cat[4]), (Expr::int(3), &cat[13])],
    )];
    out.extend(cat[5..12].iter().cloned());
    out
}

/// The catalog with `Γ14` swapped for `Γ5 + 3Γ14`: a basis of the same
/// algebra in which the Noether fields are basis elements.
pub fn noether_adapted_basis() -> Vec<VectorField> {
    let cat = generator_catalog();
    let combo = noether_generators().remove(0);
    cat.into_iter()
        .map(|f| if f.name == "Gamma14" { combo.clone() } else { f })
        .collect()
}

/// `{Γ7, Γ4, Γ2, Γ6 − Γ3 − ½Γ15}`, the candidate abelian subalgebra used to
/// find the linearizing coordinates. With the catalog as given the last
/// element is `t(1 − x1 − x2)∂t + …`, which does not commute with `∂t`.
pub fn abelian_subalgebra() -> Vec<VectorField> {
    let cat = generator_catalog();
    let half = Expr::rational(-1, 2).expect("nonzero");
    vec![
        cat[6].clone(),
        cat[3].clone(),
        cat[1].clone(),
        VectorField::linear_combination(
            "Gamma6-Gamma3-1/2*Gamma15",
            &[
                (Expr::one(), &cat[5]),
                (Expr::int(-1), &cat[2]),
                (half, &cat[14]),
            ],
        ),
    ]
}

pub fn catalog_to_json(fields: &[VectorField], vars: &VariableSet) -> Vec<FieldJson> {
    fields.iter().map(|f| f.to_json(vars)).collect()
}

pub fn catalog_from_json(text: &str, vars: &VariableSet) -> Result<Vec<VectorField>, SymmetryError> {
    let raw: Vec<FieldJson> = serde_json::from_str(text)?;
    raw.iter().map(|f| VectorField::from_json(f, vars)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, vars: &VariableSet) -> Expr {
        parse(s, vars).unwrap()
    }

    #[test]
    fn goldfish_right_sides() {
        let one = goldfish_system(1).unwrap();
        assert!(one.rhs()[0].is_exactly_zero());
        let two = goldfish_system(2).unwrap();
        let vars = two.vars();
        assert_eq!(two.rhs()[0], p("2*v1*v2/(x1 - x2)", vars));
        assert_eq!(two.rhs()[1], p("-2*v1*v2/(x1 - x2)", vars));
    }

    #[test]
    fn three_body_equation_has_two_summands() {
        let three = goldfish_system(3).unwrap();
        let vars = three.vars();
        // each pairwise summand has its own pole
        let f1 = &three.rhs()[0];
        let expected = p("2*v1*v2/(x1 - x2) + 2*v1*v3/(x1 - x3)", vars);
        assert_eq!(f1, &expected);
    }

    #[test]
    fn catalog_matches_printed_entries() {
        let vars = two_body_vars();
        let cat = generator_catalog();
        assert_eq!(cat.len(), 15);
        assert_eq!(cat[6].xi, Expr::one());
        assert!(cat[6].etas.iter().all(Expr::is_exactly_zero));
        assert_eq!(cat[1].xi, p("x1*x2", &vars));
        assert!(cat[10].xi.is_exactly_zero());
        assert_eq!(cat[10].etas[0], p("-1/(x1 - x2)", &vars));
        assert_eq!(cat[10].etas[1], p("1/(x1 - x2)", &vars));
    }

    #[test]
    fn noether_combination_matches_printed_form() {
        let vars = two_body_vars();
        let combo = &noether_generators()[0];
        assert_eq!(combo.etas[0], p("-(x1^2*x2 + 2*x1 + x2)/(x1 - x2)", &vars));
        assert_eq!(combo.etas[1], p("(x1*x2^2 + x1 + 2*x2)/(x1 - x2)", &vars));
        let sub = abelian_subalgebra();
        assert_eq!(sub[3].xi, p("t*(1 - x1 - x2)", &vars));
        assert_eq!(sub[3].etas[0], p("(2*x1^2 + x1*x2 - 3*x1^3 + 3*x1^2*x2)/(3*(x1 - x2))", &vars));
    }

    #[test]
    fn time_translation_prolongs_to_zero() {
        let sys = goldfish_system(2).unwrap();
        let pr = prolong(&VectorField::time_translation(2), &sys).unwrap();
        assert!(pr.eta1.iter().chain(&pr.eta2).all(Expr::is_exactly_zero));
    }

    #[test]
    fn scaling_of_free_particle() {
        let vars = VariableSet::new(1).unwrap();
        let free = OdeSystem::new(vars.clone(), vec![Expr::zero()]).unwrap();
        let scale = VectorField::new("x d/dx", Expr::zero(), vec![Expr::var(vars.position(0))]);
        let pr = prolong(&scale, &free).unwrap();
        assert_eq!(pr.eta1[0], Expr::var(vars.velocity(0)));
        assert!(pr.eta2[0].is_exactly_zero());
        let raw = prolong_raw(&scale, &free).unwrap();
        assert_eq!(raw.eta2[0], Expr::var(raw.accelerations[0]));
    }

    #[test]
    fn every_catalog_generator_is_a_symmetry() {
        let sys = goldfish_system(2).unwrap();
        for f in generator_catalog() {
            let report = verify_point_symmetry(&f, &sys).unwrap();
            assert!(report.passed(), "{} failed", f.name);
        }
    }

    #[test]
    fn non_symmetries_fail() {
        let sys = goldfish_system(2).unwrap();
        let vars = sys.vars();
        let bogus = VectorField::new("t d/dx1", Expr::zero(), vec![p("t", vars), Expr::zero()]);
        let report = verify_point_symmetry(&bogus, &sys).unwrap();
        assert_eq!(report.status, Status::Fail);
        assert!(report.residuals.iter().any(|r| !r.is_zero()));
    }

    #[test]
    fn velocity_dependent_fields_are_rejected() {
        let sys = goldfish_system(2).unwrap();
        let vars = sys.vars();
        let bad = VectorField::new("bad", p("v1", vars), vec![Expr::zero(), Expr::zero()]);
        assert!(matches!(
            verify_point_symmetry(&bad, &sys),
            Err(SymmetryError::VelocityDependent(_))
        ));
        let short = VectorField::new("short", Expr::one(), vec![Expr::zero()]);
        assert!(matches!(
            verify_point_symmetry(&short, &sys),
            Err(SymmetryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn brackets_of_time_reparametrizations_vanish() {
        let vars = two_body_vars();
        let sub = abelian_subalgebra();
        for a in &sub[..3] {
            for b in &sub[..3] {
                assert!(commutator(a, b, &vars).is_zero(), "[{}, {}]", a.name, b.name);
            }
        }
        let c = commutator(&sub[0], &sub[3], &vars);
        assert_eq!(c.xi, p("1 - x1 - x2", &vars));
        assert!(c.etas.iter().all(Expr::is_zero));
        let cat = generator_catalog();
        assert!(!commutator(&cat[6], &cat[11], &vars).is_zero());
    }

    #[test]
    fn catalog_json_round_trip() {
        let vars = two_body_vars();
        let cat = generator_catalog();
        let text = serde_json::to_string(&catalog_to_json(&cat, &vars)).unwrap();
        let back = catalog_from_json(&text, &vars).unwrap();
        assert_eq!(back, cat);
        assert!(catalog_from_json("[{\"xi\": \"1\"}]", &vars).is_err());
    }
}
