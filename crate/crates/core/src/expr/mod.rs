//! Exact symbolic expressions.
//!
//! The rational fragment (integers, `i`, variables, `+ - * /`, integer powers)
//! is always held in canonical form: a pair of reduced rational functions for
//! the real and imaginary parts. Equality on that fragment is structural
//! equality of the canonical pairs. Anything involving `exp` is kept as an
//! opaque tree; it is differentiable and evaluable, but zero-testing it falls
//! back to random sampling.

mod linalg;
mod parse;
mod poly;
mod ratfunc;
mod vars;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use linalg::ExprMatrix;
pub use parse::parse;
pub use poly::{gcd, Monomial, Poly};
pub use ratfunc::{ComplexRat, RatFunc};
pub use vars::{Var, VariableSet, E0_NAME, RESERVED};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at offset {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("singular point: denominator {denominator} vanishes")]
    SingularPoint { denominator: String },
    #[error("variable `{0}` has no value at the evaluation point")]
    UnsetVariable(String),
    #[error("invalid variable set: {0}")]
    InvalidVariableSet(String),
    #[error("exponent must be an integer constant")]
    NonIntegerExponent,
    #[error("zero test inconclusive: {0}")]
    Inconclusive(String),
    #[error("singular matrix (determinant {determinant})")]
    SingularMatrix { determinant: String },
}

pub type Result<T, E = ExprError> = std::result::Result<T, E>;

/// Denominators smaller than this in modulus make a point singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Number of sample points used to zero-test opaque expressions.
pub const ZERO_TEST_SAMPLES: usize = 8;

/// Numerator/denominator bound for random rational sample coordinates.
pub const SAMPLE_BOUND: i64 = 97;

/// Sample points closer than this to a denominator zero are redrawn.
pub const SAMPLE_SINGULAR_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Rational(ComplexRat),
    Opaque(Arc<Node>),
}

/// Tree node for expressions outside the rational fragment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i64),
    Exp(Expr),
}

/// Outcome of a zero test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    NonZero,
    Inconclusive,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::Rational(ComplexRat::zero())
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn int(c: i64) -> Self {
        Expr::real(RatFunc::from_int(c))
    }

    pub fn real(r: RatFunc) -> Self {
        Expr::Rational(ComplexRat::real(r))
    }

    /// Exact rational constant `num/den`.
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        RatFunc::ratio(BigInt::from(num), BigInt::from(den))
            .map(Expr::real)
            .ok_or(ExprError::DivisionByZero)
    }

    /// The exact dyadic rational equal to a finite float.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite constant");
        if x == 0.0 {
            return Expr::zero();
        }
        let bits = x.to_bits();
        let sign: i64 = if bits >> 63 == 0 { 1 } else { -1 };
        let exponent = ((bits >> 52) & 0x7ff) as i64;
        let mantissa = if exponent == 0 {
            (bits & 0xf_ffff_ffff_ffff) << 1
        } else {
            (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
        };
        let shift = exponent - 1075;
        let m = BigInt::from(sign) * BigInt::from(mantissa);
        let r = if shift >= 0 {
            RatFunc::ratio(m << shift as usize, BigInt::one())
        } else {
            RatFunc::ratio(m, BigInt::one() << (-shift) as usize)
        };
        Expr::real(r.expect("nonzero denominator"))
    }

    pub fn imaginary_unit() -> Self {
        Expr::Rational(ComplexRat::imaginary_unit())
    }

    pub fn var(v: Var) -> Self {
        Expr::real(RatFunc::var(v))
    }

    pub fn exp(arg: Expr) -> Self {
        if arg.is_exactly_zero() {
            return Expr::one();
        }
        Expr::Opaque(Arc::new(Node::Exp(arg)))
    }

    pub fn as_rational(&self) -> Option<&ComplexRat> {
        match self {
            Expr::Rational(c) => Some(c),
            Expr::Opaque(_) => None,
        }
    }

    /// The real rational function when the expression is real and rational.
    pub fn as_real(&self) -> Option<&RatFunc> {
        self.as_rational().filter(|c| c.is_real()).map(|c| &c.re)
    }

    /// Exact rational constant value, if this is one.
    pub fn as_constant(&self) -> Option<(BigInt, BigInt)> {
        self.as_real()?.as_rational()
    }

    pub fn as_f64(&self) -> Option<f64> {
        let (n, d) = self.as_constant()?;
        Some(n.to_f64()? / d.to_f64()?)
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Expr::Rational(_))
    }

    /// True only for the canonical zero of the rational fragment.
    pub fn is_exactly_zero(&self) -> bool {
        matches!(self, Expr::Rational(c) if c.is_zero())
    }

    pub fn contains(&self, v: Var) -> bool {
        match self {
            Expr::Rational(c) => c.contains(v),
            Expr::Opaque(node) => match node.as_ref() {
                Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    a.contains(v) || b.contains(v)
                }
                Node::Pow(a, _) | Node::Exp(a) => a.contains(v),
            },
        }
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Rational(c) => {
                for r in [&c.re, &c.im] {
                    out.extend(r.numer().variables());
                    out.extend(r.denom().variables());
                }
            }
            Expr::Opaque(node) => match node.as_ref() {
                Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    a.collect_variables(out);
                    b.collect_variables(out);
                }
                Node::Pow(a, _) | Node::Exp(a) => a.collect_variables(out),
            },
        }
    }

    pub fn checked_div(&self, rhs: &Expr) -> Result<Expr> {
        match (self, rhs) {
            (Expr::Rational(a), Expr::Rational(b)) => Ok(Expr::Rational(
                a.mul(&b.recip().ok_or(ExprError::DivisionByZero)?),
            )),
            _ => {
                if rhs.is_exactly_zero() {
                    return Err(ExprError::DivisionByZero);
                }
                Ok(Expr::Opaque(Arc::new(Node::Div(self.clone(), rhs.clone()))))
            }
        }
    }

    pub fn pow(&self, exp: i64) -> Result<Expr> {
        match self {
            Expr::Rational(c) => {
                if exp < 0 && c.is_zero() {
                    return Err(ExprError::DivisionByZero);
                }
                let base = if exp < 0 {
                    c.recip().ok_or(ExprError::DivisionByZero)?
                } else {
                    c.clone()
                };
                let mut acc = ComplexRat::real(RatFunc::one());
                if base.is_real() {
                    let r = base.re.pow(exp.abs()).ok_or(ExprError::DivisionByZero)?;
                    return Ok(Expr::real(r));
                }
                for _ in 0..exp.unsigned_abs() {
                    acc = acc.mul(&base);
                }
                Ok(Expr::Rational(acc))
            }
            Expr::Opaque(_) => Ok(match exp {
                0 => Expr::one(),
                1 => self.clone(),
                _ => Expr::Opaque(Arc::new(Node::Pow(self.clone(), exp))),
            }),
        }
    }

    /// Exact partial derivative.
    pub fn differentiate(&self, v: Var) -> Expr {
        match self {
            Expr::Rational(c) => Expr::Rational(c.derivative(v)),
            Expr::Opaque(node) => match node.as_ref() {
                Node::Add(a, b) => &a.differentiate(v) + &b.differentiate(v),
                Node::Mul(a, b) => &(&a.differentiate(v) * b) + &(a * &b.differentiate(v)),
                Node::Div(a, b) => {
                    let num = &(&a.differentiate(v) * b) - &(a * &b.differentiate(v));
                    num.checked_div(&(b * b)).expect("nonzero divisor")
                }
                Node::Pow(a, n) => {
                    let lower = a.pow(n - 1).expect("base is nonzero");
                    &(&Expr::int(*n) * &lower) * &a.differentiate(v)
                }
                Node::Exp(a) => self * &a.differentiate(v),
            },
        }
    }

    /// Simultaneous substitution, then canonicalization.
    pub fn substitute(&self, bindings: &HashMap<Var, Expr>) -> Result<Expr> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        match self {
            Expr::Rational(c) => {
                let rational: Option<HashMap<Var, ComplexRat>> = bindings
                    .iter()
                    .filter(|(v, _)| c.contains(**v))
                    .map(|(v, e)| e.as_rational().map(|r| (*v, r.clone())))
                    .collect();
                match rational {
                    Some(map) => c
                        .substitute(&map)
                        .map(Expr::Rational)
                        .ok_or(ExprError::DivisionByZero),
                    None => self.substitute_through_polys(c, bindings),
                }
            }
            Expr::Opaque(node) => match node.as_ref() {
                Node::Add(a, b) => Ok(&a.substitute(bindings)? + &b.substitute(bindings)?),
                Node::Mul(a, b) => Ok(&a.substitute(bindings)? * &b.substitute(bindings)?),
                Node::Div(a, b) => a.substitute(bindings)?.checked_div(&b.substitute(bindings)?),
                Node::Pow(a, n) => a.substitute(bindings)?.pow(*n),
                Node::Exp(a) => Ok(Expr::exp(a.substitute(bindings)?)),
            },
        }
    }

    /// Substitution of opaque values into a rational expression.
    fn substitute_through_polys(
        &self,
        c: &ComplexRat,
        bindings: &HashMap<Var, Expr>,
    ) -> Result<Expr> {
        let poly = |p: &Poly| -> Expr {
            let mut acc = Expr::zero();
            for (m, k) in p.terms() {
                let mut t = Expr::real(RatFunc::from_poly(Poly::constant(k.clone())));
                for (v, e) in m.factors() {
                    let base = bindings.get(&v).cloned().unwrap_or_else(|| Expr::var(v));
                    t = &t * &base.pow(e as i64).expect("positive power");
                }
                acc = &acc + &t;
            }
            acc
        };
        let part = |r: &RatFunc| poly(r.numer()).checked_div(&poly(r.denom()));
        let re = part(&c.re)?;
        let im = part(&c.im)?;
        Ok(&re + &(&Expr::imaginary_unit() * &im))
    }

    /// Zero test: exact on the rational fragment, sampled otherwise.
    pub fn zero_test(&self) -> ZeroTest {
        self.zero_test_seeded(0x005e_ed0f_2e60)
    }

    pub fn zero_test_seeded(&self, seed: u64) -> ZeroTest {
        match self {
            Expr::Rational(c) => {
                if c.is_zero() {
                    ZeroTest::Zero
                } else {
                    ZeroTest::NonZero
                }
            }
            Expr::Opaque(_) => self.sampled_zero_test(seed),
        }
    }

    /// `true` iff the expression is zero; an inconclusive test is reported as
    /// `false` (use [`Expr::zero_test`] to tell the cases apart).
    pub fn is_zero(&self) -> bool {
        self.zero_test() == ZeroTest::Zero
    }

    fn sampled_zero_test(&self, seed: u64) -> ZeroTest {
        let vars: Vec<Var> = self.variables().into_iter().collect();
        let len = vars.iter().map(|v| v.index() + 1).max().unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut accepted = 0;
        let mut draws = 0;
        while accepted < ZERO_TEST_SAMPLES {
            draws += 1;
            if draws > 50 * ZERO_TEST_SAMPLES {
                return ZeroTest::Inconclusive;
            }
            let mut values = vec![Complex64::new(0.0, 0.0); len];
            for v in &vars {
                values[v.index()] = Complex64::new(random_rational(&mut rng), 0.0);
            }
            match self.eval_tracked(&values, SAMPLE_SINGULAR_TOL) {
                Ok((value, scale)) => {
                    accepted += 1;
                    if value.norm() > 1e-9 * scale.max(1.0) {
                        return ZeroTest::NonZero;
                    }
                }
                Err(_) => continue,
            }
        }
        ZeroTest::Zero
    }

    /// Complex evaluation at a dense point (indexed by variable).
    pub fn eval_dense(&self, values: &[Complex64]) -> Result<Complex64> {
        self.eval_precise(values)
            .map_err(|s| s.into_error(&|v: Var| format!("#{}", v.0)))
    }

    /// Evaluation at a named point.
    pub fn eval_numeric(&self, point: &Point<'_>) -> Result<Complex64> {
        for v in self.variables() {
            if point.values.get(v.index()).is_none_or(|x| x.is_none()) {
                return Err(ExprError::UnsetVariable(point.vars.name(v).to_string()));
            }
        }
        let dense: Vec<Complex64> = point
            .values
            .iter()
            .map(|x| x.unwrap_or(Complex64::new(0.0, 0.0)))
            .collect();
        self.eval_precise(&dense)
            .map_err(|s| s.into_error(&|v: Var| point.vars.name(v).to_string()))
    }

    /// Value plus the largest intermediate modulus seen, used as the scale
    /// for sampled zero tests.
    fn eval_tracked(
        &self,
        values: &[Complex64],
        singular: f64,
    ) -> Result<(Complex64, f64), Singular> {
        self.eval_with(values, None, singular)
    }

    /// Numeric evaluation; rational leaves are evaluated exactly and rounded
    /// once when every value is real.
    fn eval_precise(&self, values: &[Complex64]) -> Result<Complex64, Singular> {
        let exact: Vec<Option<BigRational>> = values
            .iter()
            .map(|z| (z.im == 0.0).then(|| BigRational::from_float(z.re)).flatten())
            .collect();
        self.eval_with(values, Some(&exact), SINGULAR_TOL).map(|(v, _)| v)
    }

    fn eval_with(
        &self,
        values: &[Complex64],
        exact: Option<&[Option<BigRational>]>,
        singular: f64,
    ) -> Result<(Complex64, f64), Singular> {
        match self {
            Expr::Rational(c) => {
                if let Some(v) = exact.and_then(|x| exact_value(c, x)) {
                    let v = v?;
                    return Ok((v, v.norm()));
                }
                let mut total = Complex64::new(0.0, 0.0);
                let mut scale: f64 = 0.0;
                for (part, unit) in [(&c.re, Complex64::new(1.0, 0.0)), (&c.im, Complex64::i())] {
                    if part.is_zero() {
                        continue;
                    }
                    let (n, d) = part.eval(values);
                    if d.norm() < singular {
                        return Err(Singular::Poly(part.denom().clone()));
                    }
                    let value = n / d;
                    scale = scale.max(value.norm()).max(term_scale(part.numer(), values) / d.norm());
                    total += unit * value;
                }
                Ok((total, scale))
            }
            Expr::Opaque(node) => {
                let (value, scale) = match node.as_ref() {
                    Node::Add(a, b) => {
                        let (x, sx) = a.eval_with(values, exact, singular)?;
                        let (y, sy) = b.eval_with(values, exact, singular)?;
                        (x + y, sx.max(sy))
                    }
                    Node::Mul(a, b) => {
                        let (x, sx) = a.eval_with(values, exact, singular)?;
                        let (y, sy) = b.eval_with(values, exact, singular)?;
                        (x * y, (sx * sy).max(sx).max(sy))
                    }
                    Node::Div(a, b) => {
                        let (x, sx) = a.eval_with(values, exact, singular)?;
                        let (y, sy) = b.eval_with(values, exact, singular)?;
                        if y.norm() < singular {
                            return Err(Singular::Expr(b.clone()));
                        }
                        (x / y, (sx / y.norm()).max(sy))
                    }
                    Node::Pow(a, n) => {
                        let (x, sx) = a.eval_with(values, exact, singular)?;
                        if *n < 0 && x.norm() < singular {
                            return Err(Singular::Expr(a.clone()));
                        }
                        let v = x.powi(*n as i32);
                        (v, v.norm().max(sx))
                    }
                    Node::Exp(a) => {
                        let (x, sx) = a.eval_with(values, exact, singular)?;
                        let v = x.exp();
                        (v, v.norm().max(sx))
                    }
                };
                Ok((value, scale.max(value.norm())))
            }
        }
    }

    pub fn display<'a>(&'a self, vars: &'a VariableSet) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, vars }
    }

    /// Canonical printed form.
    pub fn print(&self, vars: &VariableSet) -> String {
        self.display(vars).to_string()
    }
}

/// Denominator found to vanish during evaluation.
enum Singular {
    Poly(Poly),
    Expr(Expr),
}

impl Singular {
    fn into_error(self, name: &dyn Fn(Var) -> String) -> ExprError {
        struct Show<'a>(&'a Singular, &'a dyn Fn(Var) -> String);
        impl fmt::Display for Show<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self.0 {
                    Singular::Poly(p) => write_poly(f, p, self.1),
                    Singular::Expr(e) => write_expr(f, e, self.1),
                }
            }
        }
        ExprError::SingularPoint {
            denominator: Show(&self, name).to_string(),
        }
    }
}

fn term_scale(p: &Poly, values: &[Complex64]) -> f64 {
    p.terms()
        .map(|(m, c)| {
            let mut t = c.to_f64().unwrap_or(f64::INFINITY).abs();
            for (v, e) in m.factors() {
                t *= values[v.index()].norm().powi(e as i32);
            }
            t
        })
        .fold(0.0, f64::max)
}

fn random_rational(rng: &mut impl Rng) -> f64 {
    let num = rng.random_range(-SAMPLE_BOUND..=SAMPLE_BOUND);
    let den = loop {
        let d = rng.random_range(-SAMPLE_BOUND..=SAMPLE_BOUND);
        if d != 0 {
            break d;
        }
    };
    num as f64 / den as f64
}

/// Exact value of a rational expression at a real rational point, rounded
/// to `f64`; `None` when a needed coordinate is not real.
fn exact_value(c: &ComplexRat, values: &[Option<BigRational>]) -> Option<Result<Complex64, Singular>> {
    let mut out = Complex64::new(0.0, 0.0);
    for (part, unit) in [(&c.re, Complex64::new(1.0, 0.0)), (&c.im, Complex64::i())] {
        if part.is_zero() {
            continue;
        }
        let n = part.numer().eval_exact(values)?;
        let d = part.denom().eval_exact(values)?;
        if d.is_zero() {
            return Some(Err(Singular::Poly(part.denom().clone())));
        }
        out += unit * (n / d).to_f64().unwrap_or(f64::NAN);
    }
    Some(Ok(out))
}

/// Named evaluation point; unset variables are an error when they occur.
#[derive(Clone, Debug)]
pub struct Point<'a> {
    vars: &'a VariableSet,
    values: Vec<Option<Complex64>>,
}

impl<'a> Point<'a> {
    pub fn new(vars: &'a VariableSet) -> Self {
        Point {
            vars,
            values: vec![None; vars.len()],
        }
    }

    pub fn set(&mut self, v: Var, value: impl Into<Complex64>) -> &mut Self {
        self.values[v.index()] = Some(value.into());
        self
    }

    pub fn with(mut self, v: Var, value: impl Into<Complex64>) -> Self {
        self.set(v, value);
        self
    }

    /// Sets a variable by name.
    pub fn set_named(&mut self, name: &str, value: impl Into<Complex64>) -> Result<&mut Self> {
        let v = self
            .vars
            .get(name)
            .ok_or_else(|| ExprError::UnknownIdentifier {
                name: name.to_string(),
                pos: 0,
            })?;
        Ok(self.set(v, value))
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        match (self, rhs) {
            (Expr::Rational(a), Expr::Rational(b)) => Expr::Rational(a.add(b)),
            _ if self.is_exactly_zero() => rhs.clone(),
            _ if rhs.is_exactly_zero() => self.clone(),
            _ => Expr::Opaque(Arc::new(Node::Add(self.clone(), rhs.clone()))),
        }
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        match (self, rhs) {
            (Expr::Rational(a), Expr::Rational(b)) => Expr::Rational(a.sub(b)),
            _ => self + &(-rhs),
        }
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        match (self, rhs) {
            (Expr::Rational(a), Expr::Rational(b)) => Expr::Rational(a.mul(b)),
            _ if self.is_exactly_zero() || rhs.is_exactly_zero() => Expr::zero(),
            _ if *self == Expr::one() => rhs.clone(),
            _ if *rhs == Expr::one() => self.clone(),
            _ => Expr::Opaque(Arc::new(Node::Mul(self.clone(), rhs.clone()))),
        }
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Rational(c) => Expr::Rational(c.neg()),
            Expr::Opaque(_) => &Expr::int(-1) * self,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |acc, e| &acc + &e)
    }
}

impl fmt::Display for Expr {
    /// Printing without a variable set uses positional names `#k`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = {
            let max = self.variables().into_iter().map(|v| v.index() + 1).max().unwrap_or(0);
            (0..max).map(|k| format!("#{k}")).collect()
        };
        write_expr(f, self, &|v: Var| names[v.index()].clone())
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    vars: &'a VariableSet,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, &|v: Var| self.vars.name(v).to_string())
    }
}

fn write_ratfunc(
    f: &mut fmt::Formatter<'_>,
    r: &RatFunc,
    name: &dyn Fn(Var) -> String,
) -> fmt::Result {
    write!(f, "(")?;
    write_poly(f, r.numer(), name)?;
    write!(f, ")")?;
    if !r.denom().is_one() {
        write!(f, "/(")?;
        write_poly(f, r.denom(), name)?;
        write!(f, ")")?;
    }
    Ok(())
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly, name: &dyn Fn(Var) -> String) -> fmt::Result {
    if p.is_zero() {
        return f.write_str("0");
    }
    for (k, (m, c)) in p.terms().rev().enumerate() {
        let abs = c.abs();
        match (k, c.is_negative()) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        let mut first = true;
        if !abs.is_one() || m.is_one() {
            write!(f, "{abs}")?;
            first = false;
        }
        for (v, e) in m.factors() {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            f.write_str(&name(v))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
    }
    Ok(())
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, name: &dyn Fn(Var) -> String) -> fmt::Result {
    match e {
        Expr::Rational(c) => {
            if c.im.is_zero() {
                write_ratfunc(f, &c.re, name)
            } else if c.re.is_zero() {
                f.write_str("i*")?;
                write_ratfunc(f, &c.im, name)
            } else {
                write_ratfunc(f, &c.re, name)?;
                f.write_str(" + i*")?;
                write_ratfunc(f, &c.im, name)
            }
        }
        Expr::Opaque(node) => match node.as_ref() {
            Node::Add(a, b) => {
                f.write_str("(")?;
                write_expr(f, a, name)?;
                f.write_str(" + ")?;
                write_expr(f, b, name)?;
                f.write_str(")")
            }
            Node::Mul(a, b) => {
                f.write_str("(")?;
                write_expr(f, a, name)?;
                f.write_str("*")?;
                write_expr(f, b, name)?;
                f.write_str(")")
            }
            Node::Div(a, b) => {
                f.write_str("(")?;
                write_expr(f, a, name)?;
                f.write_str("/")?;
                write_expr(f, b, name)?;
                f.write_str(")")
            }
            Node::Pow(a, n) => {
                f.write_str("(")?;
                write_expr(f, a, name)?;
                write!(f, ")^({n})")
            }
            Node::Exp(a) => {
                f.write_str("exp(")?;
                write_expr(f, a, name)?;
                f.write_str(")")
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (VariableSet, Var, Var) {
        let vars = VariableSet::new(2).unwrap();
        let (x1, x2) = (vars.position(0), vars.position(1));
        (vars, x1, x2)
    }

    #[test]
    fn expansion_cancels_exactly() {
        let (vars, _, _) = setup();
        let e = parse("(x1 - x2)^2 - x1^2 + 2*x1*x2 - x2^2", &vars).unwrap();
        assert_eq!(e.zero_test(), ZeroTest::Zero);
        let e = parse("x1 - x2", &vars).unwrap();
        assert_eq!(e.zero_test(), ZeroTest::NonZero);
    }

    #[test]
    fn derivative_of_f11_matches_hand_result() {
        let (vars, x1, _) = setup();
        let f11 = parse("(x1^2 + 1)/(x1 - x2)^2", &vars).unwrap();
        let expected = parse("-2*(x1*x2 + 1)/(x1 - x2)^3", &vars).unwrap();
        assert_eq!(f11.differentiate(x1), expected);
    }

    #[test]
    fn constant_derivative_vanishes() {
        let (vars, x1, _) = setup();
        assert!(parse("E0^2/7", &vars).unwrap().differentiate(x1).is_exactly_zero());
    }

    #[test]
    fn substitution_examples() {
        let (vars, x1, x2) = setup();
        let ext = vars.extend(&["y1"]).unwrap();
        let y1 = ext.get("y1").unwrap();
        let e = parse("x1 + x2", &ext).unwrap();
        let mut b = HashMap::new();
        b.insert(x1, &Expr::var(y1) - &Expr::var(x2));
        assert_eq!(e.substitute(&b).unwrap(), Expr::var(y1));
        let ratio = parse("x1/x1", &vars).unwrap();
        assert_eq!(ratio, Expr::one());
        let mut collide = HashMap::new();
        collide.insert(x1, Expr::var(x2));
        let g = parse("1/(x1 - x2)", &vars).unwrap();
        assert_eq!(g.substitute(&collide), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn numeric_evaluation() {
        let (vars, x1, x2) = setup();
        let sum = parse("x1 + x2", &vars).unwrap();
        let p = Point::new(&vars).with(x1, 1.0).with(x2, 2.0);
        assert_eq!(sum.eval_numeric(&p).unwrap(), Complex64::new(3.0, 0.0));
        let f11 = parse("(x1^2 + 1)/(x1 - x2)^2", &vars).unwrap();
        let p = Point::new(&vars).with(x1, 2.0).with(x2, 1.0);
        assert!((f11.eval_numeric(&p).unwrap() - Complex64::new(5.0, 0.0)).norm() < 1e-15);
        let plane = parse("exp(i*0)", &vars).unwrap();
        assert_eq!(plane.eval_numeric(&Point::new(&vars)).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn singular_point_names_the_denominator() {
        let (vars, x1, x2) = setup();
        let g = parse("1/(x1 - x2)", &vars).unwrap();
        let p = Point::new(&vars).with(x1, 1.0).with(x2, 1.0);
        match g.eval_numeric(&p) {
            Err(ExprError::SingularPoint { denominator }) => assert_eq!(denominator, "x1 - x2"),
            other => panic!("unexpected {other:?}"),
        }
        let p = Point::new(&vars).with(x1, 1.0);
        assert!(matches!(g.eval_numeric(&p), Err(ExprError::UnsetVariable(_))));
    }

    #[test]
    fn opaque_zero_test_samples() {
        let (vars, _, _) = setup();
        let e = parse("exp(x1)*exp(x2) - exp(x1 + x2)", &vars).unwrap();
        assert_eq!(e.zero_test(), ZeroTest::Zero);
        let e = parse("exp(x1) - exp(x2)", &vars).unwrap();
        assert_eq!(e.zero_test(), ZeroTest::NonZero);
        let d = parse("exp(i*x1)", &vars).unwrap().differentiate(vars.position(0));
        let expected = parse("i*exp(i*x1)", &vars).unwrap();
        assert_eq!((&d - &expected).zero_test(), ZeroTest::Zero);
    }

    #[test]
    fn exact_float_conversion() {
        assert_eq!(Expr::from_f64(0.5), Expr::rational(1, 2).unwrap());
        assert_eq!(Expr::from_f64(-3.0), Expr::int(-3));
        assert_eq!(Expr::from_f64(0.1).as_f64(), Some(0.1));
    }

    #[test]
    fn complex_arithmetic_is_exact() {
        let (vars, _, _) = setup();
        let e = parse("(1 + i)/(1 - i)", &vars).unwrap();
        assert_eq!(e, Expr::imaginary_unit());
        let e = parse("i^2 + 1", &vars).unwrap();
        assert!(e.is_exactly_zero());
    }
}
