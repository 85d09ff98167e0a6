//! Sparse multivariate polynomials with arbitrary-precision integer
//! coefficients.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`] under pure lex order
//! (lower variable index is more significant), so two equal polynomials
//! always have identical term sequences.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::vars::{Var, VariableSet};

/// Product of variable powers, stored as `(variable, exponent)` pairs sorted
/// by variable with strictly positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, exp: u32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v.0, exp)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self, v: Var) -> u32 {
        self.0
            .iter()
            .find(|(var, _)| *var == v.0)
            .map_or(0, |&(_, e)| e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn factors(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.0.iter().map(|&(v, e)| (Var(v), e))
    }

    pub(crate) fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < v {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == v {
                let d = other.0[j].1;
                j += 1;
                match e.cmp(&d) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((v, e - d)),
                }
            } else {
                out.push((v, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Removes `v` from the monomial, returning the exponent it carried.
    fn split_off(&self, v: Var) -> (u32, Monomial) {
        let mut rest = Vec::with_capacity(self.0.len());
        let mut exp = 0;
        for &(var, e) in &self.0 {
            if var == v.0 {
                exp = e;
            } else {
                rest.push((var, e));
            }
        }
        (exp, Monomial(rest))
    }

    fn with_degree(&self, v: Var, exp: u32) -> Monomial {
        self.mul(&Monomial::var(v, exp))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        for k in 0.. {
            return match (a.get(k), b.get(k)) {
                (None, None) => Ordering::Equal,
                (Some(_), None) => Ordering::Greater,
                (None, Some(_)) => Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => {
                    if va != vb {
                        // the operand holding the more significant variable wins
                        if va < vb {
                            Ordering::Greater
                        } else {
                            Ordering::Less
                        }
                    } else if ea != eb {
                        ea.cmp(&eb)
                    } else {
                        continue;
                    }
                }
            };
        }
        unreachable!()
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(BigInt::from(c))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(BigInt::one(), Monomial::var(v, 1))
    }

    pub fn term(c: BigInt, m: Monomial) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The coefficient when the polynomial is a constant (zero included).
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    /// Lex-leading term.
    pub fn leading(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigInt {
        self.leading().map_or_else(BigInt::zero, |(_, c)| c.clone())
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().map(|(v, _)| v))
            .collect()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.degree(v) > 0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.degree(v)).max().unwrap_or(0)
    }

    /// Maximum total degree in the listed variables.
    pub fn degree_in_group(&self, group: &[Var]) -> u32 {
        self.terms
            .keys()
            .map(|m| group.iter().map(|&v| m.degree(v)).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigInt) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    fn mul_term(&self, m: &Monomial, c: &BigInt) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(mm, k)| (mm.mul(m), k * c))
                .collect(),
        }
    }

    /// Exact division of every coefficient by an integer.
    pub fn div_int(&self, c: &BigInt) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| {
                    debug_assert!((k % c).is_zero(), "inexact integer division");
                    (m.clone(), k / c)
                })
                .collect(),
        }
    }

    pub fn pow(&self, mut exp: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            if e > 0 {
                out.add_term(rest.with_degree(v, e - 1), c * BigInt::from(e));
            }
        }
        out
    }

    /// Coefficients with respect to `v`: `self = Σ_k out[k]·v^k`.
    pub fn coeffs_in(&self, v: Var) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            out[e as usize].terms.insert(rest, c.clone());
        }
        out
    }

    /// Groups terms by their monomial in the variables outside `keep`; each
    /// group is a polynomial in `keep` only.
    fn coeffs_outside(&self, keep: &BTreeSet<Var>) -> Vec<Poly> {
        let mut groups: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (inside, outside): (Vec<_>, Vec<_>) =
                m.0.iter().copied().partition(|(v, _)| keep.contains(&Var(*v)));
            groups
                .entry(Monomial(outside))
                .or_insert_with(Poly::zero)
                .terms
                .insert(Monomial(inside), c.clone());
        }
        groups.into_values().collect()
    }

    pub fn from_coeffs_in(v: Var, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            for (m, a) in &c.terms {
                out.add_term(m.with_degree(v, k as u32), a.clone());
            }
        }
        out
    }

    fn leading_coeff_in(&self, v: Var) -> (u32, Poly) {
        let d = self.degree_in(v);
        let mut lc = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            if e == d {
                lc.terms.insert(rest, c.clone());
            }
        }
        (d, lc)
    }

    /// Positive gcd of all coefficients (zero for the zero polynomial).
    pub fn int_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Flips the sign so the lex-leading coefficient is positive.
    pub fn normalized_sign(self) -> Poly {
        if self.leading_coeff().is_negative() {
            -self
        } else {
            self
        }
    }

    /// `self / divisor` when the division is exact over the integers.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if let Some(c) = divisor.as_constant() {
            return self
                .terms
                .values()
                .all(|k| (k % &c).is_zero())
                .then(|| self.div_int(&c));
        }
        let (lm, lc) = divisor.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((m, c)) = rem.leading() {
            let qm = m.div(&lm)?;
            let (qc, r) = c.div_rem(&lc);
            if !r.is_zero() {
                return None;
            }
            rem = &rem - &divisor.mul_term(&qm, &qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Pseudo-remainder of `self` by `divisor` viewed as polynomials in `v`.
    fn pseudo_rem(&self, divisor: &Poly, v: Var) -> Poly {
        let (db, lc) = divisor.leading_coeff_in(v);
        let mut r = self.clone();
        while !r.is_zero() {
            let (dr, lr) = r.leading_coeff_in(v);
            if dr < db {
                break;
            }
            let shift = Poly::term(BigInt::one(), Monomial::var(v, dr - db));
            r = &(&lc * &r) - &(&(&lr * &shift) * divisor);
        }
        r
    }

    /// Content with respect to `v`, i.e. the gcd of the coefficients in `v`.
    fn content_in(&self, v: Var) -> Poly {
        let mut g = Poly::zero();
        for c in self.coeffs_in(v) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Exact evaluation at a rational point; `None` if a needed coordinate
    /// is missing.
    pub fn eval_exact(&self, values: &[Option<BigRational>]) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (v, e) in m.factors() {
                let x = values.get(v.index())?.as_ref()?;
                t *= num_traits::pow(x.clone(), e as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Complex evaluation; `values` is indexed by variable.
    pub fn eval(&self, values: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (v, e) in m.factors() {
                t *= values[v.index()].powu(e);
            }
            acc += t;
        }
        acc
    }

    pub fn display<'a>(&'a self, vars: &'a VariableSet) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, vars }
    }
}

/// Greatest common divisor over the integers, normalized to a positive
/// lex-leading coefficient. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone().normalized_sign();
    }
    if b.is_zero() {
        return a.clone().normalized_sign();
    }
    if a == b {
        return a.clone().normalized_sign();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::constant(a.int_content().gcd(&b.int_content()));
    }
    let (small, large) = if a.terms.len() <= b.terms.len() {
        (a, b)
    } else {
        (b, a)
    };
    if large.div_exact(small).is_some() {
        return small.clone().normalized_sign();
    }
    let va = a.variables();
    let vb = b.variables();
    if va != vb {
        // The gcd only involves shared variables, so it divides every
        // coefficient taken over the unshared ones.
        let shared: BTreeSet<Var> = va.intersection(&vb).copied().collect();
        let (wide, other) = if va.len() > shared.len() { (a, b) } else { (b, a) };
        let mut groups = wide.coeffs_outside(&shared);
        groups.sort_by_key(|g| g.terms.len());
        let mut g = other.clone();
        for c in &groups {
            g = gcd(&g, c);
            if g.is_one() {
                break;
            }
        }
        return g.normalized_sign();
    }
    let main = va
        .iter()
        .copied()
        .min_by_key(|&v| a.degree_in(v).max(b.degree_in(v)))
        .expect("non-constant polynomial has a variable");
    let ca = a.content_in(main);
    let cb = b.content_in(main);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let g = primitive_prs(pa, pb, main);
    (&c * &g).normalized_sign()
}

fn primitive_part(p: &Poly, v: Var) -> Poly {
    let c = p.content_in(v);
    p.div_exact(&c).expect("content divides")
}

fn primitive_prs(mut a: Poly, mut b: Poly, v: Var) -> Poly {
    if a.degree_in(v) < b.degree_in(v) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let r = a.pseudo_rem(&b, v);
        if r.is_zero() {
            return b.normalized_sign();
        }
        if r.degree_in(v) == 0 {
            return Poly::one();
        }
        a = b;
        b = primitive_part(&r, v);
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -self.clone()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (mut big, small) = if self.terms.len() >= rhs.terms.len() {
            (self.clone(), rhs)
        } else {
            (rhs.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut acc: std::collections::HashMap<Monomial, BigInt> =
            std::collections::HashMap::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *acc.entry(ma.mul(mb)).or_default() += ca * cb;
            }
        }
        Poly {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

impl std::ops::AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    vars: &'a VariableSet,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (k, negative) {
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
                f.write_str(self.vars.name(v))?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}
