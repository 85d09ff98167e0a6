//! Reduced quotients of integer polynomials, and complex pairs of them.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Signed;

use super::poly::{gcd, Monomial, Poly};
use super::vars::Var;

/// `num / den` with `gcd(num, den) = 1` and a positive lex-leading
/// denominator coefficient. Zero is `0 / 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    /// Builds and reduces `num / den`; `None` when `den` is the zero polynomial.
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        let g = if den.is_constant() || num.is_constant() {
            Poly::constant(num.int_content().gcd(&den.int_content()))
        } else {
            gcd(&num, &den)
        };
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        if den.leading_coeff().is_negative() {
            num = -num;
            den = -den;
        }
        RatFunc { num, den }
    }

    /// Trusted constructor for pairs already known to be reduced.
    fn raw(num: Poly, den: Poly) -> Self {
        debug_assert!(!den.is_zero());
        RatFunc { num, den }
    }

    pub fn zero() -> Self {
        RatFunc::raw(Poly::zero(), Poly::one())
    }

    pub fn one() -> Self {
        RatFunc::raw(Poly::one(), Poly::one())
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc::raw(p, Poly::one())
    }

    pub fn from_int(c: i64) -> Self {
        RatFunc::from_poly(Poly::from_int(c))
    }

    pub fn ratio(num: BigInt, den: BigInt) -> Option<Self> {
        RatFunc::new(Poly::constant(num), Poly::constant(den))
    }

    pub fn var(v: Var) -> Self {
        RatFunc::from_poly(Poly::var(v))
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// The value as an exact rational when no variable occurs.
    pub fn as_rational(&self) -> Option<(BigInt, BigInt)> {
        Some((self.num.as_constant()?, self.den.as_constant()?))
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.num.contains(v) || self.den.contains(v)
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let (mut num, mut den) = (self.den.clone(), self.num.clone());
        if den.leading_coeff().is_negative() {
            num = -num;
            den = -den;
        }
        Some(RatFunc::raw(num, den))
    }

    pub fn checked_div(&self, rhs: &RatFunc) -> Option<RatFunc> {
        Some(self * &rhs.recip()?)
    }

    pub fn pow(&self, exp: i64) -> Option<RatFunc> {
        let base = if exp < 0 { self.recip()? } else { self.clone() };
        let e = exp.unsigned_abs() as u32;
        Some(RatFunc::raw(base.num.pow(e), base.den.pow(e)))
    }

    pub fn scale(&self, c: &BigInt) -> RatFunc {
        RatFunc::reduce(self.num.scale(c), self.den.clone())
    }

    pub fn derivative(&self, v: Var) -> RatFunc {
        let dn = self.num.derivative(v);
        if self.den.is_constant() || !self.den.contains(v) {
            return RatFunc::reduce(dn, self.den.clone());
        }
        let dd = self.den.derivative(v);
        // (n/d)' = (n' d - n d') / d^2; since gcd(n, d) = 1 only factors of d
        // can cancel, and g = gcd(d, d') captures the repeated ones.
        let g = gcd(&self.den, &dd);
        let d_red = self.den.div_exact(&g).expect("gcd divides");
        let dd_red = dd.div_exact(&g).expect("gcd divides");
        let num = &(&dn * &d_red) - &(&self.num * &dd_red);
        let den = &self.den * &d_red;
        RatFunc::reduce(num, den)
    }

    /// Simultaneous substitution of variables by rational functions.
    /// `None` when the result has a zero denominator.
    pub fn substitute(&self, bindings: &HashMap<Var, RatFunc>) -> Option<RatFunc> {
        let relevant: Vec<(Var, &RatFunc)> = bindings
            .iter()
            .filter(|(v, _)| self.contains(**v))
            .map(|(v, r)| (*v, r))
            .collect();
        if relevant.is_empty() {
            return Some(self.clone());
        }
        let degrees: Vec<u32> = relevant
            .iter()
            .map(|(v, _)| self.num.degree_in(*v).max(self.den.degree_in(*v)))
            .collect();
        let mut cache = PowerCache::new(&relevant, &degrees);
        let num = cache.homogenized(&self.num);
        let den = cache.homogenized(&self.den);
        RatFunc::new(num, den)
    }

    pub fn eval(&self, values: &[Complex64]) -> (Complex64, Complex64) {
        (self.num.eval(values), self.den.eval(values))
    }
}

/// Powers of substituted numerators and denominators, reused across terms.
struct PowerCache<'a> {
    bindings: &'a [(Var, &'a RatFunc)],
    degrees: &'a [u32],
    num_pows: Vec<Vec<Poly>>,
    den_pows: Vec<Vec<Poly>>,
}

impl<'a> PowerCache<'a> {
    fn new(bindings: &'a [(Var, &'a RatFunc)], degrees: &'a [u32]) -> Self {
        let build = |p: &Poly, d: u32| {
            let mut pows = Vec::with_capacity(d as usize + 1);
            pows.push(Poly::one());
            for k in 1..=d as usize {
                let next = &pows[k - 1] * p;
                pows.push(next);
            }
            pows
        };
        let num_pows = bindings
            .iter()
            .zip(degrees)
            .map(|((_, r), &d)| build(&r.num, d))
            .collect();
        let den_pows = bindings
            .iter()
            .zip(degrees)
            .map(|((_, r), &d)| build(&r.den, d))
            .collect();
        PowerCache {
            bindings,
            degrees,
            num_pows,
            den_pows,
        }
    }

    /// `p(subs) · Π q_i^{D_i}`, a polynomial.
    fn homogenized(&mut self, p: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            let mut kept = Monomial::one();
            let mut factor = Poly::one();
            let mut exps = vec![0u32; self.bindings.len()];
            for (v, e) in m.factors() {
                match self.bindings.iter().position(|(b, _)| *b == v) {
                    Some(idx) => exps[idx] = e,
                    None => kept = kept.mul(&Monomial::var(v, e)),
                }
            }
            for (idx, &e) in exps.iter().enumerate() {
                let d = self.degrees[idx];
                factor = &factor * &self.num_pows[idx][e as usize];
                factor = &factor * &self.den_pows[idx][(d - e) as usize];
            }
            out += &(&factor * &Poly::term(c.clone(), kept));
        }
        out
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc::raw(-&self.num, self.den.clone())
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFunc::reduce(&self.num + &rhs.num, self.den.clone());
        }
        // Henrici: with g = gcd(d1, d2) only factors of g can cancel.
        let g = gcd(&self.den, &rhs.den);
        if g.is_one() {
            let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
            let den = &self.den * &rhs.den;
            return RatFunc::normalize_sign(num, den);
        }
        let d1 = self.den.div_exact(&g).expect("gcd divides");
        let d2 = rhs.den.div_exact(&g).expect("gcd divides");
        let num = &(&self.num * &d2) + &(&rhs.num * &d1);
        if num.is_zero() {
            return RatFunc::zero();
        }
        let g2 = if g.is_constant() || num.is_constant() {
            Poly::constant(num.int_content().gcd(&g.int_content()))
        } else {
            gcd(&num, &g)
        };
        let num = num.div_exact(&g2).expect("gcd divides");
        let den = &(&d1 * &d2) * &g.div_exact(&g2).expect("gcd divides");
        RatFunc::normalize_sign(num, den)
    }
}

impl RatFunc {
    fn normalize_sign(num: Poly, den: Poly) -> RatFunc {
        if num.is_zero() {
            return RatFunc::zero();
        }
        if den.leading_coeff().is_negative() {
            RatFunc::raw(-num, -den)
        } else {
            RatFunc::raw(num, den)
        }
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        let cross = |n: &Poly, d: &Poly| {
            if d.is_one() {
                Poly::one()
            } else if n.is_constant() || d.is_constant() {
                Poly::constant(n.int_content().gcd(&d.int_content()))
            } else {
                gcd(n, d)
            }
        };
        let g1 = cross(&self.num, &rhs.den);
        let g2 = cross(&rhs.num, &self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = rhs.den.div_exact(&g1).expect("gcd divides");
        let n2 = rhs.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        RatFunc::normalize_sign(&n1 * &n2, &d1 * &d2)
    }
}

/// `re + i·im` with both parts exact rational functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ComplexRat {
    pub re: RatFunc,
    pub im: RatFunc,
}

impl ComplexRat {
    pub fn real(re: RatFunc) -> Self {
        ComplexRat {
            re,
            im: RatFunc::zero(),
        }
    }

    pub fn imaginary_unit() -> Self {
        ComplexRat {
            re: RatFunc::zero(),
            im: RatFunc::one(),
        }
    }

    pub fn zero() -> Self {
        ComplexRat::real(RatFunc::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.re.contains(v) || self.im.contains(v)
    }

    pub fn conj(&self) -> Self {
        ComplexRat {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        ComplexRat {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        ComplexRat {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }

    pub fn neg(&self) -> Self {
        ComplexRat {
            re: -&self.re,
            im: -&self.im,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_real() && rhs.is_real() {
            return ComplexRat::real(&self.re * &rhs.re);
        }
        if self.is_real() {
            return ComplexRat {
                re: &self.re * &rhs.re,
                im: &self.re * &rhs.im,
            };
        }
        if rhs.is_real() {
            return ComplexRat {
                re: &self.re * &rhs.re,
                im: &self.im * &rhs.re,
            };
        }
        ComplexRat {
            re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        }
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_real() {
            return Some(ComplexRat::real(self.re.recip()?));
        }
        let norm = &(&self.re * &self.re) + &(&self.im * &self.im);
        let inv = norm.recip()?;
        Some(ComplexRat {
            re: &self.re * &inv,
            im: &(-&self.im) * &inv,
        })
    }

    pub fn derivative(&self, v: Var) -> Self {
        ComplexRat {
            re: self.re.derivative(v),
            im: self.im.derivative(v),
        }
    }

    pub fn substitute(&self, bindings: &HashMap<Var, ComplexRat>) -> Option<Self> {
        if bindings.values().all(ComplexRat::is_real) {
            let real: HashMap<Var, RatFunc> = bindings
                .iter()
                .map(|(v, c)| (*v, c.re.clone()))
                .collect();
            return Some(ComplexRat {
                re: self.re.substitute(&real)?,
                im: self.im.substitute(&real)?,
            });
        }
        // complex bindings: expand through the polynomial structure
        let sub_poly = |p: &Poly| -> ComplexRat {
            let mut acc = ComplexRat::zero();
            for (m, c) in p.terms() {
                let mut t = ComplexRat::real(RatFunc::from_poly(Poly::constant(c.clone())));
                for (v, e) in m.factors() {
                    let base = bindings
                        .get(&v)
                        .cloned()
                        .unwrap_or_else(|| ComplexRat::real(RatFunc::var(v)));
                    for _ in 0..e {
                        t = t.mul(&base);
                    }
                }
                acc = acc.add(&t);
            }
            acc
        };
        let part = |r: &RatFunc| -> Option<ComplexRat> {
            Some(sub_poly(r.numer()).mul(&sub_poly(r.denom()).recip()?))
        };
        let re = part(&self.re)?;
        let im = part(&self.im)?;
        Some(re.add(&im.mul(&ComplexRat::imaginary_unit())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(k: u32) -> RatFunc {
        RatFunc::var(Var(k))
    }

    #[test]
    fn cancels_common_factors() {
        let num = &(&v(1) * &v(1)) - &(&v(2) * &v(2));
        let den = &v(1) - &v(2);
        let r = num.checked_div(&den).unwrap();
        assert_eq!(r, &v(1) + &v(2));
        assert!(r.is_polynomial());
    }

    #[test]
    fn denominator_sign_is_normalized() {
        let r = RatFunc::one().checked_div(&(&v(2) - &v(1))).unwrap();
        assert!(!r.denom().leading_coeff().is_negative());
        assert_eq!(r.numer(), &Poly::from_int(-1));
    }

    #[test]
    fn halves_reduce() {
        let half = RatFunc::ratio(BigInt::from(2), BigInt::from(4)).unwrap();
        assert_eq!(half, RatFunc::ratio(BigInt::from(1), BigInt::from(2)).unwrap());
        assert!(RatFunc::ratio(BigInt::from(1), BigInt::from(0)).is_none());
    }

    #[test]
    fn quotient_rule() {
        // d/dx1 (x1^2+1)/(x1-x2)^2 = -2(x1 x2 + 1)/(x1-x2)^3
        let f = (&(&v(1) * &v(1)) + &RatFunc::one())
            .checked_div(&(&(&v(1) - &v(2)) * &(&v(1) - &v(2))))
            .unwrap();
        let expected = (&(&v(1) * &v(2)) + &RatFunc::one())
            .scale(&BigInt::from(-2))
            .checked_div(&(&v(1) - &v(2)).pow(3).unwrap())
            .unwrap();
        assert_eq!(f.derivative(Var(1)), expected);
    }

    #[test]
    fn substitution_is_simultaneous() {
        let f = &v(1) + &v(2);
        let mut b = HashMap::new();
        b.insert(Var(1), &v(3) - &v(2));
        assert_eq!(f.substitute(&b).unwrap(), v(3));
        let g = RatFunc::one().checked_div(&(&v(1) - &v(2))).unwrap();
        let mut swap = HashMap::new();
        swap.insert(Var(1), v(2));
        swap.insert(Var(2), v(1));
        assert_eq!(g.substitute(&swap).unwrap(), -&g);
        let mut collapse = HashMap::new();
        collapse.insert(Var(1), v(2));
        assert!(g.substitute(&collapse).is_none());
    }

    #[test]
    fn complex_reciprocal() {
        let z = ComplexRat {
            re: RatFunc::one(),
            im: RatFunc::one(),
        };
        let w = z.recip().unwrap();
        let prod = z.mul(&w);
        assert_eq!(prod, ComplexRat::real(RatFunc::one()));
    }
}
