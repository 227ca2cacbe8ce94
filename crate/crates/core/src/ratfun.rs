//! Exact rational functions of `N` over arbitrary-precision integers,
//! carrying a validity threshold: the function is guaranteed to equal the
//! represented quantity for every integer `N ≥ valid_from`.
//!
//! No floating point anywhere; all arithmetic is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Dense integer-coefficient polynomial, little-endian by degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<BigInt>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        let c = c.into();
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly(vec![c])
        }
    }

    /// The monomial `N`.
    pub fn n() -> Self {
        Poly(vec![BigInt::zero(), BigInt::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn leading(&self) -> BigInt {
        self.0.last().cloned().unwrap_or_else(BigInt::zero)
    }

    fn trim(mut v: Vec<BigInt>) -> Poly {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        Poly(v)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut v = vec![BigInt::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            v[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            v[i] += c;
        }
        Poly::trim(v)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![BigInt::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::trim(v)
    }

    pub fn scale(&self, c: &BigInt) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|a| a * c).collect())
    }

    pub fn eval(&self, n: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.0.iter().rev() {
            acc = acc * n + c;
        }
        acc
    }

    /// Content: gcd of coefficients (non-negative).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.0 {
            g = g.gcd(c);
        }
        g
    }

    /// Exact division, panics if not divisible (internal use on known-divisible data).
    fn div_exact(&self, d: &Poly) -> Poly {
        let (q, r) = self.pseudo_div(d);
        assert!(r.is_zero(), "polynomial division not exact");
        q
    }

    /// Division over Q returning (quotient, remainder) scaled to integer
    /// coefficients: computes q, r with self * lc(d)^k = q*d + r.
    /// Here we only need the case where division is exact over Q after
    /// clearing contents, so we implement rational division directly.
    fn pseudo_div(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero());
        // Rational long division; exactness is checked by the caller.
        let mut rem: Vec<BigRational> =
            self.0.iter().map(|c| BigRational::from(c.clone())).collect();
        let dd = d.0.len() - 1;
        let lead = BigRational::from(d.0[dd].clone());
        let mut q = vec![BigRational::zero(); rem.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1;
            let coef = rem[k].clone() / lead.clone();
            if !coef.is_zero() {
                q[k - dd] = coef.clone();
                for i in 0..=dd {
                    let adj = coef.clone() * BigRational::from(d.0[i].clone());
                    rem[k - dd + i] -= adj;
                }
            }
            rem.pop();
        }
        let to_poly = |v: Vec<BigRational>| {
            let mut out = Vec::with_capacity(v.len());
            for c in v {
                assert!(c.is_integer(), "non-integer coefficient in exact division");
                out.push(c.to_integer());
            }
            Poly::trim(out)
        };
        (to_poly(q), to_poly(rem))
    }

    /// Polynomial gcd over Q, returned primitive with positive leading coefficient.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.primitive_positive();
        }
        if other.is_zero() {
            return self.primitive_positive();
        }
        let mut a = self.primitive_positive();
        let mut b = other.primitive_positive();
        while !b.is_zero() {
            // Scale a so the division is exact enough: use rational remainder.
            let r = a.rational_rem(&b);
            a = b;
            b = r.primitive_positive();
        }
        a.primitive_positive()
    }

    /// Remainder of self / d over Q, cleared to integer coefficients.
    fn rational_rem(&self, d: &Poly) -> Poly {
        let mut rem: Vec<BigRational> =
            self.0.iter().map(|c| BigRational::from(c.clone())).collect();
        let dd = d.0.len() - 1;
        let lead = BigRational::from(d.0[dd].clone());
        while rem.len() > dd {
            let k = rem.len() - 1;
            let coef = rem[k].clone() / lead.clone();
            if !coef.is_zero() {
                for i in 0..=dd {
                    let adj = coef.clone() * BigRational::from(d.0[i].clone());
                    rem[k - dd + i] -= adj;
                }
            }
            rem.pop();
        }
        // Clear denominators.
        let mut denom = BigInt::one();
        for c in &rem {
            denom = denom.lcm(c.denom());
        }
        Poly::trim(
            rem.into_iter()
                .map(|c| (c * BigRational::from(denom.clone())).to_integer())
                .collect(),
        )
    }

    fn primitive_positive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = self.content();
        if self.leading().is_negative() {
            c = -c;
        }
        Poly(self.0.iter().map(|a| a / &c).collect())
    }

    /// Falling factorial `(N)_k = N (N-1) ⋯ (N-k+1)`.
    pub fn falling_factorial(k: usize) -> Poly {
        let mut p = Poly::constant(1);
        for i in 0..k {
            p = p.mul(&Poly(vec![BigInt::from(-(i as i64)), BigInt::one()]));
        }
        p
    }
}

/// Exact rational function of `N`, valid for all integers `N ≥ valid_from`.
///
/// Normal form: numerator and denominator are coprime in `Q[N]`, share no
/// integer content, and the denominator has positive leading coefficient
/// (so the zero function is `0 / 1` and representations are unique).
#[derive(Debug, Clone)]
pub struct RatFun {
    num: Poly,
    den: Poly,
    valid_from: i64,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly, valid_from: i64) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RatFun { num, den, valid_from };
        r.reduce();
        r
    }

    pub fn zero() -> Self {
        RatFun { num: Poly::zero(), den: Poly::constant(1), valid_from: 1 }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        RatFun { num: Poly::constant(c), den: Poly::constant(1), valid_from: 1 }
    }

    pub fn from_rational(q: &BigRational) -> Self {
        RatFun::new(Poly::constant(q.numer().clone()), Poly::constant(q.denom().clone()), 1)
    }

    /// `N^k` for `k ∈ Z` (negative exponents give `1/N^{-k}`).
    pub fn n_pow(k: i64) -> Self {
        let mono = |d: usize| {
            let mut v = vec![BigInt::zero(); d + 1];
            v[d] = BigInt::one();
            Poly(v)
        };
        if k >= 0 {
            RatFun { num: mono(k as usize), den: Poly::constant(1), valid_from: 1 }
        } else {
            RatFun { num: Poly::constant(1), den: mono((-k) as usize), valid_from: 1 }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn valid_from(&self) -> i64 {
        self.valid_from
    }

    pub fn with_valid_from(mut self, n0: i64) -> Self {
        self.valid_from = n0;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Degree as a rational function: deg num − deg den; `None` for zero.
    pub fn degree(&self) -> Option<i64> {
        self.num
            .degree()
            .map(|dn| dn as i64 - self.den.degree().unwrap() as i64)
    }

    /// Leading coefficient (ratio of leading coefficients); 0 for the zero function.
    pub fn leading_coefficient(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        BigRational::new(self.num.leading(), self.den.leading())
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::constant(1);
            return;
        }
        let g = self.num.gcd(&self.den);
        if g.degree().unwrap_or(0) > 0 || g.leading() != BigInt::one() {
            self.num = self.num.div_exact(&g);
            self.den = self.den.div_exact(&g);
        }
        let mut cn = self.num.content();
        let cd = self.den.content();
        let mut c = cn.gcd(&cd);
        if self.den.leading().is_negative() {
            c = -c;
        }
        if !c.is_one() {
            self.num = Poly(self.num.0.iter().map(|a| a / &c).collect());
            self.den = Poly(self.den.0.iter().map(|a| a / &c).collect());
        }
        cn = self.num.content();
        debug_assert!(!cn.is_zero());
    }

    /// Exact evaluation; `None` when the denominator vanishes at `n`.
    pub fn eval(&self, n: i64) -> Option<BigRational> {
        let nn = BigInt::from(n);
        let d = self.den.eval(&nn);
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(self.num.eval(&nn), d))
    }

    /// Equality as rational functions (thresholds ignored).
    pub fn same_function(&self, other: &RatFun) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "num": self.num.0.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "den": self.den.0.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "valid_from": self.valid_from,
        })
    }
}

impl PartialEq for RatFun {
    fn eq(&self, other: &Self) -> bool {
        self.same_function(other)
    }
}
impl Eq for RatFun {}

impl Serialize for RatFun {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &Poly| {
            if p.is_zero() {
                return "0".to_string();
            }
            let mut terms = Vec::new();
            for (i, c) in p.0.iter().enumerate().rev() {
                if c.is_zero() {
                    continue;
                }
                let t = match i {
                    0 => format!("{c}"),
                    1 if c.is_one() => "N".into(),
                    1 => format!("{c}*N"),
                    _ if c.is_one() => format!("N^{i}"),
                    _ => format!("{c}*N^{i}"),
                };
                terms.push(t);
            }
            terms.join(" + ").replace("+ -", "- ")
        };
        if self.den == Poly::constant(1) {
            write!(f, "{}", show(&self.num))
        } else {
            write!(f, "({}) / ({})", show(&self.num), show(&self.den))
        }
    }
}

impl Add for &RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        RatFun::new(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
            self.valid_from.max(rhs.valid_from),
        )
    }
}

impl Sub for &RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        self + &(-rhs)
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun { num: self.num.neg(), den: self.den.clone(), valid_from: self.valid_from }
    }
}

impl Mul for &RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        RatFun::new(
            self.num.mul(&rhs.num),
            self.den.mul(&rhs.den),
            self.valid_from.max(rhs.valid_from),
        )
    }
}

impl RatFun {
    pub fn scale(&self, q: &BigRational) -> RatFun {
        RatFun::new(
            self.num.scale(q.numer()),
            self.den.scale(q.denom()),
            self.valid_from,
        )
    }
}
