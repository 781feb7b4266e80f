//! Sparse multivariate polynomials over ℚ in the deformation parameters.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{denominator_lcm, numerator_gcd, Rational};

/// Upper bound on the number of parameters a polynomial may involve.
pub const MAX_PARAMS: usize = 4;

/// Exponent vector of a parameter monomial.
pub type PExp = [u32; MAX_PARAMS];

const ZERO_EXP: PExp = [0; MAX_PARAMS];

fn exp_degree(e: &PExp) -> u32 {
    e.iter().sum()
}

/// Graded-lex comparison; the first parameter is the largest.
pub(crate) fn glex_cmp(a: &PExp, b: &PExp) -> Ordering {
    exp_degree(a).cmp(&exp_degree(b)).then_with(|| a.cmp(b))
}

fn exp_add(a: &PExp, b: &PExp) -> PExp {
    let mut r = *a;
    for i in 0..MAX_PARAMS {
        r[i] += b[i];
    }
    r
}

fn exp_divides(a: &PExp, b: &PExp) -> bool {
    (0..MAX_PARAMS).all(|i| a[i] <= b[i])
}

fn exp_sub(a: &PExp, b: &PExp) -> PExp {
    let mut r = *a;
    for i in 0..MAX_PARAMS {
        r[i] -= b[i];
    }
    r
}

/// Polynomial in up to [`MAX_PARAMS`] parameters with rational coefficients.
///
/// Terms are kept sorted in descending graded-lex order with no zero
/// coefficients, so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ParamPolynomial {
    terms: Vec<(PExp, Rational)>,
}

impl ParamPolynomial {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(ZERO_EXP, c)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn monomial(e: PExp, c: Rational) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Self { terms: vec![(e, c)] }
        }
    }

    /// The parameter with index `i`.
    pub fn var(i: usize) -> Self {
        let mut e = ZERO_EXP;
        e[i] = 1;
        Self::monomial(e, Rational::one())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (PExp, Rational)>) -> Self {
        let mut acc: HashMap<PExp, Rational> = HashMap::new();
        for (e, c) in terms {
            *acc.entry(e).or_insert_with(Rational::zero) += c;
        }
        Self::from_map(acc)
    }

    fn from_map(acc: HashMap<PExp, Rational>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| glex_cmp(&b.0, &a.0));
        Self { terms }
    }

    pub fn terms(&self) -> &[(PExp, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == ZERO_EXP && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0 == ZERO_EXP)
    }

    /// The value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(e, c)] if *e == ZERO_EXP => Some(c.clone()),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.first().map(|(_, c)| c)
    }

    pub fn leading_exponent(&self) -> Option<&PExp> {
        self.terms.first().map(|(e, _)| e)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(e, _)| exp_degree(e)).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.iter().map(|(e, _)| e[v]).max().unwrap_or(0)
    }

    /// Bit mask of the parameters that actually occur.
    pub fn support_mask(&self) -> u32 {
        let mut m = 0;
        for (e, _) in &self.terms {
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m |= 1 << i;
                }
            }
        }
        m
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, k)| (*e, k * c)).collect(),
        }
    }

    /// Multiply by the monomial `c * p^e`.
    pub fn mul_monomial(&self, e: &PExp, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(f, k)| (exp_add(f, e), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn derivative(&self, v: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[v] > 0)
            .map(|(e, c)| {
                let mut f = *e;
                f[v] -= 1;
                (f, c * Rational::from_integer(BigInt::from(e[v])))
            })
            .collect();
        let mut p = Self { terms };
        p.terms.sort_by(|a, b| glex_cmp(&b.0, &a.0));
        p
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= num_traits::pow(point[i].clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitute `value` for parameter `v`.
    pub fn partial_eval(&self, v: usize, value: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| {
            let mut f = *e;
            f[v] = 0;
            (f, c * num_traits::pow(value.clone(), e[v] as usize))
        }))
    }

    /// Rational content: `self / content()` has coprime integer coefficients
    /// and a positive leading coefficient.
    pub fn content(&self) -> Rational {
        if self.is_zero() {
            return Rational::one();
        }
        let den = denominator_lcm(self.terms.iter().map(|(_, c)| c));
        let num = numerator_gcd(self.terms.iter().map(|(_, c)| c));
        let mut content = Rational::new(num, den);
        if self.terms[0].1.is_negative() {
            content = -content;
        }
        content
    }

    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(&self.content().recip())
    }

    /// Exact quotient `self / other`, or `None` if `other` does not divide.
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        assert!(!other.is_zero(), "division by zero polynomial");
        if let Some(c) = other.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (le, lc) = other.terms[0].clone();
        let lc_inv = lc.recip();
        let mut rem = self.clone();
        let mut quot: Vec<(PExp, Rational)> = Vec::new();
        while let Some((re, rc)) = rem.terms.first().cloned() {
            if !exp_divides(&le, &re) {
                return None;
            }
            let qe = exp_sub(&re, &le);
            let qc = rc * &lc_inv;
            rem = &rem - &other.mul_monomial(&qe, &qc);
            quot.push((qe, qc));
        }
        Some(Self { terms: quot })
    }

    /// Coefficients as a polynomial in parameter `v`; entry `i` multiplies `v^i`.
    pub fn to_univariate(&self, v: usize) -> Vec<ParamPolynomial> {
        let deg = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(PExp, Rational)>> = vec![Vec::new(); deg + 1];
        for (e, c) in &self.terms {
            let mut f = *e;
            f[v] = 0;
            buckets[e[v] as usize].push((f, c.clone()));
        }
        buckets
            .into_iter()
            .map(|ts| {
                let mut p = Self { terms: ts };
                p.terms.sort_by(|a, b| glex_cmp(&b.0, &a.0));
                p
            })
            .collect()
    }

    pub fn from_univariate(v: usize, coeffs: &[ParamPolynomial]) -> Self {
        let mut terms = Vec::new();
        for (i, c) in coeffs.iter().enumerate() {
            for (e, k) in &c.terms {
                let mut f = *e;
                f[v] += i as u32;
                terms.push((f, k.clone()));
            }
        }
        let mut p = Self { terms };
        p.terms.sort_by(|a, b| glex_cmp(&b.0, &a.0));
        p
    }

    /// Render with the given parameter names, e.g. `4*psi^3 + 27`.
    pub fn fmt_with(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const = *e == ZERO_EXP;
            if !abs.is_one() || is_const {
                factors.push(abs.to_string());
            }
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = names.get(i).copied().unwrap_or("?");
                if k == 1 {
                    factors.push(name.to_string());
                } else {
                    factors.push(format!("{name}^{k}"));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

pub(crate) const DEFAULT_NAMES: [&str; MAX_PARAMS] = ["p1", "p2", "p3", "p4"];

impl fmt::Display for ParamPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&DEFAULT_NAMES))
    }
}

impl fmt::Debug for ParamPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParamPolynomial({self})")
    }
}

fn merge(a: &ParamPolynomial, b: &ParamPolynomial, negate_b: bool) -> ParamPolynomial {
    let mut terms = Vec::with_capacity(a.terms.len() + b.terms.len());
    let (mut i, mut j) = (0, 0);
    while i < a.terms.len() && j < b.terms.len() {
        match glex_cmp(&a.terms[i].0, &b.terms[j].0) {
            Ordering::Greater => {
                terms.push(a.terms[i].clone());
                i += 1;
            }
            Ordering::Less => {
                let (e, c) = &b.terms[j];
                terms.push((*e, if negate_b { -c } else { c.clone() }));
                j += 1;
            }
            Ordering::Equal => {
                let c = if negate_b {
                    &a.terms[i].1 - &b.terms[j].1
                } else {
                    &a.terms[i].1 + &b.terms[j].1
                };
                if !c.is_zero() {
                    terms.push((a.terms[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    terms.extend(a.terms[i..].iter().cloned());
    for (e, c) in &b.terms[j..] {
        terms.push((*e, if negate_b { -c } else { c.clone() }));
    }
    ParamPolynomial { terms }
}

impl<'a> Add<&'a ParamPolynomial> for &'a ParamPolynomial {
    type Output = ParamPolynomial;
    fn add(self, rhs: &'a ParamPolynomial) -> ParamPolynomial {
        merge(self, rhs, false)
    }
}

impl<'a> Sub<&'a ParamPolynomial> for &'a ParamPolynomial {
    type Output = ParamPolynomial;
    fn sub(self, rhs: &'a ParamPolynomial) -> ParamPolynomial {
        merge(self, rhs, true)
    }
}

impl<'a> Mul<&'a ParamPolynomial> for &'a ParamPolynomial {
    type Output = ParamPolynomial;
    fn mul(self, rhs: &'a ParamPolynomial) -> ParamPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return ParamPolynomial::zero();
        }
        if self.terms.len() == 1 {
            return rhs.mul_monomial(&self.terms[0].0, &self.terms[0].1);
        }
        if rhs.terms.len() == 1 {
            return self.mul_monomial(&rhs.terms[0].0, &rhs.terms[0].1);
        }
        let mut acc: HashMap<PExp, Rational> =
            HashMap::with_capacity(self.terms.len() * rhs.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = exp_add(ea, eb);
                let t = ca * cb;
                match acc.get_mut(&e) {
                    Some(v) => *v += t,
                    None => {
                        acc.insert(e, t);
                    }
                }
            }
        }
        ParamPolynomial::from_map(acc)
    }
}

impl Neg for ParamPolynomial {
    type Output = ParamPolynomial;
    fn neg(self) -> ParamPolynomial {
        ParamPolynomial {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl Neg for &ParamPolynomial {
    type Output = ParamPolynomial;
    fn neg(self) -> ParamPolynomial {
        -(self.clone())
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl $tr for ParamPolynomial {
            type Output = ParamPolynomial;
            fn $m(self, rhs: ParamPolynomial) -> ParamPolynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);

impl Zero for ParamPolynomial {
    fn zero() -> Self {
        ParamPolynomial::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for ParamPolynomial {
    fn one() -> Self {
        ParamPolynomial::one()
    }
}
