//! Rational functions over ℚ in the deformation parameters.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_bigint::BigInt;
use num_traits::{Num, One, Zero};

use super::gcd::poly_gcd;
use super::ppoly::{ParamPolynomial, DEFAULT_NAMES};
use super::{Field, Rational};

/// `num / den` in canonical form: the two are coprime and `den` is a
/// primitive integer polynomial with positive leading coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: ParamPolynomial,
    den: ParamPolynomial,
}

impl RationalFunction {
    pub fn new(num: ParamPolynomial, den: ParamPolynomial) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let g = poly_gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        Self::from_coprime(num, den)
    }

    /// Skip the gcd; the caller guarantees `num` and `den` are coprime.
    fn from_coprime(num: ParamPolynomial, den: ParamPolynomial) -> Self {
        let c = den.content();
        if c.is_one() {
            return Self { num, den };
        }
        let inv = c.recip();
        Self {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    pub fn from_poly(p: ParamPolynomial) -> Self {
        Self {
            num: p,
            den: ParamPolynomial::one(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(ParamPolynomial::constant(c))
    }

    pub fn var(i: usize) -> Self {
        Self::from_poly(ParamPolynomial::var(i))
    }

    pub fn numer(&self) -> &ParamPolynomial {
        &self.num
    }

    pub fn denom(&self) -> &ParamPolynomial {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn derivative(&self, v: usize) -> Self {
        if self.den.is_one() {
            return Self::from_poly(self.num.derivative(v));
        }
        let n = &(&self.num.derivative(v) * &self.den) - &(&self.num * &self.den.derivative(v));
        Self::new(n, &self.den * &self.den)
    }

    /// Value at a rational point, `None` where the denominator vanishes.
    pub fn eval(&self, point: &[Rational]) -> Option<Rational> {
        let d = self.den.eval(point);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(point) / d)
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        Self {
            num: self.num.pow(n),
            den: self.den.pow(n),
        }
    }

    pub fn fmt_with(&self, names: &[&str]) -> String {
        if self.den.is_one() {
            return self.num.fmt_with(names);
        }
        let wrap = |p: &ParamPolynomial| {
            let s = p.fmt_with(names);
            if p.len() > 1 || s.starts_with('-') || s.contains('/') {
                format!("({s})")
            } else {
                s
            }
        };
        format!("{}/{}", wrap(&self.num), wrap(&self.den))
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        let rhs_num = if negate { -&other.num } else { other.num.clone() };
        if self.den == other.den {
            return Self::new(&self.num + &rhs_num, self.den.clone());
        }
        if self.den.is_one() {
            return Self::from_coprime(&(&self.num * &other.den) + &rhs_num, other.den.clone());
        }
        if other.den.is_one() {
            return Self::from_coprime(&self.num + &(&rhs_num * &self.den), self.den.clone());
        }
        let g = poly_gcd(&self.den, &other.den);
        let bd = self.den.div_exact(&g).unwrap();
        let dd = other.den.div_exact(&g).unwrap();
        let num = &(&self.num * &dd) + &(&rhs_num * &bd);
        let den = &bd * &other.den;
        if g.is_one() {
            Self::from_coprime(num, den)
        } else {
            Self::new(num, den)
        }
    }

    fn mul_impl(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let g1 = poly_gcd(&self.num, &other.den);
        let g2 = poly_gcd(&other.num, &self.den);
        let a = self.num.div_exact(&g1).unwrap();
        let d = other.den.div_exact(&g1).unwrap();
        let c = other.num.div_exact(&g2).unwrap();
        let b = self.den.div_exact(&g2).unwrap();
        Self::from_coprime(&a * &c, &b * &d)
    }

    fn inv_impl(&self) -> Self {
        assert!(!self.num.is_zero(), "inverse of zero");
        Self::from_coprime(self.den.clone(), self.num.clone())
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&DEFAULT_NAMES))
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalFunction({self})")
    }
}

impl Zero for RationalFunction {
    fn zero() -> Self {
        Self::from_poly(ParamPolynomial::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RationalFunction {
    fn one() -> Self {
        Self::from_poly(ParamPolynomial::one())
    }
}

impl Add for RationalFunction {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_impl(&rhs, false)
    }
}

impl Sub for RationalFunction {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.add_impl(&rhs, true)
    }
}

impl Mul for RationalFunction {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_impl(&rhs)
    }
}

impl Div for RationalFunction {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.mul_impl(&rhs.inv_impl())
    }
}

/// Every nonzero element is a unit, so the remainder is always zero.
impl Rem for RationalFunction {
    type Output = Self;
    fn rem(self, _rhs: Self) -> Self {
        Self::zero()
    }
}

impl Neg for RationalFunction {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            num: -self.num,
            den: self.den,
        }
    }
}

impl Num for RationalFunction {
    type FromStrRadixErr = num_bigint::ParseBigIntError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        let n = BigInt::from_str_radix(s, radix)?;
        Ok(Self::constant(Rational::from_integer(n)))
    }
}

impl Field for RationalFunction {
    fn from_rational(q: &Rational) -> Self {
        Self::constant(q.clone())
    }

    fn inv(&self) -> Self {
        self.inv_impl()
    }

    fn add_ref(&self, other: &Self) -> Self {
        self.add_impl(other, false)
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self.add_impl(other, true)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.mul_impl(other)
    }

    fn div_ref(&self, other: &Self) -> Self {
        self.mul_impl(&other.inv_impl())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn x() -> RationalFunction {
        RationalFunction::var(0)
    }

    fn k(n: i64) -> RationalFunction {
        RationalFunction::constant(rat(n))
    }

    #[test]
    fn canonical_form() {
        // (2x - 2) / (4x^2 - 4) = 1 / (2x + 2)
        let num = ParamPolynomial::var(0).scale(&rat(2)) - ParamPolynomial::from_int(2);
        let den = ParamPolynomial::var(0).pow(2).scale(&rat(4)) - ParamPolynomial::from_int(4);
        let r = RationalFunction::new(num, den);
        assert_eq!(r.fmt_with(&["x"]), "(1/2)/(x + 1)");
        assert_eq!(r, (k(2) * x() + k(2)).inv());
    }

    #[test]
    fn field_axioms_spot() {
        let a = x() / (x() + k(1));
        let b = (x() - k(1)) / (x() + k(2));
        assert_eq!(a.clone() + b.clone() - b.clone(), a);
        assert_eq!((a.clone() * b.clone()) / b.clone(), a);
        assert!((a.clone() - a.clone()).is_zero());
        let d = a.derivative(0);
        assert_eq!(d, (x() + k(1)).pow(2).inv());
    }
}
