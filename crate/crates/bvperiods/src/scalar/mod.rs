//! Exact coefficient arithmetic.
//!
//! Everything downstream is generic over [`Field`], which is implemented by
//! [`Rational`] (plain ℚ) and [`RationalFunction`] (ℚ(ψ, φ, χ, ...)).
//! Fraction-free elimination works over the integral domains [`BigInt`] and
//! [`ParamPolynomial`] through the [`Domain`] trait.

mod gcd;
mod linalg;
mod ppoly;
mod ratfn;

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Num, One, Signed, Zero};

pub use linalg::{
    bareiss_nullspace, bareiss_rank, nullspace, rank, rational_nullspace, rational_rank, sample_rank, Matrix,
};
pub use ppoly::{PExp, ParamPolynomial, MAX_PARAMS};
pub use ratfn::RationalFunction;

/// Exact rational number.
pub type Rational = num_rational::BigRational;

/// A commutative field with exact arithmetic.
///
/// The `*_ref` methods exist so that hot loops can avoid cloning big
/// coefficients; the defaults clone.
pub trait Field: Num + Clone + Debug + Display + Neg<Output = Self> + Send + Sync + 'static {
    fn from_rational(q: &Rational) -> Self;

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }

    fn add_ref(&self, other: &Self) -> Self {
        self.clone() + other.clone()
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self.clone() - other.clone()
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }

    fn div_ref(&self, other: &Self) -> Self {
        self.clone() / other.clone()
    }

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }
}

impl Field for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn inv(&self) -> Self {
        self.recip()
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn div_ref(&self, other: &Self) -> Self {
        self / other
    }
}

/// An integral domain with exact division and gcd, as needed by Bareiss
/// elimination and content removal.
pub trait Domain: Clone + Debug + PartialEq + Zero + One + Neg<Output = Self> {
    fn mul_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    /// `self / other`, assuming the division is exact.
    fn exact_div(&self, other: &Self) -> Self;
    fn gcd(&self, other: &Self) -> Self;
    /// Whether the leading coefficient is negative.
    fn is_negative_lead(&self) -> bool;
    /// Rescale a vector by a unit so its entries have no common unit factor.
    fn normalize_units(_xs: &mut [Self]) {}
}

impl Domain for BigInt {
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn exact_div(&self, other: &Self) -> Self {
        debug_assert!((self % other).is_zero());
        self / other
    }

    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }

    fn is_negative_lead(&self) -> bool {
        self.is_negative()
    }
}

impl Domain for ParamPolynomial {
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn exact_div(&self, other: &Self) -> Self {
        self.div_exact(other)
            .expect("Bareiss pivot division must be exact")
    }

    fn gcd(&self, other: &Self) -> Self {
        gcd::poly_gcd(self, other)
    }

    fn is_negative_lead(&self) -> bool {
        self.leading_coefficient().map_or(false, |c| c.is_negative())
    }

    fn normalize_units(xs: &mut [Self]) {
        let qs: Vec<&Rational> = xs.iter().flat_map(|p| p.terms().iter().map(|(_, q)| q)).collect();
        let den = denominator_lcm(qs.iter().copied());
        let num = numerator_gcd(qs.iter().copied());
        if num.is_zero() {
            return;
        }
        let s = Rational::new(den, num);
        if !s.is_one() {
            for x in xs.iter_mut() {
                *x = x.scale(&s);
            }
        }
    }
}

/// Parse a rational literal such as `-3`, `7/4`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Least common multiple of the denominators of `qs`.
pub fn denominator_lcm<'a>(qs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    qs.into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Gcd of the numerators of `qs` (zero if all are zero).
pub fn numerator_gcd<'a>(qs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    qs.into_iter()
        .fold(BigInt::zero(), |acc, q| Integer::gcd(&acc, q.numer()))
}

#[cfg(test)]
pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[cfg(test)]
pub(crate) fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub use gcd::poly_gcd;

/// Divide a vector of polynomials by its polynomial gcd and rational
/// content, then make the leading coefficient of the first nonzero entry
/// positive. Zero vectors are returned unchanged.
pub fn primitive_vector(v: &[ParamPolynomial]) -> Vec<ParamPolynomial> {
    let Some(first) = v.iter().find(|p| !p.is_zero()) else {
        return v.to_vec();
    };
    let mut g = ParamPolynomial::zero();
    for p in v {
        g = poly_gcd(&g, p);
        if g.is_one() {
            break;
        }
    }
    let mut out: Vec<ParamPolynomial> = v
        .iter()
        .map(|p| p.div_exact(&g).expect("gcd divides every entry"))
        .collect();
    let qs: Vec<&Rational> = out.iter().flat_map(|p| p.terms().iter().map(|(_, q)| q)).collect();
    let mut s = Rational::new(denominator_lcm(qs.iter().copied()), numerator_gcd(qs.iter().copied()));
    let lead = first.div_exact(&g).expect("gcd divides");
    if lead.leading_coefficient().unwrap().is_negative() {
        s = -s;
    }
    for p in out.iter_mut() {
        *p = p.scale(&s);
    }
    out
}
