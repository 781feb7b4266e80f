//! Exact Gamma values at rational points.
//!
//! `Γ(x)` for rational `x` is a rational multiple of `Γ(frac(x))`, with
//! `frac(x) ∈ (0, 1]` and `Γ(1) = 1`. Coefficients are therefore finite sums
//! of rationals times products of such atoms, optionally times one of the
//! transcendental symbols produced by first derivatives (`γ`, `log 2`).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::diffop::SeriesCoeff;
use crate::scalar::Rational;

/// `prod_f Γ(f)^e` over fractional parts `f ∈ (0, 1)`.
pub type AtomKey = BTreeMap<Rational, i32>;

/// Symbol multiplying a first-order jet term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LogSym {
    One,
    EulerGamma,
    Log2,
}

/// `sum rational * atoms * symbol`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GammaSum {
    terms: BTreeMap<(AtomKey, LogSym), Rational>,
}

impl GammaSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(q: Rational) -> Self {
        let mut s = Self::zero();
        s.push(AtomKey::new(), LogSym::One, q);
        s
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    fn push(&mut self, atoms: AtomKey, sym: LogSym, q: Rational) {
        if q.is_zero() {
            return;
        }
        let key = (atoms, sym);
        let e = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *e += q;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<(AtomKey, LogSym), Rational> {
        &self.terms
    }

    /// The rational value if no atoms or symbols occur.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let ((a, s), q) = self.terms.iter().next().unwrap();
                (a.is_empty() && *s == LogSym::One).then(|| q.clone())
            }
            _ => None,
        }
    }

    /// Part multiplying a given symbol.
    pub fn symbol_part(&self, sym: LogSym) -> GammaSum {
        let mut out = Self::zero();
        for ((a, s), q) in &self.terms {
            if *s == sym {
                out.push(a.clone(), LogSym::One, q.clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((a, s), q) in &other.terms {
            out.push(a.clone(), *s, q.clone());
        }
        out
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * q)).collect(),
        }
    }

    /// Product; at most one factor of each product term may carry a symbol
    /// (first-order jets only).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((a1, s1), q1) in &self.terms {
            for ((a2, s2), q2) in &other.terms {
                let sym = match (s1, s2) {
                    (LogSym::One, s) | (s, LogSym::One) => *s,
                    _ => panic!("product of two transcendental symbols is beyond first order"),
                };
                out.push(mul_atoms(a1, a2), sym, q1 * q2);
            }
        }
        out
    }

    /// Multiply by a single atom product.
    pub fn mul_atoms(&self, atoms: &AtomKey) -> Self {
        let mut out = Self::zero();
        for ((a, s), q) in &self.terms {
            out.push(mul_atoms(a, atoms), *s, q.clone());
        }
        out
    }
}

fn mul_atoms(a: &AtomKey, b: &AtomKey) -> AtomKey {
    let mut out = a.clone();
    for (f, e) in b {
        let x = out.entry(f.clone()).or_insert(0);
        *x += e;
        if *x == 0 {
            out.remove(f);
        }
    }
    out
}

impl SeriesCoeff for GammaSum {
    fn zero_coeff() -> Self {
        Self::zero()
    }

    fn vanishes(&self) -> bool {
        self.is_zero()
    }

    fn accumulate(&mut self, other: &Self) {
        for ((a, s), q) in &other.terms {
            self.push(a.clone(), *s, q.clone());
        }
    }

    fn scaled(&self, q: &Rational) -> Self {
        self.scale(q)
    }
}

impl fmt::Display for GammaSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for ((atoms, sym), q) in &self.terms {
            let mut factors: Vec<String> = atoms
                .iter()
                .map(|(x, e)| if *e == 1 { format!("G({x})") } else { format!("G({x})^{e}") })
                .collect();
            match sym {
                LogSym::One => {}
                LogSym::EulerGamma => factors.push("EulerGamma".into()),
                LogSym::Log2 => factors.push("log(2)".into()),
            }
            let (neg, mag) = (q.is_negative(), q.abs());
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Whether `x` is a non-positive integer (a pole of `Γ`).
pub fn is_pole(x: &Rational) -> bool {
    x.is_integer() && !x.is_positive()
}

/// Split `x = f + n` with `f ∈ (0, 1]` and integer `n`.
fn split(x: &Rational) -> (Rational, BigInt) {
    let fl = x.floor().to_integer();
    let mut f = x - Rational::from_integer(fl.clone());
    let mut n = fl;
    if f.is_zero() {
        f = Rational::one();
        n -= 1;
    }
    (f, n)
}

/// `Γ(x) = r * Γ(f)` for `x` not a pole; returns `(r, f)`.
fn reduce(x: &Rational) -> (Rational, Rational) {
    assert!(!is_pole(x), "Γ has a pole at {x}");
    let (f, n) = split(x);
    let mut r = Rational::one();
    if n.is_positive() {
        // Γ(f + n) = (f)(f+1)...(f+n-1) Γ(f)
        let mut t = f.clone();
        let mut k = BigInt::zero();
        while k < n {
            r *= &t;
            t += Rational::one();
            k += 1;
        }
    } else {
        // Γ(f - m) = Γ(f) / ((f-1)(f-2)...(f-m))
        let mut t = f.clone();
        let mut k = BigInt::zero();
        while k > n {
            t -= Rational::one();
            r /= &t;
            k -= 1;
        }
    }
    (r, f)
}

fn atom(f: Rational, e: i32) -> AtomKey {
    let mut a = AtomKey::new();
    if !f.is_one() {
        a.insert(f, e);
    }
    a
}

/// `Γ(x)`; panics at poles.
pub fn gamma(x: &Rational) -> GammaSum {
    let (r, f) = reduce(x);
    GammaSum::rational(r).mul_atoms(&atom(f, 1))
}

/// `1/Γ(x)`, zero at poles.
pub fn rgamma(x: &Rational) -> GammaSum {
    if is_pole(x) {
        return GammaSum::zero();
    }
    let (r, f) = reduce(x);
    GammaSum::rational(r.recip()).mul_atoms(&atom(f, -1))
}

/// `n!` for `n ≥ 0` as a rational.
pub fn factorial(n: u64) -> Rational {
    Rational::from_integer(crate::scalar::factorial(n))
}

/// `ψ(x) = Γ'(x)/Γ(x)` for positive integers and half-integers, as
/// `rational + rational*γ + rational*log 2`.
pub fn digamma(x: &Rational) -> Option<GammaSum> {
    if !x.is_positive() {
        return None;
    }
    let two = BigInt::from(2);
    if x.is_integer() {
        // ψ(n) = H_(n-1) - γ
        let n = x.to_integer();
        let mut h = Rational::zero();
        let mut k = BigInt::one();
        while k < n {
            h += Rational::new(BigInt::one(), k.clone());
            k += 1;
        }
        let mut out = GammaSum::rational(h);
        out.push(AtomKey::new(), LogSym::EulerGamma, -Rational::one());
        return Some(out);
    }
    if x.denom() == &two {
        // ψ(n + 1/2) = -γ - 2 log 2 + sum_(k=1..n) 2/(2k-1)
        let n = (x.numer() - BigInt::one()).div_floor(&two);
        let mut h = Rational::zero();
        let mut k = BigInt::one();
        while k <= n {
            h += Rational::new(two.clone(), &two * &k - 1);
            k += 1;
        }
        let mut out = GammaSum::rational(h);
        out.push(AtomKey::new(), LogSym::EulerGamma, -Rational::one());
        out.push(AtomKey::new(), LogSym::Log2, Rational::from_integer(-two));
        return Some(out);
    }
    None
}

/// One factor `Γ(alpha . D + beta)^(±1)` of a Gamma ratio in directions `D`.
#[derive(Clone, Debug)]
pub struct GammaFactor {
    pub alpha: Vec<Rational>,
    pub beta: Rational,
    pub numerator: bool,
}

/// Value and first derivatives at `D = 0` of a Gamma ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: GammaSum,
    /// Empty for jet order 0.
    pub derivatives: Vec<GammaSum>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JetError {
    #[error("numerator Gamma has a pole at {0}")]
    NumeratorPole(Rational),
    #[error("digamma at {0} is outside integers and half-integers")]
    Digamma(Rational),
}

/// Expand `prod Γ(...)^(±1)` to order `order ∈ {0, 1}` in `dims` directions.
///
/// A denominator pole at `-n` contributes `1/Γ(-n + ε) = (-1)^n n! ε + O(ε²)`,
/// so one such pole leaves only first derivatives and two or more vanish
/// to first order.
pub fn expand(factors: &[GammaFactor], dims: usize, order: u32) -> Result<Jet, JetError> {
    let mut value = GammaSum::one();
    let mut poles: Vec<&GammaFactor> = Vec::new();
    for g in factors {
        if is_pole(&g.beta) {
            if g.numerator {
                return Err(JetError::NumeratorPole(g.beta.clone()));
            }
            poles.push(g);
            continue;
        }
        value = value.mul(&if g.numerator { gamma(&g.beta) } else { rgamma(&g.beta) });
    }
    let zero_jet = |dims: usize| Jet {
        value: GammaSum::zero(),
        derivatives: if order == 0 { Vec::new() } else { vec![GammaSum::zero(); dims] },
    };
    match (poles.len(), order) {
        (0, 0) => Ok(Jet {
            value,
            derivatives: Vec::new(),
        }),
        (0, _) => {
            let mut derivatives = vec![GammaSum::zero(); dims];
            for g in factors {
                let psi = digamma(&g.beta).ok_or_else(|| JetError::Digamma(g.beta.clone()))?;
                let sign = if g.numerator { Rational::one() } else { -Rational::one() };
                for (k, a) in g.alpha.iter().enumerate() {
                    if !a.is_zero() {
                        derivatives[k] = derivatives[k].add(&psi.scale(&(a * &sign)));
                    }
                }
            }
            let derivatives = derivatives.iter().map(|d| value.mul(d)).collect();
            Ok(Jet { value, derivatives })
        }
        (1, 1) => {
            let g = poles[0];
            let n = (-g.beta.clone()).to_integer();
            let n_u64: u64 = (&n).try_into().expect("pole index fits in u64");
            let mut c = factorial(n_u64);
            if n.is_odd() {
                c = -c;
            }
            let derivatives = g.alpha.iter().map(|a| value.scale(&(a * &c))).collect();
            Ok(Jet {
                value: GammaSum::zero(),
                derivatives,
            })
        }
        _ => Ok(zero_jet(dims)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn gamma_reduction() {
        assert_eq!(gamma(&q(5, 1)).as_rational(), Some(q(24, 1)));
        let g = gamma(&q(5, 2));
        // Γ(5/2) = 3/4 Γ(1/2)
        let mut want = AtomKey::new();
        want.insert(q(1, 2), 1);
        assert_eq!(g.terms().get(&(want.clone(), LogSym::One)), Some(&q(3, 4)));
        // 1/Γ(-1/2) = -1/2 / Γ(1/2)
        let r = rgamma(&q(-1, 2));
        want.insert(q(1, 2), -1);
        assert_eq!(r.terms().get(&(want, LogSym::One)), Some(&q(-1, 2)));
        assert!(rgamma(&q(-3, 1)).is_zero());
    }

    #[test]
    fn digamma_values() {
        let d = digamma(&q(3, 1)).unwrap();
        assert_eq!(d.symbol_part(LogSym::One).as_rational(), Some(q(3, 2)));
        assert_eq!(d.symbol_part(LogSym::EulerGamma).as_rational(), Some(q(-1, 1)));
        let h = digamma(&q(3, 2)).unwrap();
        assert_eq!(h.symbol_part(LogSym::One).as_rational(), Some(q(2, 1)));
        assert_eq!(h.symbol_part(LogSym::Log2).as_rational(), Some(q(-2, 1)));
    }

    #[test]
    fn single_denominator_pole_has_linear_jet() {
        // 1/Γ(-2 + 3ε) = 2 * 3ε + O(ε²)
        let f = [GammaFactor {
            alpha: vec![q(3, 1)],
            beta: q(-2, 1),
            numerator: false,
        }];
        let j = expand(&f, 1, 1).unwrap();
        assert!(j.value.is_zero());
        assert_eq!(j.derivatives[0].as_rational(), Some(q(6, 1)));
    }
}
