//! Polynomials in weighted variables with coefficients in an exact field.
//!
//! A [`PolyRing`] fixes variable names, positive integer weights and a term
//! order. The default order is graded reverse lexicographic with respect to
//! the weighted degree.

mod parse;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::scalar::{Field, Rational, RationalFunction};

pub use parse::{parse_expr, ExprBuilder, ParamBuilder, ParseError, ParseErrorKind, PolyBuilder};

/// Maximum number of polynomial variables.
pub const MAX_VARS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TermOrder {
    /// Weighted degree first, ties broken reverse-lexicographically.
    #[default]
    WeightedGrevlex,
    /// Pure lexicographic, first variable largest.
    Lex,
}

/// Variable names, weights and term order shared by a family of polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyRing {
    names: Vec<String>,
    weights: Vec<u32>,
    order: TermOrder,
}

impl PolyRing {
    pub fn new(names: Vec<String>, weights: Vec<u32>, order: TermOrder) -> Arc<Self> {
        assert_eq!(names.len(), weights.len(), "one weight per variable");
        assert!(names.len() <= MAX_VARS, "at most {MAX_VARS} variables");
        assert!(weights.iter().all(|&w| w > 0), "weights must be positive");
        Arc::new(Self {
            names,
            weights,
            order,
        })
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn order(&self) -> TermOrder {
        self.order
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn with_order(&self, order: TermOrder) -> Arc<Self> {
        Arc::new(Self {
            order,
            ..self.clone()
        })
    }

    pub fn monomial(&self, exps: &[u16]) -> Monomial {
        let mut e = [0u16; MAX_VARS];
        e[..exps.len()].copy_from_slice(exps);
        Monomial::from_exps(e, &self.weights)
    }

    pub fn var_monomial(&self, i: usize) -> Monomial {
        let mut e = [0u16; MAX_VARS];
        e[i] = 1;
        Monomial::from_exps(e, &self.weights)
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self.order {
            TermOrder::WeightedGrevlex => a.deg.cmp(&b.deg).then_with(|| {
                for i in (0..self.nvars()).rev() {
                    if a.exps[i] != b.exps[i] {
                        return b.exps[i].cmp(&a.exps[i]);
                    }
                }
                Ordering::Equal
            }),
            TermOrder::Lex => a.exps.cmp(&b.exps),
        }
    }

    /// All monomials of weighted degree exactly `d`.
    pub fn monomials_of_degree(&self, d: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = [0u16; MAX_VARS];
        self.enumerate(0, d, &mut cur, &mut out);
        out.sort_by(|a, b| self.cmp(b, a));
        out
    }

    fn enumerate(&self, i: usize, left: u32, cur: &mut [u16; MAX_VARS], out: &mut Vec<Monomial>) {
        if i == self.nvars() {
            if left == 0 {
                out.push(Monomial::from_exps(*cur, &self.weights));
            }
            return;
        }
        let w = self.weights[i];
        for k in 0..=(left / w) {
            cur[i] = k as u16;
            self.enumerate(i + 1, left - k * w, cur, out);
        }
        cur[i] = 0;
    }

    pub fn fmt_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for i in 0..self.nvars() {
            match m.exps[i] {
                0 => {}
                1 => parts.push(self.names[i].clone()),
                k => parts.push(format!("{}^{}", self.names[i], k)),
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Exponent vector together with its cached weighted degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    deg: u32,
    exps: [u16; MAX_VARS],
}

impl Monomial {
    fn from_exps(exps: [u16; MAX_VARS], weights: &[u32]) -> Self {
        let deg = weights
            .iter()
            .zip(exps.iter())
            .map(|(&w, &e)| w * e as u32)
            .sum();
        Self { deg, exps }
    }

    pub fn one() -> Self {
        Self {
            deg: 0,
            exps: [0; MAX_VARS],
        }
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn exps(&self) -> &[u16; MAX_VARS] {
        &self.exps
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps;
        for i in 0..MAX_VARS {
            exps[i] += other.exps[i];
        }
        Monomial {
            deg: self.deg + other.deg,
            exps,
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        (0..MAX_VARS).all(|i| self.exps[i] <= other.exps[i])
    }

    /// `other / self`, assuming divisibility.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        let mut exps = other.exps;
        for i in 0..MAX_VARS {
            exps[i] -= self.exps[i];
        }
        Monomial {
            deg: other.deg - self.deg,
            exps,
        }
    }

    pub fn lcm(&self, other: &Monomial, weights: &[u32]) -> Monomial {
        let mut exps = [0u16; MAX_VARS];
        for i in 0..MAX_VARS {
            exps[i] = self.exps[i].max(other.exps[i]);
        }
        Monomial::from_exps(exps, weights)
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        (0..MAX_VARS).all(|i| self.exps[i] == 0 || other.exps[i] == 0)
    }

    pub fn pow(&self, n: u16) -> Monomial {
        let mut exps = self.exps;
        for e in exps.iter_mut() {
            *e *= n;
        }
        Monomial {
            deg: self.deg * n as u32,
            exps,
        }
    }
}

/// Sparse polynomial; terms sorted by decreasing monomial in the ring order.
#[derive(Clone)]
pub struct WPoly<F: Field> {
    ring: Arc<PolyRing>,
    terms: Vec<(Monomial, F)>,
}

impl<F: Field> PartialEq for WPoly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl<F: Field> WPoly<F> {
    pub fn zero(ring: &Arc<PolyRing>) -> Self {
        Self {
            ring: ring.clone(),
            terms: Vec::new(),
        }
    }

    pub fn constant(ring: &Arc<PolyRing>, c: F) -> Self {
        Self::term(ring, Monomial::one(), c)
    }

    pub fn one(ring: &Arc<PolyRing>) -> Self {
        Self::constant(ring, F::one())
    }

    pub fn term(ring: &Arc<PolyRing>, m: Monomial, c: F) -> Self {
        let terms = if c.is_zero() { Vec::new() } else { vec![(m, c)] };
        Self {
            ring: ring.clone(),
            terms,
        }
    }

    pub fn var(ring: &Arc<PolyRing>, i: usize) -> Self {
        Self::term(ring, ring.var_monomial(i), F::one())
    }

    pub fn from_terms(ring: &Arc<PolyRing>, terms: impl IntoIterator<Item = (Monomial, F)>) -> Self {
        let mut acc: HashMap<Monomial, F> = HashMap::new();
        for (m, c) in terms {
            match acc.get_mut(&m) {
                Some(v) => *v = v.add_ref(&c),
                None => {
                    acc.insert(m, c);
                }
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| ring.cmp(&b.0, &a.0));
        Self {
            ring: ring.clone(),
            terms,
        }
    }

    /// Build from terms already sorted descending with nonzero, distinct entries.
    pub(crate) fn from_sorted(ring: &Arc<PolyRing>, terms: Vec<(Monomial, F)>) -> Self {
        Self {
            ring: ring.clone(),
            terms,
        }
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn terms(&self) -> &[(Monomial, F)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, F)> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|(m, _)| m)
    }

    pub fn leading_coefficient(&self) -> Option<&F> {
        self.terms.first().map(|(_, c)| c)
    }

    pub fn coefficient(&self, m: &Monomial) -> F {
        self.terms
            .iter()
            .find(|(n, _)| n == m)
            .map_or_else(F::zero, |(_, c)| c.clone())
    }

    /// Weighted degree if every term has the same one.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let d = self.terms.first()?.0.degree();
        self.terms.iter().all(|(m, _)| m.degree() == d).then_some(d)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.merge(other, None)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.merge(other, Some(&-F::one()))
    }

    pub fn neg(&self) -> Self {
        self.scale(&-F::one())
    }

    /// `self + factor * other`, or `self + other` when `factor` is `None`.
    fn merge(&self, other: &Self, factor: Option<&F>) -> Self {
        let scaled = |c: &F| match factor {
            Some(f) => f.mul_ref(c),
            None => c.clone(),
        };
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.ring.cmp(&self.terms[i].0, &other.terms[j].0) {
                Ordering::Greater => {
                    terms.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    terms.push((other.terms[j].0, scaled(&other.terms[j].1)));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = self.terms[i].1.add_ref(&scaled(&other.terms[j].1));
                    if !c.is_zero() {
                        terms.push((self.terms[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend(self.terms[i..].iter().cloned());
        terms.extend(other.terms[j..].iter().map(|(m, c)| (*m, scaled(c))));
        Self {
            ring: self.ring.clone(),
            terms,
        }
    }

    /// `self - c * m * g`, the basic reduction step.
    pub fn sub_mul_term(&self, c: &F, m: &Monomial, g: &Self) -> Self {
        let shifted = g.mul_term(m, &-c.clone());
        self.merge(&shifted, None)
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Self {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, k)| (*m, k.mul_ref(c))).collect(),
        }
    }

    /// Multiply by the term `c * m`; the order is preserved.
    pub fn mul_term(&self, m: &Monomial, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Self {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(n, k)| (n.mul(m), k.mul_ref(c)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.terms.len() == 1 {
            return other.mul_term(&self.terms[0].0, &self.terms[0].1);
        }
        if other.terms.len() == 1 {
            return self.mul_term(&other.terms[0].0, &other.terms[0].1);
        }
        let mut acc: HashMap<Monomial, F> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let t = ca.mul_ref(cb);
                match acc.entry(ma.mul(mb)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        let v = e.get().add_ref(&t);
                        e.insert(v);
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(t);
                    }
                }
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| self.ring.cmp(&b.0, &a.0));
        Self {
            ring: self.ring.clone(),
            terms,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::one(&self.ring);
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exps[i] > 0)
            .map(|(m, c)| {
                let mut e = m.exps;
                let k = e[i];
                e[i] -= 1;
                (
                    Monomial::from_exps(e, &self.ring.weights),
                    c.mul_ref(&F::from_i64(k as i64)),
                )
            });
        Self::from_terms(&self.ring, terms)
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading_coefficient() {
            Some(c) if !c.is_one() => self.scale(&c.inv()),
            _ => self.clone(),
        }
    }

    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> WPoly<G> {
        WPoly::from_terms(&self.ring, self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    /// Reinterpret in another ring with the same variables (e.g. a different
    /// term order).
    pub fn in_ring(&self, ring: &Arc<PolyRing>) -> Self {
        assert_eq!(ring.names, self.ring.names);
        Self::from_terms(ring, self.terms.iter().cloned())
    }

    pub fn fmt_with(&self, coeff: impl Fn(&F) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let cs = coeff(c);
            let is_one = m.deg == 0 && m.exps.iter().all(|&e| e == 0);
            let mono = self.ring.fmt_monomial(m);
            let (neg, body) = match cs.strip_prefix('-') {
                Some(rest) if !rest.contains(['+', '-']) => (true, rest.to_string()),
                _ => (false, cs.clone()),
            };
            let needs_paren = body.contains(['+', '-', '/']) && !is_one;
            let body = if needs_paren { format!("({body})") } else { body };
            let piece = if is_one {
                body
            } else if body == "1" {
                mono
            } else {
                format!("{body}*{mono}")
            };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&piece);
        }
        out
    }
}

impl WPoly<Rational> {
    pub fn to_functions(&self) -> WPoly<RationalFunction> {
        self.map_coeffs(|c| RationalFunction::constant(c.clone()))
    }
}

impl WPoly<RationalFunction> {
    pub fn fmt_params(&self, params: &[&str]) -> String {
        self.fmt_with(|c| c.fmt_with(params))
    }

    /// Substitute rational values for the parameters, `None` on a pole.
    pub fn specialize(&self, point: &[Rational]) -> Option<WPoly<Rational>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            terms.push((*m, c.eval(point)?));
        }
        Some(WPoly::from_terms(&self.ring, terms))
    }
}

impl<F: Field> fmt::Display for WPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(|c| c.to_string()))
    }
}

impl<F: Field> fmt::Debug for WPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WPoly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn ring() -> Arc<PolyRing> {
        PolyRing::new(
            ["Y", "Z", "y", "z", "w"].iter().map(|s| s.to_string()).collect(),
            vec![3, 3, 2, 2, 2],
            TermOrder::WeightedGrevlex,
        )
    }

    #[test]
    fn weighted_degrees_and_order() {
        let r = ring();
        let m = r.monomial(&[2, 2, 0, 0, 0]);
        assert_eq!(m.degree(), 12);
        let a = r.monomial(&[0, 0, 1, 0, 0]);
        let b = r.monomial(&[0, 0, 0, 0, 1]);
        // Same degree; grevlex prefers the smaller power of the last variable.
        assert_eq!(r.cmp(&a, &b), Ordering::Greater);
        assert_eq!(r.monomials_of_degree(6).len(), 3 + 10);
    }

    #[test]
    fn euler_identity_spot() {
        let r = ring();
        let f: WPoly<Rational> = parse_expr("Y^4+Z^4+y^6+z^6+w^6+3*Y*Z*y*z*w", &PolyBuilder::new(&r))
            .unwrap();
        let mut acc = WPoly::zero(&r);
        for i in 0..5 {
            let xi = WPoly::var(&r, i);
            let wi = Rational::from_integer(r.weights()[i].into());
            acc = acc.add(&xi.mul(&f.derivative(i)).scale(&wi));
        }
        assert_eq!(acc, f.scale(&Rational::from_integer(12.into())));
    }
}
