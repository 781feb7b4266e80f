//! Truncated series with exponents on a per-variable lattice `(1/den) ℤ`.

use std::collections::BTreeMap;
use std::fmt::{Debug, Display};

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::Rational;

/// Coefficients a series can carry: a ℚ-vector space.
pub trait SeriesCoeff: Clone + PartialEq + Debug + Display + Send + Sync {
    fn zero_coeff() -> Self;
    fn vanishes(&self) -> bool;
    fn accumulate(&mut self, other: &Self);
    fn scaled(&self, q: &Rational) -> Self;
}

impl SeriesCoeff for Rational {
    fn zero_coeff() -> Self {
        <Rational as Zero>::zero()
    }

    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }

    fn accumulate(&mut self, other: &Self) {
        *self += other;
    }

    fn scaled(&self, q: &Rational) -> Self {
        self * q
    }
}

/// Known part of one exponent axis, in lattice units. An exact side means the
/// series has no terms beyond it; an inexact side is a truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub lo: i64,
    pub lo_exact: bool,
    pub hi: i64,
    pub hi_exact: bool,
}

impl Bound {
    /// Natural lower end at `lo`, truncated above `hi`.
    pub fn truncated(lo: i64, hi: i64) -> Self {
        Self {
            lo,
            lo_exact: true,
            hi,
            hi_exact: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }

    /// Whether the coefficient at `n` is determined (inside, or past an exact side).
    pub fn knows(&self, n: i64) -> bool {
        self.contains(n) || (n < self.lo && self.lo_exact) || (n > self.hi && self.hi_exact)
    }

    /// Region on which `sum_s T^s (input)` is determined, for shifts `s` in
    /// `[min_shift, max_shift]` (lattice units).
    pub fn shifted(&self, min_shift: i64, max_shift: i64) -> Self {
        let lo = if self.lo_exact { self.lo + min_shift } else { self.lo + max_shift };
        let hi = if self.hi_exact { self.hi + max_shift } else { self.hi + min_shift };
        Self {
            lo,
            lo_exact: self.lo_exact,
            hi,
            hi_exact: self.hi_exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("exponent {0:?} is outside the valid region")]
    OutsideRegion(Vec<Rational>),
    #[error("unknown series variable `{0}`")]
    UnknownVariable(String),
    #[error("exponent {0} is not on the lattice of `{1}`")]
    OffLattice(Rational, String),
}

/// `sum_e c_e * prod_i x_i^(e_i / den_i)` restricted to a box of known terms.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedSeries<C: SeriesCoeff> {
    vars: Vec<String>,
    dens: Vec<u32>,
    terms: BTreeMap<Vec<i64>, C>,
    region: Vec<Bound>,
}

impl<C: SeriesCoeff> IndexedSeries<C> {
    pub fn new(vars: Vec<String>, dens: Vec<u32>, region: Vec<Bound>) -> Self {
        assert_eq!(vars.len(), dens.len());
        assert_eq!(vars.len(), region.len());
        assert!(dens.iter().all(|&d| d > 0));
        Self {
            vars,
            dens,
            terms: BTreeMap::new(),
            region,
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn dens(&self) -> &[u32] {
        &self.dens
    }

    pub fn region(&self) -> &[Bound] {
        &self.region
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Add `c` at lattice point `n` (numerators over `dens`).
    pub fn add_term(&mut self, n: Vec<i64>, c: &C) {
        if c.vanishes() {
            return;
        }
        let entry = self.terms.entry(n.clone()).or_insert_with(C::zero_coeff);
        entry.accumulate(c);
        if entry.vanishes() {
            self.terms.remove(&n);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn in_region(&self, n: &[i64]) -> bool {
        self.region.iter().zip(n).all(|(b, &x)| b.contains(x))
    }

    fn knows(&self, n: &[i64]) -> bool {
        self.region.iter().zip(n).all(|(b, &x)| b.knows(x))
    }

    /// Rational exponent vector of a lattice point.
    pub fn exponent(&self, n: &[i64]) -> Vec<Rational> {
        n.iter()
            .zip(&self.dens)
            .map(|(&x, &d)| Rational::new(x.into(), (d as i64).into()))
            .collect()
    }

    /// Coefficient at a lattice point; an error where it is not determined.
    pub fn coeff(&self, n: &[i64]) -> Result<C, SeriesError> {
        if !self.knows(n) {
            return Err(SeriesError::OutsideRegion(self.exponent(n)));
        }
        Ok(self.terms.get(n).cloned().unwrap_or_else(C::zero_coeff))
    }

    /// Coefficient at a rational exponent vector.
    pub fn coeff_at(&self, e: &[Rational]) -> Result<C, SeriesError> {
        let mut n = Vec::with_capacity(e.len());
        for (i, x) in e.iter().enumerate() {
            let scaled = x * Rational::from_integer((self.dens[i] as i64).into());
            if !scaled.is_integer() {
                return Err(SeriesError::OffLattice(x.clone(), self.vars[i].clone()));
            }
            n.push(scaled.to_integer().try_into().expect("exponent fits in i64"));
        }
        self.coeff(&n)
    }

    /// Nonzero coefficients strictly inside the valid region.
    pub fn nonzero_in_region(&self) -> Vec<(Vec<i64>, C)> {
        self.terms
            .iter()
            .filter(|(n, _)| self.in_region(n))
            .map(|(n, c)| (n.clone(), c.clone()))
            .collect()
    }

    /// Number of lattice points in the valid region.
    pub fn region_points(&self) -> u128 {
        self.region
            .iter()
            .map(|b| if b.is_empty() { 0 } else { (b.hi - b.lo + 1) as u128 })
            .product()
    }

    /// Width of the valid region along variable `i`, in whole exponent units.
    pub fn region_span(&self, i: usize) -> Rational {
        let b = &self.region[i];
        Rational::new((b.hi - b.lo).into(), (self.dens[i] as i64).into())
    }

    /// Set `var = 0`: keep the terms constant in `var` and drop the variable.
    pub fn at_zero(&self, var: &str) -> Result<Self, SeriesError> {
        let i = self
            .var_index(var)
            .ok_or_else(|| SeriesError::UnknownVariable(var.to_string()))?;
        let drop = |v: &[i64]| {
            let mut w = v.to_vec();
            w.remove(i);
            w
        };
        let mut out = Self {
            vars: drop_str(&self.vars, i),
            dens: drop_u32(&self.dens, i),
            terms: BTreeMap::new(),
            region: {
                let mut r = self.region.clone();
                r.remove(i);
                r
            },
        };
        for (n, c) in &self.terms {
            if n[i] == 0 {
                out.terms.insert(drop(n), c.clone());
            }
        }
        Ok(out)
    }

    pub fn map<D: SeriesCoeff>(&self, f: impl Fn(&C) -> D) -> IndexedSeries<D> {
        let mut out = IndexedSeries::new(self.vars.clone(), self.dens.clone(), self.region.clone());
        for (n, c) in &self.terms {
            out.add_term(n.clone(), &f(c));
        }
        out
    }

    pub fn set_region(&mut self, region: Vec<Bound>) {
        assert_eq!(region.len(), self.vars.len());
        self.region = region;
    }

    pub(crate) fn empty_like(&self, region: Vec<Bound>) -> Self {
        Self::new(self.vars.clone(), self.dens.clone(), region)
    }

    pub(crate) fn raw_terms(&self) -> &BTreeMap<Vec<i64>, C> {
        &self.terms
    }

    /// Render an exponent vector as `psi^1/2*chi^3`.
    pub fn fmt_exponent(&self, n: &[i64]) -> String {
        let parts: Vec<String> = self
            .exponent(n)
            .iter()
            .zip(&self.vars)
            .filter(|(e, _)| !Zero::is_zero(*e))
            .map(|(e, v)| format!("{v}^{e}"))
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

fn drop_str(v: &[String], i: usize) -> Vec<String> {
    let mut w = v.to_vec();
    w.remove(i);
    w
}

fn drop_u32(v: &[u32], i: usize) -> Vec<u32> {
    let mut w = v.to_vec();
    w.remove(i);
    w
}
