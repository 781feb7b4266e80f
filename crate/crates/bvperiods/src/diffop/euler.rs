//! Rewriting in Euler operators `theta_i = x_i D_i`.
//!
//! Every normal-ordered term `c x^a D^k` becomes `x^A P(theta) D^S` with, per
//! variable, `x^a D^k = x^(a-k) theta_(k)` when `a >= k` and
//! `theta_(a) D^(k-a)` otherwise, where `theta_(k)` is the falling factorial.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Bound, DiffOperator, IndexedSeries, SeriesCoeff, SeriesError};
use crate::scalar::{ParamPolynomial, Rational, MAX_PARAMS};

/// Key of one Euler term: `(x power A, theta power, D power S)`.
pub type EulerTerm = (Vec<u32>, Vec<u32>, Vec<u32>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerForm {
    params: Vec<String>,
    terms: BTreeMap<EulerTerm, Rational>,
}

/// Coefficients of `t(t-1)...(t-k+1)` in powers of `t` (signed Stirling numbers of the first kind).
fn falling_poly(k: u32) -> Vec<BigInt> {
    let mut p = vec![BigInt::one()];
    for j in 0..k {
        let mut q = vec![BigInt::zero(); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            q[i + 1] += c;
            q[i] -= c * BigInt::from(j);
        }
        p = q;
    }
    p
}

/// Stirling numbers of the second kind `S(m, j)` for `j = 0..=m`.
fn stirling2(m: u32) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for n in 1..=m as usize {
        let mut next = vec![BigInt::zero(); n + 1];
        for j in 1..=n {
            let prev = if j < row.len() { row[j].clone() } else { BigInt::zero() };
            next[j] = BigInt::from(j) * prev + &row[j - 1];
        }
        row = next;
    }
    row
}

fn falling(x: &Rational, k: u32) -> Rational {
    let mut out = Rational::one();
    for t in 0..k {
        out *= x - Rational::from_integer(t.into());
    }
    out
}

pub(super) fn rewrite(op: &DiffOperator) -> EulerForm {
    let n = op.params().len();
    let mut terms: BTreeMap<EulerTerm, Rational> = BTreeMap::new();
    for (d, c) in op.terms() {
        for (pe, q) in c.terms() {
            // Per variable: (A, S, theta polynomial).
            let mut parts: Vec<(u32, u32, Vec<BigInt>)> = Vec::with_capacity(n);
            for i in 0..n {
                let (a, k) = (pe[i], d[i]);
                if a >= k {
                    parts.push((a - k, 0, falling_poly(k)));
                } else {
                    parts.push((0, k - a, falling_poly(a)));
                }
            }
            let xa: Vec<u32> = parts.iter().map(|p| p.0).collect();
            let ds: Vec<u32> = parts.iter().map(|p| p.1).collect();
            // Expand the product of per-variable theta polynomials.
            let mut acc: Vec<(Vec<u32>, BigInt)> = vec![(Vec::new(), BigInt::one())];
            for (_, _, poly) in &parts {
                let mut next = Vec::new();
                for (e, c0) in &acc {
                    for (j, c1) in poly.iter().enumerate() {
                        if c1.is_zero() {
                            continue;
                        }
                        let mut e2 = e.clone();
                        e2.push(j as u32);
                        next.push((e2, c0 * c1));
                    }
                }
                acc = next;
            }
            for (th, c1) in acc {
                let key = (xa.clone(), th, ds.clone());
                let v = q * Rational::from_integer(c1);
                let entry = terms.entry(key.clone()).or_insert_with(Rational::zero);
                *entry += v;
                if entry.is_zero() {
                    terms.remove(&key);
                }
            }
        }
    }
    EulerForm {
        params: op.params().to_vec(),
        terms,
    }
}

impl EulerForm {
    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn terms(&self) -> &BTreeMap<EulerTerm, Rational> {
        &self.terms
    }

    /// Expand back to normal order using `theta^m = sum_j S(m,j) x^j D^j`.
    pub fn to_operator(&self) -> DiffOperator {
        let n = self.params.len();
        let mut out = Vec::new();
        for ((xa, th, ds), q) in &self.terms {
            let mut acc: Vec<(Vec<u32>, BigInt)> = vec![(Vec::new(), BigInt::one())];
            for &m in th {
                let s = stirling2(m);
                let mut next = Vec::new();
                for (e, c0) in &acc {
                    for (j, c1) in s.iter().enumerate() {
                        if c1.is_zero() {
                            continue;
                        }
                        let mut e2 = e.clone();
                        e2.push(j as u32);
                        next.push((e2, c0 * c1));
                    }
                }
                acc = next;
            }
            for (js, c1) in acc {
                let mut pe = [0u32; MAX_PARAMS];
                let mut d = vec![0u32; n];
                for i in 0..n {
                    pe[i] = xa[i] + js[i];
                    d[i] = js[i] + ds[i];
                }
                out.push((d, ParamPolynomial::monomial(pe, q * Rational::from_integer(c1))));
            }
        }
        DiffOperator::from_terms(&self.params, out)
    }

    /// Apply through the Euler form: `D^S` by falling factorials, then
    /// `P(e - S)`, then the shift by `x^A`.
    pub fn apply<C: SeriesCoeff>(&self, s: &IndexedSeries<C>) -> Result<IndexedSeries<C>, SeriesError> {
        let mut map = Vec::with_capacity(self.params.len());
        for (i, p) in self.params.iter().enumerate() {
            match s.var_index(p) {
                Some(j) => map.push(Some(j)),
                None if self.terms.keys().all(|(a, t, d)| a[i] == 0 && t[i] == 0 && d[i] == 0) => map.push(None),
                None => return Err(SeriesError::UnknownVariable(p.clone())),
            }
        }
        let nv = s.vars().len();
        let dens = s.dens();
        let mut ranges: Option<Vec<(i64, i64)>> = None;
        for (xa, _, ds) in self.terms.keys() {
            let mut shift = vec![0i64; nv];
            for (i, j) in map.iter().enumerate() {
                if let Some(j) = j {
                    shift[*j] = (xa[i] as i64 - ds[i] as i64) * dens[*j] as i64;
                }
            }
            ranges = Some(match ranges {
                None => shift.iter().map(|&x| (x, x)).collect(),
                Some(r) => r.iter().zip(&shift).map(|(&(a, b), &x)| (a.min(x), b.max(x))).collect(),
            });
        }
        let ranges = ranges.unwrap_or_else(|| vec![(0, 0); nv]);
        let region: Vec<Bound> = s.region().iter().zip(&ranges).map(|(b, (lo, hi))| b.shifted(*lo, *hi)).collect();
        let mut out = s.empty_like(region);
        for (n, c) in s.raw_terms() {
            let e = s.exponent(n);
            for ((xa, th, ds), q) in &self.terms {
                let mut v = q.clone();
                let mut target = n.clone();
                for (i, j) in map.iter().enumerate() {
                    let Some(j) = *j else { continue };
                    let ei = &e[j];
                    v *= falling(ei, ds[i]);
                    if v.is_zero() {
                        break;
                    }
                    let shifted = ei - Rational::from_integer(ds[i].into());
                    for _ in 0..th[i] {
                        v *= &shifted;
                    }
                    target[j] += (xa[i] as i64 - ds[i] as i64) * dens[j] as i64;
                }
                if !v.is_zero() {
                    out.add_term(target, &c.scaled(&v));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirling_inverse() {
        for k in 0..8u32 {
            let f = falling_poly(k);
            // theta_(k) expanded in theta, then back through S(m, j), is x^k D^k.
            let mut back = vec![BigInt::zero(); k as usize + 1];
            for (m, c) in f.iter().enumerate() {
                for (j, s) in stirling2(m as u32).iter().enumerate() {
                    back[j] += c * s;
                }
            }
            for (j, b) in back.iter().enumerate() {
                assert_eq!(*b, if j == k as usize { BigInt::one() } else { BigInt::zero() });
            }
        }
    }
}
