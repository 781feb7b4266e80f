//! Linear differential operators in the deformation parameters with
//! polynomial coefficients, and their exact action on lattice series.
//!
//! An operator is stored in normal order: every term is `c(params) * D^beta`
//! with the coefficient to the left of the derivatives.

mod euler;
mod series;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{
    poly_gcd, primitive_vector, Field, ParamPolynomial, Rational, RationalFunction, MAX_PARAMS,
};
use crate::wpoly::{parse_expr, ExprBuilder, ParamBuilder, ParseError, ParseErrorKind};

pub use euler::{EulerForm, EulerTerm};
pub use series::{Bound, IndexedSeries, SeriesCoeff, SeriesError};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("invalid operator JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in `{text}`: {source}")]
    Parse {
        text: String,
        #[source]
        source: ParseError,
    },
    #[error("derivative symbol applied on the left of a coefficient in `{0}`")]
    NotNormalOrdered(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("coefficient `{0}` is not a polynomial")]
    NotPolynomial(String),
    #[error("too many parameters (at most {MAX_PARAMS})")]
    TooManyParameters,
}

/// `sum_beta c_beta(params) * prod_i D_i^beta_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOperator {
    params: Vec<String>,
    /// Sorted by [`deriv_cmp`] descending; no zero coefficients.
    terms: Vec<(Vec<u32>, ParamPolynomial)>,
}

/// Higher total order first, then lexicographic with the first parameter largest.
fn deriv_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let sa: u32 = a.iter().sum();
    let sb: u32 = b.iter().sum();
    sa.cmp(&sb).then_with(|| a.cmp(b))
}

impl DiffOperator {
    pub fn zero(params: &[String]) -> Self {
        Self {
            params: params.to_vec(),
            terms: Vec::new(),
        }
    }

    pub fn from_terms(params: &[String], terms: impl IntoIterator<Item = (Vec<u32>, ParamPolynomial)>) -> Self {
        assert!(params.len() <= MAX_PARAMS);
        let mut acc: BTreeMap<Vec<u32>, ParamPolynomial> = BTreeMap::new();
        for (d, c) in terms {
            assert_eq!(d.len(), params.len(), "derivative index length");
            let e = acc.entry(d).or_insert_with(ParamPolynomial::zero);
            *e = &*e + &c;
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| deriv_cmp(&b.0, &a.0));
        Self {
            params: params.to_vec(),
            terms,
        }
    }

    /// Clear denominators of rational-function coefficients.
    pub fn from_rational_terms(params: &[String], terms: Vec<(Vec<u32>, RationalFunction)>) -> Self {
        let mut l = ParamPolynomial::one();
        for (_, c) in &terms {
            let g = poly_gcd(&l, c.denom());
            l = &l * &c.denom().div_exact(&g).expect("gcd divides");
        }
        Self::from_terms(
            params,
            terms.into_iter().map(|(d, c)| {
                let f = l.div_exact(c.denom()).expect("lcm is a multiple");
                (d, c.numer() * &f)
            }),
        )
    }

    /// A single-parameter operator `sum_j coeffs[j] * D^j`.
    pub fn univariate(param: &str, coeffs: &[ParamPolynomial]) -> Self {
        Self::from_terms(
            &[param.to_string()],
            coeffs.iter().enumerate().map(|(j, c)| (vec![j as u32], c.clone())),
        )
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn terms(&self) -> &[(Vec<u32>, ParamPolynomial)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total order of the highest derivative.
    pub fn order(&self) -> u32 {
        self.terms.first().map_or(0, |(d, _)| d.iter().sum())
    }

    pub fn coefficient(&self, d: &[u32]) -> ParamPolynomial {
        self.terms
            .iter()
            .find(|(e, _)| e.as_slice() == d)
            .map_or_else(ParamPolynomial::zero, |(_, c)| c.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        let other = other.with_params(&self.params).expect("compatible parameters");
        Self::from_terms(&self.params, self.terms.iter().cloned().chain(other.terms))
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self::from_terms(&self.params, self.terms.iter().map(|(d, c)| (d.clone(), c.scale(q))))
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    /// Re-express over another parameter list containing every parameter used.
    pub fn with_params(&self, params: &[String]) -> Result<Self, OperatorError> {
        if params == self.params.as_slice() {
            return Ok(self.clone());
        }
        if params.len() > MAX_PARAMS {
            return Err(OperatorError::TooManyParameters);
        }
        let mut map = Vec::with_capacity(self.params.len());
        for (i, p) in self.params.iter().enumerate() {
            match params.iter().position(|q| q == p) {
                Some(j) => map.push(Some(j)),
                None => {
                    let used = self.terms.iter().any(|(d, c)| d[i] > 0 || c.degree_in(i) > 0);
                    if used {
                        return Err(OperatorError::UnknownParameter(p.clone()));
                    }
                    map.push(None);
                }
            }
        }
        let terms = self.terms.iter().map(|(d, c)| {
            let mut nd = vec![0u32; params.len()];
            for (i, j) in map.iter().enumerate() {
                if let Some(j) = j {
                    nd[*j] = d[i];
                }
            }
            let nc = ParamPolynomial::from_terms(c.terms().iter().map(|(e, q)| {
                let mut ne = [0u32; MAX_PARAMS];
                for (i, j) in map.iter().enumerate() {
                    if let Some(j) = j {
                        ne[*j] = e[i];
                    }
                }
                (ne, q.clone())
            }));
            (nd, nc)
        });
        Ok(Self::from_terms(params, terms))
    }

    /// Divide by the polynomial gcd of all coefficients and by the rational
    /// content; make the leading coefficient's leading term positive.
    pub fn normalize(&self) -> Self {
        let coeffs: Vec<ParamPolynomial> = self.terms.iter().map(|(_, c)| c.clone()).collect();
        Self {
            params: self.params.clone(),
            terms: self
                .terms
                .iter()
                .zip(primitive_vector(&coeffs))
                .map(|((d, _), c)| (d.clone(), c))
                .collect(),
        }
    }

    /// Equality up to a nonzero ℚ(params) factor.
    pub fn eq_up_to_scalar(&self, other: &Self) -> bool {
        match other.with_params(&self.params) {
            Ok(o) => self.normalize() == o.normalize(),
            Err(_) => false,
        }
    }

    /// Human-readable ASCII form, e.g. `(4*psi^3 + 27)*D_psi^2 - 2*psi^3`.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let names: Vec<&str> = self.params.iter().map(String::as_str).collect();
        let mut out = String::new();
        for (k, (d, c)) in self.terms.iter().enumerate() {
            let dpart: Vec<String> = d
                .iter()
                .zip(&names)
                .filter(|(e, _)| **e > 0)
                .map(|(e, n)| if *e == 1 { format!("D_{n}") } else { format!("D_{n}^{e}") })
                .collect();
            let mut coeff = c.fmt_with(&names);
            let negative = c.len() == 1 && coeff.starts_with('-');
            if negative {
                coeff = coeff[1..].to_string();
            }
            let body = if dpart.is_empty() {
                if c.len() > 1 {
                    format!("({coeff})")
                } else {
                    coeff
                }
            } else if c.len() == 1 && c.as_constant().map_or(false, |q| q.abs().is_one()) {
                dpart.join("*")
            } else if c.len() > 1 {
                format!("({coeff})*{}", dpart.join("*"))
            } else {
                format!("{coeff}*{}", dpart.join("*"))
            };
            match (k, negative) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
            }
        }
        out
    }

    /// Parse the text form: products of parameter polynomials and `D_<param>`
    /// symbols, with every coefficient written to the left of derivatives.
    pub fn parse_text(text: &str, params: &[String]) -> Result<Self, OperatorError> {
        if params.len() > MAX_PARAMS {
            return Err(OperatorError::TooManyParameters);
        }
        let builder = OpBuilder { params: params.to_vec() };
        let sym = parse_expr(text, &builder).map_err(|source| OperatorError::Parse {
            text: text.to_string(),
            source,
        })?;
        let mut terms = Vec::new();
        for (d, c) in sym.0 {
            if !c.is_polynomial() {
                return Err(OperatorError::NotPolynomial(c.fmt_with(&params.iter().map(String::as_str).collect::<Vec<_>>())));
            }
            terms.push((d, c.numer().clone()));
        }
        Ok(Self::from_terms(params, terms))
    }

    pub fn from_json(src: &str) -> Result<Self, OperatorError> {
        let j: OperatorJson = serde_json::from_str(src)?;
        let params = match &j.params {
            Some(p) => p.clone(),
            None => {
                let mut p: Vec<String> = Vec::new();
                for t in &j.terms {
                    for k in t.derivs.keys() {
                        if !p.contains(k) {
                            p.push(k.clone());
                        }
                    }
                }
                p
            }
        };
        if params.len() > MAX_PARAMS {
            return Err(OperatorError::TooManyParameters);
        }
        let pb = ParamBuilder::new(&params);
        let mut terms = Vec::new();
        for t in &j.terms {
            let c = pb.polynomial(&t.coeff).map_err(|source| OperatorError::Parse {
                text: t.coeff.clone(),
                source,
            })?;
            let mut d = vec![0u32; params.len()];
            for (k, v) in &t.derivs {
                let i = params
                    .iter()
                    .position(|p| p == k)
                    .ok_or_else(|| OperatorError::UnknownParameter(k.clone()))?;
                d[i] = *v;
            }
            terms.push((d, c));
        }
        Ok(Self::from_terms(&params, terms))
    }

    pub fn to_json(&self) -> String {
        let names: Vec<&str> = self.params.iter().map(String::as_str).collect();
        let j = OperatorJson {
            params: Some(self.params.clone()),
            terms: self
                .terms
                .iter()
                .map(|(d, c)| TermJson {
                    coeff: c.fmt_with(&names),
                    derivs: d
                        .iter()
                        .zip(&self.params)
                        .filter(|(e, _)| **e > 0)
                        .map(|(e, p)| (p.clone(), *e))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("operator serializes")
    }

    /// Apply term by term: `D` maps `c x^e` to `e c x^(e-1)`, a parameter
    /// monomial shifts exponents up. The valid region shrinks by the
    /// operator's shifts.
    pub fn apply<C: SeriesCoeff>(&self, s: &IndexedSeries<C>) -> Result<IndexedSeries<C>, SeriesError> {
        let map = self.series_map(s)?;
        let shifts = self.shift_ranges(&map, s.dens());
        let region: Vec<Bound> = s
            .region()
            .iter()
            .zip(&shifts)
            .map(|(b, (lo, hi))| b.shifted(*lo, *hi))
            .collect();
        let mut out = s.empty_like(region);
        for (n, c) in s.raw_terms() {
            let e = s.exponent(n);
            for (d, coeff) in &self.terms {
                // D^d on x^e.
                let mut factor = Rational::one();
                let mut base = n.clone();
                for (i, &k) in d.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let j = map[i].expect("derivative in a series variable");
                    for t in 0..k {
                        factor *= &e[j] - Rational::from_integer(t.into());
                    }
                    base[j] -= k as i64 * s.dens()[j] as i64;
                }
                if factor.is_zero() {
                    continue;
                }
                for (pe, q) in coeff.terms() {
                    let mut target = base.clone();
                    for (i, &k) in pe.iter().take(self.params.len()).enumerate() {
                        if k > 0 {
                            let j = map[i].expect("coefficient in a series variable");
                            target[j] += k as i64 * s.dens()[j] as i64;
                        }
                    }
                    out.add_term(target, &c.scaled(&(&factor * q)));
                }
            }
        }
        Ok(out)
    }

    /// Position of each operator parameter among the series variables; a
    /// parameter the operator never uses may be absent.
    fn series_map<C: SeriesCoeff>(&self, s: &IndexedSeries<C>) -> Result<Vec<Option<usize>>, SeriesError> {
        self.params
            .iter()
            .enumerate()
            .map(|(i, p)| match s.var_index(p) {
                Some(j) => Ok(Some(j)),
                None if self.terms.iter().all(|(d, c)| d[i] == 0 && c.degree_in(i) == 0) => Ok(None),
                None => Err(SeriesError::UnknownVariable(p.clone())),
            })
            .collect()
    }

    /// Per series variable, the least and greatest exponent shift (lattice units).
    fn shift_ranges(&self, map: &[Option<usize>], dens: &[u32]) -> Vec<(i64, i64)> {
        let mut out = vec![(0i64, 0i64); dens.len()];
        let mut first = true;
        for (d, c) in &self.terms {
            for (pe, _) in c.terms() {
                let mut shift = vec![0i64; dens.len()];
                for (i, j) in map.iter().enumerate() {
                    if let Some(j) = j {
                        shift[*j] = (pe[i] as i64 - d[i] as i64) * dens[*j] as i64;
                    }
                }
                for (k, s) in shift.iter().enumerate() {
                    if first {
                        out[k] = (*s, *s);
                    } else {
                        out[k].0 = out[k].0.min(*s);
                        out[k].1 = out[k].1.max(*s);
                    }
                }
                first = false;
            }
        }
        out
    }

    pub fn euler_rewrite(&self) -> EulerForm {
        euler::rewrite(self)
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<Vec<String>>,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    #[serde(default)]
    derivs: BTreeMap<String, u32>,
}

/// Normal-ordered symbols while parsing: derivative multi-index to coefficient.
#[derive(Clone)]
struct OpSymbol(BTreeMap<Vec<u32>, RationalFunction>);

struct OpBuilder {
    params: Vec<String>,
}

impl OpBuilder {
    fn single(&self, d: Vec<u32>, c: RationalFunction) -> OpSymbol {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(d, c);
        }
        OpSymbol(m)
    }

    fn combine(&self, a: &OpSymbol, b: &OpSymbol, sign: i64) -> OpSymbol {
        let mut m = a.0.clone();
        for (d, c) in &b.0 {
            let c = if sign < 0 { -c.clone() } else { c.clone() };
            let e = m.entry(d.clone()).or_insert_with(RationalFunction::zero);
            *e = e.clone() + c;
            if e.is_zero() {
                m.remove(d);
            }
        }
        OpSymbol(m)
    }
}

impl ExprBuilder for OpBuilder {
    type Value = OpSymbol;

    fn constant(&self, q: Rational) -> OpSymbol {
        self.single(vec![0; self.params.len()], RationalFunction::constant(q))
    }

    fn variable(&self, name: &str) -> Option<OpSymbol> {
        if let Some(p) = name.strip_prefix("D_") {
            let i = self.params.iter().position(|q| q == p)?;
            let mut d = vec![0; self.params.len()];
            d[i] = 1;
            return Some(self.single(d, RationalFunction::one()));
        }
        let i = self.params.iter().position(|q| q == name)?;
        Some(self.single(vec![0; self.params.len()], RationalFunction::var(i)))
    }

    fn add(&self, a: &OpSymbol, b: &OpSymbol) -> OpSymbol {
        self.combine(a, b, 1)
    }

    fn sub(&self, a: &OpSymbol, b: &OpSymbol) -> OpSymbol {
        self.combine(a, b, -1)
    }

    /// Commutative product of normal-ordered symbols. This is only an
    /// operator product when coefficients stay left of derivatives, which
    /// the text form guarantees.
    fn mul(&self, a: &OpSymbol, b: &OpSymbol) -> OpSymbol {
        let mut out = OpSymbol(BTreeMap::new());
        for (da, ca) in &a.0 {
            for (db, cb) in &b.0 {
                let d: Vec<u32> = da.iter().zip(db).map(|(x, y)| x + y).collect();
                out = self.combine(&out, &self.single(d, ca.clone() * cb.clone()), 1);
            }
        }
        out
    }

    fn neg(&self, a: &OpSymbol) -> OpSymbol {
        OpSymbol(a.0.iter().map(|(d, c)| (d.clone(), -c.clone())).collect())
    }

    fn pow(&self, a: &OpSymbol, n: u32) -> OpSymbol {
        let mut out = self.constant(Rational::one());
        for _ in 0..n {
            out = self.mul(&out, a);
        }
        out
    }

    fn div(&self, a: &OpSymbol, b: &OpSymbol) -> Result<OpSymbol, ParseErrorKind> {
        let zero = vec![0; self.params.len()];
        match b.0.iter().next() {
            None => Err(ParseErrorKind::DivisionByZero),
            Some((d, c)) if b.0.len() == 1 && *d == zero && c.as_constant().is_some() => {
                let inv = c.inv();
                Ok(OpSymbol(a.0.iter().map(|(d, x)| (d.clone(), x.clone() * inv.clone())).collect()))
            }
            _ => Err(ParseErrorKind::NonConstantDivisor),
        }
    }
}

/// Result of applying an operator to a series and inspecting the valid region.
#[derive(Clone, Debug, Serialize)]
pub struct Annihilation {
    pub valid_region: Vec<Bound>,
    pub lattice_points: u128,
    /// Whole exponent units covered per variable.
    pub spans: Vec<String>,
    pub residuals: Vec<Residual>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub exponent: String,
    pub value: String,
}

/// Apply `op` and collect every nonzero coefficient in the valid region.
pub fn annihilation<C: SeriesCoeff>(op: &DiffOperator, s: &IndexedSeries<C>) -> Result<Annihilation, SeriesError> {
    let out = op.apply(s)?;
    let residuals = out
        .nonzero_in_region()
        .into_iter()
        .map(|(n, c)| Residual {
            exponent: out.fmt_exponent(&n),
            value: c.to_string(),
        })
        .collect();
    Ok(Annihilation {
        valid_region: out.region().to_vec(),
        lattice_points: out.region_points(),
        spans: (0..out.vars().len()).map(|i| out.region_span(i).to_string()).collect(),
        residuals,
    })
}
