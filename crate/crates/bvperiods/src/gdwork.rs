//! Griffiths-Dwork reduction of forms `P Ω / Q^r` modulo the Jacobian ideal
//! and one-parameter Picard-Fuchs operators.
//!
//! Reduction step: `r * sum_i P_i ∂_iQ Ω/Q^(r+1) ≅ sum_i ∂_iP_i Ω/Q^r` up to
//! an exact form. A class is reduced top-down until every numerator is a
//! normal form; the normal-form coordinates over the standard monomials at
//! each pole order are then canonical.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::diffop::DiffOperator;
use crate::family::FamilySpec;
use crate::groebner::{GroebnerBasis, GroebnerError};
use crate::scalar::{Field, Rational, RationalFunction};
use crate::wpoly::{Monomial, PolyRing, WPoly};

type Poly = WPoly<RationalFunction>;

#[derive(Debug, Error)]
pub enum GdError {
    #[error("expected exactly one active parameter, found {0}")]
    NotOneParameter(usize),
    #[error("numerator of pole order {pole} has degree {found}, expected {expected}")]
    Degree { pole: u32, expected: i64, found: String },
    #[error("numerator is not in the Jacobian ideal (normal form {0})")]
    NotInIdeal(String),
    #[error("no relation among the first {0} derivatives")]
    NoRelation(u32),
    #[error("max order must be at least 2")]
    MaxOrder,
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

/// `numerator * Ω / Q^pole`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalForm {
    pub numerator: Poly,
    pub pole: u32,
}

/// The Jacobian partials of the full deformed polynomial over ℚ(params).
pub fn jacobian_ideal(fs: &FamilySpec) -> Vec<Poly> {
    fs.jacobian()
}

fn expected_degree(fs: &FamilySpec, pole: u32) -> i64 {
    let wsum: u32 = fs.ring().weights().iter().sum();
    pole as i64 * fs.degree() as i64 - wsum as i64
}

fn check_degree(fs: &FamilySpec, f: &RationalForm) -> Result<(), GdError> {
    if f.numerator.is_zero() {
        return Ok(());
    }
    let expected = expected_degree(fs, f.pole);
    match f.numerator.homogeneous_degree() {
        Some(d) if d as i64 == expected => Ok(()),
        other => Err(GdError::Degree {
            pole: f.pole,
            expected,
            found: other.map_or_else(|| "inhomogeneous".into(), |d| d.to_string()),
        }),
    }
}

/// The discarded exact part of a reduction step: `numerator = r * sum_i P_i ∂_iQ`.
#[derive(Clone, Debug)]
pub struct PoleReduction {
    pub form: RationalForm,
    pub cofactors: Vec<Poly>,
}

/// One step `P Ω/Q^(r+1) -> (1/r) sum_i ∂_iP_i Ω/Q^r` for `P = r sum_i P_i ∂_iQ`.
/// The basis must track cofactors over the Jacobian partials.
pub fn reduce_pole(form: &RationalForm, gb: &GroebnerBasis<RationalFunction>) -> Result<PoleReduction, GdError> {
    assert!(form.pole >= 2, "pole order must be at least 2 to reduce");
    let ring = gb.ring().clone();
    if form.numerator.is_zero() {
        return Ok(PoleReduction {
            form: RationalForm {
                numerator: WPoly::zero(&ring),
                pole: form.pole - 1,
            },
            cofactors: vec![WPoly::zero(&ring); gb.generators().len()],
        });
    }
    let r = RationalFunction::from_i64(form.pole as i64 - 1);
    let cof = gb.lift(&form.numerator).map_err(|e| match e {
        GroebnerError::NotInIdeal => GdError::NotInIdeal(gb.normal_form(&form.numerator).to_string()),
        e => GdError::Groebner(e),
    })?;
    let inv = r.inv();
    let cofactors: Vec<Poly> = cof.iter().map(|c| c.scale(&inv)).collect();
    Ok(PoleReduction {
        form: RationalForm {
            numerator: divergence(&cofactors, &ring),
            pole: form.pole - 1,
        },
        cofactors,
    })
}

fn divergence(p: &[Poly], ring: &Arc<PolyRing>) -> Poly {
    let mut out = WPoly::zero(ring);
    for (i, pi) in p.iter().enumerate() {
        out = out.add(&pi.derivative(i));
    }
    out
}

/// A reduction context for a one-parameter family: the Jacobian Gröbner basis
/// with cofactors and the standard monomials at each pole order.
pub struct Reducer {
    family: FamilySpec,
    gb: GroebnerBasis<RationalFunction>,
    /// `standard[r - 1]`: standard monomials of degree `r*d - sum w`.
    standard: Vec<Vec<Monomial>>,
    offsets: Vec<usize>,
    index: Vec<HashMap<Monomial, usize>>,
}

impl Reducer {
    pub fn new(fs: &FamilySpec) -> Result<Self, GdError> {
        let gb = GroebnerBasis::compute(&jacobian_ideal(fs), true)?;
        let mut standard = Vec::new();
        let mut pole = 1;
        loop {
            let d = expected_degree(fs, pole);
            if d < 0 {
                standard.push(Vec::new());
            } else {
                let s = gb.standard_monomials(d as u32);
                if s.is_empty() && pole > 1 {
                    break;
                }
                standard.push(s);
            }
            pole += 1;
        }
        let mut offsets = Vec::new();
        let mut total = 0;
        for s in &standard {
            offsets.push(total);
            total += s.len();
        }
        let index = standard
            .iter()
            .map(|s| s.iter().enumerate().map(|(i, m)| (*m, i)).collect())
            .collect();
        Ok(Self {
            family: fs.clone(),
            gb,
            standard,
            offsets,
            index,
        })
    }

    pub fn basis(&self) -> &GroebnerBasis<RationalFunction> {
        &self.gb
    }

    /// Highest pole order with nonzero cohomology.
    pub fn max_pole(&self) -> u32 {
        self.standard.len() as u32
    }

    /// Number of coordinates of a reduced class.
    pub fn dimension(&self) -> usize {
        self.standard.iter().map(Vec::len).sum()
    }

    pub fn standard_monomials(&self, pole: u32) -> &[Monomial] {
        &self.standard[pole as usize - 1]
    }

    /// Reduce `sum_r numerators[r-1] Ω/Q^r` to normal-form numerators at
    /// every pole order.
    pub fn reduce(&self, numerators: &[Poly]) -> Result<Vec<Poly>, GdError> {
        let ring = self.family.ring().clone();
        let mut a: Vec<Poly> = numerators.to_vec();
        for (k, p) in a.iter().enumerate() {
            check_degree(
                &self.family,
                &RationalForm {
                    numerator: p.clone(),
                    pole: k as u32 + 1,
                },
            )?;
        }
        let mut out = vec![WPoly::zero(&ring); a.len().max(1)];
        for r in (1..=a.len()).rev() {
            let (nf, cof) = if r == 1 {
                (self.gb.normal_form(&a[0]), Vec::new())
            } else {
                self.gb.lift_with_remainder(&a[r - 1])
            };
            if r > 1 && !cof.iter().all(WPoly::is_zero) {
                let inv = RationalFunction::from_i64(r as i64 - 1).inv();
                let lower = divergence(&cof, &ring).scale(&inv);
                a[r - 2] = a[r - 2].add(&lower);
            }
            if r > self.standard.len() {
                assert!(nf.is_zero(), "normal form above the socle degree");
            }
            out[r - 1] = nf;
        }
        out.truncate(self.standard.len());
        Ok(out)
    }

    /// Coordinates of reduced numerators over the standard monomials.
    pub fn coordinates(&self, reduced: &[Poly]) -> Vec<RationalFunction> {
        let mut v = vec![RationalFunction::zero(); self.dimension()];
        for (k, p) in reduced.iter().enumerate().take(self.standard.len()) {
            for (m, c) in p.terms() {
                let i = self.index[k][m];
                v[self.offsets[k] + i] = c.clone();
            }
        }
        v
    }

    /// `d/dξ` of the class `sum_r A_r Ω/Q^r`: `(∂_ξ A_r) Ω/Q^r - r m A_r Ω/Q^(r+1)`.
    pub fn differentiate(&self, numerators: &[Poly]) -> Vec<Poly> {
        let ring = self.family.ring().clone();
        let m = self.family.deformations()[0].monomial;
        let mut out = vec![WPoly::zero(&ring); numerators.len() + 1];
        for (k, a) in numerators.iter().enumerate() {
            let r = k as i64 + 1;
            out[k] = out[k].add(&a.map_coeffs(|c| c.derivative(0)));
            out[k + 1] = out[k + 1].add(&a.mul_term(&m, &RationalFunction::from_i64(-r)));
        }
        while out.len() > 1 && out.last().unwrap().is_zero() {
            out.pop();
        }
        out
    }

    /// Numerators of `∂_ξ^k (Ω/Q) = (-1)^k k! m^k Ω/Q^(k+1)`, unreduced.
    pub fn derivative_direct(&self, k: u32) -> Vec<Poly> {
        let ring = self.family.ring().clone();
        let m = self.family.deformations()[0].monomial;
        let mut f = Rational::one();
        for j in 1..=k {
            f *= Rational::from_integer(j.into());
        }
        if k % 2 == 1 {
            f = -f;
        }
        let mut out = vec![WPoly::zero(&ring); k as usize + 1];
        out[k as usize] = WPoly::term(&ring, m.pow(k as u16), RationalFunction::constant(f));
        out
    }

    /// Reduced numerators of `∂_ξ^j (Ω/Q)` for `j = 0..=max_order`, by
    /// differentiating and re-reducing the previous class.
    pub fn derivative_classes(&self, max_order: u32) -> Result<Vec<Vec<Poly>>, GdError> {
        let ring = self.family.ring().clone();
        let mut cur = self.reduce(&[WPoly::one(&ring)])?;
        let mut out = vec![cur.clone()];
        for _ in 0..max_order {
            cur = self.reduce(&self.differentiate(&cur))?;
            out.push(cur.clone());
        }
        Ok(out)
    }
}

/// A derived operator with the evidence for its minimality.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub operator: DiffOperator,
    pub order: u32,
    /// Rank of the coordinate matrix of `ω, ∂ω, ..., ∂^j ω` for each `j`.
    pub ranks: Vec<usize>,
    pub cohomology_dimension: usize,
}

/// The minimal-order operator `sum_j a_j(ξ) ∂_ξ^j` annihilating `Ω/Q` in
/// cohomology, for a family with exactly one active parameter.
pub fn derive_pf_1param(fs: &FamilySpec, max_order: u32) -> Result<Derivation, GdError> {
    if fs.deformations().len() != 1 {
        return Err(GdError::NotOneParameter(fs.deformations().len()));
    }
    if max_order < 2 {
        return Err(GdError::MaxOrder);
    }
    let red = Reducer::new(fs)?;
    let ring = fs.ring().clone();
    let mut cur = red.reduce(&[WPoly::one(&ring)])?;
    let mut cols: Vec<Vec<RationalFunction>> = vec![red.coordinates(&cur)];
    let mut ranks = vec![RationalFunction::rank(&transpose(&cols))];
    for k in 1..=max_order {
        cur = red.reduce(&red.differentiate(&cur))?;
        cols.push(red.coordinates(&cur));
        let (rank, ns) = RationalFunction::rank_and_nullspace(&transpose(&cols));
        ranks.push(rank);
        if let Some(v) = ns.into_iter().next() {
            let name = fs.params()[0].clone();
            let op = DiffOperator::univariate(&name, &v).normalize();
            return Ok(Derivation {
                order: k,
                operator: op,
                ranks,
                cohomology_dimension: red.dimension(),
            });
        }
    }
    Err(GdError::NoRelation(max_order))
}

fn transpose(cols: &[Vec<RationalFunction>]) -> Vec<Vec<RationalFunction>> {
    let n = cols.first().map_or(0, Vec::len);
    (0..n)
        .filter(|&i| cols.iter().any(|c| !c[i].is_zero()))
        .map(|i| cols.iter().map(|c| c[i].clone()).collect())
        .collect()
}
