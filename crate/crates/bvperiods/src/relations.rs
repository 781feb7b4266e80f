//! Homogeneous relations among products of deformation monomials modulo the
//! Jacobian ideal, and the differential operators they induce.
//!
//! A relation `sum_alpha c_alpha(params) m^alpha = 0` in the local ring becomes
//! the operator `sum_alpha c_alpha ∂^alpha`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffop::DiffOperator;
use crate::family::FamilySpec;
use crate::groebner::{GroebnerBasis, GroebnerError};
use crate::scalar::{primitive_vector, ParamPolynomial, RationalFunction};
use crate::wpoly::{Monomial, ParamBuilder, ParseError, WPoly};

#[derive(Debug, Error)]
pub enum RelationError {
    #[error("invalid relation JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in `{text}`: {source}")]
    Parse {
        text: String,
        #[source]
        source: ParseError,
    },
    #[error("unknown deformation parameter `{0}`")]
    UnknownParameter(String),
    #[error("product of total degree {found} in a level-{level} relation")]
    Level { level: u32, found: u32 },
    #[error("operator is not homogeneous of a single order")]
    NotHomogeneous,
    #[error("monomials do not satisfy m1*m2 = m3^2")]
    NotProductIdentity,
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

/// `prod_i m_i^alpha_i` over the deformation monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialProduct {
    pub multidegree: Vec<u32>,
    pub monomial: Monomial,
}

/// All products of `k` deformation monomials, multidegrees in descending lex order.
pub fn products(fs: &FamilySpec, k: u32) -> Vec<MonomialProduct> {
    let n = fs.deformations().len();
    let mut out = Vec::new();
    let mut alpha = vec![0u32; n];
    fn rec(fs: &FamilySpec, i: usize, left: u32, alpha: &mut Vec<u32>, out: &mut Vec<MonomialProduct>) {
        let n = alpha.len();
        if i + 1 == n {
            alpha[i] = left;
            out.push(MonomialProduct {
                multidegree: alpha.clone(),
                monomial: realize(fs, alpha),
            });
            return;
        }
        for a in (0..=left).rev() {
            alpha[i] = a;
            rec(fs, i + 1, left - a, alpha, out);
        }
    }
    if n > 0 {
        rec(fs, 0, k, &mut alpha, &mut out);
    }
    out
}

fn realize(fs: &FamilySpec, alpha: &[u32]) -> Monomial {
    let mut m = Monomial::one();
    for (d, &a) in fs.deformations().iter().zip(alpha) {
        m = m.mul(&d.monomial.pow(a as u16));
    }
    m
}

/// `sum_alpha coeff_alpha * m^alpha` at level `k` (weighted degree `k*d`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub level: u32,
    params: Vec<String>,
    /// Keyed by multidegree; no zero coefficients.
    coeffs: BTreeMap<Vec<u32>, ParamPolynomial>,
}

impl Relation {
    pub fn new(level: u32, params: &[String], coeffs: impl IntoIterator<Item = (Vec<u32>, ParamPolynomial)>) -> Result<Self, RelationError> {
        let mut map: BTreeMap<Vec<u32>, ParamPolynomial> = BTreeMap::new();
        for (a, c) in coeffs {
            assert_eq!(a.len(), params.len());
            let found: u32 = a.iter().sum();
            if found != level {
                return Err(RelationError::Level { level, found });
            }
            let e = map.entry(a).or_insert_with(ParamPolynomial::zero);
            *e = &*e + &c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(Self {
            level,
            params: params.to_vec(),
            coeffs: map,
        })
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn coefficients(&self) -> &BTreeMap<Vec<u32>, ParamPolynomial> {
        &self.coeffs
    }

    pub fn coefficient(&self, alpha: &[u32]) -> ParamPolynomial {
        self.coeffs.get(alpha).cloned().unwrap_or_else(ParamPolynomial::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Content-free with a positive leading coefficient on the first product.
    pub fn normalize(&self) -> Self {
        let keys: Vec<Vec<u32>> = self.coeffs.keys().rev().cloned().collect();
        let vals: Vec<ParamPolynomial> = keys.iter().map(|k| self.coeffs[k].clone()).collect();
        Self {
            level: self.level,
            params: self.params.clone(),
            coeffs: keys.into_iter().zip(primitive_vector(&vals)).collect(),
        }
    }

    /// `m_i * self`, one level up.
    pub fn times(&self, i: usize) -> Self {
        Self {
            level: self.level + 1,
            params: self.params.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(a, c)| {
                    let mut b = a.clone();
                    b[i] += 1;
                    (b, c.clone())
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.level, other.level);
        Self::new(
            self.level,
            &self.params,
            self.coeffs.iter().chain(&other.coeffs).map(|(a, c)| (a.clone(), c.clone())),
        )
        .expect("same level")
    }

    pub fn scale(&self, c: &ParamPolynomial) -> Self {
        Self::new(self.level, &self.params, self.coeffs.iter().map(|(a, x)| (a.clone(), x * c))).expect("same level")
    }

    /// The realized polynomial `sum c_alpha m^alpha` in the ambient ring.
    pub fn polynomial(&self, fs: &FamilySpec) -> WPoly<RationalFunction> {
        WPoly::from_terms(
            fs.ring(),
            self.coeffs
                .iter()
                .map(|(a, c)| (realize(fs, a), RationalFunction::from_poly(c.clone()))),
        )
    }

    pub fn to_text(&self) -> String {
        let names: Vec<&str> = self.params.iter().map(String::as_str).collect();
        let mut parts = Vec::new();
        for (a, c) in self.coeffs.iter().rev() {
            let prod: Vec<String> = a
                .iter()
                .zip(&names)
                .filter(|(e, _)| **e > 0)
                .map(|(e, n)| if *e == 1 { format!("m_{n}") } else { format!("m_{n}^{e}") })
                .collect();
            parts.push(format!("({})*{}", c.fmt_with(&names), prod.join("*")));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    pub fn from_json(src: &str) -> Result<Self, RelationError> {
        let j: RelationJson = serde_json::from_str(src)?;
        let pb = ParamBuilder::new(&j.params);
        let mut coeffs = Vec::new();
        for t in &j.terms {
            let c = pb.polynomial(&t.coeff).map_err(|source| RelationError::Parse {
                text: t.coeff.clone(),
                source,
            })?;
            let mut a = vec![0u32; j.params.len()];
            for (k, v) in &t.product {
                let i = j
                    .params
                    .iter()
                    .position(|p| p == k)
                    .ok_or_else(|| RelationError::UnknownParameter(k.clone()))?;
                a[i] = *v;
            }
            coeffs.push((a, c));
        }
        Self::new(j.level, &j.params, coeffs)
    }

    pub fn to_json(&self) -> String {
        let names: Vec<&str> = self.params.iter().map(String::as_str).collect();
        let j = RelationJson {
            name: None,
            level: self.level,
            params: self.params.clone(),
            terms: self
                .coeffs
                .iter()
                .rev()
                .map(|(a, c)| RelationTermJson {
                    coeff: c.fmt_with(&names),
                    product: a
                        .iter()
                        .zip(&self.params)
                        .filter(|(e, _)| **e > 0)
                        .map(|(e, p)| (p.clone(), *e))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("relation serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct RelationJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    level: u32,
    params: Vec<String>,
    terms: Vec<RelationTermJson>,
}

#[derive(Serialize, Deserialize)]
struct RelationTermJson {
    coeff: String,
    product: BTreeMap<String, u32>,
}

/// Replace each `m_i` by `∂_i`.
pub fn relation_to_operator(rel: &Relation) -> DiffOperator {
    DiffOperator::from_terms(&rel.params, rel.coeffs.iter().map(|(a, c)| (a.clone(), c.clone())))
}

/// The inverse of [`relation_to_operator`] for operators whose terms all
/// have the same total order.
pub fn operator_to_relation(op: &DiffOperator) -> Result<Relation, RelationError> {
    let order = op.order();
    if op.terms().iter().any(|(d, _)| d.iter().sum::<u32>() != order) {
        return Err(RelationError::NotHomogeneous);
    }
    Relation::new(order, op.params(), op.terms().iter().cloned())
}

/// `∂_1 ∂_2 - ∂_3^2` for monomials with `m1 * m2 = m3^2`.
pub fn product_relation_operator(params: [&str; 3], monomials: [Monomial; 3]) -> Result<DiffOperator, RelationError> {
    let [m1, m2, m3] = monomials;
    if m1.mul(&m2) != m3.pow(2) {
        return Err(RelationError::NotProductIdentity);
    }
    let names: Vec<String> = params.iter().map(|s| s.to_string()).collect();
    Ok(DiffOperator::from_terms(
        &names,
        [
            (vec![1, 1, 0], ParamPolynomial::one()),
            (vec![0, 0, 2], -ParamPolynomial::one()),
        ],
    ))
}

/// Outcome of [`RelationContext::verify`].
#[derive(Clone, Debug)]
pub struct Verification {
    pub holds: bool,
    /// Normal form of the realized combination.
    pub residual: WPoly<RationalFunction>,
}

/// Dimension count at one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankAudit {
    pub num_products: usize,
    pub relation_rank: usize,
    pub local_ring_dim: usize,
}

/// A family with the Gröbner basis of its Jacobian ideal over ℚ(params).
pub struct RelationContext {
    family: FamilySpec,
    gb: GroebnerBasis<RationalFunction>,
}

impl RelationContext {
    pub fn new(fs: &FamilySpec) -> Result<Self, RelationError> {
        let gb = GroebnerBasis::compute(&fs.jacobian(), false)?;
        Ok(Self { family: fs.clone(), gb })
    }

    pub fn from_basis(fs: &FamilySpec, gb: GroebnerBasis<RationalFunction>) -> Self {
        Self { family: fs.clone(), gb }
    }

    pub fn family(&self) -> &FamilySpec {
        &self.family
    }

    pub fn basis(&self) -> &GroebnerBasis<RationalFunction> {
        &self.gb
    }

    /// Normal forms of the level-`k` products as columns over the union of
    /// their supports (rows).
    pub fn nf_matrix(&self, k: u32) -> (Vec<MonomialProduct>, Vec<Vec<RationalFunction>>) {
        let prods = products(&self.family, k);
        let nfs: Vec<WPoly<RationalFunction>> = prods
            .iter()
            .map(|p| {
                self.gb
                    .normal_form(&WPoly::term(self.family.ring(), p.monomial, RationalFunction::one()))
            })
            .collect();
        let ring = self.family.ring();
        let mut support: Vec<Monomial> = nfs.iter().flat_map(|f| f.terms().iter().map(|(m, _)| *m)).collect();
        support.sort_by(|a, b| ring.cmp(b, a));
        support.dedup();
        let rows = support
            .iter()
            .map(|m| nfs.iter().map(|f| f.coefficient(m)).collect())
            .collect();
        (prods, rows)
    }

    /// A canonical basis of all level-`k` relations.
    pub fn find_relations(&self, k: u32) -> Vec<Relation> {
        let (prods, m) = self.nf_matrix(k);
        let params = self.family.params();
        let kernel = if m.is_empty() {
            identity(prods.len())
        } else {
            RationalFunction::nullspace(&m)
        };
        kernel
            .into_iter()
            .map(|v| {
                Relation::new(k, &params, prods.iter().zip(v).map(|(p, c)| (p.multidegree.clone(), c)))
                    .expect("products have the right level")
                    .normalize()
            })
            .collect()
    }

    pub fn rank_audit(&self, k: u32) -> RankAudit {
        let (prods, m) = self.nf_matrix(k);
        let image = if m.is_empty() { 0 } else { RationalFunction::rank(&m) };
        RankAudit {
            num_products: prods.len(),
            relation_rank: prods.len() - image,
            local_ring_dim: image,
        }
    }

    /// Whether `rels` are relations spanning the whole level-`k` relation space.
    pub fn spans_level(&self, rels: &[Relation], k: u32) -> bool {
        let refs: Vec<&Relation> = rels.iter().collect();
        rels.iter().all(|r| r.level == k && self.verify(r).holds) && relation_rank(&refs) == self.rank_audit(k).relation_rank
    }

    pub fn verify(&self, rel: &Relation) -> Verification {
        let residual = self.gb.normal_form(&rel.polynomial(&self.family));
        Verification {
            holds: residual.is_zero(),
            residual,
        }
    }
}

fn identity(n: usize) -> Vec<Vec<ParamPolynomial>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { ParamPolynomial::one() } else { ParamPolynomial::zero() })
                .collect()
        })
        .collect()
}

/// Coefficient matrix of relations over the union of their products.
fn stack(rels: &[&Relation]) -> Vec<Vec<RationalFunction>> {
    let keys: BTreeSet<&Vec<u32>> = rels.iter().flat_map(|r| r.coeffs.keys()).collect();
    rels.iter()
        .map(|r| keys.iter().map(|k| RationalFunction::from_poly(r.coefficient(k))).collect())
        .collect()
}

/// Rank of a set of relations of one level over ℚ(params).
pub fn relation_rank(rels: &[&Relation]) -> usize {
    let m = stack(rels);
    if m.is_empty() || m[0].is_empty() {
        return 0;
    }
    RationalFunction::rank(&m)
}

/// Whether `rel` is a ℚ(params)-combination of `space`.
pub fn in_span(space: &[Relation], rel: &Relation) -> bool {
    let base: Vec<&Relation> = space.iter().collect();
    let mut with = base.clone();
    with.push(rel);
    relation_rank(&with) == relation_rank(&base)
}

/// Whether two sets of relations span the same ℚ(params)-space.
pub fn span_equal(a: &[Relation], b: &[Relation]) -> bool {
    let ra: Vec<&Relation> = a.iter().collect();
    let rb: Vec<&Relation> = b.iter().collect();
    let all: Vec<&Relation> = a.iter().chain(b).collect();
    let r = relation_rank(&all);
    r == relation_rank(&ra) && r == relation_rank(&rb)
}
