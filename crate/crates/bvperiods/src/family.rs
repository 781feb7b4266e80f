//! Deformation families of weighted hypersurfaces and the twist construction
//! that produces them from an elliptic curve and a K3 surface.

use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Field, Rational, RationalFunction, MAX_PARAMS};
use crate::wpoly::{parse_expr, Monomial, ParseError, PolyBuilder, PolyRing, TermOrder, WPoly, MAX_VARS};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("invalid family JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in {what}: {source}")]
    Parse {
        what: String,
        #[source]
        source: ParseError,
    },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("{what} is not quasi-homogeneous of degree {expected} (found {found})")]
    Degree {
        what: String,
        expected: u32,
        found: String,
    },
    #[error("not Calabi-Yau: degree {degree} but weights sum to {weight_sum}")]
    NotCalabiYau { degree: u32, weight_sum: u32 },
    #[error("gcd(v0, w0) = gcd({v0}, {w0}) must be 1")]
    GcdViolation { v0: u32, w0: u32 },
    #[error("`{0}` must be a single monomial with coefficient 1")]
    NotMonomial(String),
    #[error("{0}")]
    Invalid(String),
}

/// Which factor of the product a twisted coordinate comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Curve,
    K3,
}

/// Weights of the two factors, `(v0; v1, v2)` and `(w0; w1, w2, w3)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub curve: Vec<u32>,
    pub k3: Vec<u32>,
}

impl Provenance {
    pub fn v(&self) -> &[u32] {
        &self.curve
    }

    pub fn w(&self) -> &[u32] {
        &self.k3
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct VariableJson {
    name: String,
    weight: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    side: Option<Side>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DeformationJson {
    param: String,
    monomial: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FamilyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    variables: Vec<VariableJson>,
    base: String,
    #[serde(default)]
    deformations: Vec<DeformationJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deformation {
    pub param: String,
    pub monomial: Monomial,
}

/// `Q = base + sum_i param_i * monomial_i`.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    name: Option<String>,
    ring: Arc<PolyRing>,
    sides: Option<Vec<Side>>,
    base: WPoly<Rational>,
    degree: u32,
    deformations: Vec<Deformation>,
    provenance: Option<Provenance>,
}

/// An elliptic curve `X^2 + f(Y, Z)` in weights `(v0; v1, v2)`.
#[derive(Clone, Debug)]
pub struct CurveSpec {
    pub weights: [u32; 3],
    pub f: String,
}

/// A K3 surface `x^2 + g(y, z, w)` in weights `(w0; w1, w2, w3)`.
#[derive(Clone, Debug)]
pub struct K3Spec {
    pub weights: [u32; 4],
    pub g: String,
}

fn parse_poly(ring: &Arc<PolyRing>, src: &str, what: &str) -> Result<WPoly<Rational>, FamilyError> {
    parse_expr(src, &PolyBuilder::new(ring)).map_err(|source| FamilyError::Parse {
        what: what.to_string(),
        source,
    })
}

fn parse_monomial(ring: &Arc<PolyRing>, src: &str) -> Result<Monomial, FamilyError> {
    let p = parse_poly(ring, src, src)?;
    match p.terms() {
        [(m, c)] if c == &Rational::from_integer(1.into()) => Ok(*m),
        _ => Err(FamilyError::NotMonomial(src.to_string())),
    }
}

fn check_degree(p: &WPoly<Rational>, d: u32, what: &str) -> Result<(), FamilyError> {
    match p.homogeneous_degree() {
        Some(e) if e == d => Ok(()),
        Some(e) => Err(FamilyError::Degree {
            what: what.to_string(),
            expected: d,
            found: e.to_string(),
        }),
        None if p.is_zero() => Ok(()),
        None => Err(FamilyError::Degree {
            what: what.to_string(),
            expected: d,
            found: "mixed degrees".to_string(),
        }),
    }
}

impl FamilySpec {
    /// Assemble and validate a family.
    pub fn new(
        ring: Arc<PolyRing>,
        base: WPoly<Rational>,
        deformations: Vec<Deformation>,
    ) -> Result<Self, FamilyError> {
        if ring.nvars() > MAX_VARS {
            return Err(FamilyError::Invalid(format!("at most {MAX_VARS} variables")));
        }
        for (i, n) in ring.names().iter().enumerate() {
            if ring.names()[..i].contains(n) {
                return Err(FamilyError::DuplicateName(n.clone()));
            }
        }
        let degree = base
            .homogeneous_degree()
            .ok_or_else(|| FamilyError::Invalid("base polynomial must be nonzero and quasi-homogeneous".into()))?;
        check_degree(&base, degree, "base polynomial")?;
        let weight_sum: u32 = ring.weights().iter().sum();
        if weight_sum != degree {
            return Err(FamilyError::NotCalabiYau { degree, weight_sum });
        }
        let mut spec = Self {
            name: None,
            ring,
            sides: None,
            base,
            degree,
            deformations: Vec::new(),
            provenance: None,
        };
        for d in deformations {
            spec.push_deformation(d)?;
        }
        Ok(spec)
    }

    fn push_deformation(&mut self, d: Deformation) -> Result<(), FamilyError> {
        if d.monomial.degree() != self.degree {
            return Err(FamilyError::Degree {
                what: format!("deformation monomial for `{}`", d.param),
                expected: self.degree,
                found: d.monomial.degree().to_string(),
            });
        }
        if self.deformations.iter().any(|e| e.param == d.param) || self.ring.index_of(&d.param).is_some() {
            return Err(FamilyError::DuplicateName(d.param));
        }
        if self.deformations.len() == MAX_PARAMS {
            return Err(FamilyError::Invalid(format!("at most {MAX_PARAMS} parameters")));
        }
        self.deformations.push(d);
        Ok(())
    }

    pub fn from_json(src: &str) -> Result<Self, FamilyError> {
        let j: FamilyJson = serde_json::from_str(src)?;
        let names = j.variables.iter().map(|v| v.name.clone()).collect();
        let weights: Vec<u32> = j.variables.iter().map(|v| v.weight).collect();
        if weights.contains(&0) {
            return Err(FamilyError::Invalid("weights must be positive".into()));
        }
        let ring = PolyRing::new(names, weights, TermOrder::WeightedGrevlex);
        let base = parse_poly(&ring, &j.base, "base polynomial")?;
        let mut defs = Vec::new();
        for d in &j.deformations {
            defs.push(Deformation {
                param: d.param.clone(),
                monomial: parse_monomial(&ring, &d.monomial)?,
            });
        }
        let mut spec = Self::new(ring, base, defs)?;
        spec.name = j.name;
        let sides: Vec<Option<Side>> = j.variables.iter().map(|v| v.side).collect();
        if sides.iter().all(Option::is_some) {
            spec.sides = Some(sides.into_iter().map(Option::unwrap).collect());
        } else if sides.iter().any(Option::is_some) {
            return Err(FamilyError::Invalid("give a side for every variable or none".into()));
        }
        if let Some(p) = j.provenance {
            spec.set_provenance(p)?;
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let variables = (0..self.ring.nvars())
            .map(|i| VariableJson {
                name: self.ring.names()[i].clone(),
                weight: self.ring.weights()[i],
                side: self.sides.as_ref().map(|s| s[i]),
            })
            .collect();
        let j = FamilyJson {
            name: self.name.clone(),
            variables,
            base: self.base.to_string(),
            deformations: self
                .deformations
                .iter()
                .map(|d| DeformationJson {
                    param: d.param.clone(),
                    monomial: self.ring.fmt_monomial(&d.monomial),
                })
                .collect(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&j).expect("family serializes")
    }

    fn set_provenance(&mut self, p: Provenance) -> Result<(), FamilyError> {
        let (v, w) = (&p.curve, &p.k3);
        if v.len() != 3 || w.len() != 4 {
            return Err(FamilyError::Invalid("provenance needs curve (v0,v1,v2) and k3 (w0,w1,w2,w3)".into()));
        }
        if v[0] != v[1] + v[2] || w[0] != w[1] + w[2] + w[3] {
            return Err(FamilyError::Invalid("provenance weights are not Calabi-Yau".into()));
        }
        if v[0].gcd(&w[0]) != 1 {
            return Err(FamilyError::GcdViolation { v0: v[0], w0: w[0] });
        }
        let expected = [w[0] * v[1], w[0] * v[2], v[0] * w[1], v[0] * w[2], v[0] * w[3]];
        if self.ring.weights() != expected {
            return Err(FamilyError::Invalid(format!(
                "weights {:?} do not match the twist of the provenance data {:?}",
                self.ring.weights(),
                expected
            )));
        }
        if self.sides.is_none() {
            self.sides = Some(vec![Side::Curve, Side::Curve, Side::K3, Side::K3, Side::K3]);
        }
        self.provenance = Some(p);
        Ok(())
    }

    /// The twisted model of `E x K`: weights `(w0 v1, w0 v2, v0 w1, v0 w2, v0 w3)`,
    /// base `f(Y, Z) + g(y, z, w)` of degree `2 v0 w0`.
    pub fn twist(e: &CurveSpec, k: &K3Spec) -> Result<Self, FamilyError> {
        let [v0, v1, v2] = e.weights;
        let [w0, w1, w2, w3] = k.weights;
        if v0.gcd(&w0) != 1 {
            return Err(FamilyError::GcdViolation { v0, w0 });
        }
        if v0 != v1 + v2 {
            return Err(FamilyError::NotCalabiYau {
                degree: 2 * v0,
                weight_sum: v0 + v1 + v2,
            });
        }
        if w0 != w1 + w2 + w3 {
            return Err(FamilyError::NotCalabiYau {
                degree: 2 * w0,
                weight_sum: w0 + w1 + w2 + w3,
            });
        }
        let curve_ring = PolyRing::new(vec!["Y".into(), "Z".into()], vec![v1, v2], TermOrder::WeightedGrevlex);
        let k3_ring = PolyRing::new(
            vec!["y".into(), "z".into(), "w".into()],
            vec![w1, w2, w3],
            TermOrder::WeightedGrevlex,
        );
        let f = parse_poly(&curve_ring, &e.f, "curve polynomial")?;
        let g = parse_poly(&k3_ring, &k.g, "K3 polynomial")?;
        check_degree(&f, 2 * v0, "curve polynomial")?;
        check_degree(&g, 2 * w0, "K3 polynomial")?;
        let ring = PolyRing::new(
            ["Y", "Z", "y", "z", "w"].iter().map(|s| s.to_string()).collect(),
            vec![w0 * v1, w0 * v2, v0 * w1, v0 * w2, v0 * w3],
            TermOrder::WeightedGrevlex,
        );
        let lift = |p: &WPoly<Rational>, offset: usize| {
            WPoly::from_terms(
                &ring,
                p.terms().iter().map(|(m, c)| {
                    let mut exps = [0u16; 5];
                    for (i, e) in m.exps().iter().take(3).enumerate() {
                        if i + offset < 5 {
                            exps[i + offset] = *e;
                        }
                    }
                    (ring.monomial(&exps), c.clone())
                }),
            )
        };
        let base = lift(&f, 0).add(&lift(&g, 2));
        let mut spec = Self::new(ring, base, Vec::new())?;
        spec.set_provenance(Provenance {
            curve: vec![v0, v1, v2],
            k3: vec![w0, w1, w2, w3],
        })?;
        Ok(spec)
    }

    /// Append `(psi, Y^2 Z^2)`, `(phi, y^2 z^2 w^2)`, `(chi, Y Z y z w)`.
    pub fn standard_deformations(mut self) -> Result<Self, FamilyError> {
        if self.ring.nvars() != 5 {
            return Err(FamilyError::Invalid("standard deformations need the five twisted coordinates".into()));
        }
        for (param, exps) in [
            ("psi", [2, 2, 0, 0, 0]),
            ("phi", [0, 0, 2, 2, 2]),
            ("chi", [1, 1, 1, 1, 1]),
        ] {
            let monomial = self.ring.monomial(&exps);
            self.push_deformation(Deformation {
                param: param.to_string(),
                monomial,
            })?;
        }
        Ok(self)
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// The one-parameter subfamily where only `param` varies.
    pub fn restrict(&self, param: &str) -> Result<Self, FamilyError> {
        let d = self
            .deformations
            .iter()
            .find(|d| d.param == param)
            .ok_or_else(|| FamilyError::Invalid(format!("unknown parameter `{param}`")))?;
        let mut out = self.clone();
        out.deformations = vec![d.clone()];
        Ok(out)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn base(&self) -> &WPoly<Rational> {
        &self.base
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn deformations(&self) -> &[Deformation] {
        &self.deformations
    }

    pub fn params(&self) -> Vec<String> {
        self.deformations.iter().map(|d| d.param.clone()).collect()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.deformations.iter().position(|d| d.param == name)
    }

    pub fn deformation_monomial(&self, name: &str) -> Option<Monomial> {
        self.deformations.iter().find(|d| d.param == name).map(|d| d.monomial)
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn sides(&self) -> Option<&[Side]> {
        self.sides.as_deref()
    }

    /// The deformed polynomial over ℚ(params).
    pub fn polynomial(&self) -> WPoly<RationalFunction> {
        let mut q = self.base.to_functions();
        for (i, d) in self.deformations.iter().enumerate() {
            q = q.add(&WPoly::term(&self.ring, d.monomial, RationalFunction::var(i)));
        }
        q
    }

    /// The deformed polynomial at a rational parameter point.
    pub fn polynomial_at(&self, point: &[Rational]) -> WPoly<Rational> {
        let mut q = self.base.clone();
        for (d, c) in self.deformations.iter().zip(point) {
            q = q.add(&WPoly::term(&self.ring, d.monomial, c.clone()));
        }
        q
    }

    /// The partial derivatives of [`Self::polynomial`].
    pub fn jacobian(&self) -> Vec<WPoly<RationalFunction>> {
        jacobian(&self.polynomial())
    }

    /// Degree-`degree` monomials invariant under the simultaneous sign flip
    /// of one block: exponent sum over curve variables is congruent to the
    /// exponent sum over K3 variables mod 2.
    pub fn invariant_monomials(&self, degree: u32) -> Result<Vec<Monomial>, FamilyError> {
        let sides = self
            .sides
            .as_ref()
            .ok_or_else(|| FamilyError::Invalid("variable sides are unknown for this family".into()))?;
        Ok(self
            .ring
            .monomials_of_degree(degree)
            .into_iter()
            .filter(|m| is_invariant(m, sides))
            .collect())
    }
}

pub(crate) fn is_invariant(m: &Monomial, sides: &[Side]) -> bool {
    let (mut e, mut k) = (0u32, 0u32);
    for (i, s) in sides.iter().enumerate() {
        match s {
            Side::Curve => e += m.exp(i) as u32,
            Side::K3 => k += m.exp(i) as u32,
        }
    }
    e % 2 == k % 2
}

/// All partial derivatives.
pub fn jacobian<F: Field>(q: &WPoly<F>) -> Vec<WPoly<F>> {
    (0..q.ring().nvars()).map(|i| q.derivative(i)).collect()
}

/// `(h11, h21) = (11 + 5N - N', 11 + 5N' - N)`.
pub fn hodge_numbers(n: u32, n_prime: u32) -> Result<(u32, u32), FamilyError> {
    let (n, np) = (n as i64, n_prime as i64);
    let h11 = 11 + 5 * n - np;
    let h21 = 11 + 5 * np - n;
    if h11 < 0 || h21 < 0 {
        return Err(FamilyError::Invalid(format!("negative Hodge number for (N, N') = ({n}, {np})")));
    }
    Ok((h11 as u32, h21 as u32))
}
