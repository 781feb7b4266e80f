//! The hypergeometric I-function of a twisted family in two charts.
//!
//! Large radius: sectors `(a, b, c)` with `c ∈ ½ℤ≥0`, exponents
//! `ψ^(a/2) φ^(b/w0) χ^(2c)`, Gamma ratios in the cohomology directions
//! `D_E, D_K` (expanded to first order for the mirror map).
//!
//! Continued chart (around the Fermat point): the sums over `a` and `b` are
//! replaced by residue sums at the poles of the numerator Gammas, giving
//! exponents `ψ^(p_E/2) φ^(p_K/2) χ^(2c)`. Operators are checked here.

pub mod gamma;
mod mirror;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::diffop::{annihilation, Bound, DiffOperator, IndexedSeries, SeriesError};
use crate::family::FamilySpec;
use crate::scalar::Rational;
use gamma::{expand, factorial, rgamma, GammaFactor, GammaSum, Jet, JetError};

pub use mirror::{mirror_map, MirrorMapData};

#[derive(Debug, Error)]
pub enum ISeriesError {
    #[error("family has no curve/K3 weight data")]
    NoProvenance,
    #[error("family must have exactly the three deformations psi, phi, chi (found {0})")]
    Parameters(usize),
    #[error("sector ({a}, {b}, {c2}/2) violates a >= -c/2 and b >= -c/w0")]
    Bounds { a: i64, b: i64, c2: u32 },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("valid region for `{var}` spans {steps} whole steps after shrinkage (need {need})")]
    RegionTooSmall { var: String, steps: i64, need: i64 },
    #[error("valid region is empty after shrinkage")]
    EmptyRegion,
    #[error("untwisted series is not rational with constant term 1")]
    Normalization,
}

/// Which reading of the Gamma-ratio formula to use.
///
/// `Balanced` uses `Γ(2 w0 D_K + 1)`, the full `w0, w1, w2, w3` product in
/// the untwisted prefactor, and `w0 b` in the twisted K denominator.
/// `Printed` uses `Γ(6 D_K + 1)`, only `w1..w3` in the prefactor, and `3 b`
/// in the twisted K denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Reading {
    #[default]
    Balanced,
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Component {
    Untwisted,
    Twisted,
}

impl Component {
    pub fn of_c2(c2: u32) -> Self {
        if c2 % 2 == 0 {
            Component::Untwisted
        } else {
            Component::Twisted
        }
    }
}

/// Curve weights `(v0; v1, v2)` and K3 weights `(w0; w1, w2, w3)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockWeights {
    pub v: [u32; 3],
    pub w: [u32; 4],
}

pub fn block_weights(fs: &FamilySpec) -> Result<BlockWeights, ISeriesError> {
    let p = fs.provenance().ok_or(ISeriesError::NoProvenance)?;
    Ok(BlockWeights {
        v: [p.v()[0], p.v()[1], p.v()[2]],
        w: [p.w()[0], p.w()[1], p.w()[2], p.w()[3]],
    })
}

fn three_params(fs: &FamilySpec) -> Result<Vec<String>, ISeriesError> {
    let p = fs.params();
    if p.len() != 3 {
        return Err(ISeriesError::Parameters(p.len()));
    }
    Ok(p)
}

/// Large-radius sector `(a, b, c)` with `c = c2 / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SectorIndex {
    pub a: i64,
    pub b: i64,
    pub c2: u32,
}

impl SectorIndex {
    pub fn new(a: i64, b: i64, c2: u32, w0: u32) -> Result<Self, ISeriesError> {
        // a >= -c/2 and b >= -c/w0, with c = c2/2.
        if 4 * a + c2 as i64 >= 0 && 2 * w0 as i64 * b + c2 as i64 >= 0 {
            Ok(Self { a, b, c2 })
        } else {
            Err(ISeriesError::Bounds { a, b, c2 })
        }
    }

    pub fn component(&self) -> Component {
        Component::of_c2(self.c2)
    }
}

fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn half() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2))
}

/// The Gamma factors of a large-radius sector, in directions `(D_E, D_K)`.
pub fn gamma_factors(idx: &SectorIndex, w: &BlockWeights, reading: Reading) -> Vec<GammaFactor> {
    let (a, b) = (q(idx.a), q(idx.b));
    let c = Rational::new(BigInt::from(idx.c2), BigInt::from(2));
    let c2 = q(idx.c2 as i64);
    let twisted = idx.component() == Component::Twisted;
    let v0 = q(w.v[0] as i64);
    let w0 = q(w.w[0] as i64);
    let one = Rational::one();
    let zero = Rational::zero();
    let e = |x: Rational| vec![x, Rational::zero()];
    let k = |x: Rational| vec![Rational::zero(), x];
    let num = |alpha: Vec<Rational>, beta: Rational| GammaFactor {
        alpha,
        beta,
        numerator: true,
    };
    let den = |alpha: Vec<Rational>, beta: Rational| GammaFactor {
        alpha,
        beta,
        numerator: false,
    };
    let mut f = Vec::new();
    // Prefactor at the cohomology point.
    f.push(num(e(v0.clone()), if twisted { half() } else { one.clone() }));
    for &vl in &w.v[1..] {
        f.push(num(e(q(vl as i64)), one.clone()));
    }
    f.push(den(e(&v0 * q(2)), one.clone()));
    let printed_untwisted = reading == Reading::Printed && !twisted;
    if !printed_untwisted {
        f.push(num(k(w0.clone()), if twisted { half() } else { one.clone() }));
    }
    for &wl in &w.w[1..] {
        f.push(num(k(q(wl as i64)), one.clone()));
    }
    if printed_untwisted {
        f.push(den(k(q(6)), one.clone()));
    } else {
        f.push(den(k(&w0 * q(2)), one.clone()));
    }
    // E block.
    f.push(num(e(&v0 * q(2)), &v0 * &a * q(2) + &c2 + &one));
    f.push(den(e(v0.clone()), &v0 * &a + &c + &one));
    for &vl in &w.v[1..] {
        let vl = q(vl as i64);
        f.push(den(e(vl.clone()), &vl * &a + &one));
    }
    // K block.
    f.push(num(k(&w0 * q(2)), &w0 * &b * q(2) + &c2 + &one));
    let kb = if twisted && reading == Reading::Printed { q(3) * &b } else { &w0 * &b };
    f.push(den(k(w0.clone()), kb + &c + &one));
    for &wl in &w.w[1..] {
        let wl = q(wl as i64);
        f.push(den(k(wl.clone()), &wl * &b + &one));
    }
    f.push(den(vec![zero.clone(), zero], c2 + one));
    f
}

/// Gamma-ratio coefficient of a large-radius sector to jet order 0 or 1.
pub fn coefficient(idx: &SectorIndex, fs: &FamilySpec, jet: u32, reading: Reading) -> Result<Jet, ISeriesError> {
    let w = block_weights(fs)?;
    SectorIndex::new(idx.a, idx.b, idx.c2, w.w[0])?;
    Ok(expand(&gamma_factors(idx, &w, reading), 2, jet)?)
}

/// Box bounds: exponent numerators up to these caps in each variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub psi: i64,
    pub phi: i64,
    pub chi: i64,
}

/// One component of an I-series with optional first derivatives.
#[derive(Clone, Debug)]
pub struct ComponentSeries {
    pub component: Component,
    pub value: IndexedSeries<GammaSum>,
    /// In the `D_E`, `D_K` directions; empty at jet order 0.
    pub derivatives: Vec<IndexedSeries<GammaSum>>,
}

/// Both components of an I-series in one chart.
#[derive(Clone, Debug)]
pub struct ISeries {
    pub untwisted: ComponentSeries,
    pub twisted: ComponentSeries,
}

impl ISeries {
    pub fn component(&self, c: Component) -> &ComponentSeries {
        match c {
            Component::Untwisted => &self.untwisted,
            Component::Twisted => &self.twisted,
        }
    }

    pub fn components(&self) -> [&ComponentSeries; 2] {
        [&self.untwisted, &self.twisted]
    }

    /// Set the given variables to zero in every component.
    pub fn specialize(&self, zero_vars: &[&str]) -> Result<ISeries, ISeriesError> {
        let spec = |s: &IndexedSeries<GammaSum>| -> Result<IndexedSeries<GammaSum>, SeriesError> {
            let mut out = s.clone();
            for v in zero_vars {
                out = out.at_zero(v)?;
            }
            Ok(out)
        };
        let comp = |c: &ComponentSeries| -> Result<ComponentSeries, SeriesError> {
            Ok(ComponentSeries {
                component: c.component,
                value: spec(&c.value)?,
                derivatives: c.derivatives.iter().map(spec).collect::<Result<_, _>>()?,
            })
        };
        Ok(ISeries {
            untwisted: comp(&self.untwisted)?,
            twisted: comp(&self.twisted)?,
        })
    }
}

/// Large-radius series: all sectors with `0 <= a <= caps.psi`,
/// `0 <= b <= caps.phi`, `0 <= 2c <= caps.chi`. Sectors with negative `a`
/// or `b` vanish to first order and are omitted.
pub fn build_series(fs: &FamilySpec, caps: Caps, jet: u32, reading: Reading) -> Result<ISeries, ISeriesError> {
    let params = three_params(fs)?;
    let w = block_weights(fs)?;
    let dens = vec![2, w.w[0], 1];
    let region = vec![
        Bound::truncated(0, caps.psi),
        Bound::truncated(0, caps.phi),
        Bound::truncated(0, caps.chi),
    ];
    let empty = || IndexedSeries::new(params.clone(), dens.clone(), region.clone());
    let nder = if jet == 0 { 0 } else { 2 };
    let mut comps: BTreeMap<Component, ComponentSeries> = BTreeMap::new();
    for c in [Component::Untwisted, Component::Twisted] {
        comps.insert(
            c,
            ComponentSeries {
                component: c,
                value: empty(),
                derivatives: vec![empty(); nder],
            },
        );
    }
    for c2 in 0..=caps.chi as u32 {
        for a in 0..=caps.psi {
            for b in 0..=caps.phi {
                let idx = SectorIndex { a, b, c2 };
                let j = expand(&gamma_factors(&idx, &w, reading), 2, jet)?;
                let n = vec![a, b, c2 as i64];
                let cs = comps.get_mut(&idx.component()).unwrap();
                cs.value.add_term(n.clone(), &j.value);
                for (d, s) in j.derivatives.iter().zip(cs.derivatives.iter_mut()) {
                    s.add_term(n.clone(), d);
                }
            }
        }
    }
    Ok(ISeries {
        untwisted: comps.remove(&Component::Untwisted).unwrap(),
        twisted: comps.remove(&Component::Twisted).unwrap(),
    })
}

/// Residue of one block at pole `p` of its numerator Gamma, with `C = 2c`:
/// `(-1)^p/p! / Γ(u0' s + c + 1) / prod_l Γ(u_l s + 1)` at
/// `s = -(C + 1 + p)/(2 u0)`, rescaled by `(-4)^floor(p/2)`.
fn residue_block(u0: u32, u0_den: Rational, u: &[u32], p: u32, c2: u32) -> GammaSum {
    let s = Rational::new(-BigInt::from(c2 + 1 + p), BigInt::from(2 * u0));
    let c = Rational::new(BigInt::from(c2), BigInt::from(2));
    let mut out = rgamma(&(&u0_den * &s + &c + Rational::one()));
    if out.is_zero() {
        return out;
    }
    for &ul in u {
        out = out.mul(&rgamma(&(q(ul as i64) * &s + Rational::one())));
        if out.is_zero() {
            return out;
        }
    }
    let mut scale = factorial(p as u64).recip();
    if p % 2 == 1 {
        scale = -scale;
    }
    let norm = (-q(4)).pow((p / 2) as i32);
    out.scale(&(scale * norm))
}

/// Continued-chart coefficient at lattice point `(p_E, p_K, C)`.
pub fn continued_coefficient(w: &BlockWeights, p_e: u32, p_k: u32, c2: u32, reading: Reading) -> GammaSum {
    let twisted = c2 % 2 == 1;
    let e = residue_block(w.v[0], q(w.v[0] as i64), &w.v[1..], p_e, c2);
    if e.is_zero() {
        return e;
    }
    let k0 = if twisted && reading == Reading::Printed { q(3) } else { q(w.w[0] as i64) };
    let k = residue_block(w.w[0], k0, &w.w[1..], p_k, c2);
    let mut overall = factorial(c2 as u64).recip();
    if twisted {
        overall = -overall;
    }
    e.mul(&k).scale(&overall)
}

/// Continued-chart series with exponent numerators over `(2, 2, 1)` up to `caps`.
pub fn build_continued(fs: &FamilySpec, caps: Caps, reading: Reading) -> Result<ISeries, ISeriesError> {
    let params = three_params(fs)?;
    let w = block_weights(fs)?;
    let dens = vec![2, 2, 1];
    let region = vec![
        Bound::truncated(0, caps.psi),
        Bound::truncated(0, caps.phi),
        Bound::truncated(0, caps.chi),
    ];
    let mut un = IndexedSeries::new(params.clone(), dens.clone(), region.clone());
    let mut tw = IndexedSeries::new(params, dens, region);
    for c2 in 0..=caps.chi as u32 {
        for pe in 0..=caps.psi as u32 {
            for pk in 0..=caps.phi as u32 {
                let v = continued_coefficient(&w, pe, pk, c2, reading);
                let target = if c2 % 2 == 0 { &mut un } else { &mut tw };
                target.add_term(vec![pe as i64, pk as i64, c2 as i64], &v);
            }
        }
    }
    Ok(ISeries {
        untwisted: ComponentSeries {
            component: Component::Untwisted,
            value: un,
            derivatives: Vec::new(),
        },
        twisted: ComponentSeries {
            component: Component::Twisted,
            value: tw,
            derivatives: Vec::new(),
        },
    })
}

/// Result of checking the involution shift identity at one lattice point.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftCheck {
    pub holds: bool,
    pub lhs: GammaSum,
    pub rhs: GammaSum,
}

/// Multiplier applied to the `∂_χ²` side; the correct one is `(C+1)(C+2)`.
pub type ChiFactor = fn(u32) -> Rational;

pub fn standard_chi_factor(c2: u32) -> Rational {
    q(c2 as i64 + 1) * q(c2 as i64 + 2)
}

/// Coefficient identity behind the involution equation at `(p_E, p_K, C)`:
/// `coef(p_E, p_K, C+2) (C+1)(C+2) = (p_E/2+1)(p_K/2+1) coef(p_E+2, p_K+2, C)`.
pub fn involution_shift_check(w: &BlockWeights, p_e: u32, p_k: u32, c2: u32, reading: Reading, chi_factor: ChiFactor) -> ShiftCheck {
    let lhs = continued_coefficient(w, p_e, p_k, c2 + 2, reading).scale(&chi_factor(c2));
    let m = (Rational::new(BigInt::from(p_e), BigInt::from(2)) + Rational::one())
        * (Rational::new(BigInt::from(p_k), BigInt::from(2)) + Rational::one());
    let rhs = continued_coefficient(w, p_e + 2, p_k + 2, c2, reading).scale(&m);
    ShiftCheck {
        holds: lhs == rhs,
        lhs,
        rhs,
    }
}

/// Summary of an exhaustive shift-identity sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub reading: Reading,
    pub checked: usize,
    pub nontrivial: usize,
    pub failures: Vec<(u32, u32, u32)>,
}

/// Check the shift identity for all `p_E, p_K <= max_p` and `C <= max_c2`.
pub fn shift_sweep(w: &BlockWeights, max_p: u32, max_c2: u32, reading: Reading, chi_factor: ChiFactor) -> SweepReport {
    let mut rep = SweepReport {
        reading,
        checked: 0,
        nontrivial: 0,
        failures: Vec::new(),
    };
    for c2 in 0..=max_c2 {
        for pe in 0..=max_p {
            for pk in 0..=max_p {
                let r = involution_shift_check(w, pe, pk, c2, reading, chi_factor);
                rep.checked += 1;
                if !r.lhs.is_zero() || !r.rhs.is_zero() {
                    rep.nontrivial += 1;
                }
                if !r.holds {
                    rep.failures.push((pe, pk, c2));
                }
            }
        }
    }
    rep
}

/// One nonzero coefficient of `op(I)` inside the valid region.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentResidual {
    pub component: Component,
    pub exponent: String,
    pub value: String,
}

/// Report of applying an operator to every component of a series.
#[derive(Clone, Debug, Serialize)]
pub struct AnnihilationReport {
    pub schema: u32,
    pub operator: String,
    pub family: String,
    pub bounds: Vec<Bound>,
    pub valid_region: Vec<Bound>,
    pub lattice_points: u128,
    pub residual_count: usize,
    pub residuals: Vec<ComponentResidual>,
    pub pass: bool,
}

/// Apply `op` to each component and list nonzero coefficients in the valid
/// region. Every variable the operator acts on must keep at least
/// `min_steps` whole exponent steps of nonnegative exponent after shrinkage.
pub fn check_annihilation(
    op: &DiffOperator,
    s: &ISeries,
    family: &str,
    min_steps: i64,
) -> Result<AnnihilationReport, ISeriesError> {
    let active: Vec<&String> = op
        .params()
        .iter()
        .enumerate()
        .filter(|(i, _)| op.terms().iter().any(|(d, c)| d[*i] > 0 || c.degree_in(*i) > 0))
        .map(|(_, p)| p)
        .collect();
    let mut residuals = Vec::new();
    let mut valid_region = Vec::new();
    let mut lattice_points = 0;
    for c in s.components() {
        let result = annihilation(op, &c.value)?;
        if result.valid_region.iter().any(Bound::is_empty) {
            return Err(ISeriesError::EmptyRegion);
        }
        let dens = c.value.dens();
        for name in &active {
            let i = c.value.var_index(name).expect("operator variables are series variables");
            let b = &result.valid_region[i];
            let steps = (b.hi - b.lo.max(0)) / dens[i] as i64;
            if steps < min_steps {
                return Err(ISeriesError::RegionTooSmall {
                    var: name.to_string(),
                    steps,
                    need: min_steps,
                });
            }
        }
        lattice_points += result.lattice_points;
        valid_region = result.valid_region;
        residuals.extend(result.residuals.into_iter().map(|r| ComponentResidual {
            component: c.component,
            exponent: r.exponent,
            value: r.value,
        }));
    }
    Ok(AnnihilationReport {
        schema: 1,
        operator: op.to_text(),
        family: family.to_string(),
        bounds: s.untwisted.value.region().to_vec(),
        valid_region,
        lattice_points,
        residual_count: residuals.len(),
        pass: residuals.is_empty(),
        residuals,
    })
}

/// Every coefficient of a series is rational.
pub fn to_rational_series(s: &IndexedSeries<GammaSum>) -> Option<IndexedSeries<Rational>> {
    let mut out = IndexedSeries::new(s.vars().to_vec(), s.dens().to_vec(), s.region().to_vec());
    for (n, c) in s.terms() {
        out.add_term(n.clone(), &c.as_rational()?);
    }
    Some(out)
}

