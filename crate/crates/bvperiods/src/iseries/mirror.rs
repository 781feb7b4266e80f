//! Mirror map and leading J-function terms from the large-radius I-series.
//!
//! To first order, `I = F z + sum_α D_α (F log q_α + g_α) + 1_σ g_σ + O(1/z)`,
//! so `τ_α = log q_α + g_α / F` and `τ_σ = g_σ / F`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::gamma::GammaSum;
use super::{build_series, to_rational_series, Caps, ISeriesError, Reading};
use crate::diffop::{IndexedSeries, SeriesCoeff};
use crate::family::FamilySpec;
use crate::scalar::Rational;

#[derive(Clone, Debug)]
pub struct MirrorMapData {
    pub reading: Reading,
    pub caps: Caps,
    /// Untwisted jet-0 series, constant term 1.
    pub f: IndexedSeries<Rational>,
    /// `g_α` in the `D_E`, `D_K` directions.
    pub g: Vec<IndexedSeries<GammaSum>>,
    /// Twisted jet-0 series.
    pub g_sigma: IndexedSeries<GammaSum>,
    /// `τ_α - log q_α = g_α / F`.
    pub tau: Vec<IndexedSeries<GammaSum>>,
    /// `τ_σ = g_σ / F`.
    pub tau_sigma: IndexedSeries<GammaSum>,
    /// Coefficient of `z` in `I / F`.
    pub j_z1: IndexedSeries<Rational>,
}

/// Product of two series with nonnegative exponents; a box truncation of the
/// factors determines the box truncation of the product.
fn mul_by<C: SeriesCoeff>(s: &IndexedSeries<C>, r: &IndexedSeries<Rational>) -> IndexedSeries<C> {
    let caps: Vec<i64> = s.region().iter().map(|b| b.hi).collect();
    let mut acc: BTreeMap<Vec<i64>, C> = BTreeMap::new();
    for (n, c) in s.terms() {
        for (m, q) in r.terms() {
            let k: Vec<i64> = n.iter().zip(m).map(|(a, b)| a + b).collect();
            if k.iter().zip(&caps).any(|(a, b)| a > b) {
                continue;
            }
            acc.entry(k).or_insert_with(C::zero_coeff).accumulate(&c.scaled(q));
        }
    }
    let mut out = IndexedSeries::new(s.vars().to_vec(), s.dens().to_vec(), s.region().to_vec());
    for (k, c) in acc {
        out.add_term(k, &c);
    }
    out
}

/// Inverse of a series with nonnegative exponents and constant term 1,
/// by `1/F = sum_k (1 - F)^k` truncated to the box.
fn inverse(f: &IndexedSeries<Rational>) -> Result<IndexedSeries<Rational>, ISeriesError> {
    let nv = f.vars().len();
    let origin = vec![0i64; nv];
    if f.coeff(&origin)? != Rational::one() {
        return Err(ISeriesError::Normalization);
    }
    let mut rest = IndexedSeries::new(f.vars().to_vec(), f.dens().to_vec(), f.region().to_vec());
    for (n, c) in f.terms() {
        if *n != origin {
            rest.add_term(n.clone(), &-c);
        }
    }
    let mut out = IndexedSeries::new(f.vars().to_vec(), f.dens().to_vec(), f.region().to_vec());
    out.add_term(origin.clone(), &Rational::one());
    let mut power = out.clone();
    // Each power of `rest` raises the total lattice degree by at least one.
    let depth: i64 = f.region().iter().map(|b| b.hi).sum();
    for _ in 0..=depth {
        power = mul_by(&power, &rest);
        if power.terms().all(|(_, c)| c.is_zero()) {
            break;
        }
        for (n, c) in power.terms() {
            out.add_term(n.clone(), c);
        }
    }
    Ok(out)
}

/// Mirror-map data from the jet-1 large-radius series inside `caps`.
pub fn mirror_map(fs: &FamilySpec, caps: Caps, reading: Reading) -> Result<MirrorMapData, ISeriesError> {
    let s = build_series(fs, caps, 1, reading)?;
    let f = to_rational_series(&s.untwisted.value).ok_or(ISeriesError::Normalization)?;
    let finv = inverse(&f)?;
    let g = s.untwisted.derivatives.clone();
    let g_sigma = s.twisted.value.clone();
    let tau = g.iter().map(|ga| mul_by(ga, &finv)).collect();
    let tau_sigma = mul_by(&g_sigma, &finv);
    let j_z1 = mul_by(&f, &finv);
    Ok(MirrorMapData {
        reading,
        caps,
        f,
        g,
        g_sigma,
        tau,
        tau_sigma,
        j_z1,
    })
}
