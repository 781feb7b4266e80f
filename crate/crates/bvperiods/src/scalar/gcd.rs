//! Multivariate gcd over ℚ.
//!
//! The fast path is the heuristic gcd (evaluate the main variable at a large
//! integer, recurse, interpolate in balanced base, verify by exact
//! division). When it gives up, recursive primitive remainder sequences
//! finish the job.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use std::collections::{BTreeMap, HashMap};

use super::ppoly::{glex_cmp, PExp, ParamPolynomial, MAX_PARAMS};
use super::Rational;

/// Greatest common divisor, normalized to a primitive integer polynomial
/// with positive leading coefficient. `gcd(0, 0) = 0`.
pub fn poly_gcd(a: &ParamPolynomial, b: &ParamPolynomial) -> ParamPolynomial {
    if a.is_zero() {
        return b.primitive_part();
    }
    if b.is_zero() {
        return a.primitive_part();
    }
    if a.is_constant() || b.is_constant() {
        return ParamPolynomial::one();
    }
    if a.len() == 1 || b.len() == 1 {
        return monomial_gcd(a, b);
    }
    let pa = a.primitive_part();
    let pb = b.primitive_part();
    if pa == pb {
        return pa;
    }
    if let Some(h) = heu_gcd(&pa, &pb) {
        return h.primitive_part();
    }
    gcd_rec(&pa, &pb).primitive_part()
}

const HEU_ATTEMPTS: usize = 6;

/// Integer polynomial, terms sorted descending in graded-lex order.
type IPoly = Vec<(PExp, BigInt)>;

fn to_ipoly(p: &ParamPolynomial) -> IPoly {
    p.terms()
        .iter()
        .map(|(e, c)| {
            debug_assert!(c.is_integer());
            (*e, c.numer().clone())
        })
        .collect()
}

fn from_ipoly(p: IPoly) -> ParamPolynomial {
    ParamPolynomial::from_terms(p.into_iter().map(|(e, c)| (e, Rational::from_integer(c))))
}

fn sort_ipoly(map: HashMap<PExp, BigInt>) -> IPoly {
    let mut v: IPoly = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    v.sort_by(|a, b| glex_cmp(&b.0, &a.0));
    v
}

fn ipoly_content(p: &IPoly) -> BigInt {
    let mut g = BigInt::zero();
    for (_, c) in p {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn ipoly_main_variable(f: &IPoly, g: &IPoly) -> Option<usize> {
    (0..MAX_PARAMS)
        .rev()
        .find(|&i| f.iter().chain(g.iter()).any(|(e, _)| e[i] > 0))
}

fn ipoly_eval(p: &IPoly, v: usize, xi: &BigInt, powers: &mut Vec<BigInt>) -> IPoly {
    let mut acc: HashMap<PExp, BigInt> = HashMap::with_capacity(p.len());
    for (e, c) in p {
        let k = e[v] as usize;
        while powers.len() <= k {
            let next = powers.last().map_or(BigInt::one(), |last| last * xi);
            powers.push(next);
        }
        let mut f = *e;
        f[v] = 0;
        *acc.entry(f).or_insert_with(BigInt::zero) += c * &powers[k];
    }
    sort_ipoly(acc)
}

/// Exact quotient over ℤ, or `None` if `d` does not divide `p`.
fn ipoly_div(p: &IPoly, d: &IPoly) -> Option<IPoly> {
    let (le, lc) = &d[0];
    for i in 0..MAX_PARAMS {
        let dp = p.iter().map(|(e, _)| e[i]).max().unwrap_or(0);
        let dd = d.iter().map(|(e, _)| e[i]).max().unwrap_or(0);
        if dd > dp {
            return None;
        }
    }
    let key = |e: &PExp| {
        let deg: u32 = e.iter().sum();
        (deg, *e)
    };
    let mut rem: BTreeMap<(u32, PExp), BigInt> = p.iter().map(|(e, c)| (key(e), c.clone())).collect();
    let mut quot = Vec::new();
    while let Some((k, c)) = rem.pop_last() {
        let re = k.1;
        if !(0..MAX_PARAMS).all(|i| le[i] <= re[i]) {
            return None;
        }
        let (q, r) = c.div_rem(lc);
        if !r.is_zero() {
            return None;
        }
        let mut qe = re;
        for i in 0..MAX_PARAMS {
            qe[i] -= le[i];
        }
        for (de, dc) in &d[1..] {
            let mut e = *de;
            for i in 0..MAX_PARAMS {
                e[i] += qe[i];
            }
            let entry = rem.entry(key(&e)).or_insert_with(BigInt::zero);
            *entry -= &q * dc;
            if entry.is_zero() {
                rem.remove(&key(&e));
            }
        }
        quot.push((qe, q));
    }
    Some(quot)
}

fn heu_gcd(f: &ParamPolynomial, g: &ParamPolynomial) -> Option<ParamPolynomial> {
    heu_gcd_int(&to_ipoly(f), &to_ipoly(g)).map(from_ipoly)
}

/// Gcd of two nonzero integer polynomials including the integer content,
/// with positive leading coefficient; `None` if the heuristic fails.
fn heu_gcd_int(f: &IPoly, g: &IPoly) -> Option<IPoly> {
    let cf = ipoly_content(f);
    let cg = ipoly_content(g);
    let c = cf.gcd(&cg);
    let v = match ipoly_main_variable(f, g) {
        None => return Some(vec![([0; MAX_PARAMS], c)]),
        Some(v) => v,
    };
    let f: IPoly = f.iter().map(|(e, x)| (*e, x / &cf)).collect();
    let g: IPoly = g.iter().map(|(e, x)| (*e, x / &cg)).collect();
    let norm = |p: &IPoly| p.iter().map(|(_, x)| x.abs()).max().unwrap();
    let (nf, ng) = (norm(&f), norm(&g));
    let b: BigInt = BigInt::from(2) * std::cmp::min(&nf, &ng) + 29;
    let lf = f[0].1.abs();
    let lg = g[0].1.abs();
    let mut xi = std::cmp::max(
        std::cmp::min(b.clone(), BigInt::from(99) * b.sqrt()),
        BigInt::from(2) * std::cmp::min(&nf / lf, &ng / lg) + 2,
    );
    for _ in 0..HEU_ATTEMPTS {
        let mut powers = Vec::new();
        let ff = ipoly_eval(&f, v, &xi, &mut powers);
        let gg = ipoly_eval(&g, v, &xi, &mut powers);
        if !ff.is_empty() && !gg.is_empty() {
            if let Some(h) = heu_gcd_int(&ff, &gg) {
                let mut h = interpolate(&h, v, &xi);
                let ch = ipoly_content(&h);
                let sign = if h[0].1.is_negative() { -ch } else { ch };
                for t in h.iter_mut() {
                    t.1 = &t.1 / &sign;
                }
                if ipoly_div(&f, &h).is_some() && ipoly_div(&g, &h).is_some() {
                    for t in h.iter_mut() {
                        t.1 *= &c;
                    }
                    return Some(h);
                }
            }
        }
        xi = BigInt::from(73794) * &xi * xi.sqrt().sqrt() / 27011;
    }
    None
}

/// Read each integer coefficient in balanced base `xi` as a polynomial in
/// variable `v`.
fn interpolate(h: &IPoly, v: usize, xi: &BigInt) -> IPoly {
    let half = xi / 2;
    let mut acc: HashMap<PExp, BigInt> = HashMap::new();
    for (e, c) in h {
        let mut n = c.clone();
        let mut k = 0u32;
        while !n.is_zero() {
            let mut r = n.mod_floor(xi);
            if r > half {
                r -= xi;
            }
            n = (&n - &r) / xi;
            if !r.is_zero() {
                let mut f = *e;
                f[v] = k;
                acc.insert(f, r);
            }
            k += 1;
        }
    }
    sort_ipoly(acc)
}

/// Gcd when at least one argument is a single term: the monomial part of the
/// other argument's common factor.
fn monomial_gcd(a: &ParamPolynomial, b: &ParamPolynomial) -> ParamPolynomial {
    let mut e = [u32::MAX; MAX_PARAMS];
    for p in [a, b] {
        for (f, _) in p.terms() {
            for i in 0..MAX_PARAMS {
                e[i] = e[i].min(f[i]);
            }
        }
    }
    ParamPolynomial::monomial(e, super::Rational::one())
}

fn main_variable(a: &ParamPolynomial, b: &ParamPolynomial) -> Option<usize> {
    let mask = a.support_mask() | b.support_mask();
    (0..MAX_PARAMS).rev().find(|&i| mask & (1 << i) != 0)
}

fn gcd_rec(a: &ParamPolynomial, b: &ParamPolynomial) -> ParamPolynomial {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return ParamPolynomial::one();
    }
    if a.len() == 1 || b.len() == 1 {
        return monomial_gcd(a, b);
    }
    let v = main_variable(a, b).expect("non-constant input");
    let da = a.degree_in(v);
    let db = b.degree_in(v);
    if da == 0 {
        return gcd_rec(a, &content_in(b, v));
    }
    if db == 0 {
        return gcd_rec(&content_in(a, v), b);
    }
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd_rec(&ca, &cb);
    let mut f = a.to_univariate(v);
    let mut g = b.to_univariate(v);
    f = uni_divide_content(&f, &ca);
    g = uni_divide_content(&g, &cb);
    if f.len() < g.len() {
        std::mem::swap(&mut f, &mut g);
    }
    while g.len() > 1 {
        let r = pseudo_remainder(&f, &g);
        f = g;
        if r.is_empty() {
            g = Vec::new();
            break;
        }
        let cr = uni_content(&r);
        g = uni_divide_content(&r, &cr);
    }
    let h = if g.is_empty() {
        f
    } else {
        // Nonzero constant remainder in `v`: the primitive parts are coprime.
        vec![ParamPolynomial::one()]
    };
    let h = ParamPolynomial::from_univariate(v, &h).primitive_part();
    &c * &h
}

/// Gcd of the coefficients of `a` viewed as a polynomial in `v`.
fn content_in(a: &ParamPolynomial, v: usize) -> ParamPolynomial {
    uni_content(&trim(a.to_univariate(v)))
}

fn uni_content(coeffs: &[ParamPolynomial]) -> ParamPolynomial {
    let mut nonzero: Vec<&ParamPolynomial> = coeffs.iter().filter(|c| !c.is_zero()).collect();
    nonzero.sort_by_key(|c| (c.total_degree(), c.len()));
    let mut g = match nonzero.first() {
        Some(c) => c.primitive_part(),
        None => return ParamPolynomial::zero(),
    };
    for c in &nonzero[1..] {
        if g.is_one() {
            break;
        }
        g = gcd_rec(&g, c).primitive_part();
    }
    g
}

fn uni_divide_content(coeffs: &[ParamPolynomial], c: &ParamPolynomial) -> Vec<ParamPolynomial> {
    let divided: Vec<ParamPolynomial> = if c.is_one() {
        coeffs.to_vec()
    } else {
        coeffs
            .iter()
            .map(|x| x.div_exact(c).expect("content divides every coefficient"))
            .collect()
    };
    let scale = rational_content(&divided);
    divided.iter().map(|x| x.scale(&scale)).collect()
}

/// Factor making all coefficients coprime integers.
fn rational_content(coeffs: &[ParamPolynomial]) -> super::Rational {
    let qs: Vec<&super::Rational> = coeffs
        .iter()
        .flat_map(|c| c.terms().iter().map(|(_, q)| q))
        .collect();
    let den = super::denominator_lcm(qs.iter().copied());
    let num = super::numerator_gcd(qs.iter().copied());
    if num.is_zero() {
        return super::Rational::one();
    }
    super::Rational::new(den, num)
}

fn trim(mut v: Vec<ParamPolynomial>) -> Vec<ParamPolynomial> {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

/// `lc(g)^(deg f - deg g + 1) * f mod g` in the main variable.
fn pseudo_remainder(f: &[ParamPolynomial], g: &[ParamPolynomial]) -> Vec<ParamPolynomial> {
    let lg = g.last().unwrap().clone();
    let dg = g.len() - 1;
    let mut r: Vec<ParamPolynomial> = f.to_vec();
    while r.len() > dg && !r.is_empty() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - dg;
        for c in r.iter_mut() {
            *c = &*c * &lg;
        }
        for (i, gc) in g.iter().enumerate() {
            r[i + shift] = &r[i + shift] - &(&lr * gc);
        }
        debug_assert!(r[dr].is_zero());
        r = trim(r);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn v(i: usize) -> ParamPolynomial {
        ParamPolynomial::var(i)
    }

    fn c(n: i64) -> ParamPolynomial {
        ParamPolynomial::from_int(n)
    }

    #[test]
    fn univariate() {
        let x = v(0);
        let a = &(&x - &c(1)) * &(&x + &c(2));
        let b = &(&x - &c(1)) * &(&x - &c(3));
        assert_eq!(poly_gcd(&a, &b), &x - &c(1));
    }

    #[test]
    fn multivariate_common_factor() {
        let (x, y, z) = (v(0), v(1), v(2));
        let common = &(&(&x * &y) + &z.pow(2)) - &c(3);
        let a = &common * &(&x + &(&y * &z));
        let b = &common * &(&(&x * &x) - &y);
        let g = poly_gcd(&a, &b);
        assert_eq!(g, common.primitive_part());
    }

    #[test]
    fn coprime_and_scaled() {
        let (x, y) = (v(0), v(1));
        let a = (&x + &y).scale(&rat(6));
        let b = (&x - &y).scale(&rat(4));
        assert!(poly_gcd(&a, &b).is_one());
        assert_eq!(poly_gcd(&a, &a.scale(&rat(-3))), &x + &y);
    }

    #[test]
    fn heuristic_agrees_with_prs() {
        let (x, y, z) = (v(0), v(1), v(2));
        let common = &(&(&x.pow(3) * &y) - &(&z.pow(2) * &c(12345))) + &c(7);
        let a = &common * &(&(&x * &z) + &y.pow(4));
        let b = &common.pow(2) * &(&(&y * &z) - &c(5));
        let h = heu_gcd(&a.primitive_part(), &b.primitive_part()).unwrap().primitive_part();
        let r = gcd_rec(&a.primitive_part(), &b.primitive_part()).primitive_part();
        assert_eq!(h, r);
        assert_eq!(h, common.primitive_part());
    }

    #[test]
    fn monomial_factor() {
        let (x, y) = (v(0), v(1));
        let a = &x.pow(3) * &y;
        let b = &(&x.pow(2) * &y.pow(2)) + &x.pow(2);
        assert_eq!(poly_gcd(&a, &b), x.pow(2));
    }
}
