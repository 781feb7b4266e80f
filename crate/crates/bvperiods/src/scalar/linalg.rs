//! Exact linear algebra: Gaussian elimination over a field and fraction-free
//! Bareiss elimination over an integral domain.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{denominator_lcm, Domain, Field, ParamPolynomial, Rational, RationalFunction};

/// Dense row-major matrix.
pub type Matrix<T> = Vec<Vec<T>>;

fn ncols<T>(m: &Matrix<T>) -> usize {
    m.first().map_or(0, |r| r.len())
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref<F: Field>(m: &mut Matrix<F>) -> Vec<usize> {
    let rows = m.len();
    let cols = ncols(m);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv();
        for j in c..cols {
            m[r][j] = m[r][j].mul_ref(&inv);
        }
        for i in 0..rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in c..cols {
                if !m[r][j].is_zero() {
                    let t = f.mul_ref(&m[r][j]);
                    m[i][j] = m[i][j].sub_ref(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(m: &Matrix<F>) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Basis of `{x : m x = 0}`; each vector has a 1 in its free coordinate.
pub fn nullspace<F: Field>(m: &Matrix<F>) -> Vec<Vec<F>> {
    let cols = ncols(m);
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![F::zero(); cols];
            v[f] = F::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Fraction-free echelon form in place; returns the pivot columns.
///
/// Every intermediate division is exact, so entries stay in the domain.
fn bareiss_echelon<D: Domain>(m: &mut Matrix<D>) -> Vec<usize> {
    let rows = m.len();
    let cols = ncols(m);
    let mut prev = D::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let t = m[r][c].mul_ref(&m[i][j]).sub_ref(&m[i][c].mul_ref(&m[r][j]));
                m[i][j] = if prev == D::one() { t } else { t.exact_div(&prev) };
            }
            m[i][c] = D::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn bareiss_rank<D: Domain>(m: &Matrix<D>) -> usize {
    let mut a = m.clone();
    bareiss_echelon(&mut a).len()
}

/// Nullspace basis over the domain: vectors are content-free and their first
/// nonzero entry has a positive leading coefficient.
pub fn bareiss_nullspace<D: Domain>(m: &Matrix<D>) -> Vec<Vec<D>> {
    let mut a = m.clone();
    let pivots = bareiss_echelon(&mut a);
    nullspace_from_echelon(&a, &pivots)
}

fn nullspace_from_echelon<D: Domain>(a: &Matrix<D>, pivots: &[usize]) -> Vec<Vec<D>> {
    let cols = ncols(a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    // Cramer: with x_f equal to the determinant of the pivot block, every
    // back-substituted coordinate lies in the domain.
    let det = pivots
        .last()
        .map_or(D::one(), |&c| a[pivots.len() - 1][c].clone());
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut x = vec![D::zero(); cols];
        x[f] = det.clone();
        for (r, &p) in pivots.iter().enumerate().rev() {
            // a[r][p] x_p = -(a[r][f] x_f + sum of later pivot terms)
            let mut s = -a[r][f].mul_ref(&x[f]);
            for &q in &pivots[r + 1..] {
                if !a[r][q].is_zero() {
                    s = s.sub_ref(&a[r][q].mul_ref(&x[q]));
                }
            }
            x[p] = s.exact_div(&a[r][p]);
        }
        basis.push(normalize_vector(x));
    }
    basis
}

/// Divide out the gcd of the entries and fix the sign of the first nonzero one.
fn normalize_vector<D: Domain>(mut x: Vec<D>) -> Vec<D> {
    let mut g = D::zero();
    for e in &x {
        if !e.is_zero() {
            g = if g.is_zero() { e.clone() } else { g.gcd(e) };
        }
    }
    if g.is_zero() {
        return x;
    }
    if g.is_negative_lead() {
        g = -g;
    }
    if g != D::one() {
        for e in x.iter_mut() {
            if !e.is_zero() {
                *e = e.exact_div(&g);
            }
        }
    }
    D::normalize_units(&mut x);
    if x.iter().find(|e| !e.is_zero()).map_or(false, |e| e.is_negative_lead()) {
        for e in x.iter_mut() {
            *e = -e.clone();
        }
    }
    x
}

fn clear_rational_row(row: &[Rational]) -> Vec<BigInt> {
    let l = denominator_lcm(row.iter());
    row.iter()
        .map(|q| (q * Rational::from_integer(l.clone())).to_integer())
        .collect()
}

/// Integer nullspace of a rational matrix via Bareiss.
pub fn rational_nullspace(m: &Matrix<Rational>) -> Vec<Vec<BigInt>> {
    let a: Matrix<BigInt> = m.iter().map(|r| clear_rational_row(r)).collect();
    bareiss_nullspace(&a)
}

pub fn rational_rank(m: &Matrix<Rational>) -> usize {
    let a: Matrix<BigInt> = m.iter().map(|r| clear_rational_row(r)).collect();
    bareiss_rank(&a)
}

/// Clear denominators of a row of rational functions.
pub(crate) fn clear_function_row(row: &[RationalFunction]) -> Vec<ParamPolynomial> {
    let mut l = ParamPolynomial::one();
    for e in row {
        if !e.denom().is_one() {
            let g = super::poly_gcd(&l, e.denom());
            l = &l * &e.denom().div_exact(&g).unwrap();
        }
    }
    row.iter()
        .map(|e| {
            if e.is_zero() {
                ParamPolynomial::zero()
            } else {
                &e.numer().clone() * &l.div_exact(e.denom()).unwrap()
            }
        })
        .collect()
}

/// Rank at a fixed sample point, a lower bound for the generic rank.
pub fn sample_rank(m: &Matrix<ParamPolynomial>) -> usize {
    const POINT: [i64; super::MAX_PARAMS] = [1009, -2003, 3001, 4019];
    let pt: Vec<Rational> = POINT.iter().map(|&v| Rational::from_integer(v.into())).collect();
    let e: Matrix<Rational> = m.iter().map(|r| r.iter().map(|p| p.eval(&pt)).collect()).collect();
    rational_rank(&e)
}

impl RationalFunction {
    /// Polynomial nullspace of a matrix of rational functions via Bareiss.
    pub fn nullspace(m: &Matrix<RationalFunction>) -> Vec<Vec<ParamPolynomial>> {
        let a: Matrix<ParamPolynomial> = m.iter().map(|r| clear_function_row(r)).collect();
        bareiss_nullspace(&a)
    }

    /// Exact rank. A specialization can only lower the rank, so full rank at
    /// a sample point settles it; otherwise Bareiss decides.
    pub fn rank(m: &Matrix<RationalFunction>) -> usize {
        let a: Matrix<ParamPolynomial> = m.iter().map(|r| clear_function_row(r)).collect();
        let full = a.len().min(ncols(&a));
        if sample_rank(&a) == full {
            return full;
        }
        bareiss_rank(&a)
    }

    /// Rank and polynomial nullspace from one elimination, skipped entirely
    /// when the sample point already shows full column rank.
    pub fn rank_and_nullspace(m: &Matrix<RationalFunction>) -> (usize, Vec<Vec<ParamPolynomial>>) {
        let mut a: Matrix<ParamPolynomial> = m.iter().map(|r| clear_function_row(r)).collect();
        let cols = ncols(&a);
        if sample_rank(&a) == cols {
            return (cols, Vec::new());
        }
        let pivots = bareiss_echelon(&mut a);
        let ns = nullspace_from_echelon(&a, &pivots);
        (pivots.len(), ns)
    }
}
