//! Buchberger's algorithm with Gebauer-Möller pair management and cofactor
//! tracking.
//!
//! Every basis element remembers how it is built from the input generators,
//! so ideal membership can be certified by explicit cofactors
//! ([`GroebnerBasis::lift`]).

use std::cmp::Ordering;
use std::sync::Arc;

use thiserror::Error;

use crate::scalar::Field;
use crate::wpoly::{Monomial, PolyRing, WPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroebnerError {
    #[error("polynomial is not in the ideal (nonzero normal form)")]
    NotInIdeal,
    #[error("no generators given")]
    Empty,
}

/// A reduced Gröbner basis together with cofactors over the generators.
#[derive(Clone, Debug)]
pub struct GroebnerBasis<F: Field> {
    ring: Arc<PolyRing>,
    generators: Vec<WPoly<F>>,
    basis: Vec<WPoly<F>>,
    /// `basis[i] = sum_j cofactors[i][j] * generators[j]`; empty when not tracked.
    cofactors: Vec<Vec<WPoly<F>>>,
}

/// Result of dividing by the basis.
pub struct Division<F: Field> {
    pub remainder: WPoly<F>,
    /// One quotient per basis element.
    pub quotients: Vec<WPoly<F>>,
}

#[derive(Clone, Copy)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

struct Builder<F: Field> {
    ring: Arc<PolyRing>,
    track: bool,
    ngens: usize,
    polys: Vec<WPoly<F>>,
    cofs: Vec<Vec<WPoly<F>>>,
    active: Vec<bool>,
}

impl<F: Field> Builder<F> {
    fn lm(&self, i: usize) -> &Monomial {
        self.polys[i].leading_monomial().expect("basis elements are nonzero")
    }

    /// Full reduction by the active elements; returns the remainder and, when
    /// tracking, the accumulated cofactor correction `sum q_k cof_k`.
    fn reduce(&self, f: WPoly<F>) -> (WPoly<F>, Vec<WPoly<F>>) {
        let mut correction: Vec<Vec<(Monomial, F)>> = vec![Vec::new(); self.polys.len()];
        let mut rest: Vec<(Monomial, F)> = f.into_terms();
        let mut done: Vec<(Monomial, F)> = Vec::new();
        let mut start = 0;
        while start < rest.len() {
            let (m, c) = rest[start].clone();
            let divisor = (0..self.polys.len())
                .find(|&k| self.active[k] && self.lm(k).divides(&m));
            match divisor {
                None => {
                    done.push((m, c));
                    start += 1;
                }
                Some(k) => {
                    let g = &self.polys[k];
                    let q = g.leading_monomial().unwrap().quotient_of(&m);
                    let coeff = c.div_ref(g.leading_coefficient().unwrap());
                    if self.track {
                        correction[k].push((q, coeff.clone()));
                    }
                    let tail = WPoly::from_sorted(&self.ring, g.terms()[1..].to_vec());
                    let remaining = WPoly::from_sorted(&self.ring, rest[start + 1..].to_vec());
                    rest = remaining.sub_mul_term(&coeff, &q, &tail).into_terms();
                    start = 0;
                }
            }
        }
        let remainder = WPoly::from_sorted(&self.ring, done);
        let mut total = vec![WPoly::zero(&self.ring); if self.track { self.ngens } else { 0 }];
        if self.track {
            for (k, qs) in correction.into_iter().enumerate() {
                if qs.is_empty() {
                    continue;
                }
                let q = WPoly::from_terms(&self.ring, qs);
                for t in 0..self.ngens {
                    if !self.cofs[k][t].is_zero() {
                        total[t] = total[t].add(&q.mul(&self.cofs[k][t]));
                    }
                }
            }
        }
        (remainder, total)
    }

    fn push(&mut self, p: WPoly<F>, cof: Vec<WPoly<F>>) -> usize {
        let lc = p.leading_coefficient().unwrap().clone();
        let inv = lc.inv();
        self.polys.push(p.scale(&inv));
        self.cofs.push(cof.iter().map(|c| c.scale(&inv)).collect());
        self.active.push(true);
        self.polys.len() - 1
    }

    fn spoly(&self, pair: &Pair) -> (WPoly<F>, Vec<WPoly<F>>) {
        let (gi, gj) = (&self.polys[pair.i], &self.polys[pair.j]);
        let mi = gi.leading_monomial().unwrap().quotient_of(&pair.lcm);
        let mj = gj.leading_monomial().unwrap().quotient_of(&pair.lcm);
        let one = F::one();
        let s = gi.mul_term(&mi, &one).sub(&gj.mul_term(&mj, &one));
        let cof = if self.track {
            (0..self.ngens)
                .map(|t| {
                    self.cofs[pair.i][t]
                        .mul_term(&mi, &one)
                        .sub(&self.cofs[pair.j][t].mul_term(&mj, &one))
                })
                .collect()
        } else {
            Vec::new()
        };
        (s, cof)
    }

    fn pair_cmp(&self, a: &Pair, b: &Pair) -> Ordering {
        self.ring.cmp(&a.lcm, &b.lcm)
    }

    /// Gebauer-Möller update after adding element `h`.
    fn update(&mut self, pairs: &mut Vec<Pair>, h: usize) {
        let weights = self.ring.weights().to_vec();
        let lh = *self.lm(h);
        let candidates: Vec<Pair> = (0..h)
            .filter(|&g| self.active[g])
            .map(|g| Pair {
                i: g,
                j: h,
                lcm: self.lm(g).lcm(&lh, &weights),
            })
            .collect();
        // Chain criterion among the new pairs.
        let mut kept: Vec<Pair> = Vec::new();
        for (idx, p) in candidates.iter().enumerate() {
            let coprime = self.lm(p.i).is_coprime(&lh);
            let dominated = candidates.iter().enumerate().any(|(o, q)| {
                o != idx
                    && q.lcm.divides(&p.lcm)
                    && (q.lcm != p.lcm || (o < idx && !self.lm(q.i).is_coprime(&lh)))
            }) || kept.iter().any(|q| q.lcm == p.lcm);
            if coprime || !dominated {
                kept.push(*p);
            }
        }
        // Product criterion.
        kept.retain(|p| !self.lm(p.i).is_coprime(&lh));
        // Chain criterion on old pairs.
        pairs.retain(|p| {
            !(lh.divides(&p.lcm)
                && self.lm(p.i).lcm(&lh, &weights) != p.lcm
                && self.lm(p.j).lcm(&lh, &weights) != p.lcm)
        });
        pairs.extend(kept);
        for g in 0..h {
            if self.active[g] && lh.divides(self.lm(g)) {
                self.active[g] = false;
            }
        }
    }
}

impl<F: Field> GroebnerBasis<F> {
    /// Compute the reduced basis; `track_cofactors` enables [`Self::lift`].
    pub fn compute(generators: &[WPoly<F>], track_cofactors: bool) -> Result<Self, GroebnerError> {
        let ring = generators.first().ok_or(GroebnerError::Empty)?.ring().clone();
        let gens: Vec<WPoly<F>> = generators.to_vec();
        let n = gens.len();
        let mut b = Builder {
            ring: ring.clone(),
            track: track_cofactors,
            ngens: n,
            polys: Vec::new(),
            cofs: Vec::new(),
            active: Vec::new(),
        };
        let mut pairs: Vec<Pair> = Vec::new();
        for (t, g) in gens.iter().enumerate() {
            let mut cof = if track_cofactors {
                vec![WPoly::zero(&ring); n]
            } else {
                Vec::new()
            };
            if track_cofactors {
                cof[t] = WPoly::one(&ring);
            }
            let (r, corr) = b.reduce(g.clone());
            if r.is_zero() {
                continue;
            }
            let cof: Vec<WPoly<F>> = if track_cofactors {
                cof.iter().zip(corr.iter()).map(|(c, d)| c.sub(d)).collect()
            } else {
                cof
            };
            let h = b.push(r, cof);
            b.update(&mut pairs, h);
        }
        while !pairs.is_empty() {
            // Normal strategy: smallest lcm first.
            let (best, _) = pairs
                .iter()
                .enumerate()
                .min_by(|a, c| b.pair_cmp(a.1, c.1))
                .unwrap();
            let pair = pairs.swap_remove(best);
            let (s, scof) = b.spoly(&pair);
            let (r, corr) = b.reduce(s);
            if r.is_zero() {
                continue;
            }
            let cof = if track_cofactors {
                scof.iter().zip(corr.iter()).map(|(c, d)| c.sub(d)).collect()
            } else {
                Vec::new()
            };
            let h = b.push(r, cof);
            b.update(&mut pairs, h);
        }
        let mut gb = Self {
            ring,
            generators: gens,
            basis: Vec::new(),
            cofactors: Vec::new(),
        };
        gb.interreduce(b);
        Ok(gb)
    }

    /// Minimalize and tail-reduce.
    fn interreduce(&mut self, b: Builder<F>) {
        let mut idx: Vec<usize> = (0..b.polys.len()).filter(|&k| b.active[k]).collect();
        idx.sort_by(|&x, &y| self.ring.cmp(b.lm(x), b.lm(y)));
        let mut minimal: Vec<usize> = Vec::new();
        for &k in &idx {
            if !minimal.iter().any(|&m| b.lm(m).divides(b.lm(k))) {
                minimal.push(k);
            }
        }
        let mut polys = Vec::new();
        let mut cofs = Vec::new();
        for &k in &minimal {
            // Reduce the tail against the other minimal elements.
            let mut red = Builder {
                ring: self.ring.clone(),
                track: b.track,
                ngens: b.ngens,
                polys: b.polys.clone(),
                cofs: b.cofs.clone(),
                active: vec![false; b.polys.len()],
            };
            for &m in &minimal {
                red.active[m] = m != k;
            }
            let p = &b.polys[k];
            let head = WPoly::term(&self.ring, *p.leading_monomial().unwrap(), p.leading_coefficient().unwrap().clone());
            let tail = WPoly::from_sorted(&self.ring, p.terms()[1..].to_vec());
            let (r, corr) = red.reduce(tail);
            polys.push(head.add(&r));
            if b.track {
                cofs.push(b.cofs[k].iter().zip(corr.iter()).map(|(c, d)| c.sub(d)).collect());
            }
        }
        let mut order: Vec<usize> = (0..polys.len()).collect();
        order.sort_by(|&x, &y| {
            self.ring
                .cmp(polys[y].leading_monomial().unwrap(), polys[x].leading_monomial().unwrap())
        });
        self.basis = order.iter().map(|&k| polys[k].clone()).collect();
        if b.track {
            self.cofactors = order.iter().map(|&k| std::mem::take(&mut cofs[k])).collect();
        }
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn basis(&self) -> &[WPoly<F>] {
        &self.basis
    }

    pub fn generators(&self) -> &[WPoly<F>] {
        &self.generators
    }

    pub fn tracks_cofactors(&self) -> bool {
        !self.cofactors.is_empty() || self.basis.is_empty()
    }

    /// Cofactors of basis element `i` over the generators.
    pub fn cofactors(&self, i: usize) -> &[WPoly<F>] {
        &self.cofactors[i]
    }

    /// Divide `f` by the basis.
    pub fn divide(&self, f: &WPoly<F>) -> Division<F> {
        let mut quotients: Vec<Vec<(Monomial, F)>> = vec![Vec::new(); self.basis.len()];
        let mut rest: Vec<(Monomial, F)> = f.terms().to_vec();
        let mut done = Vec::new();
        let mut start = 0;
        while start < rest.len() {
            let (m, c) = rest[start].clone();
            match self
                .basis
                .iter()
                .position(|g| g.leading_monomial().unwrap().divides(&m))
            {
                None => {
                    done.push((m, c));
                    start += 1;
                }
                Some(k) => {
                    let g = &self.basis[k];
                    let q = g.leading_monomial().unwrap().quotient_of(&m);
                    quotients[k].push((q, c.clone()));
                    let tail = WPoly::from_sorted(&self.ring, g.terms()[1..].to_vec());
                    let remaining = WPoly::from_sorted(&self.ring, rest[start + 1..].to_vec());
                    rest = remaining.sub_mul_term(&c, &q, &tail).into_terms();
                    start = 0;
                }
            }
        }
        Division {
            remainder: WPoly::from_sorted(&self.ring, done),
            quotients: quotients
                .into_iter()
                .map(|qs| WPoly::from_terms(&self.ring, qs))
                .collect(),
        }
    }

    /// Unique remainder modulo the ideal.
    pub fn normal_form(&self, f: &WPoly<F>) -> WPoly<F> {
        self.divide(f).remainder
    }

    pub fn contains(&self, f: &WPoly<F>) -> bool {
        self.normal_form(f).is_zero()
    }

    /// Cofactors `c` with `f = sum_j c[j] * generators[j]`.
    pub fn lift(&self, f: &WPoly<F>) -> Result<Vec<WPoly<F>>, GroebnerError> {
        assert!(self.tracks_cofactors(), "basis was computed without cofactors");
        let d = self.divide(f);
        if !d.remainder.is_zero() {
            return Err(GroebnerError::NotInIdeal);
        }
        Ok(self.combine(&d.quotients))
    }

    /// Split `f = normal_form(f) + sum_j c[j] * generators[j]`.
    pub fn lift_with_remainder(&self, f: &WPoly<F>) -> (WPoly<F>, Vec<WPoly<F>>) {
        assert!(self.tracks_cofactors(), "basis was computed without cofactors");
        let d = self.divide(f);
        (d.remainder, self.combine(&d.quotients))
    }

    fn combine(&self, quotients: &[WPoly<F>]) -> Vec<WPoly<F>> {
        let mut out = vec![WPoly::zero(&self.ring); self.generators.len()];
        for (k, q) in quotients.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            for (t, c) in self.cofactors[k].iter().enumerate() {
                if !c.is_zero() {
                    out[t] = out[t].add(&q.mul(c));
                }
            }
        }
        out
    }

    /// Monomials of weighted degree `d` not divisible by any leading monomial.
    pub fn standard_monomials(&self, d: u32) -> Vec<Monomial> {
        self.ring
            .monomials_of_degree(d)
            .into_iter()
            .filter(|m| {
                !self
                    .basis
                    .iter()
                    .any(|g| g.leading_monomial().unwrap().divides(m))
            })
            .collect()
    }

    /// Whether every S-polynomial reduces to zero (Buchberger's criterion;
    /// pairs with coprime leading monomials are skipped).
    pub fn satisfies_buchberger_criterion(&self) -> bool {
        let weights = self.ring.weights();
        for i in 0..self.basis.len() {
            for j in i + 1..self.basis.len() {
                let (gi, gj) = (&self.basis[i], &self.basis[j]);
                let (li, lj) = (gi.leading_monomial().unwrap(), gj.leading_monomial().unwrap());
                if li.is_coprime(lj) {
                    continue;
                }
                let l = li.lcm(lj, weights);
                let s = gi
                    .mul_term(&li.quotient_of(&l), &gi.leading_coefficient().unwrap().inv())
                    .sub(&gj.mul_term(&lj.quotient_of(&l), &gj.leading_coefficient().unwrap().inv()));
                if !self.normal_form(&s).is_zero() {
                    return false;
                }
            }
        }
        true
    }
}
