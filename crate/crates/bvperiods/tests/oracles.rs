//! Floating-point oracles, independent of the exact Gamma arithmetic.

use std::collections::BTreeMap;

use bvperiods::diffop::{Bound, DiffOperator, IndexedSeries, SeriesCoeff};
use bvperiods::family::FamilySpec;
use bvperiods::iseries::gamma::{GammaSum, LogSym};
use bvperiods::iseries::{
    block_weights, build_continued, build_series, coefficient, gamma_factors, mirror_map, BlockWeights, Caps, Reading,
    SectorIndex,
};
use bvperiods::Rational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::{gamma, ln_gamma};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn data(path: &str) -> String {
    std::fs::read_to_string(format!("{}/../../data/{path}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn family(name: &str) -> FamilySpec {
    FamilySpec::from_json(&data(&format!("families/{name}.json"))).unwrap()
}

fn f(x: &Rational) -> f64 {
    x.to_f64().unwrap()
}

fn eval(g: &GammaSum) -> f64 {
    g.terms()
        .iter()
        .map(|((atoms, sym), c)| {
            let mut v = f(c);
            for (a, e) in atoms {
                v *= gamma(f(a)).powi(*e);
            }
            v * match sym {
                LogSym::One => 1.0,
                LogSym::EulerGamma => EULER_GAMMA,
                LogSym::Log2 => std::f64::consts::LN_2,
            }
        })
        .sum()
}

/// `A(i, j, k) = (-1)^(i+j+k)/(i! j! k!) prod_l Γ(v_l (2i+k+1)/(2 v0)) prod_l Γ(w_l (2j+k+1)/(2 w0))`,
/// set to zero where a Gamma argument is an integer: the continued series
/// carries a factor `sin(π x)` per argument, constant on each class.
fn oracle(w: &BlockWeights, i: i64, j: i64, k: i64) -> f64 {
    let mut l = -(ln_gamma(i as f64 + 1.0) + ln_gamma(j as f64 + 1.0) + ln_gamma(k as f64 + 1.0));
    let args = w.v[1..]
        .iter()
        .map(|&vl| (vl as i64 * (2 * i + k + 1), 2 * w.v[0] as i64))
        .chain(w.w[1..].iter().map(|&wl| (wl as i64 * (2 * j + k + 1), 2 * w.w[0] as i64)));
    for (num, den) in args {
        if num % den == 0 {
            return 0.0;
        }
        l += ln_gamma(num as f64 / den as f64);
    }
    let s = if (i + j + k) % 2 == 0 { 1.0 } else { -1.0 };
    s * l.exp()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// The engine agrees with the oracle up to one constant per class of
/// fractional Gamma arguments.
#[test]
fn continued_series_matches_oracle_up_to_class_constants() {
    for fam in ["x19_1_1", "x640_mirror"] {
        let fs = family(fam);
        let w = block_weights(&fs).unwrap();
        let s = build_continued(&fs, Caps { psi: 16, phi: 16, chi: 12 }, Reading::Balanced).unwrap();
        let mut ratios: BTreeMap<Vec<(i64, i64)>, f64> = BTreeMap::new();
        let mut checked = 0;
        for c in s.components() {
            for (n, v) in c.value.terms() {
                let (i, j, k) = (n[0] / 2, n[1] / 2, n[2]);
                assert!(n[0] % 2 == 0 && n[1] % 2 == 0, "odd residues vanish in the balanced reading");
                let key = vec![
                    ((2 * i + k + 1) % (2 * w.v[0] as i64), 2 * w.v[0] as i64),
                    ((2 * j + k + 1) % (2 * w.w[0] as i64), 2 * w.w[0] as i64),
                    (k % 2, 2),
                ];
                let r = eval(v) / oracle(&w, i, j, k);
                match ratios.get(&key) {
                    Some(&r0) => assert!(close(r, r0, 1e-9), "{fam} {n:?}: {r} vs {r0}"),
                    None => {
                        ratios.insert(key, r);
                    }
                }
                checked += 1;
            }
        }
        assert!(checked > 100, "{fam}: {checked}");
    }
}

/// `f64` coefficients so that operators can act on the oracle series.
#[derive(Clone, Debug, PartialEq)]
struct Float(f64);

impl std::fmt::Display for Float {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "{}", self.0)
    }
}

impl SeriesCoeff for Float {
    fn zero_coeff() -> Self {
        Float(0.0)
    }
    fn vanishes(&self) -> bool {
        self.0 == 0.0
    }
    fn accumulate(&mut self, other: &Self) {
        self.0 += other.0;
    }
    fn scaled(&self, q: &Rational) -> Self {
        Float(self.0 * f(q))
    }
}

#[test]
fn exact_order_two_operators_kill_the_oracle_series() {
    let fs = family("x19_1_1");
    let w = block_weights(&fs).unwrap();
    let vars: Vec<String> = ["psi", "phi", "chi"].map(String::from).to_vec();
    let (ni, nj, nk) = (14, 14, 14);
    let region = vec![Bound::truncated(0, ni), Bound::truncated(0, nj), Bound::truncated(0, nk)];
    let mut s = IndexedSeries::new(vars, vec![1, 1, 1], region);
    let mut scale: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for i in 0..=ni {
        for j in 0..=nj {
            for k in 0..=nk {
                let v = oracle(&w, i, j, k);
                s.add_term(vec![i, j, k], &Float(v));
                scale.insert(vec![i, j, k], v.abs());
            }
        }
    }
    for name in ["x111_order2_a_exact", "x111_order2_b_exact", "x111_involution"] {
        let op = DiffOperator::from_json(&data(&format!("operators/{name}.json"))).unwrap();
        let out = op.apply(&s).unwrap();
        let mut worst = 0.0f64;
        for (n, v) in out.terms() {
            if out.in_region(n) {
                // Compare against the size of the inputs that feed this point.
                let mag = (-2..=2)
                    .flat_map(|a| (-2..=2).flat_map(move |b| (-2..=2).map(move |c| (a, b, c))))
                    .filter_map(|(a, b, c)| scale.get(&vec![n[0] + a, n[1] + b, n[2] + c]))
                    .fold(0.0f64, |m, &x| m.max(x));
                worst = worst.max(v.0.abs() / (mag * 64.0).max(1e-300));
            }
        }
        assert!(worst < 1e-10, "{name}: relative residual {worst}");
    }
}

#[test]
fn build_series_term_count_matches_enumeration() {
    let fs = family("x19_1_1");
    let caps = Caps { psi: 3, phi: 3, chi: 6 };
    let s = build_series(&fs, caps, 0, Reading::Balanced).unwrap();
    let mut count = 0;
    for a in 0..=3 {
        for b in 0..=3 {
            for c2 in 0..=6u32 {
                let v = coefficient(&SectorIndex { a, b, c2 }, &fs, 0, Reading::Balanced).unwrap().value;
                if !v.is_zero() {
                    count += 1;
                }
            }
        }
    }
    assert_eq!(s.untwisted.value.len() + s.twisted.value.len(), count);
}

/// `d/dε` at 0 of `prod Γ(α_dir ε + β)^(±1)` by central differences at
/// `h, h/10, h/100` and two Richardson steps in `h²`.
fn richardson(factors: &[(f64, f64, bool)]) -> f64 {
    let amax = factors.iter().map(|x| x.0.abs()).fold(0.0, f64::max).max(1.0);
    let bmin = factors.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let h0 = 0.1 * bmin / amax;
    let lf = |e: f64| -> f64 {
        factors
            .iter()
            .map(|&(a, b, num)| if num { ln_gamma(a * e + b) } else { -ln_gamma(a * e + b) })
            .sum()
    };
    let base = lf(0.0);
    let d = |h: f64| ((lf(h) - base).exp() - (lf(-h) - base).exp()) / (2.0 * h);
    let (d0, d1, d2) = (d(h0), d(h0 / 10.0), d(h0 / 100.0));
    let r0 = (100.0 * d1 - d0) / 99.0;
    let r1 = (100.0 * d2 - d1) / 99.0;
    let r = (10000.0 * r1 - r0) / 9999.0;
    r * base.exp()
}

#[test]
fn jet_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let fams = [family("x19_1_1"), family("x640_mirror")];
    let (mut done, mut nonzero) = (0, 0);
    while done < 20 {
        let fs = &fams[rng.gen_range(0..2)];
        let w = block_weights(fs).unwrap();
        let idx = SectorIndex {
            a: rng.gen_range(0..4),
            b: rng.gen_range(0..3),
            c2: rng.gen_range(0..5),
        };
        let factors = gamma_factors(&idx, &w, Reading::Balanced);
        let jet = coefficient(&idx, fs, 1, Reading::Balanced).unwrap();
        for dir in 0..2 {
            let fl: Vec<(f64, f64, bool)> = factors.iter().map(|g| (f(&g.alpha[dir]), f(&g.beta), g.numerator)).collect();
            let want = richardson(&fl);
            let got = eval(&jet.derivatives[dir]);
            // Relative to the value: derivatives can vanish exactly.
            let size = eval(&jet.value).abs().max(got.abs());
            assert!((got - want).abs() <= 1e-6 * size, "{idx:?} dir {dir}: {got} vs {want}");
            nonzero += usize::from(got != 0.0);
        }
        done += 1;
    }
    assert!(nonzero >= 20, "{nonzero}");
}

#[test]
fn mirror_map_structure() {
    for fam in ["x19_1_1", "x640_mirror"] {
        let fs = family(fam);
        let caps = Caps { psi: 3, phi: 2, chi: 4 };
        let m = mirror_map(&fs, caps, Reading::Balanced).unwrap();
        let zero = [0i64, 0, 0];
        assert_eq!(m.f.coeff(&zero).unwrap(), Rational::from_integer(1.into()));
        for g in m.g.iter().chain(&m.tau) {
            assert!(g.coeff(&zero).unwrap().is_zero());
        }
        // I/F has z-part exactly 1 inside the box.
        assert_eq!(m.j_z1.len(), 1);
        assert_eq!(m.j_z1.coeff(&zero).unwrap(), Rational::from_integer(1.into()));
        // Balanced untwisted jets are rational: γ cancels between numerator and denominator.
        for g in &m.g {
            for (_, c) in g.terms() {
                assert!(c.as_rational().is_some(), "{fam}: {c}");
            }
        }
        // τ_σ starts at the twisted leading term.
        assert!(m.tau_sigma.terms().all(|(n, _)| n[2] % 2 == 1));
    }
    let m = mirror_map(&family("x19_1_1"), Caps { psi: 2, phi: 1, chi: 2 }, Reading::Balanced).unwrap();
    assert_eq!(m.f.coeff(&[1, 0, 0]).unwrap(), Rational::from_integer(12.into()));
}
