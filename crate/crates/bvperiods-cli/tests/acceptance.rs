//! Acceptance run: one PASS/FAIL line per criterion with timings.
//!
//! Some criteria fail because printed operators or relations disagree with
//! the computation. Those are listed in `KNOWN_FAILS` with the reason. The
//! run exits nonzero when an outcome differs from that table, when a budget
//! is exceeded, or when a control misbehaves (a mutated operator passing, a
//! derived operator leaving residuals).
//!
//! Set `BVPERIODS_FULL_CHI=1` to attempt the full chi derivation for
//! criterion 3 (over two hours); otherwise it runs in verify-only mode.

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use bvperiods::diffop::{annihilation, Bound, DiffOperator, IndexedSeries};
use bvperiods::family::FamilySpec;
use bvperiods::gdwork::derive_pf_1param;
use bvperiods::groebner::GroebnerBasis;
use bvperiods::iseries::gamma::{GammaSum, LogSym};
use bvperiods::iseries::{block_weights, coefficient, gamma_factors, Reading, SectorIndex};
use bvperiods::relations::{operator_to_relation, RelationContext};
use bvperiods::scalar::{nullspace, rank, rational_nullspace, rational_rank};
use bvperiods::wpoly::{PolyRing, TermOrder, WPoly};
use bvperiods::{ParamPolynomial, Rational};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use statrs::function::gamma::{gamma, ln_gamma};

const KNOWN_FAILS: &[(u32, &str)] = &[
    (1, "printed psi operator does not annihilate I(psi,0,0); the derived one does"),
    (2, "the phi operator has order 4; the printed order-3 operator leaves residuals"),
    (3, "printed chi operator leaves residuals on I(0,0,chi)"),
    (4, "printed R1, R2, R3 are not in the Jacobian ideal; ranks and R4, R5 hold"),
    (5, "printed (ii), (iii) are not relations; their corrected forms are"),
    (6, "printed (ii), (iii), (vi), (vii), (viii) leave residuals"),
];

fn data(path: &str) -> String {
    format!("{}/../../data/{path}", env!("CARGO_MANIFEST_DIR"))
}

fn family(name: &str) -> FamilySpec {
    FamilySpec::from_json(&std::fs::read_to_string(data(&format!("families/{name}.json"))).unwrap()).unwrap()
}

fn operator(name: &str) -> DiffOperator {
    DiffOperator::from_json(&std::fs::read_to_string(data(&format!("operators/{name}.json"))).unwrap()).unwrap()
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Run the CLI; returns the exit code and parsed JSON report.
fn cli(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_bvperiods")).args(args).output().unwrap();
    let code = out.status.code().unwrap_or(-1);
    let j = serde_json::from_slice(&out.stdout).unwrap_or_else(|_| {
        panic!("{args:?}: exit {code}, stderr {}", String::from_utf8_lossy(&out.stderr))
    });
    (code, j)
}

/// Outcome of one criterion. `sound` is false when a control misbehaves.
struct Verdict {
    pass: bool,
    sound: bool,
    notes: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self { pass: true, sound: true, notes: Vec::new() }
    }

    /// A check that decides the criterion.
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.pass &= ok;
        self.notes.push(format!("{} {}", if ok { "ok  " } else { "FAIL" }, what.into()));
    }

    /// A control that must hold whatever the criterion's outcome.
    fn control(&mut self, ok: bool, what: impl Into<String>) {
        self.sound &= ok;
        self.notes.push(format!("{} control: {}", if ok { "ok  " } else { "BAD " }, what.into()));
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(format!("     {}", what.into()));
    }
}

fn c1() -> Verdict {
    one_parameter_derivation("psi", "x640_psi_reference", "x640_psi_derived")
}

fn c2() -> Verdict {
    one_parameter_derivation("phi", "x640_phi_reference", "x640_phi_derived")
}

fn one_parameter_derivation(param: &str, printed: &str, derived: &str) -> Verdict {
    let mut v = Verdict::new();
    let fam = data("families/x640_mirror.json");
    let expect = data(&format!("operators/{printed}.json"));
    let (code, j) = cli(&["--family", &fam, "derive", "--param", param, "--expect", &expect]);
    v.check(code == 0, format!("derive --param {param} matches printed {}", j["expected"]["operator"]));
    v.note(format!("derived order {}: {}", j["order"], j["operator"]));
    let fixture = data(&format!("operators/{derived}.json"));
    let (code, _) = cli(&["--family", &fam, "derive", "--param", param, "--expect", &fixture]);
    v.control(code == 0, "derivation equals the stored derived operator");
    let (code, j) = cli(&["--family", &fam, "verify-op", "--operator", &fixture]);
    v.control(code == 0, format!("derived operator annihilates the specialization ({} points)", j["report"]["lattice_points"]));
    let (code, j) = cli(&["--family", &fam, "verify-op", "--operator", &expect]);
    v.note(format!("printed operator: exit {code}, {} residuals", j["report"]["residual_count"]));
    v
}

fn c3() -> Verdict {
    let mut v = Verdict::new();
    let fam = data("families/x640_mirror.json");
    if std::env::var("BVPERIODS_FULL_CHI").as_deref() == Ok("1") {
        let t = Instant::now();
        let expect = data("operators/x640_chi_reference.json");
        let (code, j) = cli(&["--family", &fam, "derive", "--param", "chi", "--max-order", "16", "--expect", &expect]);
        let within = t.elapsed() <= Duration::from_secs(7200);
        v.check(code == 0 && within, format!("full derivation in {:.0?}: {}", t.elapsed(), j["operator"]));
        return v;
    }
    v.note("verify-only mode (the full derivation exceeds its budget, see BVPERIODS_FULL_CHI)");
    let printed = data("operators/x640_chi_reference.json");
    let (code, j) = cli(&["--family", &fam, "verify-op", "--operator", &printed, "--max-residuals", "1"]);
    v.check(
        code == 0,
        format!(
            "printed chi operator annihilates I(0,0,chi): {} residuals over {} points",
            j["report"]["residual_count"], j["report"]["lattice_points"]
        ),
    );
    let derived = data("operators/x640_chi_derived.json");
    if std::path::Path::new(&derived).exists() {
        let (code, j) = cli(&["--family", &fam, "verify-op", "--operator", &derived]);
        v.control(code == 0, format!("stored derived chi operator annihilates ({} points)", j["report"]["lattice_points"]));
    }
    v
}

fn c4() -> Verdict {
    let mut v = Verdict::new();
    let fam = data("families/x111.json");
    for (k, want) in [(2, [6, 3, 3]), (3, [10, 9, 1]), (4, [15, 15, 0])] {
        let t = Instant::now();
        let (code, j) = cli(&["--family", &fam, "rank", "--level", &k.to_string()]);
        let r = &j["rank"];
        let got = [&r["num_products"], &r["relation_rank"], &r["local_ring_dim"]].map(|x| x.as_u64().unwrap());
        v.check(code == 0 && got == want.map(|x| x as u64), format!("rank level {k} = {got:?} ({:.2?})", t.elapsed()));
    }
    for (k, names) in [
        (2, vec!["x111_involution_reference", "x111_level2_a_reference", "x111_level2_b_reference"]),
        (3, vec!["x111_level3_a_reference", "x111_level3_b_reference"]),
    ] {
        let files: Vec<String> = names.iter().map(|n| data(&format!("relations/{n}.json"))).collect();
        let mut args = vec!["--family", fam.as_str(), "relations", "--level", if k == 2 { "2" } else { "3" }, "--verify"];
        args.extend(files.iter().map(String::as_str));
        let (_, j) = cli(&args);
        for (n, c) in names.iter().zip(j["verify"].as_array().unwrap()) {
            v.check(c["holds"] == true, format!("verify {n}"));
        }
    }
    let corrected: Vec<String> = ["x111_involution", "x111_level2_a", "x111_level2_b"]
        .iter()
        .map(|n| data(&format!("relations/{n}.json")))
        .collect();
    let mut args = vec!["--family", fam.as_str(), "relations", "--level", "2", "--verify"];
    args.extend(corrected.iter().map(String::as_str));
    v.control(cli(&args).0 == 0, "corrected R1, R2, R3 verify and lie in the computed span");
    v
}

fn c5() -> Verdict {
    let mut v = Verdict::new();
    let ctx = RelationContext::new(&family("x111")).unwrap();
    let found2 = ctx.find_relations(2);
    let found3 = ctx.find_relations(3);
    // With the found relations spanning the kernel of the normal-form map,
    // exact ideal membership is membership in their span.
    v.control(ctx.spans_level(&found2, 2) && ctx.spans_level(&found3, 3), "found relations span levels 2 and 3");
    for (label, name) in [
        ("(i)", "x111_involution"),
        ("(ii)", "x111_order2_a_reference"),
        ("(iii)", "x111_order2_b_reference"),
        ("(iv)", "x111_order3_a_reference"),
        ("(v)", "x111_order3_b_reference"),
    ] {
        let rel = operator_to_relation(&operator(name)).unwrap();
        v.check(ctx.verify(&rel).holds, format!("{label} {name} lies in the level-{} relation space", rel.level));
    }
    for name in ["x111_order2_a_exact", "x111_order2_b_exact"] {
        let op = operator(name);
        let top = DiffOperator::from_terms(
            op.params(),
            op.terms().iter().filter(|(d, _)| d.iter().sum::<u32>() == op.order()).cloned(),
        );
        let rel = operator_to_relation(&top).unwrap();
        v.control(ctx.verify(&rel).holds, format!("principal part of {name} is a relation"));
    }
    v
}

fn c6() -> Verdict {
    let mut v = Verdict::new();
    let run = |fam: &str, op: &str, extra: &[&str]| {
        let f = data(&format!("families/{fam}.json"));
        let o = data(&format!("operators/{op}.json"));
        let mut args = vec!["--family", f.as_str(), "verify-op", "--operator", o.as_str(), "--max-residuals", "0"];
        args.extend_from_slice(extra);
        let (code, j) = cli(&args);
        (code, format!("{} residuals / {} points", j["report"]["residual_count"], j["report"]["lattice_points"]))
    };
    for (fam, op) in [
        ("x19_1_1", "x111_involution"),
        ("x640_mirror", "x111_involution"),
        ("x19_1_1", "x111_order2_a_reference"),
        ("x19_1_1", "x111_order2_b_reference"),
        ("x640_mirror", "x640_psi_reference"),
        ("x640_mirror", "x640_phi_reference"),
        ("x640_mirror", "x640_chi_reference"),
    ] {
        let (code, s) = run(fam, op, &[]);
        v.check(code == 0, format!("{op} on {fam}: {s}"));
    }
    for (fam, op) in [
        ("x19_1_1", "x111_order2_a_exact"),
        ("x19_1_1", "x111_order2_b_exact"),
        ("x640_mirror", "x640_psi_derived"),
        ("x640_mirror", "x640_phi_derived"),
    ] {
        let (code, s) = run(fam, op, &[]);
        v.control(code == 0, format!("{op} on {fam}: {s}"));
    }
    for (fam, op) in [
        ("x19_1_1", "x111_involution"),
        ("x640_mirror", "x111_involution"),
        ("x19_1_1", "x111_order2_a_exact"),
        ("x19_1_1", "x111_order2_b_exact"),
        ("x640_mirror", "x640_psi_derived"),
        ("x640_mirror", "x640_phi_derived"),
    ] {
        for seed in ["0", "1"] {
            let (code, _) = run(fam, op, &["--mutate", "--seed", seed]);
            v.control(code == 1, format!("mutated {op} on {fam} (seed {seed}) fails"));
        }
    }
    v
}

fn c7() -> Verdict {
    let mut v = Verdict::new();
    for fam in ["x19_1_1", "x640_mirror"] {
        let f = data(&format!("families/{fam}.json"));
        let (code, j) = cli(&["--family", &f, "shift-check", "--bounds", "6,6,6"]);
        let s = &j["sweep"];
        v.check(code == 0, format!("{fam}: {} points, {} nontrivial, {} failures", s["checked"], s["nontrivial"], s["failures"].as_array().unwrap().len()));
        v.control(cli(&["--family", &f, "shift-check", "--bounds", "6,6,6", "--mutate"]).0 == 1, format!("{fam}: mutated chi factor fails"));
    }
    v
}

fn ring(weights: &[u32]) -> Arc<PolyRing> {
    let names = (0..weights.len()).map(|i| format!("x{i}")).collect();
    PolyRing::new(names, weights.to_vec(), TermOrder::WeightedGrevlex)
}

fn random_poly(rng: &mut ChaCha8Rng, r: &Arc<PolyRing>, deg: u32, n: usize) -> WPoly<Rational> {
    let mons = r.monomials_of_degree(deg);
    let mut f = WPoly::zero(r);
    if mons.is_empty() {
        return f;
    }
    for _ in 0..n {
        f = f.add(&WPoly::term(r, mons[rng.gen_range(0..mons.len())], q(rng.gen_range(-5..6))));
    }
    f
}

fn c8() -> Verdict {
    let mut v = Verdict::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    let mut euler = 0;
    while euler < 50 {
        let w: Vec<u32> = (0..rng.gen_range(2..6)).map(|_| rng.gen_range(1..6)).collect();
        let d = w.iter().fold(1u32, |a, &b| num_integer::lcm(a, b)) * rng.gen_range(1..4);
        let r = ring(&w);
        let mut f = random_poly(&mut rng, &r, d, 4);
        for (i, &wi) in w.iter().enumerate() {
            f = f.add(&WPoly::term(&r, r.var_monomial(i).pow((d / wi) as u16), q(1)));
        }
        let mut lhs = WPoly::zero(&r);
        for (i, &wi) in w.iter().enumerate() {
            lhs = lhs.add(&f.derivative(i).mul(&WPoly::var(&r, i)).scale(&q(wi as i64)));
        }
        if lhs != f.scale(&q(d as i64)) {
            break;
        }
        euler += 1;
    }
    v.check(euler == 50, format!("Euler identity on {euler}/50 quasi-homogeneous polynomials"));

    let (mut nf_ok, mut lift_ok) = (0, 0);
    for _ in 0..12 {
        let r = ring(&[1, 1, 1]);
        let mons = r.monomials_of_degree(3);
        let mut f = WPoly::zero(&r);
        for i in 0..3 {
            f = f.add(&WPoly::term(&r, r.var_monomial(i).pow(3), q(1)));
        }
        for k in 0..3 {
            f = f.add(&WPoly::term(&r, mons[(3 * k + 1) % mons.len()], q(rng.gen_range(1..5))));
        }
        let gens: Vec<_> = (0..3).map(|i| f.derivative(i)).collect();
        let gb = GroebnerBasis::compute(&gens, true).unwrap();
        let a = random_poly(&mut rng, &r, 3, 4);
        let b = random_poly(&mut rng, &r, 2, 3);
        let h = random_poly(&mut rng, &r, 3, 3);
        let (s, t) = (q(rng.gen_range(-5..6)), q(rng.gen_range(-5..6)));
        let nf = |p: &WPoly<Rational>| gb.normal_form(p);
        nf_ok += usize::from(
            nf(&nf(&a)) == nf(&a)
                && nf(&a.scale(&s).add(&h.scale(&t))) == nf(&a).scale(&s).add(&nf(&h).scale(&t))
                && nf(&a.mul(&b)) == nf(&nf(&a).mul(&nf(&b))),
        );
        let mut g = WPoly::zero(&r);
        for gen in &gens {
            g = g.add(&random_poly(&mut rng, &r, 1, 2).mul(gen));
        }
        let cof = gb.lift(&g).unwrap();
        let mut back = WPoly::zero(&r);
        for (c, gen) in cof.iter().zip(&gens) {
            back = back.add(&c.mul(gen));
        }
        lift_ok += usize::from(back == g);
    }
    v.check(nf_ok == 12, format!("normal form idempotent, linear, multiplicative on {nf_ok}/12 bases"));
    v.check(lift_ok == 12, format!("lift re-expands exactly on {lift_ok}/12 ideal members"));

    let mut ns_ok = 0;
    for _ in 0..40 {
        let (rows, cols) = (rng.gen_range(1..6), rng.gen_range(1..7));
        let m: Vec<Vec<Rational>> = (0..rows).map(|_| (0..cols).map(|_| q(rng.gen_range(-3..4))).collect()).collect();
        let ns = rational_nullspace(&m);
        let exact = ns.iter().all(|v| {
            m.iter().all(|row| row.iter().zip(v).map(|(a, b)| a * Rational::from_integer(b.clone())).sum::<Rational>() == q(0))
        });
        ns_ok += usize::from(exact && rational_rank(&m) + ns.len() == cols && nullspace(&m).len() == ns.len() && rank(&m) == rational_rank(&m));
    }
    v.check(ns_ok == 40, format!("nullspace exact with rank + nullity = cols on {ns_ok}/40 matrices"));

    let mut ap_ok = 0;
    let params: Vec<String> = vec!["s".into(), "t".into()];
    for _ in 0..24 {
        let terms: Vec<_> = (0..rng.gen_range(1..5))
            .map(|_| {
                let a = [rng.gen_range(0..3), rng.gen_range(0..3), 0, 0];
                (vec![rng.gen_range(0..3), rng.gen_range(0..3)], ParamPolynomial::monomial(a, q(rng.gen_range(-4..5))))
            })
            .collect();
        let op = DiffOperator::from_terms(&params, terms);
        let mut s = IndexedSeries::new(params.clone(), vec![rng.gen_range(1..4), rng.gen_range(1..4)], vec![Bound::truncated(0, 7), Bound::truncated(-3, 4)]);
        for i in 0..8 {
            for j in 0..8 {
                s.add_term(vec![i, j - 3], &q(rng.gen_range(-5..6)));
            }
        }
        let e = op.euler_rewrite();
        ap_ok += usize::from(op.apply(&s).unwrap() == e.apply(&s).unwrap() && e.to_operator() == op);
    }
    v.check(ap_ok == 24, format!("apply and Euler-rewritten apply agree on {ap_ok}/24 operators"));
    v
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::from(1), |a, k| a * k)
}

fn c9() -> Verdict {
    let mut v = Verdict::new();
    let d = derive_pf_1param(&family("quintic"), 8).unwrap();
    v.note(format!("order {}, cohomology dimension {}: {}", d.order, d.cohomology_dimension, d.operator.normalize()));
    let terms = 30;
    let series = |flip: bool| {
        let region = vec![Bound { lo: -5 * terms - 1, lo_exact: false, hi: -1, hi_exact: true }];
        let mut s = IndexedSeries::new(vec!["psi".into()], vec![1], region);
        for n in 0..=terms {
            let c = Rational::new(factorial(5 * n as u64), factorial(n as u64).pow(5));
            let neg = (n % 2 == 1) != (flip && n == 1);
            s.add_term(vec![-5 * n - 1], &if neg { -c } else { c });
        }
        s
    };
    let r = annihilation(&d.operator, &series(false)).unwrap();
    v.check(r.residuals.is_empty() && d.order == 4, format!("order-4 operator kills the period series ({} points)", r.lattice_points));
    v.control(!annihilation(&d.operator, &series(true)).unwrap().residuals.is_empty(), "sign-flipped series is not killed");
    v
}

fn eval(g: &GammaSum) -> f64 {
    let f = |x: &Rational| x.to_f64().unwrap();
    g.terms()
        .iter()
        .map(|((atoms, sym), c)| {
            let mut x = f(c);
            for (a, e) in atoms {
                x *= gamma(f(a)).powi(*e);
            }
            x * match sym {
                LogSym::One => 1.0,
                LogSym::EulerGamma => 0.577_215_664_901_532_9,
                LogSym::Log2 => std::f64::consts::LN_2,
            }
        })
        .sum()
}

/// Central differences at `h, h/10, h/100` and two Richardson steps in `h²`,
/// so the error is of order `h^6`.
fn richardson(factors: &[(f64, f64, bool)]) -> f64 {
    let amax = factors.iter().map(|x| x.0.abs()).fold(0.0, f64::max).max(1.0);
    let bmin = factors.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let h0 = 0.1 * bmin / amax;
    let lf = |e: f64| -> f64 {
        factors.iter().map(|&(a, b, num)| if num { ln_gamma(a * e + b) } else { -ln_gamma(a * e + b) }).sum()
    };
    let base = lf(0.0);
    let d = |h: f64| ((lf(h) - base).exp() - (lf(-h) - base).exp()) / (2.0 * h);
    let (d0, d1, d2) = (d(h0), d(h0 / 10.0), d(h0 / 100.0));
    let (r0, r1) = ((100.0 * d1 - d0) / 99.0, (100.0 * d2 - d1) / 99.0);
    (10000.0 * r1 - r0) / 9999.0 * base.exp()
}

fn c10() -> Verdict {
    let mut v = Verdict::new();
    for fam in ["x19_1_1", "x640_mirror"] {
        let (code, j) = cli(&["--family", &data(&format!("families/{fam}.json")), "mirror-map", "--bounds", "3,2,4"]);
        v.check(code == 0, format!("{fam}: {}", j["checks"]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let fams = [family("x19_1_1"), family("x640_mirror")];
    let (mut agree, mut worst) = (0, 0.0f64);
    for _ in 0..20 {
        let fs = &fams[rng.gen_range(0..2)];
        let w = block_weights(fs).unwrap();
        let idx = SectorIndex { a: rng.gen_range(0..4), b: rng.gen_range(0..3), c2: rng.gen_range(0..5) };
        let factors = gamma_factors(&idx, &w, Reading::Balanced);
        let jet = coefficient(&idx, fs, 1, Reading::Balanced).unwrap();
        let mut ok = true;
        for dir in 0..2 {
            let fl: Vec<_> = factors
                .iter()
                .map(|g| (g.alpha[dir].to_f64().unwrap(), g.beta.to_f64().unwrap(), g.numerator))
                .collect();
            let (want, got) = (richardson(&fl), eval(&jet.derivatives[dir]));
            let rel = (got - want).abs() / eval(&jet.value).abs().max(got.abs()).max(1e-300);
            worst = worst.max(rel);
            ok &= rel <= 1e-6;
        }
        agree += usize::from(ok);
    }
    v.check(agree == 20, format!("jet-1 derivatives match the extrapolated differences on {agree}/20 terms (worst relative {worst:.1e})"));
    v
}

fn main() {
    let criteria: [(u32, fn() -> Verdict, u64); 10] = [
        (1, c1, 600),
        (2, c2, 1800),
        (3, c3, 600),
        (4, c4, 3600),
        (5, c5, 600),
        (6, c6, 600),
        (7, c7, 600),
        (8, c8, 300),
        (9, c9, 600),
        (10, c10, 600),
    ];
    let mut unexpected = Vec::new();
    for (n, f, budget) in criteria {
        let t = Instant::now();
        let v = f();
        let el = t.elapsed();
        let in_budget = el <= Duration::from_secs(budget);
        let pass = v.pass && in_budget;
        let known = KNOWN_FAILS.iter().find(|(k, _)| *k == n).map(|(_, why)| *why);
        let tag = match (pass, known) {
            (false, Some(why)) => format!(" [known: {why}]"),
            _ => String::new(),
        };
        println!("criterion {n:>2}: {} {:>8.2}s (budget {budget}s){tag}", if pass { "PASS" } else { "FAIL" }, el.as_secs_f64());
        for note in &v.notes {
            println!("    {note}");
        }
        if !in_budget {
            println!("    FAIL over budget");
        }
        if pass == known.is_some() || !v.sound {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
