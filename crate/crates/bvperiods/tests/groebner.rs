use std::time::Instant;

use bvperiods::family::{jacobian, FamilySpec};
use bvperiods::Rational;
use bvperiods::groebner::GroebnerBasis;

fn family(name: &str) -> FamilySpec {
    let path = format!("{}/../../data/families/{name}.json", env!("CARGO_MANIFEST_DIR"));
    FamilySpec::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn x111_parametric_basis() {
    let fam = family("x111");
    let t = Instant::now();
    let gb = GroebnerBasis::compute(&fam.jacobian(), false).unwrap();
    eprintln!("x111 basis: {} elements in {:?}", gb.basis().len(), t.elapsed());
    // A reduced basis over Q(params) specializes to the reduced basis of the
    // specialized ideal at a generic point.
    let pt: Vec<Rational> = [3, 5, 7].iter().map(|&n| Rational::from_integer(n.into())).collect();
    let direct = GroebnerBasis::compute(&jacobian(&fam.polynomial_at(&pt)), false).unwrap();
    assert!(direct.satisfies_buchberger_criterion());
    let specialized: Vec<_> = gb.basis().iter().map(|g| g.specialize(&pt).unwrap()).collect();
    assert_eq!(specialized, direct.basis());
}

#[test]
#[ignore = "checks every S-pair over Q(params); a few minutes"]
fn x111_parametric_criterion() {
    let gb = GroebnerBasis::compute(&family("x111").jacobian(), false).unwrap();
    assert!(gb.satisfies_buchberger_criterion());
}

#[test]
#[ignore = "timing probe"]
fn x111_scaling() {
    let fam = family("x111");
    for p in ["psi", "phi", "chi"] {
        let f = fam.restrict(p).unwrap();
        let t = Instant::now();
        let gb = GroebnerBasis::compute(&f.jacobian(), false).unwrap();
        eprintln!("{p}: {} elements in {:?}", gb.basis().len(), t.elapsed());
    }
}
