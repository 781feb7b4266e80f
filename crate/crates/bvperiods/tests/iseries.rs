use bvperiods::diffop::DiffOperator;
use bvperiods::family::FamilySpec;
use bvperiods::iseries::{
    block_weights, build_continued, build_series, check_annihilation, coefficient, shift_sweep, standard_chi_factor,
    AnnihilationReport, Caps, Component, Reading, SectorIndex,
};
use bvperiods::Rational;

fn data(path: &str) -> String {
    std::fs::read_to_string(format!("{}/../../data/{path}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn family(name: &str) -> FamilySpec {
    FamilySpec::from_json(&data(&format!("families/{name}.json"))).unwrap()
}

fn operator(name: &str) -> DiffOperator {
    DiffOperator::from_json(&data(&format!("operators/{name}.json"))).unwrap()
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn check(fam: &str, op: &DiffOperator, caps: Caps, zero: &[&str], reading: Reading) -> AnnihilationReport {
    let fs = family(fam);
    let s = build_continued(&fs, caps, reading).unwrap().specialize(zero).unwrap();
    check_annihilation(op, &s, fam, 8).unwrap()
}

#[test]
fn coefficient_examples() {
    let fs = family("x19_1_1");
    let c = |a, b, c2| coefficient(&SectorIndex { a, b, c2 }, &fs, 0, Reading::Balanced).unwrap().value;
    assert_eq!(c(0, 0, 0).as_rational(), Some(q(1)));
    assert_eq!(c(1, 0, 0).as_rational(), Some(q(12)));
    assert!(coefficient(&SectorIndex { a: -1, b: 0, c2: 0 }, &fs, 0, Reading::Balanced).is_err());
    assert!(SectorIndex::new(-1, 0, 0, 25).is_err());
    assert!(SectorIndex::new(-1, 0, 4, 25).is_ok());
}

#[test]
fn shift_identity_sweep() {
    for fam in ["x19_1_1", "x640_mirror"] {
        let w = block_weights(&family(fam)).unwrap();
        let ok = shift_sweep(&w, 12, 12, Reading::Balanced, standard_chi_factor);
        assert!(ok.failures.is_empty(), "{fam}: {:?}", ok.failures);
        assert!(ok.nontrivial > 0);
        let printed = shift_sweep(&w, 12, 12, Reading::Printed, standard_chi_factor);
        assert!(!printed.failures.is_empty(), "{fam}");
        let mutated = shift_sweep(&w, 12, 12, Reading::Balanced, |c2| q(c2 as i64 + 1) * q(c2 as i64 + 3));
        assert!(!mutated.failures.is_empty(), "{fam}");
    }
}

#[test]
fn involution_annihilates_both_families() {
    let op = operator("x111_involution");
    for fam in ["x19_1_1", "x640_mirror"] {
        let r = check(fam, &op, Caps { psi: 24, phi: 24, chi: 24 }, &[], Reading::Balanced);
        assert!(r.pass, "{fam}: {:?}", &r.residuals[..r.residuals.len().min(3)]);
    }
}

#[test]
fn order_two_exact_operator_annihilates() {
    let op = operator("x111_order2_a_exact");
    let r = check("x19_1_1", &op, Caps { psi: 24, phi: 4, chi: 24 }, &["phi"], Reading::Balanced);
    assert!(r.pass, "{:?}", &r.residuals[..r.residuals.len().min(3)]);
    // Mutation control: 4*(4-psi^2) -> 5*(4-psi^2).
    let bad = op.add(&DiffOperator::parse_text("(4-psi^2)*D_psi^2", op.params()).unwrap());
    let r = check("x19_1_1", &bad, Caps { psi: 24, phi: 4, chi: 24 }, &["phi"], Reading::Balanced);
    assert!(!r.pass && r.residual_count > 0);
}

#[test]
fn order_two_b_exact_operator_annihilates() {
    let op = operator("x111_order2_b_exact");
    for fam in ["x19_1_1", "x111"] {
        let r = check(fam, &op, Caps { psi: 24, phi: 24, chi: 24 }, &[], Reading::Balanced);
        assert!(r.pass, "{fam}: {:?}", &r.residuals[..r.residuals.len().min(3)]);
    }
    let bad = op.add(&DiffOperator::parse_text("psi*D_chi", op.params()).unwrap());
    assert!(!check("x19_1_1", &bad, Caps { psi: 24, phi: 24, chi: 24 }, &[], Reading::Balanced).pass);
}

#[test]
fn printed_order_two_operators_leave_residuals() {
    for name in ["x111_order2_a_reference", "x111_order2_b_reference"] {
        let r = check("x19_1_1", &operator(name), Caps { psi: 24, phi: 24, chi: 24 }, &[], Reading::Balanced);
        assert!(!r.pass, "{name}");
    }
}

#[test]
fn series_are_not_vacuous() {
    let caps = Caps { psi: 24, phi: 24, chi: 24 };
    for fam in ["x19_1_1", "x640_mirror"] {
        let s = build_continued(&family(fam), caps, Reading::Balanced).unwrap();
        for c in s.components() {
            assert!(c.value.len() >= 20, "{fam} {:?}: {} terms", c.component, c.value.len());
        }
    }
    let s = build_continued(&family("x640_mirror"), Caps { psi: 40, phi: 40, chi: 40 }, Reading::Balanced).unwrap();
    for (zero, min) in [(["phi", "chi"], 5), (["psi", "chi"], 5), (["psi", "phi"], 5)] {
        let sp = s.specialize(&zero).unwrap();
        assert!(sp.untwisted.value.len() >= min, "{zero:?}");
    }
}

#[test]
fn involution_mutation_fails() {
    let op = operator("x111_involution");
    let bad = op.add(&DiffOperator::parse_text("D_chi^2", op.params()).unwrap());
    let r = check("x19_1_1", &bad, Caps { psi: 24, phi: 24, chi: 24 }, &[], Reading::Balanced);
    assert!(!r.pass);
}

#[test]
fn printed_one_parameter_operators_leave_residuals() {
    for (name, caps, zero) in [
        ("x640_psi_reference", Caps { psi: 40, phi: 0, chi: 0 }, ["phi", "chi"]),
        ("x640_phi_reference", Caps { psi: 0, phi: 40, chi: 0 }, ["psi", "chi"]),
        ("x640_chi_reference", Caps { psi: 0, phi: 0, chi: 100 }, ["psi", "phi"]),
    ] {
        let r = check("x640_mirror", &operator(name), caps, &zero, Reading::Balanced);
        assert!(!r.pass, "{name}");
    }
}

#[test]
fn derived_one_parameter_operators_annihilate() {
    let r = check("x640_mirror", &operator("x640_psi_derived"), Caps { psi: 40, phi: 0, chi: 0 }, &["phi", "chi"], Reading::Balanced);
    assert!(r.pass, "psi: {:?}", &r.residuals[..r.residuals.len().min(3)]);
    let r = check("x640_mirror", &operator("x640_phi_derived"), Caps { psi: 0, phi: 40, chi: 0 }, &["psi", "chi"], Reading::Balanced);
    assert!(r.pass, "phi: {:?}", &r.residuals[..r.residuals.len().min(3)]);
}

#[test]
fn large_radius_series_shape() {
    let fs = family("x19_1_1");
    let s = build_series(&fs, Caps { psi: 3, phi: 3, chi: 6 }, 0, Reading::Balanced).unwrap();
    assert_eq!(s.untwisted.value.coeff(&[0, 0, 0]).unwrap().as_rational(), Some(q(1)));
    assert_eq!(s.untwisted.value.coeff(&[1, 0, 0]).unwrap().as_rational(), Some(q(12)));
    for (n, _) in s.untwisted.value.terms() {
        assert_eq!(n[2] % 2, 0);
    }
    for (n, _) in s.twisted.value.terms() {
        assert_eq!(n[2] % 2, 1);
    }
    assert_eq!(s.untwisted.component, Component::Untwisted);
}


