use bvperiods::diffop::{annihilation, Bound, DiffOperator, IndexedSeries};
use bvperiods::family::FamilySpec;
use bvperiods::gdwork::{derive_pf_1param, jacobian_ideal, reduce_pole, GdError, RationalForm, Reducer};
use bvperiods::groebner::GroebnerBasis;
use bvperiods::scalar::factorial;
use bvperiods::wpoly::WPoly;
use bvperiods::{Field, Rational, RationalFunction};
use num_traits::One;

fn data(path: &str) -> String {
    std::fs::read_to_string(format!("{}/../../data/{path}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn family(name: &str) -> FamilySpec {
    FamilySpec::from_json(&data(&format!("families/{name}.json"))).unwrap()
}

fn operator(name: &str) -> DiffOperator {
    DiffOperator::from_json(&data(&format!("operators/{name}.json"))).unwrap()
}

#[test]
fn x640_psi_operator() {
    let fs = family("x640_mirror").restrict("psi").unwrap();
    let d = derive_pf_1param(&fs, 8).unwrap();
    assert_eq!(d.order, 2);
    assert_eq!(d.ranks, vec![1, 2, 2]);
    assert!(d.operator.eq_up_to_scalar(&operator("x640_psi_derived")));
    assert!(!d.operator.eq_up_to_scalar(&operator("x640_psi_reference")));
}

#[test]
fn x640_phi_operator_has_order_four() {
    let fs = family("x640_mirror").restrict("phi").unwrap();
    let d = derive_pf_1param(&fs, 8).unwrap();
    assert_eq!(d.order, 4);
    assert_eq!(d.ranks, vec![1, 2, 3, 4, 4]);
    assert!(d.operator.eq_up_to_scalar(&operator("x640_phi_derived")));
    assert!(!d.operator.eq_up_to_scalar(&operator("x640_phi_reference")));
}

#[test]
fn quintic_operator() {
    let d = derive_pf_1param(&family("quintic"), 8).unwrap();
    assert_eq!(d.order, 4);
    assert_eq!(d.cohomology_dimension, 204);
    assert!(d.operator.eq_up_to_scalar(&operator("quintic_psi_derived")));
}

/// `sum_n (-1)^n (5n)!/(n!)^5 psi^(-5n-1)`, the residue expansion of `Ω/Q`
/// for `Q = sum x_i^5 + psi x0x1x2x3x4`, built from factorials directly.
fn quintic_period(terms: i64) -> IndexedSeries<Rational> {
    let region = vec![Bound {
        lo: -5 * terms - 1,
        lo_exact: false,
        hi: -1,
        hi_exact: true,
    }];
    let mut s = IndexedSeries::new(vec!["psi".into()], vec![1], region);
    for n in 0..=terms {
        let mut c = Rational::from_integer(factorial(5 * n as u64));
        for _ in 0..5 {
            c /= Rational::from_integer(factorial(n as u64));
        }
        if n % 2 == 1 {
            c = -c;
        }
        s.add_term(vec![-5 * n - 1], &c);
    }
    s
}

#[test]
fn quintic_operator_kills_hypergeometric_period() {
    let d = derive_pf_1param(&family("quintic"), 8).unwrap();
    let r = annihilation(&d.operator, &quintic_period(30)).unwrap();
    assert!(r.residuals.is_empty(), "{:?}", r.residuals);
    assert!(r.lattice_points >= 100);
    // Perturbing one coefficient must leave residuals.
    let bad = d.operator.add(&DiffOperator::parse_text("psi^2*D_psi", d.operator.params()).unwrap());
    assert!(!annihilation(&bad, &quintic_period(30)).unwrap().residuals.is_empty());
    // Flipping the sign of the n = 1 term must break it.
    let mut flipped = quintic_period(30);
    flipped.add_term(vec![-6], &Rational::from_integer(240.into()));
    assert!(!annihilation(&d.operator, &flipped).unwrap().residuals.is_empty());
}

#[test]
fn iterated_and_direct_derivatives_agree() {
    let fs = family("x640_mirror").restrict("psi").unwrap();
    let red = Reducer::new(&fs).unwrap();
    let classes = red.derivative_classes(4).unwrap();
    for (k, class) in classes.iter().enumerate() {
        let direct = red.reduce(&red.derivative_direct(k as u32)).unwrap();
        assert_eq!(red.coordinates(&direct), red.coordinates(class), "k = {k}");
    }
}

#[test]
fn pole_reduction_reexpands() {
    let fs = family("x640_mirror").restrict("psi").unwrap();
    let gens = jacobian_ideal(&fs);
    let gb = GroebnerBasis::compute(&gens, true).unwrap();
    let ring = fs.ring().clone();
    let m = fs.deformations()[0].monomial;
    // m^2 has degree 2d - sum(w) + d, so m^2 Ω/Q^3 is a valid form.
    let num = WPoly::term(&ring, m.pow(2), RationalFunction::one());
    let form = RationalForm { numerator: num.clone(), pole: 3 };
    let red = reduce_pole(&form, &gb).unwrap();
    assert_eq!(red.form.pole, 2);
    let mut back = WPoly::zero(&ring);
    for (c, g) in red.cofactors.iter().zip(&gens) {
        back = back.add(&c.mul(g));
    }
    assert_eq!(back.scale(&RationalFunction::from_i64(2)), num);
    // The deformation monomial itself is a nonzero class at pole 2.
    let nf = gb.normal_form(&WPoly::term(&ring, m, RationalFunction::one()));
    assert!(!nf.is_zero());
    assert!(matches!(reduce_pole(&RationalForm { numerator: nf, pole: 2 }, &gb), Err(GdError::NotInIdeal(_))));
}

#[test]
fn errors() {
    assert!(matches!(derive_pf_1param(&family("x640_mirror"), 8), Err(GdError::NotOneParameter(3))));
    let fs = family("x640_mirror").restrict("psi").unwrap();
    assert!(matches!(derive_pf_1param(&fs, 1), Err(GdError::MaxOrder)));
    assert!(matches!(derive_pf_1param(&fs, 2).map(|d| d.order), Ok(2)));
    let phi = family("x640_mirror").restrict("phi").unwrap();
    assert!(matches!(derive_pf_1param(&phi, 3), Err(GdError::NoRelation(3))));
}
