use hgauge::gauge::GaugeData;
use hgauge::golden;
use hgauge::transgression as tg;
use hgauge::{symmetrized_trace_pairing, GroupMap, Poly, Scalar, ScalarForm, Space, Var};

fn x(i: usize) -> Poly {
    Poly::var(Var::X(i - 1))
}

#[test]
fn gwzw_of_worked_connection_under_diagonal_gauge() {
    let fa = golden::sl2_patch();
    let p = symmetrized_trace_pairing(fa.module(), 1).unwrap();
    let c = golden::worked_connection(&fa);
    let gd = GaugeData::new(golden::diag_group(), fa.zero(1, Space::H)).unwrap();
    assert!(tg::gwzw_exactness_residual(&fa, &c, &gd, &p).unwrap().is_zero());
    let gw = tg::gwzw_form(&fa, &c, &gd, &p).unwrap();
    let k = Scalar::new(-15, 8);
    let mut expected = ScalarForm::term(0b01111, x(5).scale(&k));
    expected.add_term(0b11101, x(2).scale(&k));
    assert_eq!(gw.components(), &[expected]);
}

#[test]
fn alpha_with_pure_phi_gauge_depends_on_phi_only() {
    let fa = golden::sl2_patch();
    let p = symmetrized_trace_pairing(fa.module(), 1).unwrap();
    let zero = hgauge::TwoConnection::new(fa.zero(1, Space::G), fa.zero(2, Space::H)).unwrap();
    let gd = GaugeData::new(GroupMap::identity(2), golden::three_term_phi(&fa)).unwrap();
    let alpha = tg::alpha_form(&fa, &zero, &gd, &p).unwrap();
    // Θ = Φ = 0 on the zero connection.
    assert!(alpha.is_zero());
    let c = golden::worked_connection(&fa);
    let alpha = tg::alpha_form(&fa, &c, &gd, &p).unwrap();
    assert_eq!(alpha.degree(), 3);
    assert!(tg::descent_residual(&fa, &c, &gd, &p).unwrap().is_zero());
}

#[test]
fn wzw_examples() {
    let fa = golden::sl2_patch();
    let p = symmetrized_trace_pairing(fa.module(), 1).unwrap();
    let two = GaugeData::new(GroupMap::identity(2), golden::two_term_phi(&fa)).unwrap();
    assert!(tg::wzw_term(&fa, &two, &p).unwrap().value.is_zero());
    let three = GaugeData::new(GroupMap::identity(2), golden::three_term_phi(&fa)).unwrap();
    let wz = tg::wzw_term(&fa, &three, &p).unwrap();
    // −½ tr(φ² dφ), worked by hand.
    let mut expected = ScalarForm::term(0b01111, x(5).neg());
    expected.add_term(0b11011, x(3));
    assert_eq!(wz.value.components(), &[expected]);
}

#[test]
fn show_example_lists_golden_values() {
    let cs = golden::show("cs").unwrap();
    assert!(cs.contains("(-1/2*x5) dx1∧dx2∧dx3∧dx4 + (1/2*x2) dx1∧dx3∧dx4∧dx5"));
    assert!(golden::show("gwzw").unwrap().contains("-15/8"));
}
