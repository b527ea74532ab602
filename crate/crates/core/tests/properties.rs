use std::sync::Arc;

use hgauge::gauge::{
    bianchi_residuals, composition_residuals, curvature_covariance_residuals, gauge_transform, gauge_transform_split,
};
use hgauge::harness::{gen_connection, gen_gauge, random_form, GroupDraw, SuiteConfig};
use hgauge::transgression as tg;
use hgauge::{fixture, symmetrized_trace_pairing, FormAlgebra, InvariantPairing, PolyForm, Scalar, Space};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(name: &str) -> (FormAlgebra, InvariantPairing, SuiteConfig) {
    let xm = Arc::new(fixture::module(name).unwrap());
    let p = symmetrized_trace_pairing(&xm, 1).unwrap();
    let cfg = SuiteConfig { fixture: name.into(), ..SuiteConfig::default() };
    (FormAlgebra::new(xm, 5).unwrap(), p, cfg)
}

fn zero(ws: &[PolyForm]) -> bool {
    ws.iter().all(PolyForm::is_zero)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exterior_derivative_squares_to_zero(seed in any::<u64>(), deg in 0usize..4) {
        let (fa, _, cfg) = setup("adjoint:gl2");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_form(&fa, &cfg, deg, Space::G, &mut rng);
        prop_assert!(fa.d(&fa.d(&w)).is_zero());
    }

    #[test]
    fn scalar_wedge_is_graded_commutative(seed in any::<u64>(), p in 0usize..3, q in 0usize..3) {
        let (fa, _, cfg) = setup("adjoint:sl2");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&fa, &cfg, p, Space::G, &mut rng);
        let b = random_form(&fa, &cfg, q, Space::G, &mut rng);
        let (x, y) = (fa.scalar(p, a.component(0).clone()), fa.scalar(q, b.component(1).clone()));
        let xy = fa.wedge(&x, &y).unwrap();
        let yx = fa.wedge(&y, &x).unwrap();
        let sign = if p * q % 2 == 0 { Scalar::one() } else { Scalar::from_int(-1) };
        prop_assert_eq!(xy, yx.scale(&sign));
    }

    #[test]
    fn bracket_is_graded_antisymmetric(seed in any::<u64>(), p in 1usize..3, q in 1usize..3) {
        let (fa, _, cfg) = setup("adjoint:sl2");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&fa, &cfg, p, Space::G, &mut rng);
        let b = random_form(&fa, &cfg, q, Space::G, &mut rng);
        let sign = if p * q % 2 == 0 { Scalar::from_int(-1) } else { Scalar::one() };
        prop_assert_eq!(fa.bracket(&a, &b).unwrap(), fa.bracket(&b, &a).unwrap().scale(&sign));
    }

    #[test]
    fn bianchi_identities(seed in any::<u64>()) {
        for name in ["adjoint:sl2", "adjoint:gl2", "abelian:sl2-defining"] {
            let (fa, _, cfg) = setup(name);
            let (r1, r2) = bianchi_residuals(&fa, &gen_connection(&fa, &cfg, seed)).unwrap();
            prop_assert!(r1.is_zero() && r2.is_zero());
        }
    }

    #[test]
    fn gauge_covariance_and_split_formula(seed in any::<u64>()) {
        for name in ["adjoint:sl2", "abelian:sl2-defining"] {
            let (fa, _, cfg) = setup(name);
            let c = gen_connection(&fa, &cfg, seed);
            let gd = gen_gauge(&fa, &cfg, seed ^ 1);
            let (r1, r2) = curvature_covariance_residuals(&fa, &c, &gd).unwrap();
            prop_assert!(r1.is_zero() && r2.is_zero());
            prop_assert_eq!(gauge_transform(&fa, &c, &gd).unwrap(), gauge_transform_split(&fa, &c, &gd).unwrap());
        }
    }

    #[test]
    fn sequential_composition(seed in any::<u64>(), unipotent in any::<bool>()) {
        let (fa, _, mut cfg) = setup("adjoint:sl2");
        cfg.group_draws = vec![if unipotent { GroupDraw::Unipotent } else { GroupDraw::Constant }];
        let c = gen_connection(&fa, &cfg, seed);
        let (r1, r2) = composition_residuals(&fa, &c, &gen_gauge(&fa, &cfg, seed ^ 2), &gen_gauge(&fa, &cfg, seed ^ 3)).unwrap();
        prop_assert!(r1.is_zero() && r2.is_zero());
    }

    #[test]
    fn family_curvatures_match_direct_computation(seed in any::<u64>()) {
        let (fa, _, cfg) = setup("adjoint:gl2");
        let fam = tg::interpolate(&gen_connection(&fa, &cfg, seed), &gen_connection(&fa, &cfg, seed ^ 5)).unwrap();
        prop_assert!(zero(&tg::family_curvature_residuals(&fa, &fam).unwrap()));
    }

    #[test]
    fn cartan_homotopy_and_transgression(seed in any::<u64>()) {
        let (fa, p, cfg) = setup("adjoint:sl2");
        let c0 = gen_connection(&fa, &cfg, seed);
        let c1 = gen_connection(&fa, &cfg, seed ^ 7);
        prop_assert!(tg::chern_weil_residual(&fa, &c0, &c1, &p).unwrap().is_zero());
        prop_assert_eq!(
            tg::transgression_form(&fa, &c0, &c1, &p).unwrap(),
            tg::transgression_form_k01(&fa, &c0, &c1, &p).unwrap()
        );
        prop_assert!(tg::eq1_residual(&fa, &c0, &c1, &p).unwrap().is_zero());
        prop_assert_eq!(tg::b_form(&fa, &c0, &c1, &p).unwrap(), tg::b_form_k01(&fa, &c0, &c1, &p).unwrap());
    }

    #[test]
    fn cs_form_paths_agree(seed in any::<u64>()) {
        let (fa, p, cfg) = setup("adjoint:gl2");
        let c = gen_connection(&fa, &cfg, seed);
        prop_assert_eq!(tg::cs_form(&fa, &c, &p).unwrap(), tg::cs_form_expr(&fa, &c, &p).unwrap());
        prop_assert!(tg::cs_descent_residual(&fa, &c, &p).unwrap().is_zero());
    }

    #[test]
    fn descent_holds_once_wzw_is_kept(seed in any::<u64>()) {
        let (fa, p, cfg) = setup("adjoint:sl2");
        let c = gen_connection(&fa, &cfg, seed);
        let gd = gen_gauge(&fa, &cfg, seed ^ 11);
        prop_assert!(tg::descent_residual(&fa, &c, &gd, &p).unwrap().is_zero());
        // The gWZW residual is exactly the WZW term.
        let wzw = tg::wzw_term(&fa, &gd, &p).unwrap().value;
        prop_assert_eq!(tg::gwzw_exactness_residual(&fa, &c, &gd, &p).unwrap(), wzw.clone());
        prop_assert_eq!(tg::tr1_residual(&fa, &c, &gd, &p).unwrap(), wzw);
    }

    #[test]
    fn wzw_reduction_identities(seed in any::<u64>()) {
        let (fa, p, cfg) = setup("adjoint:gl2");
        let gd = gen_gauge(&fa, &cfg, seed);
        let wz = tg::wzw_term(&fa, &gd, &p).unwrap();
        prop_assert_eq!(&wz.identity_lhs, &wz.identity_rhs);
        prop_assert_eq!(&wz.value, &wz.beta_reduced);
        prop_assert_eq!(&wz.value, &wz.closed_form);
        let p2 = tg::slot_pairing(&fa, 1).unwrap();
        prop_assert!(tg::wzw_slot_form(&fa, &wz.fields.v, &wz.fields.w, &p2).unwrap().is_zero());
    }

    #[test]
    fn pure_gauge_family_is_flat_at_zero(seed in any::<u64>()) {
        let (fa, _, cfg) = setup("adjoint:sl2");
        let bind = tg::gauge_family(&fa, &gen_connection(&fa, &cfg, seed), &gen_gauge(&fa, &cfg, seed ^ 13)).unwrap();
        prop_assert!(fa.substitute(&bind.f, hgauge::Var::T, &Scalar::zero()).is_zero());
        prop_assert!(fa.substitute(&bind.g, hgauge::Var::T, &Scalar::zero()).is_zero());
    }
}
