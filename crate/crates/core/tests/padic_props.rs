use std::sync::{Arc, OnceLock};

use charconst::padic::{frac_principal, hensel_factor, parse_scalar, rational, LocalField, Poly, Scalar, Val, Q};
use num_rational::BigRational;
use proptest::prelude::*;

fn q5() -> Arc<LocalField> {
    static F: OnceLock<Arc<LocalField>> = OnceLock::new();
    F.get_or_init(|| LocalField::qp(5, 24).unwrap()).clone()
}

fn sqrt5() -> Arc<LocalField> {
    static F: OnceLock<Arc<LocalField>> = OnceLock::new();
    F.get_or_init(|| {
        let c = |n: i64| vec![BigRational::from_integer(n.into())];
        LocalField::make_extension(&q5(), 1, &[c(-5), vec![], c(1)]).unwrap()
    })
    .clone()
}

fn unram() -> Arc<LocalField> {
    static F: OnceLock<Arc<LocalField>> = OnceLock::new();
    F.get_or_init(|| LocalField::make_extension(&q5(), 2, &[]).unwrap()).clone()
}

fn base_rational() -> impl Strategy<Value = BigRational> {
    (-10_000i64..10_000, 0u32..4, prop::sample::select(vec![1i64, 2, 3, 7, 12])).prop_map(|(n, k, d)| {
        rational(n, 5i64.pow(k) * d)
    })
}

fn qp_elt() -> impl Strategy<Value = Scalar> {
    base_rational().prop_map(|q| Scalar::from_rational(&q5(), &q).unwrap())
}

fn ext_elt(field: fn() -> Arc<LocalField>) -> impl Strategy<Value = Scalar> {
    prop::collection::vec(base_rational(), 2).prop_map(move |c| Scalar::from_coords(&field(), &c).unwrap())
}

fn any_elt() -> impl Strategy<Value = (Scalar, Scalar, Scalar)> {
    prop_oneof![
        (qp_elt(), qp_elt(), qp_elt()),
        (ext_elt(sqrt5), ext_elt(sqrt5), ext_elt(sqrt5)),
        (ext_elt(unram), ext_elt(unram), ext_elt(unram)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn ultrametric((a, b, _c) in any_elt()) {
        let s = &a + &b;
        if let (Val::Finite(va), Val::Finite(vb)) = (a.val(), b.val()) {
            let m = va.min(vb);
            prop_assert!(s.val().at_least(m, false).unwrap());
            if va != vb {
                prop_assert_eq!(s.val(), Val::Finite(m));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn multiplicativity((a, b, _c) in any_elt()) {
        if let (Val::Finite(va), Val::Finite(vb)) = (a.val(), b.val()) {
            prop_assert_eq!((&a * &b).val(), Val::Finite(va + vb));
        }
    }

    #[test]
    fn inverse_is_inverse((a, _b, _c) in any_elt()) {
        prop_assume!(!a.is_zero());
        let prod = &a * &a.inv().unwrap();
        prop_assert!(prod.eq_at_precision(&Scalar::one(a.field())));
    }

    #[test]
    fn tower_consistency(a in qp_elt()) {
        for tower in [sqrt5(), unram()] {
            prop_assert_eq!(a.coerce_to(&tower).unwrap().val(), a.val());
        }
    }

    #[test]
    fn frac_principal_additive(a in qp_elt(), b in qp_elt()) {
        let lhs = frac_principal(&(&a + &b)).unwrap();
        let rhs = &frac_principal(&a).unwrap() + &frac_principal(&b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn literal_round_trip(a in qp_elt()) {
        let text = a.render();
        let back = parse_scalar(&q5(), &text).unwrap();
        prop_assert_eq!(back.render(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hensel_roots_have_tiny_residuals(roots in prop::collection::vec(-3000i64..3000, 2..4)) {
        let f = q5();
        let mut sorted = roots.clone();
        sorted.sort();
        sorted.dedup();
        prop_assume!(sorted.len() == roots.len());
        let mut g = Poly::new(vec![Scalar::one(&f)]);
        for r in &roots {
            g = g.mul(&Poly::new(vec![Scalar::from_int(&f, -r), Scalar::one(&f)]));
        }
        let fac = hensel_factor(&g, &f).unwrap();
        prop_assert_eq!(fac.roots.len(), roots.len());
        let margin = Q::from_integer(8);
        for r in &fac.roots {
            let v = g.eval(r).val();
            prop_assert!(v.at_least(Q::from_integer(24) - margin, true).unwrap_or(false), "residual {:?}", v);
        }
    }
}
