use cubic_core::descent::{coordinates, load_mw_basis};
use cubic_core::heights::{canonical_height, height_pairing};
use cubic_core::jacobian::GroupContext;
use cubic_core::points::{enumerate_points, PlanePoint};
use cubic_core::CubicForm;
use proptest::prelude::*;

fn pt(x: [i64; 3]) -> PlanePoint {
    PlanePoint::from_i64(x).unwrap()
}

fn c389() -> GroupContext {
    GroupContext::new(CubicForm::new([1, 0, 1, 0, 0, -2, 0, -1, -1, 0]).unwrap(), pt([0, 1, 0])).unwrap()
}

fn combo(g: &GroupContext, a: i64, b: i64) -> PlanePoint {
    g.add(&g.smul(a, &pt([1, -1, -1])), &g.smul(b, &pt([0, 0, 1])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn group_law_is_associative_and_commutative(a in -3i64..=3, b in -3i64..=3, c in -3i64..=3, d in -3i64..=3) {
        let g = c389();
        let p = combo(&g, a, b);
        let q = combo(&g, c, d);
        let r = combo(&g, b, c);
        prop_assert_eq!(g.add(&p, &q), g.add(&q, &p));
        prop_assert_eq!(g.add(&g.add(&p, &q), &r), g.add(&p, &g.add(&q, &r)));
        prop_assert!(g.is_identity(&g.add(&p, &g.neg(&p))));
        prop_assert_eq!(combo(&g, a + c, b + d), g.add(&p, &q));
    }

    #[test]
    fn coordinates_recover_the_combination(a in -4i64..=4, b in -4i64..=4) {
        let g = c389();
        let basis = load_mw_basis(&g, vec![pt([1, -1, -1]), pt([0, 0, 1])], vec![], 1e-8).unwrap();
        let c = coordinates(&g, &basis, &combo(&g, a, b)).unwrap();
        prop_assert_eq!(c.n, vec![a, b]);
        prop_assert_eq!(c.torsion, 0);
    }

    #[test]
    fn height_is_a_quadratic_form(a in -2i64..=2, b in -2i64..=2) {
        let g = c389();
        let tol = 1e-9;
        let h11 = canonical_height(&g, &pt([1, -1, -1]), tol).unwrap();
        let h22 = canonical_height(&g, &pt([0, 0, 1]), tol).unwrap();
        let h12 = height_pairing(&g, &pt([1, -1, -1]), &pt([0, 0, 1]), tol).unwrap();
        let (x, y) = (a as f64, b as f64);
        let expect = x * x * h11 + 2.0 * x * y * h12 + y * y * h22;
        let got = canonical_height(&g, &combo(&g, a, b), tol).unwrap();
        prop_assert!((got - expect).abs() < 1e-6, "{} vs {}", got, expect);
    }
}

#[test]
fn enumeration_is_closed_under_the_group_law_where_heights_allow() {
    let g = c389();
    let pts = enumerate_points(g.curve(), 30).unwrap();
    for p in &pts {
        assert!(p.is_on(g.curve()));
        let n = g.neg(p);
        if n.to_i64().is_some_and(|x| x.iter().all(|v| v.abs() <= 30)) {
            assert!(pts.contains(&n), "{n} missing");
        }
    }
}
