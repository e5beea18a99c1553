use std::collections::BTreeMap;

use eqbif::euler_ring::{
    add, deg_minus_id, product_decision, push_forward, scalar_unit_test, star, AtomSide, EulerElement,
    MultiplicationTable, RepBlock, RepresentationDescriptor, SymbolicDegree, UNIT,
};
use proptest::prelude::*;

const LABELS: [&str; 3] = [UNIT, "Z2", "e"];

/// Burnside ring of Z4 restricted to the classes G, Z2, e.
fn burnside_z4() -> MultiplicationTable {
    let el = |terms: &[(&str, i64)]| EulerElement::from_terms("B(Z4)", terms.iter().copied());
    let p = |a: &str, b: &str| (a.to_string(), b.to_string());
    MultiplicationTable::new(
        "B(Z4)",
        LABELS.iter().map(|s| s.to_string()).collect(),
        [
            (p("Z2", "Z2"), el(&[("Z2", 2)])),
            (p("Z2", "e"), el(&[("e", 2)])),
            (p("e", "Z2"), el(&[("e", 2)])),
            (p("e", "e"), el(&[("e", 4)])),
        ],
    )
    .unwrap()
}

fn element() -> impl Strategy<Value = EulerElement> {
    prop::collection::vec(-20i64..20, 3).prop_map(|c| {
        EulerElement::from_terms("B(Z4)", LABELS.iter().copied().zip(c))
    })
}

fn rep_block() -> impl Strategy<Value = RepBlock> {
    (1usize..4, 1usize..4, any::<bool>(), 0.0..10.0f64)
        .prop_map(|(copies, dimension, nontrivial, beta)| RepBlock { beta, copies, dimension, nontrivial })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn addition_is_a_commutative_group(a in element(), b in element(), c in element()) {
        let zero = EulerElement::zero("B(Z4)");
        prop_assert_eq!(add(&a, &b).unwrap(), add(&b, &a).unwrap());
        prop_assert_eq!(add(&add(&a, &b).unwrap(), &c).unwrap(), add(&a, &add(&b, &c).unwrap()).unwrap());
        prop_assert_eq!(add(&a, &zero).unwrap(), a.clone());
        prop_assert!(add(&a, &a.scale(-1)).unwrap().is_zero());
    }

    #[test]
    fn star_is_a_commutative_ring_product(a in element(), b in element(), c in element(), k in -5i64..5) {
        let t = burnside_z4();
        prop_assert_eq!(star(&a, &b, &t).unwrap(), star(&b, &a, &t).unwrap());
        prop_assert_eq!(
            star(&star(&a, &b, &t).unwrap(), &c, &t).unwrap(),
            star(&a, &star(&b, &c, &t).unwrap(), &t).unwrap()
        );
        prop_assert_eq!(
            star(&a, &add(&b, &c).unwrap(), &t).unwrap(),
            add(&star(&a, &b, &t).unwrap(), &star(&a, &c, &t).unwrap()).unwrap()
        );
        let unit = EulerElement::unit_multiple("B(Z4)", k);
        prop_assert_eq!(star(&unit, &a, &t).unwrap(), a.scale(k));
    }

    #[test]
    fn push_forward_conserves_coefficient_sum(a in element(), images in prop::collection::vec(0usize..2, 3)) {
        let targets = ["G", "H"];
        let map: BTreeMap<String, String> =
            LABELS.iter().zip(&images).map(|(l, i)| (l.to_string(), targets[*i].to_string())).collect();
        let g = push_forward(&a, &map, "U(G)", false).unwrap();
        prop_assert_eq!(g.coefficient_sum(), a.coefficient_sum());
    }

    #[test]
    fn injective_push_forward_is_injective(a in element(), b in element()) {
        let map: BTreeMap<String, String> =
            LABELS.iter().zip(["G", "K", "L"]).map(|(l, t)| (l.to_string(), t.to_string())).collect();
        let (ga, gb) = (push_forward(&a, &map, "U(G)", true).unwrap(), push_forward(&b, &map, "U(G)", true).unwrap());
        prop_assert_eq!(ga == gb, a == b);
    }

    #[test]
    fn adding_a_nontrivial_block_keeps_a_jump(
        blocks in prop::collection::vec(rep_block(), 0..4),
        extra in rep_block(),
        bp in -3i64..3,
        bm in -3i64..3,
        plus in any::<bool>(),
    ) {
        let side = if plus { AtomSide::AtomOnPlus } else { AtomSide::AtomOnMinus };
        let d = deg_minus_id("U(SO(2))", &RepresentationDescriptor::new(blocks.clone()));
        let mut more = blocks;
        more.push(RepBlock { nontrivial: true, ..extra });
        let d2 = deg_minus_id("U(SO(2))", &RepresentationDescriptor::new(more));
        if product_decision(bp, bm, &d, side) {
            prop_assert!(product_decision(bp, bm, &d2, side));
        }
    }
}

#[test]
fn trivial_minus_identity_has_sign_minus_one_to_the_dimension() {
    for d in 0..=6usize {
        match deg_minus_id("U(SO(3))", &RepresentationDescriptor::trivial(d)) {
            SymbolicDegree::Exact(e) => assert_eq!(scalar_unit_test(&e), Some(if d % 2 == 0 { 1 } else { -1 })),
            other => panic!("dimension {d}: {other:?}"),
        }
    }
}
