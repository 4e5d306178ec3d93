mod common;

use std::sync::Arc;

use charq_core::bordism::{parse, Atom, Expr};
use charq_core::classfun::{ClassAlgebra, ClassFunction};
use charq_core::linalg::{q_ratio, Q};
use charq_core::poly::PolyQ;
use charq_core::spancheck::beck_chevalley_suite;
use proptest::prelude::*;

use common::json_group;

fn atom_strategy() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::Atom(Atom::Unit)),
        Just(Expr::Atom(Atom::Counit)),
        Just(Expr::Atom(Atom::Mult)),
        Just(Expr::Atom(Atom::Comult)),
        Just(Expr::Atom(Atom::Twist)),
        Just(Expr::Atom(Atom::Id)),
        Just(Expr::Atom(Atom::Genus)),
        (0u32..10).prop_map(|g| Expr::Atom(Atom::Sigma(g))),
    ]
}

/// Arbitrary syntax trees in parser normal form: sequences have at least two
/// parts, powers may stack. Not necessarily well typed; printing and parsing
/// are purely syntactic.
fn expr_strategy() -> impl Strategy<Value = Expr> {
    atom_strategy().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Expr::Compose),
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Expr::Tensor),
            (inner, 0u32..5).prop_map(|(e, n)| Expr::Power(Box::new(e), n)),
        ]
    })
}

fn rational() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| q_ratio(n, d))
}

fn dilations() -> ClassAlgebra {
    let group = json_group(
        r#"{"name": "agl1", "dim": 2, "pattern": [["a", "b"], [0, 1]], "constraints": [{"poly": "a", "rel": "neq"}]}"#,
        5,
    );
    ClassAlgebra::new(group).unwrap()
}

fn cf(alg: &ClassAlgebra, values: Vec<Q>) -> ClassFunction {
    ClassFunction::from_values(Arc::clone(&alg.group), values)
}

proptest! {
    #[test]
    fn printed_expressions_parse_back(e in expr_strategy()) {
        let printed = e.to_string();
        prop_assert_eq!(parse(&printed).unwrap(), e, "{}", printed);
    }

    #[test]
    fn interpolation_recovers_integer_polynomials(
        coeffs in proptest::collection::vec(-9i64..=9, 1..6)
    ) {
        let poly = PolyQ::from_coeffs(&coeffs);
        let points: Vec<(u64, Q)> = (0..=coeffs.len() as u64)
            .map(|x| (x, poly.eval_q(x)))
            .collect();
        prop_assert_eq!(PolyQ::interpolate(&points).unwrap(), poly);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_laws(
        a in proptest::collection::vec(rational(), 5),
        b in proptest::collection::vec(rational(), 5),
        c in proptest::collection::vec(rational(), 5),
    ) {
        let alg = dilations();
        prop_assert_eq!(alg.k(), 5);
        let (a, b, c) = (cf(&alg, a), cf(&alg, b), cf(&alg, c));

        let ab = alg.convolve(&a, &b).unwrap();
        prop_assert_eq!(&ab, &alg.convolve(&b, &a).unwrap());
        prop_assert_eq!(
            alg.convolve(&ab, &c).unwrap(),
            alg.convolve(&a, &alg.convolve(&b, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            alg.pair(&ab, &c).unwrap(),
            alg.pair(&a, &alg.convolve(&b, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(alg.counit(&ab).unwrap(), alg.pair(&a, &b).unwrap());
        prop_assert_eq!(alg.convolve(&alg.unit(), &a).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn randomized_spans_compose(seed in any::<u64>()) {
        for o in beck_chevalley_suite(seed, 2) {
            prop_assert!(o.pass, "{}: {}", o.name, o.detail);
        }
    }
}
