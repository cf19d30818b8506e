//! Round-trip property for the expression language: printing the
//! canonical form and re-parsing reproduces the tree exactly.

use proptest::prelude::*;

use baxter_cli::expr::{parse_expression, Expression, OpName};

fn arb_leaf() -> impl Strategy<Value = Expression> {
    prop_oneof![
        (0i64..1000).prop_map(|n| Expression::Int(n.into())),
        ((1i64..40), (1i64..40)).prop_map(|(n, d)| Expression::Rat(n.into(), d.into())),
        Just(Expression::Q),
        prop_oneof![Just("x"), Just("y"), Just("z"), Just("w")]
            .prop_map(|v| Expression::Var(v.into())),
        (prop_oneof![Just("x"), Just("z")], -6i64..=6)
            .prop_map(|(v, e)| Expression::VarPow(v.into(), e)),
        (prop_oneof![Just("x"), Just("y")], 0u32..6)
            .prop_map(|(v, k)| Expression::Divided(v.into(), k)),
    ]
}

fn arb_expr() -> impl Strategy<Value = Expression> {
    arb_leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expression::Neg(Box::new(e))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expression::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expression::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expression::Mul(Box::new(a), Box::new(b))),
            (
                prop_oneof![
                    Just(OpName::NegativePart),
                    Just(OpName::Integrate),
                    Just(OpName::QIntegrate),
                    Just(OpName::QShift)
                ],
                inner
            )
                .prop_map(|(op, e)| Expression::Apply(op, Box::new(e))),
        ]
    })
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(e in arb_expr()) {
        let printed = e.to_string();
        let parsed = parse_expression(&printed)
            .unwrap_or_else(|err| panic!("cannot re-parse {:?}: {}", printed, err));
        prop_assert_eq!(parsed, e, "printed form: {}", printed);
    }
}
