//! Algebraic laws on randomized data: commutative-ring axioms for every
//! coefficient variant, promotion compatibility, series ring axioms
//! through the truncation order, and the divided-basis product against an
//! independent monomial-basis oracle.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use baxter_core::coeff::{factorial, Coefficient, QPoly};
use baxter_core::rb::SampleSpec;
use baxter_core::series::{Index, MultiIndex, VarId};
use baxter_core::{Basis, TruncatedSeries};

fn arb_int() -> impl Strategy<Value = Coefficient> {
    (-50i64..=50).prop_map(Coefficient::int)
}

fn arb_rat() -> impl Strategy<Value = Coefficient> {
    ((-30i64..=30), (1i64..=12)).prop_map(|(n, d)| Coefficient::rat(n, d))
}

fn arb_qpoly() -> impl Strategy<Value = Coefficient> {
    proptest::collection::vec(((0u32..5), (-9i64..=9)), 0..4).prop_map(|terms| {
        let mut p = QPoly::zero();
        for (e, c) in terms {
            p = p.add(&QPoly::monomial(c, e));
        }
        Coefficient::QPoly(p)
    })
}

fn ring_axioms(a: &Coefficient, b: &Coefficient, c: &Coefficient) {
    // additive group
    assert_eq!(a.add(b), b.add(a));
    assert_eq!(a.add(&b.add(c)), a.add(b).add(c));
    assert_eq!(a.add(&Coefficient::zero()), *a);
    assert!(a.add(&a.neg()).is_zero());
    // multiplicative monoid, commutative
    assert_eq!(a.mul(b), b.mul(a));
    assert_eq!(a.mul(&b.mul(c)), a.mul(b).mul(c));
    assert_eq!(a.mul(&Coefficient::one()), *a);
    // distributivity
    assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)));
}

proptest! {
    #[test]
    fn int_ring_axioms(a in arb_int(), b in arb_int(), c in arb_int()) {
        ring_axioms(&a, &b, &c);
    }

    #[test]
    fn rat_ring_axioms(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
        ring_axioms(&a, &b, &c);
    }

    #[test]
    fn qpoly_ring_axioms(a in arb_qpoly(), b in arb_qpoly(), c in arb_qpoly()) {
        ring_axioms(&a, &b, &c);
    }

    #[test]
    fn promotion_commutes_with_arithmetic(x in -40i64..=40, y in -40i64..=40) {
        let (a, b) = (Coefficient::int(x), Coefficient::int(y));
        // Int -> Rat
        let ra = Coefficient::Rat(BigRational::from_integer(BigInt::from(x)));
        let rb = Coefficient::Rat(BigRational::from_integer(BigInt::from(y)));
        prop_assert_eq!(ra.add(&rb), a.add(&b));
        prop_assert_eq!(ra.mul(&rb), a.mul(&b));
        // Int -> QPoly
        let qa = Coefficient::QPoly(QPoly::constant(x));
        let qb = Coefficient::QPoly(QPoly::constant(y));
        prop_assert_eq!(qa.add(&qb), a.add(&b));
        prop_assert_eq!(qa.mul(&qb), a.mul(&b));
    }

    #[test]
    fn coefficient_text_roundtrip(a in prop_oneof![arb_int(), arb_rat(), arb_qpoly()]) {
        let text = a.to_string();
        let back: Coefficient = text.parse().unwrap();
        prop_assert_eq!(back, a);
    }
}

fn sampled(spec: &SampleSpec, seed: u64) -> (TruncatedSeries, TruncatedSeries, TruncatedSeries) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (spec.sample(&mut rng), spec.sample(&mut rng), spec.sample(&mut rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laurent_ring_axioms_to_order(seed in any::<u64>()) {
        let mut spec = SampleSpec::laurent(8);
        spec.laurent_lower = -2;
        let (f, g, h) = sampled(&spec, seed);
        let order = 4; // products of bounded-below series stay valid here
        prop_assert!(f.add(&g).eq_to_order(&g.add(&f), 8).unwrap());
        prop_assert!(f.mul(&g).eq_to_order(&g.mul(&f), 6).unwrap());
        prop_assert!(f.mul(&g).mul(&h).eq_to_order(&f.mul(&g.mul(&h)), order).unwrap());
        let lhs = f.mul(&g.add(&h));
        let rhs = f.mul(&g).add(&f.mul(&h));
        prop_assert!(lhs.eq_to_order(&rhs, 6).unwrap());
    }

    #[test]
    fn divided_ring_axioms_to_order(seed in any::<u64>()) {
        let vars = vec![VarId::intern("u"), VarId::intern("v")];
        let spec = SampleSpec::divided(vars, 6);
        let (f, g, h) = sampled(&spec, seed);
        prop_assert!(f.mul(&g).eq_to_order(&g.mul(&f), 6).unwrap());
        prop_assert!(f.mul(&g).mul(&h).eq_to_order(&f.mul(&g.mul(&h)), 6).unwrap());
        let one = TruncatedSeries::one(Basis::DividedPower, f.trunc());
        prop_assert!(f.mul(&one).eq_to_order(&f, 6).unwrap());
        let lhs = f.mul(&g.add(&h));
        let rhs = f.mul(&g).add(&f.mul(&h));
        prop_assert!(lhs.eq_to_order(&rhs, 6).unwrap());
    }

    #[test]
    fn word_ring_axioms_to_order(seed in any::<u64>()) {
        let spec = SampleSpec::word(2, 4);
        let (f, g, h) = sampled(&spec, seed);
        // Associative but not commutative in general.
        prop_assert!(f.mul(&g).mul(&h).eq_to_order(&f.mul(&g.mul(&h)), 4).unwrap());
        let lhs = f.add(&g).mul(&h);
        let rhs = f.mul(&h).add(&g.mul(&h));
        prop_assert!(lhs.eq_to_order(&rhs, 4).unwrap());
    }

    #[test]
    fn divided_product_matches_monomial_oracle(seed in any::<u64>()) {
        let x = VarId::intern("x");
        let spec = SampleSpec::divided(vec![x], 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = spec.sample(&mut rng);
        let g = spec.sample(&mut rng);
        let direct = f.mul(&g);
        let oracle = monomial_oracle_mul(&f, &g, x, 8);
        prop_assert!(direct.eq_to_order(&oracle, 8).unwrap());
    }

    #[test]
    fn qdivided_at_one_matches_divided(seed in any::<u64>()) {
        let x = VarId::intern("x");
        let spec = SampleSpec::qdivided(6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = spec.sample(&mut rng);
        let g = spec.sample(&mut rng);
        let q_prod = baxter_core::qcalc::qdivided_specialize(&f.mul(&g), &BigInt::from(1), x).unwrap();
        let to_divided = |s: &TruncatedSeries| {
            baxter_core::qcalc::qdivided_specialize(s, &BigInt::from(1), x).unwrap()
        };
        let d_prod = to_divided(&f).mul(&to_divided(&g));
        prop_assert!(q_prod.eq_to_order(&d_prod, 6).unwrap());
    }

    #[test]
    fn series_json_roundtrip(seed in any::<u64>()) {
        for spec in [
            SampleSpec::laurent(6),
            SampleSpec::divided(vec![VarId::intern("x"), VarId::intern("y")], 5),
            SampleSpec::qdivided(5),
            SampleSpec::word(3, 3),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = spec.sample(&mut rng);
            let v = f.to_json();
            let back = TruncatedSeries::from_json(&v).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(back.to_json().to_string(), v.to_string());
        }
    }
}

/// Independent oracle: convert single-variable divided coefficients to
/// monomial coefficients (divide by n!), convolve naively, convert back.
fn monomial_oracle_mul(
    f: &TruncatedSeries,
    g: &TruncatedSeries,
    x: VarId,
    order: i64,
) -> TruncatedSeries {
    let to_monomial = |s: &TruncatedSeries| -> BTreeMap<u32, BigRational> {
        let mut out = BTreeMap::new();
        for (idx, c) in s.terms() {
            let n = idx.total_degree() as u32;
            let r = c.to_rat().unwrap() / BigRational::from_integer(factorial(n as u64));
            out.insert(n, r);
        }
        out
    };
    let fm = to_monomial(f);
    let gm = to_monomial(g);
    let mut conv: BTreeMap<u32, BigRational> = BTreeMap::new();
    for (&a, ca) in &fm {
        for (&b, cb) in &gm {
            if (a + b) as i64 > order {
                continue;
            }
            let e = conv.entry(a + b).or_insert_with(BigRational::zero);
            *e += ca * cb;
        }
    }
    let mut out = TruncatedSeries::zero(
        Basis::DividedPower,
        baxter_core::Truncation::degree(order),
    );
    for (n, c) in conv {
        let divided = c * BigRational::from_integer(factorial(n as u64));
        let idx = if n == 0 {
            MultiIndex::empty()
        } else {
            MultiIndex::from_pairs([(x, n)])
        };
        out.add_term(Index::Multi(idx), Coefficient::Rat(divided).normalize_int());
    }
    out
}

/// The support-projection identity holds for every subset of a
/// three-variable universe.
#[test]
fn support_projection_all_subsets() {
    let vars: Vec<VarId> = ["x1", "x2", "x3"].iter().map(|s| VarId::intern(s)).collect();
    for mask in 0u32..8 {
        let j: Vec<VarId> = vars
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, v)| *v)
            .collect();
        let op = baxter_core::rb::project_support_op(vars.clone(), j, 5);
        let report = baxter_core::rb::check_rb_identity(&op, 25, 5, 0xA11 + mask as u64);
        assert!(report.holds_exactly(), "mask {}: {:?}", mask, report.witness);
    }
}
