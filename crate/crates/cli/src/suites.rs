//! Named check suites. Every check carries the identity it verifies, an
//! expected verdict (the diamond poset and the quantum projection probe
//! are expected failures), and the full machine-readable report.
//!
//! Runs are reproducible: the default seed is a fixed constant and each
//! check derives its own seed from the suite seed and its position.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use baxter_core::coeff::Coefficient;
use baxter_core::field::{
    euler_lagrange, moyal_star, poisson_bracket, sample_phase_series,
    star_support_projection_check, FieldVariable, PhaseSeries, Universe,
};
use baxter_core::poset::{
    incidence_rb_counterexample, locally_chain_exhaustive_check, poset_rb_check,
    poset_rb_exhaustive, FinitePoset, IncidenceElement, PosetFunction,
};
use baxter_core::qcalc::{
    inversion_gaussian_check, q_pascal_check, qdivided_specialize, twisted_species_check, QSpecies,
};
use baxter_core::rb::{
    check_additivity, check_rb_identity, check_rb_identity_matrix, check_twisted_rb,
    geometric_sum_rb, integrate_op, iterated_identity_check, kernel_image_closure_check,
    laurent_negative_part_op, lift_coeff_op, lift_to_matrices, pair_semiring_check,
    project_support_op, q_integrate_op, shift_operator_rb, substitution_endo, zero_op,
    CheckReport, CoeffOperator, RingOps, SampleSpec, Verdict, Weight, Witness,
};
use baxter_core::species::{
    gradedset_rb_exhaustive, weight0_bijection_witness, GradedSet, LinearSpecies,
};
use baxter_core::series::{Truncation, VarId};
use baxter_core::{Basis, TruncatedSeries};

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Fixed default seed; every run is reproducible without flags.
pub const DEFAULT_SEED: u64 = 0x5EED_BA17;

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    pub order: Option<i64>,
    pub samples: Option<u64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: DEFAULT_SEED,
            order: None,
            samples: None,
        }
    }
}

impl SuiteOptions {
    fn ord(&self, default: i64) -> i64 {
        self.order.unwrap_or(default)
    }

    fn samp(&self, default: u64) -> u64 {
        self.samples.unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Holds,
    Fails,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub identity: String,
    pub expected: Expected,
    pub ok: bool,
    pub report: CheckReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub order: Option<i64>,
    pub samples: Option<u64>,
    pub ok: bool,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

fn outcome(id: &str, identity: &str, expected: Expected, report: CheckReport) -> CheckOutcome {
    let ok = matches!(
        (expected, report.verdict),
        (Expected::Holds, Verdict::Holds) | (Expected::Fails, Verdict::Fails)
    );
    CheckOutcome {
        id: id.into(),
        identity: identity.into(),
        expected,
        ok,
        report,
    }
}

fn seed_for(base: u64, index: u64) -> u64 {
    base.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index)
}

/// Folds many sub-reports into one: the first failure wins, sample
/// counts accumulate.
fn merge_reports(name: &str, reports: impl IntoIterator<Item = CheckReport>) -> CheckReport {
    let mut total = 0u64;
    let mut first_fail: Option<CheckReport> = None;
    let mut weight = Weight::MinusOne;
    let mut order = 0i64;
    let mut seed = 0u64;
    for r in reports {
        total += r.samples;
        weight = r.weight;
        order = order.max(r.order);
        seed = r.seed;
        if r.verdict == Verdict::Fails && first_fail.is_none() {
            first_fail = Some(r);
        }
    }
    match first_fail {
        Some(mut r) => {
            r.op = name.into();
            r.samples = total;
            r
        }
        None => CheckReport::holds(name, weight, total, order, seed),
    }
}

fn report_bool(name: &str, cases: u64, ok: bool, detail: Option<Witness>) -> CheckReport {
    if ok {
        CheckReport::holds(name, Weight::MinusOne, cases, 0, 0)
    } else {
        CheckReport::fails(
            name,
            Weight::MinusOne,
            cases,
            0,
            0,
            detail.unwrap_or(Witness {
                sample: 0,
                context: "exact comparison".into(),
                f: json!(null),
                g: json!(null),
                index: String::new(),
                lhs: String::new(),
                rhs: String::new(),
            }),
        )
    }
}

const RB_MINUS: &str = "P(f)P(g) = P(P(f)g) + P(fP(g)) - P(fg)";
const RB_MINUS_SEMIRING: &str = "P(f)P(g) + P(fg) = P(P(f)g) + P(fP(g))";
const RB_ZERO: &str = "P(f)P(g) = P(P(f)g) + P(fP(g))";
const RB_PLUS: &str = "P(f)P(g) = P(P(f)g) + P(fP(g)) + P(fg)";
const TWISTED: &str = "P(f)P(g) = P(P(f)g) + P(f s(P(g)))";
const ADDITIVE: &str = "P(f + g) = P(f) + P(g)";

// ---------------------------------------------------------------------------
// laurent: bounded-below series, projections, dimension pairs

pub fn laurent_suite(opts: &SuiteOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let order = opts.ord(8);

    let op = laurent_negative_part_op(order);
    out.push(outcome(
        "negative_part_weight_minus_one",
        RB_MINUS,
        Expected::Holds,
        check_rb_identity(&op, opts.samp(500), order, seed_for(opts.seed, 1)),
    ));

    let mut semiring = laurent_negative_part_op(order);
    semiring.domain = semiring.domain.nonneg();
    out.push(outcome(
        "negative_part_semiring_form",
        RB_MINUS_SEMIRING,
        Expected::Holds,
        check_rb_identity(&semiring, opts.samp(200), order, seed_for(opts.seed, 2)),
    ));

    out.push(outcome(
        "negative_part_additive",
        ADDITIVE,
        Expected::Holds,
        check_additivity(&op, opts.samp(100), order, seed_for(opts.seed, 3)),
    ));

    out.push(outcome(
        "negative_part_idempotent",
        "P(P(f)) = P(f)",
        Expected::Holds,
        idempotence_check(&op, opts.samp(100), order, seed_for(opts.seed, 4)),
    ));

    let x = VarId::intern("x");
    for (wname, weight) in [
        ("minus_one", Weight::MinusOne),
        ("zero", Weight::Zero),
        ("plus_one", Weight::One),
    ] {
        let zop = zero_op(weight, SampleSpec::divided(vec![x], 6));
        out.push(outcome(
            &format!("zero_operator_weight_{}", wname),
            "all four terms vanish for the zero operator",
            Expected::Holds,
            check_rb_identity(&zop, opts.samp(60), 6, seed_for(opts.seed, 5)),
        ));
    }
    let id_op = baxter_core::rb::identity_op(SampleSpec::divided(vec![x], 6));
    out.push(outcome(
        "identity_operator_weight_minus_one",
        "both sides equal 2fg for the identity operator",
        Expected::Holds,
        check_rb_identity(&id_op, opts.samp(60), 6, seed_for(opts.seed, 6)),
    ));

    let (proj, quot) = pair_semiring_check(6);
    out.push(outcome(
        "pair_projection",
        "(a,b) -> (a,a) satisfies the subtraction-free weight -1 identity",
        Expected::Holds,
        proj,
    ));
    out.push(outcome(
        "pair_quotient_multiplicativity",
        "(a,b) -> (0,b-a) is claimed multiplicative: P(xy) = P(x)P(y)",
        Expected::Fails,
        quot,
    ));

    // Coefficientwise and entrywise lifts.
    let vars: Vec<VarId> = vec![VarId::intern("x1"), VarId::intern("x2")];
    let pj = project_support_op(vars.clone(), vec![vars[0]], 4);
    let lifted = lift_to_matrices(&pj, 2);
    out.push(outcome(
        "matrix_lift_projection",
        "entrywise lift keeps the weight -1 identity on 2x2 matrices",
        Expected::Holds,
        check_rb_identity_matrix(&lifted, opts.samp(40), 4, seed_for(opts.seed, 7)),
    ));

    let cop = CoeffOperator::new("q_constant_term", Weight::MinusOne, |c| match c {
        Coefficient::QPoly(p) => Coefficient::Int(p.coeff(0)),
        other => other.clone(),
    });
    let word_op = lift_coeff_op(&cop, SampleSpec::word(2, 4));
    out.push(outcome(
        "word_lift_coefficient_projection",
        "coefficientwise idempotent projection keeps weight -1 on word series",
        Expected::Holds,
        word_series_lift_check(&word_op, opts.samp(40), 4, seed_for(opts.seed, 8)),
    ));

    out
}

fn idempotence_check(
    op: &baxter_core::RbOperator,
    samples: u64,
    order: i64,
    seed: u64,
) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = format!("idempotence[{}]", op.name);
    for i in 0..samples {
        let f = op.domain.sample(&mut rng);
        let pf = op.apply(&f);
        let ppf = op.apply(&pf);
        if !ppf.rg_eq_to_order(&pf, order) {
            let (index, lhs, rhs) = ppf.rg_first_diff(&pf, order).unwrap();
            return CheckReport::fails(
                &name,
                op.weight,
                samples,
                order,
                seed,
                Witness {
                    sample: i,
                    context: "idempotence".into(),
                    f: f.to_json(),
                    g: json!(null),
                    index,
                    lhs,
                    rhs,
                },
            );
        }
    }
    CheckReport::holds(&name, op.weight, samples, order, seed)
}

fn word_series_lift_check(
    op: &baxter_core::RbOperator,
    samples: u64,
    order: i64,
    seed: u64,
) -> CheckReport {
    // Word samples with q-polynomial coefficients on odd-length words.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = Coefficient::q();
    let mut sub_reports = Vec::new();
    for i in 0..samples {
        let with_q = |rng: &mut ChaCha8Rng| {
            let f = op.domain.sample(rng);
            f.map_terms(f.basis(), f.trunc(), |idx, c| {
                let c = if idx.total_degree() % 2 == 1 {
                    c.mul(&q)
                } else {
                    c.clone()
                };
                Some((idx.clone(), c))
            })
        };
        let f = with_q(&mut rng);
        let g = with_q(&mut rng);
        let (lhs, rhs) = baxter_core::rb::rb_sides(
            |h: &TruncatedSeries| op.apply(h),
            Weight::MinusOne,
            false,
            &f,
            &g,
        );
        let ok = lhs.rg_eq_to_order(&rhs, order);
        let witness = (!ok).then(|| {
            let (index, l, r) = lhs.rg_first_diff(&rhs, order).unwrap();
            Witness {
                sample: i,
                context: "word lift".into(),
                f: f.to_json(),
                g: g.to_json(),
                index,
                lhs: l,
                rhs: r,
            }
        });
        sub_reports.push(if let Some(w) = witness {
            CheckReport::fails(&op.name, op.weight, 1, order, seed, w)
        } else {
            CheckReport::holds(&op.name, op.weight, 1, order, seed)
        });
    }
    merge_reports(&op.name.clone(), sub_reports)
}

// ---------------------------------------------------------------------------
// integration: divided powers, iterated identity, geometric sums

pub fn integration_suite(opts: &SuiteOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let order = opts.ord(10);
    let op = integrate_op(order);

    out.push(outcome(
        "integration_by_parts",
        RB_ZERO,
        Expected::Holds,
        check_rb_identity(&op, opts.samp(500), order, seed_for(opts.seed, 10)),
    ));

    out.push(outcome(
        "integrate_additive",
        ADDITIVE,
        Expected::Holds,
        check_additivity(&op, opts.samp(100), order, seed_for(opts.seed, 11)),
    ));

    for a in 1..=3u32 {
        for b in 1..=3u32 {
            let report = iterated_identity_check(
                &op,
                a,
                b,
                opts.samp(50),
                order,
                seed_for(opts.seed, 12 + (a * 3 + b) as u64),
            )
            .expect("integrate is weight 0 and 1 <= a,b <= 3");
            out.push(outcome(
                &format!("iterated_identity_a{}_b{}", a, b),
                "P^a(f)P^b(g) = sum_i C(b-1+a-i,b-1) P^{a+b-i}(P^i(f)g) + sum_i C(a-1+b-i,a-1) P^{a+b-i}(f P^i(g))",
                Expected::Holds,
                report,
            ));
        }
    }

    // Geometric sum of a substitution endomorphism with inner order >= 2.
    let x = VarId::intern("x");
    let g_order = opts.ord(8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(opts.seed, 30));
    let mut g = TruncatedSeries::zero(Basis::DividedPower, Truncation::degree(g_order));
    for n in 2..=g_order {
        if rng.gen_bool(0.5) {
            let c = rng.gen_range(-3..=3i64);
            g = g.add(
                &TruncatedSeries::divided_term(x, n as u32, Coefficient::int(c))
                    .with_trunc(Truncation::degree(g_order)),
            );
        }
    }
    if g.is_zero() {
        g = TruncatedSeries::divided_term(x, 2, Coefficient::one())
            .with_trunc(Truncation::degree(g_order));
    }
    let domain = SampleSpec::divided(vec![x], g_order).with_min_var_degree(x, 1);
    let geo = geometric_sum_rb(substitution_endo(g, g_order), domain, g_order)
        .expect("inner order >= 2 raises degrees");
    out.push(outcome(
        "geometric_sum_substitution",
        "P = sum_n F^n for a degree-raising ring endomorphism F has weight -1",
        Expected::Holds,
        check_rb_identity(&geo, opts.samp(100), g_order, seed_for(opts.seed, 31)),
    ));
    out.push(outcome(
        "geometric_sum_additive",
        ADDITIVE,
        Expected::Holds,
        check_additivity(&geo, opts.samp(100), g_order, seed_for(opts.seed, 32)),
    ));

    out.push(outcome(
        "two_variable_shift",
        "the geometric sum of f(x, q) -> f(qx, q) has weight -1 away from x-constants",
        Expected::Holds,
        shift_operator_rb(opts.samp(50), opts.ord(6), seed_for(opts.seed, 33))
            .expect("shift raises degree on the restricted domain"),
    ));

    out
}

// ---------------------------------------------------------------------------
// qcalc: q-binomials, twisted operators, q-species

pub fn qcalc_suite(opts: &SuiteOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let order = opts.ord(8);

    let op = q_integrate_op(order);
    out.push(outcome(
        "twisted_q_integration",
        TWISTED,
        Expected::Holds,
        check_twisted_rb(&op, opts.samp(200), order, seed_for(opts.seed, 40))
            .expect("q-integration carries the shift twist"),
    ));

    out.push(outcome(
        "q_integrate_additive",
        ADDITIVE,
        Expected::Holds,
        check_additivity(&op, opts.samp(100), order, seed_for(opts.seed, 41)),
    ));

    out.push(outcome(
        "q_pascal_recurrence",
        "C(n,k)_q = C(n-1,k)_q + q^(n-k) C(n-1,k-1)_q and C(n,k)_q [k]! [n-k]! = [n]!",
        Expected::Holds,
        q_pascal_check(12),
    ));

    let inv_reports = (0..=10u32)
        .flat_map(|n| (0..=n).map(move |k| inversion_gaussian_check(n, k)))
        .collect::<Vec<_>>();
    out.push(outcome(
        "inversion_gaussian_sweep",
        "sum over k-subsets of [n] of q^inversions = C(n,k)_q",
        Expected::Holds,
        merge_reports("inversion_gaussian_sweep", inv_reports),
    ));

    // Twisted bijections on q-species with exponent bookkeeping.
    let bound = 7u32;
    let species = [
        ("X", QSpecies::x(bound)),
        ("E_pos", QSpecies::e(bound).positive_part()),
        ("L_pos", QSpecies::l(bound).positive_part()),
    ];
    let mut twisted = Vec::new();
    for (fname, f) in &species {
        for (gname, g) in &species {
            let r = match twisted_species_check(f, g, bound) {
                Ok(r) => r,
                Err(e) => CheckReport::fails(
                    &format!("twisted_species[{} {}]", fname, gname),
                    Weight::MinusOne,
                    0,
                    bound as i64,
                    0,
                    Witness {
                        sample: 0,
                        context: e.to_string(),
                        f: json!(fname),
                        g: json!(gname),
                        index: String::new(),
                        lhs: String::new(),
                        rhs: String::new(),
                    },
                ),
            };
            twisted.push(r);
        }
    }
    out.push(outcome(
        "twisted_species_bijection",
        "P(F)P(G) ~ P(P(F)G) + P(F S(P(G))) with exact q-weight bookkeeping",
        Expected::Holds,
        merge_reports("twisted_species_bijection", twisted),
    ));

    out.push(outcome(
        "q_one_specialization",
        "every q-construction at q = 1 matches its classical counterpart",
        Expected::Holds,
        q_one_consistency_check(),
    ));

    out
}

fn q_one_consistency_check() -> CheckReport {
    let one = BigInt::from(1);
    let x = VarId::intern("x");
    let mut cases = 0u64;
    // q-species products specialize to classical species products.
    let fq = QSpecies::l(5).q_product(&QSpecies::e(5));
    let fc = LinearSpecies::l(5).product(&LinearSpecies::e(5));
    for n in 0..=5u32 {
        cases += 1;
        let weighted = fq
            .valuation()
            .coeff(&baxter_core::Index::Degree(n as i64))
            .eval_q(&one)
            .expect("q-polynomial coefficient");
        if weighted != Coefficient::Int(BigInt::from(fc.count(n))) {
            return report_bool("q_one_specialization", cases, false, Some(Witness {
                sample: n as u64,
                context: "q-species count at q=1".into(),
                f: json!("L*E"),
                g: json!(n),
                index: n.to_string(),
                lhs: weighted.to_string(),
                rhs: fc.count(n).to_string(),
            }));
        }
    }
    // q-divided products specialize to divided products.
    let a = TruncatedSeries::qdivided_term(1, Coefficient::one());
    let b = TruncatedSeries::qdivided_term(2, Coefficient::int(3));
    let qprod = a.mul(&b).add(&a.mul(&a));
    let specialized = qdivided_specialize(&qprod, &one, x).expect("q-divided series");
    let da = TruncatedSeries::divided_term(x, 1, Coefficient::one());
    let db = TruncatedSeries::divided_term(x, 2, Coefficient::int(3));
    let dprod = da.mul(&db).add(&da.mul(&da));
    cases += 1;
    let ok = specialized.eq_to_order(&dprod, 3).expect("exact series");
    report_bool("q_one_specialization", cases, ok, None)
}

// ---------------------------------------------------------------------------
// species: graded sets, valuations, bijection witnesses

pub fn species_suite(opts: &SuiteOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let bound = opts.ord(8).max(1) as u32;

    out.push(outcome(
        "gradedset_exhaustive",
        "negative-grade restriction: P(a)xP(b) + P(axb) = P(P(a)xb) + P(axP(b)) as grade multisets",
        Expected::Holds,
        gradedset_rb_exhaustive(4, -3, 3),
    ));

    out.push(outcome(
        "gradedset_valuation_multiplicative",
        "|a x b| = |a| |b| for graded-set counting series",
        Expected::Holds,
        gradedset_valuation_check(opts.samp(100), seed_for(opts.seed, 50)),
    ));

    out.push(outcome(
        "valuation_homomorphism",
        "|F+G| = |F|+|G|, |FG| = |F||G|, |P(F)| = Int(|F|)",
        Expected::Holds,
        species_valuation_check(bound),
    ));

    out.push(outcome(
        "weight0_bijection_witness",
        "P(F)P(G) ~ P(P(F)G) + P(FP(G)) via the max-location split, validated structure by structure",
        Expected::Holds,
        weight0_witness_sweep(bound),
    ));

    out
}

fn gradedset_valuation_check(samples: u64, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = "gradedset_valuation";
    for i in 0..samples {
        let random_set = |rng: &mut ChaCha8Rng| {
            let size = rng.gen_range(0..=5usize);
            GradedSet::new((0..size).map(|_| rng.gen_range(-4..=4i64)).collect())
        };
        let a = random_set(&mut rng);
        let b = random_set(&mut rng);
        let lhs = a.product(&b).valuation();
        let rhs = a.valuation().mul(&b.valuation());
        if !lhs.eq_to_order(&rhs, 10).expect("exact valuations") {
            let idx = lhs.first_difference(&rhs, 10).unwrap();
            return CheckReport::fails(
                name,
                Weight::MinusOne,
                samples,
                10,
                seed,
                Witness {
                    sample: i,
                    context: "product valuation".into(),
                    f: json!(a.grades()),
                    g: json!(b.grades()),
                    index: idx.to_string(),
                    lhs: lhs.coeff(&idx).to_string(),
                    rhs: rhs.coeff(&idx).to_string(),
                },
            );
        }
    }
    CheckReport::holds(name, Weight::MinusOne, samples, 10, seed)
}

fn builtin_species(bound: u32) -> Vec<(String, LinearSpecies)> {
    vec![
        ("E".into(), LinearSpecies::e(bound)),
        ("X".into(), LinearSpecies::x(bound)),
        ("L".into(), LinearSpecies::l(bound)),
        (
            "E+X".into(),
            LinearSpecies::e(bound).sum(&LinearSpecies::x(bound)),
        ),
        (
            "X*X".into(),
            LinearSpecies::x(bound).product(&LinearSpecies::x(bound)),
        ),
        ("P(E)".into(), LinearSpecies::e(bound).integral()),
    ]
}

fn species_valuation_check(bound: u32) -> CheckReport {
    let name = "valuation_homomorphism";
    let var = VarId::intern("x");
    let list = builtin_species(bound);
    let order = bound as i64;
    let mut cases = 0u64;
    let fail = |i: u64, what: &str, fs: &str, gs: &str| -> CheckReport {
        CheckReport::fails(
            name,
            Weight::MinusOne,
            i,
            order,
            0,
            Witness {
                sample: i,
                context: what.into(),
                f: json!(fs),
                g: json!(gs),
                index: String::new(),
                lhs: String::new(),
                rhs: String::new(),
            },
        )
    };
    for (fname, f) in &list {
        cases += 1;
        let lhs = f.integral().valuation(var);
        let rhs = baxter_core::rb::integrate(&f.valuation(var));
        if !lhs.eq_to_order(&rhs, order).expect("valid orders") {
            return fail(cases, "|P(F)| = Int(|F|)", fname, "");
        }
        for (gname, g) in &list {
            cases += 2;
            let lhs = f.sum(g).valuation(var);
            let rhs = f.valuation(var).add(&g.valuation(var));
            if !lhs.eq_to_order(&rhs, order).expect("valid orders") {
                return fail(cases, "|F+G| = |F|+|G|", fname, gname);
            }
            let lhs = f.product(g).valuation(var);
            let rhs = f.valuation(var).mul(&g.valuation(var));
            if !lhs.eq_to_order(&rhs, order).expect("valid orders") {
                return fail(cases, "|FG| = |F||G|", fname, gname);
            }
        }
    }
    CheckReport::holds(name, Weight::MinusOne, cases, order, 0)
}

fn weight0_witness_sweep(bound: u32) -> CheckReport {
    let name = "weight0_bijection_witness";
    let list: Vec<(String, LinearSpecies)> = vec![
        ("X".into(), LinearSpecies::x(bound)),
        ("E_pos".into(), LinearSpecies::e(bound).positive_part()),
        ("L_pos".into(), LinearSpecies::l(bound).positive_part()),
        ("P(E)".into(), LinearSpecies::e(bound).integral()),
    ];
    let mut mapped = 0u64;
    for (fname, f) in &list {
        for (gname, g) in &list {
            for n in 1..=bound {
                match weight0_bijection_witness(f, g, n) {
                    Ok(w) => mapped += w.map.len() as u64,
                    Err(e) => {
                        return CheckReport::fails(
                            name,
                            Weight::Zero,
                            mapped,
                            bound as i64,
                            0,
                            Witness {
                                sample: n as u64,
                                context: e.to_string(),
                                f: json!(fname),
                                g: json!(gname),
                                index: n.to_string(),
                                lhs: String::new(),
                                rhs: String::new(),
                            },
                        )
                    }
                }
            }
        }
    }
    CheckReport::holds(name, Weight::Zero, mapped, bound as i64, 0)
}

// ---------------------------------------------------------------------------
// poset: down-set operators, incidence kernels

pub fn poset_suite(opts: &SuiteOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    out.push(outcome(
        "locally_chain_exhaustive",
        "weak sums have weight -1 and strict sums weight +1 on every poset whose down-sets are chains",
        Expected::Holds,
        locally_chain_exhaustive_check(5),
    ));

    let diamond = FinitePoset::diamond();
    out.push(outcome(
        "diamond_weak_weight_minus_one",
        RB_MINUS,
        Expected::Fails,
        poset_rb_exhaustive(&diamond, false, "diamond_weak"),
    ));
    out.push(outcome(
        "diamond_strict_weight_plus_one",
        RB_PLUS,
        Expected::Fails,
        poset_rb_exhaustive(&diamond, true, "diamond_strict"),
    ));

    let chain = Arc::new(FinitePoset::chain(5));
    out.push(outcome(
        "chain_weak_random",
        RB_MINUS,
        Expected::Holds,
        poset_rb_check(&chain, false, opts.samp(100), seed_for(opts.seed, 60)),
    ));
    out.push(outcome(
        "chain_strict_random",
        RB_PLUS,
        Expected::Holds,
        poset_rb_check(&chain, true, opts.samp(100), seed_for(opts.seed, 61)),
    ));

    out.push(outcome(
        "incidence_zeta_kernels",
        "the all-ones kernel recovers weak sums; the strict kernel recovers strict sums",
        Expected::Holds,
        incidence_zeta_check(opts.samp(100), seed_for(opts.seed, 62)),
    ));

    let chain3 = Arc::new(FinitePoset::chain(3));
    out.push(outcome(
        "incidence_arbitrary_kernel",
        "a generic incidence kernel fails the identity at both weights",
        Expected::Fails,
        incidence_rb_counterexample(&chain3, opts.samp(100), seed_for(opts.seed, 63)),
    ));

    out
}

fn incidence_zeta_check(samples: u64, seed: u64) -> CheckReport {
    let name = "incidence_zeta";
    let poset = Arc::new(FinitePoset::from_covers(5, &[(1, 2), (2, 3), (1, 4), (4, 5)]).unwrap());
    let zeta = IncidenceElement::zeta(poset.clone());
    let strict = IncidenceElement::zeta_strict(poset.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let values: Vec<Coefficient> = (0..poset.size())
            .map(|_| Coefficient::int(rng.gen_range(-9..=9i64)))
            .collect();
        let f = PosetFunction::new(poset.clone(), values).unwrap();
        let ok = zeta.apply(&f) == f.down_sum(false) && strict.apply(&f) == f.down_sum(true);
        if !ok {
            return CheckReport::fails(
                name,
                Weight::MinusOne,
                samples,
                0,
                seed,
                Witness {
                    sample: i,
                    context: "kernel vs down-sum".into(),
                    f: f.rg_json(),
                    g: json!(null),
                    index: String::new(),
                    lhs: String::new(),
                    rhs: String::new(),
                },
            );
        }
    }
    CheckReport::holds(name, Weight::MinusOne, samples, 0, seed)
}

// ---------------------------------------------------------------------------
// field: support projections, Euler-Lagrange, Poisson, Moyal

pub fn field_suite(opts: &SuiteOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let order = opts.ord(6);

    let vars: Vec<VarId> = ["x1", "x2", "x3"].iter().map(|s| VarId::intern(s)).collect();
    let pj = project_support_op(vars.clone(), vec![vars[0], vars[2]], order);
    out.push(outcome(
        "support_projection_weight_minus_one",
        RB_MINUS,
        Expected::Holds,
        check_rb_identity(&pj, opts.samp(200), order, seed_for(opts.seed, 70)),
    ));
    out.push(outcome(
        "support_projection_additive",
        ADDITIVE,
        Expected::Holds,
        check_additivity(&pj, opts.samp(100), order, seed_for(opts.seed, 71)),
    ));
    out.push(outcome(
        "kernel_image_closure",
        "Im(P) is closed under + and *; Ker(P) is closed under + and absorbs products",
        Expected::Holds,
        kernel_image_closure_check(&pj, opts.samp(100), order, seed_for(opts.seed, 72))
            .expect("support projection is idempotent"),
    ));

    out.push(outcome(
        "euler_lagrange_example",
        "e((phi')^2/2! - phi^2/2!) = -phi - phi''",
        Expected::Holds,
        euler_lagrange_example_check(),
    ));
    out.push(outcome(
        "euler_lagrange_total_derivatives",
        "e(d(h)) = 0 for total derivatives of one-field Lagrangians",
        Expected::Holds,
        euler_lagrange_derivative_check(),
    ));

    out.push(outcome(
        "poisson_bracket_laws",
        "{k, kbar} = 1, {k, s} = 0, antisymmetry, and the Jacobi identity",
        Expected::Holds,
        poisson_check(opts.samp(20), seed_for(opts.seed, 73)),
    ));

    out.push(outcome(
        "moyal_commutator",
        "k * kbar - kbar * k = 2 hbar",
        Expected::Holds,
        moyal_commutator_check(),
    ));
    out.push(outcome(
        "moyal_associativity",
        "(f * g) * h = f * (g * h) exactly through hbar^2",
        Expected::Holds,
        moyal_associativity_check(opts.samp(50), seed_for(opts.seed, 74)),
    ));

    let universe = Universe::new(1, 2);
    let jets = vec![
        FieldVariable::jet(vec![0], 1),
        FieldVariable::jet(vec![0], 2),
    ];
    let allowed: BTreeSet<FieldVariable> = [FieldVariable::jet(vec![0], 1)].into();
    out.push(outcome(
        "star_projection_classical",
        "support projection keeps weight -1 for the classical product (hbar order 0)",
        Expected::Holds,
        star_support_projection_check(
            universe,
            &jets,
            &allowed,
            opts.samp(200),
            0,
            seed_for(opts.seed, 75),
        ),
    ));
    out.push(outcome(
        "star_projection_quantum_probe",
        "support projection against the star product at hbar order 1, probed at (k, kbar) outside the projection",
        Expected::Fails,
        star_support_projection_check(
            universe,
            &jets,
            &allowed,
            opts.samp(5),
            1,
            seed_for(opts.seed, 76),
        ),
    ));

    out
}

fn euler_lagrange_example_check() -> CheckReport {
    let u = Universe::new(1, 1);
    let phi = |d: u32| FieldVariable::jet(vec![d], 1);
    let l = PhaseSeries::from_terms(
        u,
        0,
        [
            (vec![(phi(1), 2)], Coefficient::int(1)),
            (vec![(phi(0), 2)], Coefficient::int(-1)),
        ],
    )
    .expect("lagrangian");
    let e = euler_lagrange(&l, 1, 1).expect("cap covers jet orders");
    let expected = PhaseSeries::from_terms(
        u,
        0,
        [
            (vec![(phi(0), 1)], Coefficient::int(-1)),
            (vec![(phi(2), 1)], Coefficient::int(-1)),
        ],
    )
    .expect("expected result");
    report_bool("euler_lagrange_example", 1, e == expected, Some(Witness {
        sample: 0,
        context: "variational derivative".into(),
        f: l.to_json(),
        g: json!(null),
        index: String::new(),
        lhs: serde_json::to_string(&e.to_json()).unwrap(),
        rhs: serde_json::to_string(&expected.to_json()).unwrap(),
    }))
}

fn euler_lagrange_derivative_check() -> CheckReport {
    let u = Universe::new(1, 1);
    let phi = |d: u32| FieldVariable::jet(vec![d], 1);
    let hs = [
        PhaseSeries::variable(u, &phi(0), 0),
        PhaseSeries::variable(u, &phi(1), 0),
        PhaseSeries::from_terms(u, 0, [(vec![(phi(0), 2)], Coefficient::int(1))]).unwrap(),
        PhaseSeries::from_terms(u, 0, [(vec![(phi(0), 1), (phi(1), 1)], Coefficient::int(1))])
            .unwrap(),
        PhaseSeries::from_terms(u, 0, [(vec![(phi(1), 2)], Coefficient::int(1))]).unwrap(),
        PhaseSeries::from_terms(u, 0, [(vec![(phi(0), 3)], Coefficient::int(1))]).unwrap(),
    ];
    let mut cases = 0u64;
    for h in &hs {
        cases += 1;
        let dh = h.total_derivative(1).expect("configuration space");
        let e = euler_lagrange(&dh, 1, 4).expect("cap 4 covers the family");
        if !e.is_zero() {
            return report_bool("euler_lagrange_total_derivatives", cases, false, Some(Witness {
                sample: cases,
                context: "nonzero variational derivative".into(),
                f: h.to_json(),
                g: dh.to_json(),
                index: String::new(),
                lhs: serde_json::to_string(&e.to_json()).unwrap(),
                rhs: "0".into(),
            }));
        }
    }
    report_bool("euler_lagrange_total_derivatives", cases, true, None)
}

fn poisson_check(samples: u64, seed: u64) -> CheckReport {
    let name = "poisson_bracket_laws";
    let u = Universe::new(1, 1);
    let phi = FieldVariable::jet(vec![0], 1);
    let k = PhaseSeries::variable(u, &phi, 0);
    let kb = PhaseSeries::variable(u, &phi.bar(), 0);
    let s = PhaseSeries::variable(u, &FieldVariable::jet(vec![1], 1), 0);
    let one = PhaseSeries::one(u, 0);
    let mut cases = 3u64;
    let generators_ok = poisson_bracket(&k, &kb).unwrap() == one
        && poisson_bracket(&k, &s).unwrap().is_zero()
        && poisson_bracket(&kb, &k).unwrap() == one.neg();
    if !generators_ok {
        return report_bool(name, cases, false, None);
    }
    let jets = [phi.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        cases += 2;
        let f = sample_phase_series(u, &jets, 2, 0, &mut rng);
        let g = sample_phase_series(u, &jets, 2, 0, &mut rng);
        let h = sample_phase_series(u, &jets, 2, 0, &mut rng);
        // antisymmetry
        let anti = poisson_bracket(&f, &g)
            .unwrap()
            .add(&poisson_bracket(&g, &f).unwrap())
            .unwrap();
        // Jacobi
        let jac = poisson_bracket(&f, &poisson_bracket(&g, &h).unwrap())
            .unwrap()
            .add(&poisson_bracket(&g, &poisson_bracket(&h, &f).unwrap()).unwrap())
            .unwrap()
            .add(&poisson_bracket(&h, &poisson_bracket(&f, &g).unwrap()).unwrap())
            .unwrap();
        if !anti.is_zero() || !jac.is_zero() {
            return report_bool(name, cases, false, Some(Witness {
                sample: cases,
                context: if anti.is_zero() { "jacobi" } else { "antisymmetry" }.into(),
                f: f.to_json(),
                g: g.to_json(),
                index: String::new(),
                lhs: String::new(),
                rhs: "0".into(),
            }));
        }
    }
    report_bool(name, cases, true, None)
}

fn moyal_commutator_check() -> CheckReport {
    let u = Universe::new(1, 1);
    let phi = FieldVariable::jet(vec![0], 1);
    let k = PhaseSeries::variable(u, &phi, 1);
    let kb = PhaseSeries::variable(u, &phi.bar(), 1);
    let comm = moyal_star(&k, &kb, 1)
        .unwrap()
        .add(&moyal_star(&kb, &k, 1).unwrap().neg())
        .unwrap();
    let expected = PhaseSeries::from_terms(
        u,
        1,
        [(vec![(FieldVariable::Hbar, 1)], Coefficient::int(2))],
    )
    .unwrap();
    report_bool("moyal_commutator", 1, comm == expected, Some(Witness {
        sample: 0,
        context: "star commutator".into(),
        f: k.to_json(),
        g: kb.to_json(),
        index: "hbar".into(),
        lhs: serde_json::to_string(&comm.to_json()).unwrap(),
        rhs: serde_json::to_string(&expected.to_json()).unwrap(),
    }))
}

fn moyal_associativity_check(samples: u64, seed: u64) -> CheckReport {
    let name = "moyal_associativity";
    let u = Universe::new(1, 1);
    let jets = [FieldVariable::jet(vec![0], 1)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let f = sample_phase_series(u, &jets, 3, 2, &mut rng);
        let g = sample_phase_series(u, &jets, 3, 2, &mut rng);
        let h = sample_phase_series(u, &jets, 3, 2, &mut rng);
        let lhs = moyal_star(&moyal_star(&f, &g, 2).unwrap(), &h, 2).unwrap();
        let rhs = moyal_star(&f, &moyal_star(&g, &h, 2).unwrap(), 2).unwrap();
        if lhs != rhs {
            let idx = lhs
                .series()
                .first_difference(rhs.series(), i64::MAX)
                .unwrap();
            return CheckReport::fails(
                name,
                Weight::MinusOne,
                samples,
                2,
                seed,
                Witness {
                    sample: i,
                    context: "associativity through hbar^2".into(),
                    f: f.to_json(),
                    g: g.to_json(),
                    index: idx.to_string(),
                    lhs: lhs.series().coeff(&idx).to_string(),
                    rhs: rhs.series().coeff(&idx).to_string(),
                },
            );
        }
    }
    CheckReport::holds(name, Weight::MinusOne, samples, 2, seed)
}

// ---------------------------------------------------------------------------
// Entry points

pub const SUITE_NAMES: [&str; 7] = [
    "all",
    "laurent",
    "integration",
    "qcalc",
    "species",
    "poset",
    "field",
];

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<SuiteReport, String> {
    let checks = match name {
        "laurent" => laurent_suite(opts),
        "integration" => integration_suite(opts),
        "qcalc" => qcalc_suite(opts),
        "species" => species_suite(opts),
        "poset" => poset_suite(opts),
        "field" => field_suite(opts),
        "all" => {
            let mut all = Vec::new();
            all.extend(laurent_suite(opts));
            all.extend(integration_suite(opts));
            all.extend(qcalc_suite(opts));
            all.extend(species_suite(opts));
            all.extend(poset_suite(opts));
            all.extend(field_suite(opts));
            all
        }
        other => {
            return Err(format!(
                "unknown suite {:?}; expected one of {}",
                other,
                SUITE_NAMES.join(", ")
            ))
        }
    };
    let ok = checks.iter().all(|c| c.ok);
    Ok(SuiteReport {
        suite: name.into(),
        seed: opts.seed,
        order: opts.order,
        samples: opts.samples,
        ok,
        checks,
    })
}

/// Suite for a user-supplied poset: the expected verdicts follow from
/// whether every principal down-set is a chain. The function space is
/// swept exhaustively, so the carrier is capped at 6 elements.
pub fn poset_file_suite(poset: FinitePoset, opts: &SuiteOptions) -> Result<SuiteReport, String> {
    if poset.size() > 6 {
        return Err(format!(
            "poset has {} elements; the exhaustive sweep is limited to 6",
            poset.size()
        ));
    }
    let locally_chain = poset.is_locally_chain();
    let expected = if locally_chain {
        Expected::Holds
    } else {
        Expected::Fails
    };
    let shared = Arc::new(poset);
    let mut checks = Vec::new();
    for (id, strict, identity) in [
        ("weak_weight_minus_one", false, RB_MINUS),
        ("strict_weight_plus_one", true, RB_PLUS),
    ] {
        let report = poset_rb_exhaustive(&shared, strict, id);
        checks.push(outcome(id, identity, expected, report));
    }
    checks.push(outcome(
        "incidence_arbitrary_kernel",
        "a generic incidence kernel fails the identity at both weights",
        Expected::Fails,
        incidence_rb_counterexample(&shared, opts.samp(100), seed_for(opts.seed, 64)),
    ));
    let ok = checks.iter().all(|c| c.ok);
    Ok(SuiteReport {
        suite: "poset-file".into(),
        seed: opts.seed,
        order: opts.order,
        samples: opts.samples,
        ok,
        checks,
    })
}
