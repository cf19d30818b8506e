//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. All tolerances are zero; every comparison is exact.

use std::sync::OnceLock;

use baxter_cli::suites::{run_suite, CheckOutcome, Expected, SuiteOptions, SuiteReport};
use baxter_core::field::{moyal_star, FieldVariable, PhaseSeries, Universe};
use baxter_core::{Coefficient, Verdict};

fn criterion(n: u32, desc: &str, ok: bool) {
    println!("acceptance {:>2} ({}): {}", n, desc, if ok { "PASS" } else { "FAIL" });
    assert!(ok, "acceptance criterion {} failed: {}", n, desc);
}

fn suite(name: &'static str) -> &'static SuiteReport {
    static CACHE: OnceLock<std::sync::Mutex<std::collections::BTreeMap<&'static str, &'static SuiteReport>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(std::collections::BTreeMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(r) = guard.get(name) {
        return r;
    }
    let report = run_suite(name, &SuiteOptions::default()).expect("known suite");
    let leaked: &'static SuiteReport = Box::leak(Box::new(report));
    guard.insert(name, leaked);
    leaked
}

fn check<'a>(report: &'a SuiteReport, id: &str) -> &'a CheckOutcome {
    report
        .checks
        .iter()
        .find(|c| c.id == id)
        .unwrap_or_else(|| panic!("missing check {:?} in suite {}", id, report.suite))
}

#[test]
fn acceptance_1_laurent_truncation() {
    let c = check(suite("laurent"), "negative_part_weight_minus_one");
    let ok = c.ok
        && c.report.verdict == Verdict::Holds
        && c.report.samples == 500
        && c.report.order == 8;
    criterion(1, "Laurent negative-part operator, weight -1, 500 pairs at order 8", ok);
}

#[test]
fn acceptance_2_integration() {
    let s = suite("integration");
    let parts = check(s, "integration_by_parts");
    let mut ok = parts.ok && parts.report.samples == 500 && parts.report.order == 10;
    for a in 1..=3 {
        for b in 1..=3 {
            let c = check(s, &format!("iterated_identity_a{}_b{}", a, b));
            ok = ok && c.ok && c.report.samples == 50 && c.report.order == 10;
        }
    }
    criterion(2, "integration weight 0 (500 pairs, order 10) and the iterated identity for a,b <= 3", ok);
}

#[test]
fn acceptance_3_q_calculus() {
    let s = suite("qcalc");
    let twisted = check(s, "twisted_q_integration");
    let pascal = check(s, "q_pascal_recurrence");
    let inv = check(s, "inversion_gaussian_sweep");
    let ok = twisted.ok
        && twisted.report.samples == 200
        && twisted.report.order == 8
        && pascal.ok
        && pascal.report.order == 12
        && inv.ok
        && inv.report.order == 10;
    criterion(3, "twisted q-identity (200 pairs, order 8), q-Pascal to 12, inversion sums to 10", ok);
}

#[test]
fn acceptance_4_species_layer() {
    let s = suite("species");
    let valuations = check(s, "valuation_homomorphism");
    let witness = check(s, "weight0_bijection_witness");
    let twisted = check(suite("qcalc"), "twisted_species_bijection");
    let ok = valuations.ok
        && valuations.report.order == 8
        && witness.ok
        && witness.report.order == 8
        && twisted.ok
        && twisted.report.order == 7;
    criterion(4, "species valuations at order 8, weight-0 witnesses to n=8, twisted q-witnesses to n=7", ok);
}

#[test]
fn acceptance_5_posets() {
    let s = suite("poset");
    let exhaustive = check(s, "locally_chain_exhaustive");
    let dw = check(s, "diamond_weak_weight_minus_one");
    let ds = check(s, "diamond_strict_weight_plus_one");
    let inc = check(s, "incidence_arbitrary_kernel");
    let ok = exhaustive.ok
        && dw.ok
        && dw.expected == Expected::Fails
        && ds.ok
        && ds.expected == Expected::Fails
        && inc.ok
        && inc.expected == Expected::Fails
        && inc.report.samples <= 100;
    criterion(5, "locally-chain posets to 5 elements hold; the diamond fails; incidence kernels fail within 100 trials", ok);
}

#[test]
fn acceptance_6_support_projection() {
    let s = suite("field");
    let pj = check(s, "support_projection_weight_minus_one");
    let closure = check(s, "kernel_image_closure");
    let ok = pj.ok && pj.report.samples == 200 && closure.ok;
    criterion(6, "support projection weight -1 on 200 pairs over 3 variables; kernel and image closure", ok);
}

#[test]
fn acceptance_7_field_theory() {
    let s = suite("field");
    let el = check(s, "euler_lagrange_example");
    let assoc = check(s, "moyal_associativity");
    let classical = check(s, "star_projection_classical");
    let probe = check(s, "star_projection_quantum_probe");

    // k * kbar - kbar * k = 2 hbar, exactly, straight from the library.
    let u = Universe::new(1, 1);
    let phi = FieldVariable::jet(vec![0], 1);
    let k = PhaseSeries::variable(u, &phi, 1);
    let kb = PhaseSeries::variable(u, &phi.bar(), 1);
    let comm = moyal_star(&k, &kb, 1)
        .unwrap()
        .add(&moyal_star(&kb, &k, 1).unwrap().neg())
        .unwrap();
    let two_hbar = PhaseSeries::from_terms(
        u,
        1,
        [(vec![(FieldVariable::Hbar, 1)], Coefficient::int(2))],
    )
    .unwrap();

    let ok = el.ok
        && comm == two_hbar
        && assoc.ok
        && assoc.report.samples == 50
        && classical.ok
        && probe.ok
        && probe.expected == Expected::Fails;
    criterion(7, "Euler-Lagrange example, 2hbar commutator, Moyal associativity, classical projection holds, quantum probe fails", ok);
}

#[test]
fn acceptance_8_dimension_pairs() {
    let s = suite("laurent");
    let proj = check(s, "pair_projection");
    let quot = check(s, "pair_quotient_multiplicativity");
    let ok = proj.ok
        && proj.report.samples == 784
        && quot.ok
        && quot.expected == Expected::Fails
        && quot.report.witness.is_some();
    criterion(8, "pair projection holds exhaustively to 6; the quotient variant yields a multiplicativity counterexample", ok);
}

#[test]
fn acceptance_9_determinism() {
    let mut ok = true;
    for name in ["laurent", "integration", "qcalc", "species", "poset", "field"] {
        let opts = SuiteOptions::default();
        let first = run_suite(name, &opts).unwrap().to_json_string();
        let second = run_suite(name, &opts).unwrap().to_json_string();
        if first != second {
            ok = false;
            eprintln!("suite {} report differs between identical runs", name);
        }
    }
    criterion(9, "re-running any suite with the same seed yields a byte-identical JSON report", ok);
}
