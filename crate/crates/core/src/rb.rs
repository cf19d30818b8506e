//! The operator catalog and the generic Rota-Baxter identity verifier.
//!
//! A Rota-Baxter operator of weight w satisfies
//! `P(f)P(g) = P(P(f)g) + P(fP(g)) + w*P(fg)`; for w = -1 over
//! coefficient domains without negatives the verifier uses the
//! subtraction-free arrangement `P(f)P(g) + P(fg) = P(P(f)g) + P(fP(g))`.
//! A twisted operator pair (P, S) satisfies
//! `P(f)P(g) = P(P(f)g) + P(f*S(P(g)))`.
//!
//! Checks draw seeded random samples from the operator's declared domain
//! and compare both sides coefficient-by-coefficient, exactly, through a
//! stated order. Failures are reported as replayable witnesses, never
//! as errors.

use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::coeff::{binomial, factorial, Coefficient};
use crate::matrix::SeriesMatrix;
use crate::series::{Basis, Index, MultiIndex, TruncatedSeries, Truncation, VarId, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("divergent geometric sum: {endo} does not raise the degree of {generator}")]
    DivergentGeometricSum { endo: String, generator: String },
    #[error("operator {0} has no twist")]
    NoTwist(String),
    #[error("operator {0} is not idempotent")]
    NotIdempotent(String),
    #[error("iterated identity needs 1 <= a,b <= 4, got ({a}, {b})")]
    IterationRange { a: u32, b: u32 },
    #[error("iterated identity needs a weight-0 operator, {0} has weight {1}")]
    NotWeightZero(String, i64),
}

// ---------------------------------------------------------------------------
// Weights, verdicts, reports

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    MinusOne,
    Zero,
    One,
}

impl Weight {
    pub fn lambda(&self) -> i64 {
        match self {
            Weight::MinusOne => -1,
            Weight::Zero => 0,
            Weight::One => 1,
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(self.lambda())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
}

/// First disagreement found by a check, with enough data to replay it.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Witness {
    pub sample: u64,
    pub context: String,
    pub f: Value,
    pub g: Value,
    pub index: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckReport {
    pub op: String,
    pub weight: Weight,
    pub samples: u64,
    pub order: i64,
    pub seed: u64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl CheckReport {
    pub fn holds(op: &str, weight: Weight, samples: u64, order: i64, seed: u64) -> Self {
        CheckReport {
            op: op.to_string(),
            weight,
            samples,
            order,
            seed,
            verdict: Verdict::Holds,
            witness: None,
        }
    }

    pub fn fails(op: &str, weight: Weight, samples: u64, order: i64, seed: u64, w: Witness) -> Self {
        CheckReport {
            op: op.to_string(),
            weight,
            samples,
            order,
            seed,
            verdict: Verdict::Fails,
            witness: Some(w),
        }
    }

    pub fn holds_exactly(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serialization")
    }
}

// ---------------------------------------------------------------------------
// Rings the verifier can walk over

/// Operations a carrier must expose for identity checking.
pub trait RingOps: Clone {
    fn rg_add(&self, other: &Self) -> Self;
    fn rg_mul(&self, other: &Self) -> Self;
    fn rg_neg(&self) -> Self;
    /// Exact comparison through the given order; panics if the order
    /// exceeds a validity bound (a check-configuration bug, not data).
    fn rg_eq_to_order(&self, other: &Self, order: i64) -> bool;
    fn rg_first_diff(&self, other: &Self, order: i64) -> Option<(String, String, String)>;
    fn rg_json(&self) -> Value;
}

impl RingOps for TruncatedSeries {
    fn rg_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn rg_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn rg_neg(&self) -> Self {
        self.neg()
    }
    fn rg_eq_to_order(&self, other: &Self, order: i64) -> bool {
        self.eq_to_order(other, order)
            .expect("check order exceeds series validity")
    }
    fn rg_first_diff(&self, other: &Self, order: i64) -> Option<(String, String, String)> {
        self.first_difference(other, order).map(|idx| {
            (
                idx.to_string(),
                self.coeff(&idx).to_string(),
                other.coeff(&idx).to_string(),
            )
        })
    }
    fn rg_json(&self) -> Value {
        self.to_json()
    }
}

impl RingOps for SeriesMatrix {
    fn rg_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn rg_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn rg_neg(&self) -> Self {
        self.neg()
    }
    fn rg_eq_to_order(&self, other: &Self, order: i64) -> bool {
        self.eq_to_order(other, order)
            .expect("check order exceeds matrix validity")
    }
    fn rg_first_diff(&self, other: &Self, order: i64) -> Option<(String, String, String)> {
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if let Some((idx, l, r)) = self.entry(i, j).rg_first_diff(other.entry(i, j), order)
                {
                    return Some((format!("({},{}) {}", i, j, idx), l, r));
                }
            }
        }
        None
    }
    fn rg_json(&self) -> Value {
        self.to_json()
    }
}

// ---------------------------------------------------------------------------
// Sample domains

/// Description of a series domain: which ring to sample from and how.
/// Coefficients are drawn uniformly from `coeff_lo..=coeff_hi` with the
/// given density per basis slot; seeds are always recorded in reports.
#[derive(Debug, Clone)]
pub struct SampleSpec {
    pub basis: Basis,
    pub order: i64,
    pub vars: Vec<VarId>,
    pub alphabet: u8,
    pub laurent_lower: i64,
    pub coeff_lo: i64,
    pub coeff_hi: i64,
    pub density: f64,
    /// Sample from the additive sub-semiring of nonnegative coefficients
    /// and use the subtraction-free identity arrangement.
    pub nonneg: bool,
    /// Exclude slots whose exponent in the given variable is below the
    /// bound (restricts the sampled subring, e.g. away from constants).
    pub min_var_degree: Option<(VarId, u32)>,
}

impl SampleSpec {
    fn base(basis: Basis, order: i64) -> Self {
        SampleSpec {
            basis,
            order,
            vars: Vec::new(),
            alphabet: 2,
            laurent_lower: -order,
            coeff_lo: -9,
            coeff_hi: 9,
            density: 0.5,
            nonneg: false,
            min_var_degree: None,
        }
    }

    pub fn laurent(order: i64) -> Self {
        Self::base(Basis::LaurentZ, order)
    }

    pub fn divided(vars: Vec<VarId>, order: i64) -> Self {
        SampleSpec {
            vars,
            ..Self::base(Basis::DividedPower, order)
        }
    }

    pub fn qdivided(order: i64) -> Self {
        Self::base(Basis::QDivided, order)
    }

    pub fn word(alphabet: u8, order: i64) -> Self {
        SampleSpec {
            alphabet,
            ..Self::base(Basis::NonCommWord, order)
        }
    }

    pub fn nonneg(mut self) -> Self {
        self.nonneg = true;
        self
    }

    pub fn with_min_var_degree(mut self, v: VarId, d: u32) -> Self {
        self.min_var_degree = Some((v, d));
        self
    }

    fn slots(&self) -> Vec<Index> {
        let mut out = Vec::new();
        match self.basis {
            Basis::LaurentZ => {
                for n in self.laurent_lower..=self.order {
                    out.push(Index::Degree(n));
                }
            }
            Basis::QDivided => {
                for n in 0..=self.order {
                    out.push(Index::Degree(n));
                }
            }
            Basis::DividedPower => {
                for m in enumerate_multi_indices(&self.vars, self.order as u32) {
                    out.push(Index::Multi(m));
                }
            }
            Basis::NonCommWord => {
                let mut level: Vec<Word> = vec![Word::empty()];
                out.push(Index::Word(Word::empty()));
                for _ in 0..self.order {
                    let mut next = Vec::new();
                    for w in &level {
                        for s in 1..=self.alphabet {
                            let mut v = w.0.clone();
                            v.push(s);
                            next.push(Word(v));
                        }
                    }
                    for w in &next {
                        out.push(Index::Word(w.clone()));
                    }
                    level = next;
                }
            }
        }
        if let Some((v, d)) = &self.min_var_degree {
            out.retain(|idx| match idx {
                Index::Multi(m) => m.exponent(*v) >= *d,
                _ => true,
            });
        }
        out
    }

    pub fn trunc(&self) -> Truncation {
        match self.basis {
            Basis::LaurentZ => Truncation::Laurent {
                lower: self.laurent_lower,
                upper: Some(self.order),
            },
            _ => Truncation::degree(self.order),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> TruncatedSeries {
        let lo = if self.nonneg { self.coeff_lo.max(0) } else { self.coeff_lo };
        let mut out = TruncatedSeries::zero(self.basis, self.trunc());
        for idx in self.slots() {
            if !rng.gen_bool(self.density) {
                continue;
            }
            let c = rng.gen_range(lo..=self.coeff_hi);
            out.add_term(idx, Coefficient::int(c));
        }
        out
    }

    /// One series per admissible basis slot, with coefficient 1.
    pub fn generators(&self) -> Vec<TruncatedSeries> {
        self.slots()
            .into_iter()
            .map(|idx| {
                TruncatedSeries::from_terms(self.basis, self.trunc(), [(idx, Coefficient::one())])
            })
            .collect()
    }
}

pub fn enumerate_multi_indices(vars: &[VarId], max_total: u32) -> Vec<MultiIndex> {
    fn go(vars: &[VarId], budget: u32, current: &mut Vec<(VarId, u32)>, out: &mut Vec<MultiIndex>) {
        match vars.split_first() {
            None => out.push(MultiIndex::from_pairs(current.iter().cloned())),
            Some((v, rest)) => {
                for e in 0..=budget {
                    if e > 0 {
                        current.push((*v, e));
                    }
                    go(rest, budget - e, current, out);
                    if e > 0 {
                        current.pop();
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    go(vars, max_total, &mut Vec::new(), &mut out);
    out.sort_by_key(|m| (m.total_degree(), m.clone()));
    out
}

// ---------------------------------------------------------------------------
// Operators

type SeriesFn = Arc<dyn Fn(&TruncatedSeries) -> TruncatedSeries + Send + Sync>;

/// A named linear endomorphism of a series ring with a declared weight
/// and an optional twist endomorphism.
#[derive(Clone)]
pub struct RbOperator {
    pub name: String,
    pub weight: Weight,
    pub domain: SampleSpec,
    apply: SeriesFn,
    twist: Option<SeriesFn>,
}

impl RbOperator {
    pub fn new(
        name: impl Into<String>,
        weight: Weight,
        domain: SampleSpec,
        apply: impl Fn(&TruncatedSeries) -> TruncatedSeries + Send + Sync + 'static,
    ) -> Self {
        RbOperator {
            name: name.into(),
            weight,
            domain,
            apply: Arc::new(apply),
            twist: None,
        }
    }

    pub fn with_twist(
        mut self,
        twist: impl Fn(&TruncatedSeries) -> TruncatedSeries + Send + Sync + 'static,
    ) -> Self {
        self.twist = Some(Arc::new(twist));
        self
    }

    pub fn apply(&self, f: &TruncatedSeries) -> TruncatedSeries {
        (self.apply)(f)
    }

    pub fn twist_apply(&self, f: &TruncatedSeries) -> Result<TruncatedSeries, CheckError> {
        match &self.twist {
            Some(s) => Ok(s(f)),
            None => Err(CheckError::NoTwist(self.name.clone())),
        }
    }

    pub fn has_twist(&self) -> bool {
        self.twist.is_some()
    }
}

/// A named ring endomorphism used to build geometric-sum operators.
#[derive(Clone)]
pub struct SeriesEndo {
    pub name: String,
    apply: SeriesFn,
}

impl SeriesEndo {
    pub fn new(
        name: impl Into<String>,
        apply: impl Fn(&TruncatedSeries) -> TruncatedSeries + Send + Sync + 'static,
    ) -> Self {
        SeriesEndo {
            name: name.into(),
            apply: Arc::new(apply),
        }
    }

    pub fn apply(&self, f: &TruncatedSeries) -> TruncatedSeries {
        (self.apply)(f)
    }
}

/// A named endomorphism of the coefficient ring.
#[derive(Clone)]
pub struct CoeffOperator {
    pub name: String,
    pub weight: Weight,
    apply: Arc<dyn Fn(&Coefficient) -> Coefficient + Send + Sync>,
}

impl CoeffOperator {
    pub fn new(
        name: impl Into<String>,
        weight: Weight,
        apply: impl Fn(&Coefficient) -> Coefficient + Send + Sync + 'static,
    ) -> Self {
        CoeffOperator {
            name: name.into(),
            weight,
            apply: Arc::new(apply),
        }
    }

    pub fn apply(&self, c: &Coefficient) -> Coefficient {
        (self.apply)(c)
    }
}

// ---------------------------------------------------------------------------
// Catalog: pointwise series operators

/// Keeps exactly the strictly negative degrees of a Laurent series.
/// The result is fully determined whenever the input is valid through
/// degree -1 or beyond.
pub fn laurent_negative_part(f: &TruncatedSeries) -> TruncatedSeries {
    assert_eq!(f.basis(), Basis::LaurentZ, "negative part needs a Laurent series");
    let out = f.filter_terms(|idx| idx.total_degree() < 0);
    match f.trunc() {
        Truncation::Laurent { lower, upper } => {
            let upper = match upper {
                Some(u) if u < -1 => Some(u),
                _ => None,
            };
            out.with_trunc(Truncation::Laurent { lower, upper })
        }
        _ => unreachable!(),
    }
}

/// Divided-power integration: shifts the divided coefficient at `x^n/n!`
/// to `x^{n+1}/(n+1)!`. The result is reported at the input's order.
pub fn integrate(f: &TruncatedSeries) -> TruncatedSeries {
    assert_eq!(f.basis(), Basis::DividedPower, "integrate needs a divided-power series");
    let var = integration_variable(f);
    f.map_terms(Basis::DividedPower, f.trunc(), |idx, c| {
        let Index::Multi(m) = idx else { unreachable!() };
        let shifted = m.add(&MultiIndex::var(var));
        Some((Index::Multi(shifted), c.clone()))
    })
}

fn integration_variable(f: &TruncatedSeries) -> VarId {
    f.terms()
        .filter_map(|(idx, _)| match idx {
            Index::Multi(m) => m.support().next(),
            _ => None,
        })
        .next()
        .unwrap_or_else(|| VarId::intern("x"))
}

/// q-integration: index shift up on the q-divided basis.
pub fn q_integrate(f: &TruncatedSeries) -> TruncatedSeries {
    assert_eq!(f.basis(), Basis::QDivided, "q-integration needs a q-divided series");
    f.map_terms(Basis::QDivided, f.trunc(), |idx, c| {
        let Index::Degree(n) = idx else { unreachable!() };
        Some((Index::Degree(n + 1), c.clone()))
    })
}

/// q-derivative: index shift down; the constant term is discarded and the
/// validity order drops by one.
pub fn q_derive(f: &TruncatedSeries) -> TruncatedSeries {
    assert_eq!(f.basis(), Basis::QDivided, "q-derivative needs a q-divided series");
    let trunc = match f.trunc() {
        Truncation::Degree(Some(n)) => Truncation::Degree(Some(n - 1)),
        t => t,
    };
    f.map_terms(Basis::QDivided, trunc, |idx, c| {
        let Index::Degree(n) = idx else { unreachable!() };
        (*n >= 1).then(|| (Index::Degree(n - 1), c.clone()))
    })
}

/// Shift twist: multiplies the coefficient at `x^n/[n]_q!` by `q^n`.
pub fn q_shift(f: &TruncatedSeries) -> TruncatedSeries {
    assert_eq!(f.basis(), Basis::QDivided, "q-shift needs a q-divided series");
    f.map_terms(Basis::QDivided, f.trunc(), |idx, c| {
        let Index::Degree(n) = idx else { unreachable!() };
        let qn = Coefficient::QPoly(crate::coeff::QPoly::monomial(1, *n as u32));
        Some((idx.clone(), c.mul(&qn)))
    })
}

/// Keeps exactly the terms whose multi-index support lies inside `j`.
pub fn project_support(f: &TruncatedSeries, j: &[VarId]) -> TruncatedSeries {
    assert_eq!(f.basis(), Basis::DividedPower, "support projection needs a divided-power series");
    f.filter_terms(|idx| {
        let Index::Multi(m) = idx else { unreachable!() };
        m.support().all(|v| j.contains(&v))
    })
}

// ---------------------------------------------------------------------------
// Catalog: operator constructors

pub fn laurent_negative_part_op(order: i64) -> RbOperator {
    RbOperator::new(
        "laurent_negative_part",
        Weight::MinusOne,
        SampleSpec::laurent(order),
        laurent_negative_part,
    )
}

pub fn integrate_op(order: i64) -> RbOperator {
    let x = VarId::intern("x");
    RbOperator::new(
        "integrate",
        Weight::Zero,
        SampleSpec::divided(vec![x], order),
        integrate,
    )
}

/// q-integration with the shift twist `s_q`.
pub fn q_integrate_op(order: i64) -> RbOperator {
    RbOperator::new(
        "q_integrate",
        Weight::Zero,
        SampleSpec::qdivided(order),
        q_integrate,
    )
    .with_twist(q_shift)
}

pub fn project_support_op(vars: Vec<VarId>, j: Vec<VarId>, order: i64) -> RbOperator {
    RbOperator::new(
        format!(
            "project_support{{{}}}",
            j.iter().map(|v| v.name()).collect::<Vec<_>>().join(",")
        ),
        Weight::MinusOne,
        SampleSpec::divided(vars, order),
        move |f| project_support(f, &j),
    )
}

pub fn zero_op(weight: Weight, domain: SampleSpec) -> RbOperator {
    RbOperator::new("zero", weight, domain, |f| {
        TruncatedSeries::zero(f.basis(), f.trunc())
    })
}

pub fn identity_op(domain: SampleSpec) -> RbOperator {
    RbOperator::new("identity", Weight::MinusOne, domain, |f| f.clone())
}

/// Substitution endomorphism `f -> f(g)` on single-variable divided series.
pub fn substitution_endo(g: TruncatedSeries, order: i64) -> SeriesEndo {
    SeriesEndo::new(format!("substitute[{}]", g), move |f| {
        f.substitute(&g, order).expect("substitution endomorphism")
    })
}

/// The two-variable shift `f(x, q) -> f(qx, q)` on the divided basis:
/// the term at x-degree a, q-degree b moves to q-degree a+b with the
/// integer weight (a+b)!/b!.
pub fn two_var_shift_endo(x: VarId, q: VarId, order: i64) -> SeriesEndo {
    SeriesEndo::new("two_var_shift", move |f| {
        let trunc = match f.trunc() {
            t @ Truncation::Degree(_) => t,
            _ => Truncation::degree(order),
        };
        f.map_terms(Basis::DividedPower, trunc, |idx, c| {
            let Index::Multi(m) = idx else { unreachable!() };
            let a = m.exponent(x);
            let b = m.exponent(q);
            let target = MultiIndex::from_pairs(
                m.pairs()
                    .iter()
                    .filter(|(v, _)| *v != x && *v != q)
                    .cloned()
                    .chain([(x, a), (q, a + b)]),
            );
            let weight = factorial((a + b) as u64) / factorial(b as u64);
            Some((Index::Multi(target), c.mul(&Coefficient::Int(weight))))
        })
    })
}

/// Builds the geometric sum `f -> sum_n F^n(f)` truncated at the order.
/// `F` must strictly raise the minimal degree of every admissible basis
/// generator; that is probed before the operator is returned.
pub fn geometric_sum_rb(
    endo: SeriesEndo,
    domain: SampleSpec,
    order: i64,
) -> Result<RbOperator, CheckError> {
    for gen in domain.generators() {
        let image = endo.apply(&gen);
        if image.is_zero() {
            continue;
        }
        let d0 = gen.min_degree().expect("generator has one term");
        let d1 = image.min_degree().expect("nonzero image");
        if d1 <= d0 {
            return Err(CheckError::DivergentGeometricSum {
                endo: endo.name.clone(),
                generator: gen.to_string(),
            });
        }
    }
    let name = format!("geometric_sum[{}]", endo.name);
    Ok(RbOperator::new(name, Weight::MinusOne, domain, move |f| {
        let mut acc = TruncatedSeries::zero(f.basis(), f.trunc());
        let mut term = f.clone();
        let mut rounds = 0i64;
        while !term.is_zero() && rounds <= order + 1 {
            acc = acc.add(&term);
            term = endo.apply(&term);
            rounds += 1;
        }
        acc
    }))
}

/// Lifts a coefficient-ring operator to a series ring, coefficientwise.
pub fn lift_coeff_op(op: &CoeffOperator, domain: SampleSpec) -> RbOperator {
    let inner = op.clone();
    RbOperator::new(
        format!("coefficientwise[{}]", op.name),
        op.weight,
        domain,
        move |f| {
            f.map_terms(f.basis(), f.trunc(), |idx, c| {
                Some((idx.clone(), inner.apply(c)))
            })
        },
    )
}

/// A series operator applied entrywise to square matrices.
#[derive(Clone)]
pub struct MatrixOperator {
    pub name: String,
    pub weight: Weight,
    pub dim: usize,
    pub domain: SampleSpec,
    apply: Arc<dyn Fn(&SeriesMatrix) -> SeriesMatrix + Send + Sync>,
}

impl MatrixOperator {
    pub fn apply(&self, m: &SeriesMatrix) -> SeriesMatrix {
        (self.apply)(m)
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> SeriesMatrix {
        let entries = (0..self.dim * self.dim)
            .map(|_| self.domain.sample(rng))
            .collect();
        SeriesMatrix::new(self.dim, entries).expect("sampled matrix")
    }
}

/// Lifts a series operator to n-by-n matrices, entrywise.
pub fn lift_to_matrices(op: &RbOperator, dim: usize) -> MatrixOperator {
    let inner = op.clone();
    MatrixOperator {
        name: format!("matrix{}x{}[{}]", dim, dim, op.name),
        weight: op.weight,
        dim,
        domain: op.domain.clone(),
        apply: Arc::new(move |m| m.map(|e| inner.apply(e))),
    }
}

// ---------------------------------------------------------------------------
// The verifier

pub(crate) fn report_pairs<R: RingOps>(
    name: &str,
    weight: Weight,
    samples: u64,
    order: i64,
    seed: u64,
    mut sample: impl FnMut(&mut ChaCha8Rng) -> R,
    sides: impl Fn(&R, &R) -> (R, R),
) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let f = sample(&mut rng);
        let g = sample(&mut rng);
        let (lhs, rhs) = sides(&f, &g);
        if !lhs.rg_eq_to_order(&rhs, order) {
            let (index, l, r) = lhs
                .rg_first_diff(&rhs, order)
                .expect("inequality implies a differing index");
            let witness = Witness {
                sample: i,
                context: "identity".into(),
                f: f.rg_json(),
                g: g.rg_json(),
                index,
                lhs: l,
                rhs: r,
            };
            return CheckReport::fails(name, weight, samples, order, seed, witness);
        }
    }
    CheckReport::holds(name, weight, samples, order, seed)
}

/// Both sides of the Rota-Baxter identity for the given weight. With
/// `semiring` set (weight -1 only) the subtraction-free arrangement is
/// returned.
pub fn rb_sides<R: RingOps>(
    apply: impl Fn(&R) -> R,
    weight: Weight,
    semiring: bool,
    f: &R,
    g: &R,
) -> (R, R) {
    let pf = apply(f);
    let pg = apply(g);
    let lhs_prod = pf.rg_mul(&pg);
    let p_pf_g = apply(&pf.rg_mul(g));
    let p_f_pg = apply(&f.rg_mul(&pg));
    let p_fg = apply(&f.rg_mul(g));
    let rhs_core = p_pf_g.rg_add(&p_f_pg);
    match (weight, semiring) {
        (Weight::MinusOne, true) => (lhs_prod.rg_add(&p_fg), rhs_core),
        (Weight::MinusOne, false) => (lhs_prod, rhs_core.rg_add(&p_fg.rg_neg())),
        (Weight::Zero, _) => (lhs_prod, rhs_core),
        (Weight::One, _) => (lhs_prod, rhs_core.rg_add(&p_fg)),
    }
}

/// Verifies `P(f)P(g) = P(P(f)g) + P(fP(g)) + w*P(fg)` on seeded random
/// pairs from the operator's domain, exactly through the given order.
pub fn check_rb_identity(op: &RbOperator, samples: u64, order: i64, seed: u64) -> CheckReport {
    let semiring = op.domain.nonneg && op.weight == Weight::MinusOne;
    report_pairs(
        &op.name,
        op.weight,
        samples,
        order,
        seed,
        |rng| op.domain.sample(rng),
        |f, g| rb_sides(|h| op.apply(h), op.weight, semiring, f, g),
    )
}

/// Verifies the twisted identity `P(f)P(g) = P(P(f)g) + P(f*S(P(g)))`.
pub fn check_twisted_rb(
    op: &RbOperator,
    samples: u64,
    order: i64,
    seed: u64,
) -> Result<CheckReport, CheckError> {
    if !op.has_twist() {
        return Err(CheckError::NoTwist(op.name.clone()));
    }
    let name = format!("twisted[{}]", op.name);
    Ok(report_pairs(
        &name,
        op.weight,
        samples,
        order,
        seed,
        |rng| op.domain.sample(rng),
        |f, g| {
            let pf = op.apply(f);
            let pg = op.apply(g);
            let lhs = pf.mul(&pg);
            let s_pg = op.twist_apply(&pg).expect("twist checked above");
            let rhs = op.apply(&pf.mul(g)).add(&op.apply(&f.mul(&s_pg)));
            (lhs, rhs)
        },
    ))
}

/// Verifies additivity `P(f+g) = P(f) + P(g)` on random pairs.
pub fn check_additivity(op: &RbOperator, samples: u64, order: i64, seed: u64) -> CheckReport {
    let name = format!("additivity[{}]", op.name);
    report_pairs(
        &name,
        op.weight,
        samples,
        order,
        seed,
        |rng| op.domain.sample(rng),
        |f, g| (op.apply(&f.add(g)), op.apply(f).add(&op.apply(g))),
    )
}

/// Verifies the matrix-lifted identity with matrix samples.
pub fn check_rb_identity_matrix(
    op: &MatrixOperator,
    samples: u64,
    order: i64,
    seed: u64,
) -> CheckReport {
    let semiring = op.domain.nonneg && op.weight == Weight::MinusOne;
    report_pairs(
        &op.name,
        op.weight,
        samples,
        order,
        seed,
        |rng| op.sample(rng),
        |f, g| rb_sides(|h| op.apply(h), op.weight, semiring, f, g),
    )
}

/// Verifies the iterated weight-0 identity
/// `P^a(f) P^b(g) = sum_{i=1}^{a} C(b-1+a-i, b-1) P^{a+b-i}(P^i(f) g)
///                + sum_{i=1}^{b} C(a-1+b-i, a-1) P^{a+b-i}(f P^i(g))`,
/// where an integer multiple means an iterated sum.
pub fn iterated_identity_check(
    op: &RbOperator,
    a: u32,
    b: u32,
    samples: u64,
    order: i64,
    seed: u64,
) -> Result<CheckReport, CheckError> {
    if a == 0 || b == 0 || a > 4 || b > 4 {
        return Err(CheckError::IterationRange { a, b });
    }
    if op.weight != Weight::Zero {
        return Err(CheckError::NotWeightZero(op.name.clone(), op.weight.lambda()));
    }
    let power = |f: &TruncatedSeries, n: u32| -> TruncatedSeries {
        let mut out = f.clone();
        for _ in 0..n {
            out = op.apply(&out);
        }
        out
    };
    let name = format!("iterated[{}; a={}, b={}]", op.name, a, b);
    Ok(report_pairs(
        &name,
        Weight::Zero,
        samples,
        order,
        seed,
        |rng| op.domain.sample(rng),
        |f, g| {
            let lhs = power(f, a).mul(&power(g, b));
            let mut rhs = TruncatedSeries::zero(f.basis(), lhs.trunc());
            for i in 1..=a {
                let coeff = binom_i64(b - 1 + a - i, b - 1);
                let term = power(&power(f, i).mul(g), a + b - i);
                rhs = rhs.add(&term.scale_int(coeff));
            }
            for i in 1..=b {
                let coeff = binom_i64(a - 1 + b - i, a - 1);
                let term = power(&f.mul(&power(g, i)), a + b - i);
                rhs = rhs.add(&term.scale_int(coeff));
            }
            (lhs, rhs)
        },
    ))
}

fn binom_i64(n: u32, k: u32) -> i64 {
    binomial(n as u64, k as u64)
        .to_i64()
        .expect("small binomial")
}

// ---------------------------------------------------------------------------
// Dimension pairs (a, b) with a <= b: the subobject shadow

/// Componentwise semiring of pairs (a, b) in N^2 with a <= b.
fn pair_mul(x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
    (x.0 * y.0, x.1 * y.1)
}

fn pair_add(x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
    (x.0 + y.0, x.1 + y.1)
}

/// Checks the two pair-projection operators on exhaustive pairs with
/// entries at most `max`.
///
/// Report 1: `P(a, b) = (a, a)` against the subtraction-free weight -1
/// identity; expected to hold.
///
/// Report 2: `P(a, b) = (0, b - a)` against the idempotent-bimonoidal
/// hypothesis it is claimed to satisfy. Additivity and idempotence hold,
/// but multiplicativity `P(xy) = P(x)P(y)` fails; the report carries the
/// first counterexample in lexicographic order.
pub fn pair_semiring_check(max: u64) -> (CheckReport, CheckReport) {
    let pairs: Vec<(u64, u64)> = (0..=max)
        .flat_map(|a| (a..=max).map(move |b| (a, b)))
        .collect();
    let total = (pairs.len() * pairs.len()) as u64;

    let proj = |x: (u64, u64)| (x.0, x.0);
    let mut report1 = CheckReport::holds("pair_projection", Weight::MinusOne, total, 0, 0);
    'outer1: for &x in &pairs {
        for &y in &pairs {
            let lhs = pair_add(pair_mul(proj(x), proj(y)), proj(pair_mul(x, y)));
            let rhs = pair_add(proj(pair_mul(proj(x), y)), proj(pair_mul(x, proj(y))));
            if lhs != rhs {
                report1 = CheckReport::fails(
                    "pair_projection",
                    Weight::MinusOne,
                    total,
                    0,
                    0,
                    Witness {
                        sample: 0,
                        context: "rb_identity".into(),
                        f: json!(x),
                        g: json!(y),
                        index: "pair".into(),
                        lhs: format!("{:?}", lhs),
                        rhs: format!("{:?}", rhs),
                    },
                );
                break 'outer1;
            }
        }
    }

    let quot = |x: (u64, u64)| (0, x.1 - x.0);
    let mut report2 = CheckReport::holds("pair_quotient", Weight::MinusOne, total, 0, 0);
    'outer2: for &x in &pairs {
        for &y in &pairs {
            let fused = quot(pair_mul(x, y));
            let split = pair_mul(quot(x), quot(y));
            if fused != split {
                report2 = CheckReport::fails(
                    "pair_quotient",
                    Weight::MinusOne,
                    total,
                    0,
                    0,
                    Witness {
                        sample: 0,
                        context: "multiplicativity".into(),
                        f: json!(x),
                        g: json!(y),
                        index: "pair".into(),
                        lhs: format!("{:?}", fused),
                        rhs: format!("{:?}", split),
                    },
                );
                break 'outer2;
            }
        }
    }
    (report1, report2)
}

// ---------------------------------------------------------------------------
// Kernel and image closure

/// For an idempotent weight -1 operator: the image must be closed under
/// sums and products, and the kernel must be closed under sums and absorb
/// multiplication from both sides.
pub fn kernel_image_closure_check(
    op: &RbOperator,
    samples: u64,
    order: i64,
    seed: u64,
) -> Result<CheckReport, CheckError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = format!("ker_im_closure[{}]", op.name);

    // Idempotence gate.
    for _ in 0..samples.min(32) {
        let f = op.domain.sample(&mut rng);
        let pf = op.apply(&f);
        if !op.apply(&pf).rg_eq_to_order(&pf, order) {
            return Err(CheckError::NotIdempotent(op.name.clone()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        let s1 = op.domain.sample(&mut rng);
        let s2 = op.domain.sample(&mut rng);
        let im1 = op.apply(&s1);
        let im2 = op.apply(&s2);
        let ker1 = s1.sub(&op.apply(&s1));
        let ker2 = s2.sub(&op.apply(&s2));

        let zero = TruncatedSeries::zero(s1.basis(), s1.trunc());
        let cases: Vec<(&str, TruncatedSeries, TruncatedSeries)> = vec![
            ("im_add", {
                let v = im1.add(&im2);
                op.apply(&v).sub(&v)
            }, zero.clone()),
            ("im_mul", {
                let v = im1.mul(&im2);
                op.apply(&v).sub(&v)
            }, zero.clone()),
            ("ker_add", op.apply(&ker1.add(&ker2)), zero.clone()),
            ("ker_mul", op.apply(&ker1.mul(&ker2)), zero.clone()),
            ("ker_absorb_left", op.apply(&ker1.mul(&s2)), zero.clone()),
            ("ker_absorb_right", op.apply(&s2.mul(&ker1)), zero.clone()),
        ];
        for (ctx, lhs, rhs) in cases {
            if !lhs.rg_eq_to_order(&rhs, order) {
                let (index, l, r) = lhs.rg_first_diff(&rhs, order).unwrap();
                return Ok(CheckReport::fails(
                    &name,
                    op.weight,
                    samples,
                    order,
                    seed,
                    Witness {
                        sample: i,
                        context: ctx.into(),
                        f: s1.to_json(),
                        g: s2.to_json(),
                        index,
                        lhs: l,
                        rhs: r,
                    },
                ));
            }
        }
    }
    Ok(CheckReport::holds(&name, op.weight, samples, order, seed))
}

/// Builds the two-variable shift operator and its geometric sum on series
/// with no x-constant part, then runs the weight -1 identity.
pub fn shift_operator_rb(samples: u64, order: i64, seed: u64) -> Result<CheckReport, CheckError> {
    let x = VarId::intern("x");
    let q = VarId::intern("qvar");
    let domain = SampleSpec::divided(vec![x, q], order).with_min_var_degree(x, 1);
    let endo = two_var_shift_endo(x, q, order);
    let op = geometric_sum_rb(endo, domain, order)?;
    Ok(check_rb_identity(&op, samples, order, seed))
}
