//! Discrete integration on finite posets: pointwise function rings, the
//! strict and weak down-set summation operators, incidence elements, and
//! counterexample searches delimiting when those operators satisfy the
//! Rota-Baxter identities.
//!
//! The strict operator has weight +1 and the weak one weight -1 on every
//! poset whose principal down-sets are chains; on the diamond both fail,
//! and the exhaustive checks document both behaviors.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::coeff::Coefficient;
use crate::rb::{rb_sides, CheckReport, RingOps, Weight, Witness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("relation is not reflexive at {0}")]
    NotReflexive(usize),
    #[error("relation is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("relation is not transitive at ({0}, {1}, {2})")]
    NotTransitive(usize, usize, usize),
    #[error("carrier mismatch: {0} vs {1} elements")]
    CarrierMismatch(usize, usize),
    #[error("element {0} out of range 1..={1}")]
    OutOfRange(usize, usize),
    #[error("incidence entry ({0}, {1}) must be zero unless {0} <= {1}")]
    NotTriangular(usize, usize),
    #[error("invalid poset data: {0}")]
    Invalid(String),
}

/// Finite poset on the carrier 1..=n with a validated order relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePoset {
    n: usize,
    leq: Vec<bool>,
}

impl FinitePoset {
    /// Builds from a full relation matrix (row-major, `leq[i*n+j]`
    /// meaning i+1 <= j+1) and validates the poset axioms.
    pub fn new(n: usize, leq: Vec<bool>) -> Result<Self, PosetError> {
        if leq.len() != n * n {
            return Err(PosetError::Invalid(format!(
                "relation needs {} entries, got {}",
                n * n,
                leq.len()
            )));
        }
        for i in 0..n {
            if !leq[i * n + i] {
                return Err(PosetError::NotReflexive(i + 1));
            }
            for j in 0..n {
                if i != j && leq[i * n + j] && leq[j * n + i] {
                    return Err(PosetError::NotAntisymmetric(i + 1, j + 1));
                }
                for k in 0..n {
                    if leq[i * n + j] && leq[j * n + k] && !leq[i * n + k] {
                        return Err(PosetError::NotTransitive(i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        Ok(FinitePoset { n, leq })
    }

    /// Builds from 1-based cover pairs; the transitive closure is
    /// computed and then validated.
    pub fn from_covers(n: usize, covers: &[(usize, usize)]) -> Result<Self, PosetError> {
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in covers {
            if a == 0 || a > n {
                return Err(PosetError::OutOfRange(a, n));
            }
            if b == 0 || b > n {
                return Err(PosetError::OutOfRange(b, n));
            }
            leq[(a - 1) * n + (b - 1)] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i * n + k] && leq[k * n + j] {
                        leq[i * n + j] = true;
                    }
                }
            }
        }
        Self::new(n, leq)
    }

    pub fn from_json(v: &Value) -> Result<Self, PosetError> {
        let obj = v
            .as_object()
            .ok_or_else(|| PosetError::Invalid("poset JSON must be an object".into()))?;
        let n = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| PosetError::Invalid("missing carrier size n".into()))? as usize;
        let covers_v = obj
            .get("covers")
            .and_then(Value::as_array)
            .ok_or_else(|| PosetError::Invalid("missing covers list".into()))?;
        let mut covers = Vec::new();
        for c in covers_v {
            let pair = c
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| PosetError::Invalid("cover must be [i, j]".into()))?;
            let a = pair[0]
                .as_u64()
                .ok_or_else(|| PosetError::Invalid("bad cover element".into()))?;
            let b = pair[1]
                .as_u64()
                .ok_or_else(|| PosetError::Invalid("bad cover element".into()))?;
            covers.push((a as usize, b as usize));
        }
        Self::from_covers(n, &covers)
    }

    pub fn chain(n: usize) -> Self {
        let covers: Vec<(usize, usize)> = (1..n).map(|i| (i, i + 1)).collect();
        Self::from_covers(n, &covers).expect("chain is a poset")
    }

    pub fn antichain(n: usize) -> Self {
        Self::from_covers(n, &[]).expect("antichain is a poset")
    }

    /// 1 < 2, 3 < 4 with 2 and 3 incomparable.
    pub fn diamond() -> Self {
        Self::from_covers(4, &[(1, 2), (1, 3), (2, 4), (3, 4)]).expect("diamond is a poset")
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// 1-based comparison.
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.leq[(i - 1) * self.n + (j - 1)]
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.le(i, j)
    }

    /// True when every principal down-set is totally ordered.
    pub fn is_locally_chain(&self) -> bool {
        for j in 1..=self.n {
            let below: Vec<usize> = (1..=self.n).filter(|&i| self.le(i, j)).collect();
            for (a_pos, &a) in below.iter().enumerate() {
                for &b in &below[a_pos + 1..] {
                    if !self.le(a, b) && !self.le(b, a) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> Value {
        // Emit the cover relation: i < j with nothing strictly between.
        let mut covers = Vec::new();
        for i in 1..=self.n {
            for j in 1..=self.n {
                if self.lt(i, j)
                    && !(1..=self.n).any(|k| self.lt(i, k) && self.lt(k, j))
                {
                    covers.push(json!([i, j]));
                }
            }
        }
        json!({"n": self.n, "covers": covers})
    }
}

/// Total map from the carrier to exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PosetFunction {
    poset: Arc<FinitePoset>,
    values: Vec<Coefficient>,
}

impl PosetFunction {
    pub fn new(poset: Arc<FinitePoset>, values: Vec<Coefficient>) -> Result<Self, PosetError> {
        if values.len() != poset.size() {
            return Err(PosetError::CarrierMismatch(values.len(), poset.size()));
        }
        Ok(PosetFunction { poset, values })
    }

    pub fn constant(poset: Arc<FinitePoset>, c: Coefficient) -> Self {
        let values = vec![c; poset.size()];
        PosetFunction { poset, values }
    }

    pub fn value(&self, i: usize) -> &Coefficient {
        &self.values[i - 1]
    }

    pub fn poset(&self) -> &Arc<FinitePoset> {
        &self.poset
    }

    fn zip(&self, other: &Self, op: impl Fn(&Coefficient, &Coefficient) -> Coefficient) -> Self {
        assert_eq!(
            self.poset.as_ref(),
            other.poset.as_ref(),
            "poset functions over different posets"
        );
        PosetFunction {
            poset: self.poset.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| op(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> Self {
        PosetFunction {
            poset: self.poset.clone(),
            values: self.values.iter().map(|c| c.neg()).collect(),
        }
    }

    /// Down-set summation: at j, the sum of f over all i < j (strict)
    /// or i <= j (weak).
    pub fn down_sum(&self, strict: bool) -> Self {
        let n = self.poset.size();
        let values = (1..=n)
            .map(|j| {
                let mut acc = Coefficient::zero();
                for i in 1..=n {
                    let related = if strict { self.poset.lt(i, j) } else { self.poset.le(i, j) };
                    if related {
                        acc = acc.add(&self.values[i - 1]);
                    }
                }
                acc
            })
            .collect();
        PosetFunction {
            poset: self.poset.clone(),
            values,
        }
    }
}

impl RingOps for PosetFunction {
    fn rg_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn rg_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn rg_neg(&self) -> Self {
        self.neg()
    }
    fn rg_eq_to_order(&self, other: &Self, _order: i64) -> bool {
        self.values == other.values
    }
    fn rg_first_diff(&self, other: &Self, _order: i64) -> Option<(String, String, String)> {
        self.values
            .iter()
            .zip(&other.values)
            .position(|(a, b)| a != b)
            .map(|i| {
                (
                    (i + 1).to_string(),
                    self.values[i].to_string(),
                    other.values[i].to_string(),
                )
            })
    }
    fn rg_json(&self) -> Value {
        Value::Array(self.values.iter().map(|c| json!(c.to_string())).collect())
    }
}

/// Weight for the down-set operator: +1 strict, -1 weak.
pub fn down_sum_weight(strict: bool) -> Weight {
    if strict {
        Weight::One
    } else {
        Weight::MinusOne
    }
}

/// Runs the Rota-Baxter identity for the chosen down-set operator on
/// seeded random integer-valued functions.
pub fn poset_rb_check(
    poset: &Arc<FinitePoset>,
    strict: bool,
    samples: u64,
    seed: u64,
) -> CheckReport {
    let weight = down_sum_weight(strict);
    let name = format!(
        "poset_{}[n={}]",
        if strict { "strict" } else { "weak" },
        poset.size()
    );
    let poset = poset.clone();
    crate::rb::report_pairs(
        &name,
        weight,
        samples,
        0,
        seed,
        move |rng: &mut ChaCha8Rng| {
            let values = (0..poset.size())
                .map(|_| Coefficient::int(rng.gen_range(-9..=9i64)))
                .collect();
            PosetFunction::new(poset.clone(), values).expect("sampled function")
        },
        |f, g| rb_sides(|h: &PosetFunction| h.down_sum(strict), weight, false, f, g),
    )
}

// ---------------------------------------------------------------------------
// Exhaustive checks over small function spaces (i64 fast path)

fn apply_leq(leq: &[bool], n: usize, f: &[i64], strict: bool, out: &mut [i64]) {
    for j in 0..n {
        let mut acc = 0;
        for i in 0..n {
            if leq[i * n + j] && (!strict || i != j) {
                acc += f[i];
            }
        }
        out[j] = acc;
    }
}

fn decode_base3(mut code: u32, n: usize, out: &mut [i64]) {
    for slot in out.iter_mut().take(n) {
        *slot = (code % 3) as i64;
        code /= 3;
    }
}

/// Exhaustively verifies the identity of the chosen weight over all
/// functions with values in 0..=2 on the given poset. Integer-valued
/// functions with small values stay inside i64 exactly.
pub fn poset_rb_exhaustive(poset: &FinitePoset, strict: bool, name: &str) -> CheckReport {
    let n = poset.size();
    let weight = down_sum_weight(strict);
    let lambda = weight.lambda();
    let space = 3u32.pow(n as u32);
    let leq = &poset.leq;

    // Precompute P(f) for the whole function space.
    let mut pf_table = vec![0i64; (space as usize) * n];
    let mut f = vec![0i64; n];
    for code in 0..space {
        decode_base3(code, n, &mut f);
        let start = code as usize * n;
        apply_leq(leq, n, &f, strict, &mut pf_table[start..start + n]);
    }

    let mut g = vec![0i64; n];
    let mut fg = vec![0i64; n];
    let mut tmp = vec![0i64; n];
    let mut p_fg = vec![0i64; n];
    let mut p_pf_g = vec![0i64; n];
    let mut p_f_pg = vec![0i64; n];
    let total = (space as u64) * (space as u64);
    for fc in 0..space {
        decode_base3(fc, n, &mut f);
        let pf = &pf_table[fc as usize * n..fc as usize * n + n];
        for gc in 0..space {
            decode_base3(gc, n, &mut g);
            let pg = &pf_table[gc as usize * n..gc as usize * n + n];
            for i in 0..n {
                fg[i] = f[i] * g[i];
            }
            apply_leq(leq, n, &fg, strict, &mut p_fg);
            for i in 0..n {
                tmp[i] = pf[i] * g[i];
            }
            apply_leq(leq, n, &tmp, strict, &mut p_pf_g);
            for i in 0..n {
                tmp[i] = f[i] * pg[i];
            }
            apply_leq(leq, n, &tmp, strict, &mut p_f_pg);
            for j in 0..n {
                let lhs = pf[j] * pg[j];
                let rhs = p_pf_g[j] + p_f_pg[j] + lambda * p_fg[j];
                if lhs != rhs {
                    return CheckReport::fails(
                        name,
                        weight,
                        total,
                        0,
                        0,
                        Witness {
                            sample: fc as u64 * space as u64 + gc as u64,
                            context: format!("poset {}", poset.to_json()),
                            f: json!(f),
                            g: json!(g),
                            index: (j + 1).to_string(),
                            lhs: lhs.to_string(),
                            rhs: rhs.to_string(),
                        },
                    );
                }
            }
        }
    }
    CheckReport::holds(name, weight, total, 0, 0)
}

/// Enumerates every poset with at most `max_n` elements whose principal
/// down-sets are chains (one representative per isomorphism class; the
/// identity is isomorphism-invariant) and exhaustively verifies both
/// weights over functions with values in 0..=2.
pub fn locally_chain_exhaustive_check(max_n: usize) -> CheckReport {
    let name = "locally_chain_exhaustive";
    let mut total = 0u64;
    for n in 1..=max_n {
        let mut seen = BTreeSet::new();
        for parents in enumerate_parent_maps(n) {
            if !seen.insert(forest_code(&parents)) {
                continue;
            }
            let poset = poset_from_parents(&parents);
            debug_assert!(poset.is_locally_chain());
            for strict in [false, true] {
                let report = poset_rb_exhaustive(&poset, strict, name);
                total += report.samples;
                if !report.holds_exactly() {
                    return CheckReport {
                        samples: total,
                        ..report
                    };
                }
            }
        }
    }
    CheckReport::holds(name, Weight::MinusOne, total, 0, 0)
}

/// All acyclic parent maps on n elements; parent[i] = Some(j) makes the
/// element i+1 cover exactly the element j+1.
pub(crate) fn enumerate_parent_maps(n: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = Vec::new();
    let mut current: Vec<Option<usize>> = vec![None; n];
    fn go(n: usize, idx: usize, current: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if idx == n {
            // Acyclicity: walking parents from any node must terminate.
            for start in 0..n {
                let mut steps = 0;
                let mut at = start;
                while let Some(p) = current[at] {
                    at = p;
                    steps += 1;
                    if steps > n {
                        return;
                    }
                }
            }
            out.push(current.clone());
            return;
        }
        for choice in std::iter::once(None).chain((0..n).filter(|&j| j != idx).map(Some)) {
            current[idx] = choice;
            go(n, idx + 1, current, out);
        }
        current[idx] = None;
    }
    go(n, 0, &mut current, &mut out);
    out
}

fn poset_from_parents(parents: &[Option<usize>]) -> FinitePoset {
    let n = parents.len();
    let mut leq = vec![false; n * n];
    for j in 0..n {
        leq[j * n + j] = true;
        let mut at = j;
        while let Some(p) = parents[at] {
            leq[p * n + j] = true;
            at = p;
        }
    }
    FinitePoset::new(n, leq).expect("parent map gives a poset")
}

/// Canonical code of the forest underlying a parent map, invariant under
/// relabeling.
fn forest_code(parents: &[Option<usize>]) -> String {
    let n = parents.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for (i, p) in parents.iter().enumerate() {
        match p {
            Some(j) => children[*j].push(i),
            None => roots.push(i),
        }
    }
    fn code(node: usize, children: &[Vec<usize>]) -> String {
        let mut subs: Vec<String> = children[node].iter().map(|&c| code(c, children)).collect();
        subs.sort();
        format!("({})", subs.join(""))
    }
    let mut root_codes: Vec<String> = roots.iter().map(|&r| code(r, &children)).collect();
    root_codes.sort();
    root_codes.join("")
}

// ---------------------------------------------------------------------------
// Incidence elements

/// Coefficient matrix supported on order-compatible pairs: A(i, j) = 0
/// unless i <= j.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceElement {
    poset: Arc<FinitePoset>,
    entries: Vec<Coefficient>,
}

impl IncidenceElement {
    pub fn new(
        poset: Arc<FinitePoset>,
        entries: Vec<Coefficient>,
    ) -> Result<Self, PosetError> {
        let n = poset.size();
        if entries.len() != n * n {
            return Err(PosetError::CarrierMismatch(entries.len(), n * n));
        }
        for i in 1..=n {
            for j in 1..=n {
                if !poset.le(i, j) && !entries[(i - 1) * n + (j - 1)].is_zero() {
                    return Err(PosetError::NotTriangular(i, j));
                }
            }
        }
        Ok(IncidenceElement { poset, entries })
    }

    /// The all-ones element on comparable pairs.
    pub fn zeta(poset: Arc<FinitePoset>) -> Self {
        let n = poset.size();
        let entries = (1..=n)
            .flat_map(|i| {
                let poset = poset.clone();
                (1..=n).map(move |j| {
                    if poset.le(i, j) {
                        Coefficient::one()
                    } else {
                        Coefficient::zero()
                    }
                })
            })
            .collect();
        IncidenceElement { poset, entries }
    }

    /// Ones on strictly comparable pairs.
    pub fn zeta_strict(poset: Arc<FinitePoset>) -> Self {
        let n = poset.size();
        let entries = (1..=n)
            .flat_map(|i| {
                let poset = poset.clone();
                (1..=n).map(move |j| {
                    if poset.lt(i, j) {
                        Coefficient::one()
                    } else {
                        Coefficient::zero()
                    }
                })
            })
            .collect();
        IncidenceElement { poset, entries }
    }

    /// The identity element.
    pub fn delta(poset: Arc<FinitePoset>) -> Self {
        let n = poset.size();
        let entries = (1..=n)
            .flat_map(|i| {
                (1..=n).map(move |j| if i == j { Coefficient::one() } else { Coefficient::zero() })
            })
            .collect();
        IncidenceElement { poset, entries }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Coefficient {
        &self.entries[(i - 1) * self.poset.size() + (j - 1)]
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.poset.as_ref(), other.poset.as_ref());
        IncidenceElement {
            poset: self.poset.clone(),
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        IncidenceElement {
            poset: self.poset.clone(),
            entries: self.entries.iter().map(|c| c.neg()).collect(),
        }
    }

    /// Interval convolution `(AB)(i, k) = sum over i <= j <= k`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.poset.as_ref(), other.poset.as_ref());
        let n = self.poset.size();
        let mut entries = vec![Coefficient::zero(); n * n];
        for i in 1..=n {
            for k in 1..=n {
                if !self.poset.le(i, k) {
                    continue;
                }
                let mut acc = Coefficient::zero();
                for j in 1..=n {
                    if self.poset.le(i, j) && self.poset.le(j, k) {
                        acc = acc.add(&self.entry(i, j).mul(other.entry(j, k)));
                    }
                }
                entries[(i - 1) * n + (k - 1)] = acc;
            }
        }
        IncidenceElement {
            poset: self.poset.clone(),
            entries,
        }
    }

    /// The kernel operator `f -> (j -> sum_{i <= j} A(i, j) f(i))`.
    pub fn apply(&self, f: &PosetFunction) -> PosetFunction {
        assert_eq!(self.poset.as_ref(), f.poset.as_ref());
        let n = self.poset.size();
        let values = (1..=n)
            .map(|j| {
                let mut acc = Coefficient::zero();
                for i in 1..=n {
                    if self.poset.le(i, j) {
                        acc = acc.add(&self.entry(i, j).mul(f.value(i)));
                    }
                }
                acc
            })
            .collect();
        PosetFunction {
            poset: self.poset.clone(),
            values,
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .map(|c| json!(c.to_string()))
                .collect(),
        )
    }
}

/// Searches random incidence elements with small nonnegative entries for
/// one whose kernel operator fails the identity at both weights on
/// exhaustive 0/1-valued functions. The canonical elements zeta and
/// strict zeta are skipped up front. Finding a counterexample is the
/// expected outcome, reported as a failing verdict with the witness.
pub fn incidence_rb_counterexample(
    poset: &Arc<FinitePoset>,
    trials: u64,
    seed: u64,
) -> CheckReport {
    let name = format!("incidence_kernel[n={}]", poset.size());
    let n = poset.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeta = IncidenceElement::zeta(poset.clone());
    let zeta_strict = IncidenceElement::zeta_strict(poset.clone());

    // 0/1-valued functions on the carrier.
    let functions: Vec<PosetFunction> = (0..(1u32 << n))
        .map(|mask| {
            let values = (0..n)
                .map(|i| Coefficient::int(((mask >> i) & 1) as i64))
                .collect();
            PosetFunction::new(poset.clone(), values).expect("function")
        })
        .collect();

    for trial in 0..trials {
        let entries: Vec<Coefficient> = (1..=n)
            .flat_map(|i| {
                let poset = poset.clone();
                let rng = &mut rng;
                (1..=n)
                    .map(move |j| {
                        if poset.le(i, j) {
                            Coefficient::int(rng.gen_range(0..=3i64))
                        } else {
                            Coefficient::zero()
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let a = IncidenceElement::new(poset.clone(), entries).expect("triangular by construction");
        if a == zeta || a == zeta_strict {
            continue;
        }
        let mut found: Option<Witness> = None;
        let mut fails_both = true;
        for weight in [Weight::MinusOne, Weight::One] {
            let mut fail_here = None;
            'pairs: for f in &functions {
                for g in &functions {
                    let (lhs, rhs) =
                        rb_sides(|h: &PosetFunction| a.apply(h), weight, false, f, g);
                    if !lhs.rg_eq_to_order(&rhs, 0) {
                        let (index, l, r) = lhs.rg_first_diff(&rhs, 0).unwrap();
                        fail_here = Some(Witness {
                            sample: trial,
                            context: format!(
                                "A = {}, weight {}",
                                a.to_json(),
                                weight.lambda()
                            ),
                            f: f.rg_json(),
                            g: g.rg_json(),
                            index,
                            lhs: l,
                            rhs: r,
                        });
                        break 'pairs;
                    }
                }
            }
            match fail_here {
                Some(w) => found = Some(w),
                None => {
                    fails_both = false;
                    break;
                }
            }
        }
        if fails_both {
            let w = found.expect("witness recorded");
            return CheckReport::fails(&name, Weight::MinusOne, trial + 1, 0, seed, w);
        }
    }
    CheckReport::holds(&name, Weight::MinusOne, trials, 0, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_fn(poset: &Arc<FinitePoset>, vals: &[i64]) -> PosetFunction {
        PosetFunction::new(
            poset.clone(),
            vals.iter().map(|&v| Coefficient::int(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn poset_validation() {
        // Missing reflexivity.
        assert!(matches!(
            FinitePoset::new(1, vec![false]),
            Err(PosetError::NotReflexive(1))
        ));
        // 2-cycles are rejected after closure.
        assert!(FinitePoset::from_covers(2, &[(1, 2), (2, 1)]).is_err());
        let chain = FinitePoset::chain(3);
        assert!(chain.le(1, 3));
        assert!(!chain.le(3, 1));
        assert!(chain.is_locally_chain());
        assert!(!FinitePoset::diamond().is_locally_chain());
        assert!(FinitePoset::antichain(3).is_locally_chain());
    }

    #[test]
    fn poset_json_roundtrip() {
        let d = FinitePoset::diamond();
        let v = d.to_json();
        assert_eq!(FinitePoset::from_json(&v).unwrap(), d);
    }

    #[test]
    fn down_sums_on_chain() {
        let poset = Arc::new(FinitePoset::chain(3));
        let one = int_fn(&poset, &[1, 1, 1]);
        let strict = one.down_sum(true);
        let weak = one.down_sum(false);
        assert_eq!(strict.value(1), &Coefficient::int(0));
        assert_eq!(strict.value(2), &Coefficient::int(1));
        assert_eq!(strict.value(3), &Coefficient::int(2));
        assert_eq!(weak.value(1), &Coefficient::int(1));
        assert_eq!(weak.value(2), &Coefficient::int(2));
        assert_eq!(weak.value(3), &Coefficient::int(3));
        // weak - strict = f
        let diff = weak.add(&strict.neg());
        assert_eq!(diff, one);
        // strict sums vanish on an antichain
        let anti = Arc::new(FinitePoset::antichain(3));
        let f = int_fn(&anti, &[2, 5, -1]);
        let p = f.down_sum(true);
        assert!(p.values.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn pointwise_ring_units() {
        let poset = Arc::new(FinitePoset::chain(4));
        let f = int_fn(&poset, &[3, -2, 0, 7]);
        let one = PosetFunction::constant(poset.clone(), Coefficient::one());
        assert_eq!(f.mul(&one), f);
        let g = int_fn(&poset, &[1, 1, 2, 2]);
        assert_eq!(f.add(&g).value(2), &Coefficient::int(-1));
    }

    #[test]
    fn pointwise_ring_axioms_random() {
        let poset = Arc::new(FinitePoset::diamond());
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let mut rand_fn = || {
                let values = (0..poset.size())
                    .map(|_| Coefficient::int(rng.gen_range(-9..=9i64)))
                    .collect();
                PosetFunction::new(poset.clone(), values).unwrap()
            };
            let f = rand_fn();
            let g = rand_fn();
            let h = rand_fn();
            assert_eq!(f.mul(&g), g.mul(&f));
            assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
            assert_eq!(f.mul(&g.add(&h)), f.mul(&g).add(&f.mul(&h)));
            assert_eq!(f.add(&g), g.add(&f));
        }
    }

    #[test]
    fn chain_and_forest_hold_random() {
        for poset in [FinitePoset::chain(5), FinitePoset::from_covers(5, &[(1, 2), (1, 3), (3, 4)]).unwrap()] {
            let poset = Arc::new(poset);
            for strict in [false, true] {
                let report = poset_rb_check(&poset, strict, 80, 99);
                assert!(report.holds_exactly(), "witness: {:?}", report.witness);
            }
        }
    }

    #[test]
    fn diamond_fails_both_weights() {
        let diamond = FinitePoset::diamond();
        for strict in [false, true] {
            let report = poset_rb_exhaustive(&diamond, strict, "diamond");
            assert!(!report.holds_exactly());
        }
        // Frozen witness: f = g = indicator of the middle layer, weak sums.
        let poset = Arc::new(FinitePoset::diamond());
        let f = int_fn(&poset, &[0, 1, 1, 0]);
        let (lhs, rhs) = rb_sides(
            |h: &PosetFunction| h.down_sum(false),
            Weight::MinusOne,
            false,
            &f,
            &f,
        );
        assert_eq!(lhs.value(4), &Coefficient::int(4));
        assert_eq!(rhs.value(4), &Coefficient::int(2));
    }

    #[test]
    fn parent_map_enumeration_counts() {
        // Acyclic parent maps are counted by (n+1)^(n-1).
        assert_eq!(enumerate_parent_maps(2).len(), 3);
        assert_eq!(enumerate_parent_maps(3).len(), 16);
        assert_eq!(enumerate_parent_maps(4).len(), 125);
        assert_eq!(enumerate_parent_maps(5).len(), 1296);
    }

    #[test]
    fn locally_chain_exhaustive_small() {
        let report = locally_chain_exhaustive_check(4);
        assert!(report.holds_exactly(), "witness: {:?}", report.witness);
    }

    #[test]
    fn incidence_interval_counts() {
        let poset = Arc::new(FinitePoset::chain(3));
        let zeta = IncidenceElement::zeta(poset.clone());
        let sq = zeta.mul(&zeta);
        // (zeta^2)(i, k) counts the interval cardinality.
        assert_eq!(sq.entry(1, 3), &Coefficient::int(3));
        assert_eq!(sq.entry(1, 2), &Coefficient::int(2));
        assert_eq!(sq.entry(2, 2), &Coefficient::int(1));
        // delta is the unit.
        let delta = IncidenceElement::delta(poset.clone());
        assert_eq!(delta.mul(&zeta), zeta);
        assert_eq!(zeta.mul(&delta), zeta);
        // strict zeta = zeta - delta
        assert_eq!(zeta.add(&delta.neg()), IncidenceElement::zeta_strict(poset.clone()));
    }

    #[test]
    fn incidence_kernels_recover_down_sums() {
        let poset = Arc::new(FinitePoset::from_covers(4, &[(1, 2), (2, 3), (1, 4)]).unwrap());
        let f = int_fn(&poset, &[1, -3, 2, 5]);
        let zeta = IncidenceElement::zeta(poset.clone());
        assert_eq!(zeta.apply(&f), f.down_sum(false));
        let strict = IncidenceElement::zeta_strict(poset.clone());
        assert_eq!(strict.apply(&f), f.down_sum(true));
    }

    #[test]
    fn incidence_mul_associative() {
        let poset = Arc::new(FinitePoset::diamond());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut rand_elt = || {
                let n = poset.size();
                let entries = (1..=n)
                    .flat_map(|i| {
                        let poset = poset.clone();
                        let rng = &mut rng;
                        (1..=n)
                            .map(move |j| {
                                if poset.le(i, j) {
                                    Coefficient::int(rng.gen_range(-4..=4i64))
                                } else {
                                    Coefficient::zero()
                                }
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect();
                IncidenceElement::new(poset.clone(), entries).unwrap()
            };
            let a = rand_elt();
            let b = rand_elt();
            let c = rand_elt();
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }
    }

    #[test]
    fn incidence_counterexample_found_quickly() {
        let poset = Arc::new(FinitePoset::chain(2));
        let report = incidence_rb_counterexample(&poset, 100, 7);
        assert!(!report.holds_exactly(), "expected a counterexample");
        assert!(report.samples <= 100);
    }

    #[test]
    fn triangularity_enforced() {
        let poset = Arc::new(FinitePoset::chain(2));
        let bad = vec![
            Coefficient::one(),
            Coefficient::zero(),
            Coefficient::one(), // entry (2, 1) violates 2 <= 1
            Coefficient::one(),
        ];
        assert!(matches!(
            IncidenceElement::new(poset, bad),
            Err(PosetError::NotTriangular(2, 1))
        ));
    }
}
