//! Explicit combinatorial models: integer-graded finite sets and linear
//! species given by enumerated structure tokens, with valuation maps into
//! series rings and checkable bijection witnesses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use serde_json::{json, Value};
use thiserror::Error;

use crate::coeff::Coefficient;
use crate::rb::{CheckReport, Weight, Witness};
use crate::series::{Index, MultiIndex, TruncatedSeries, VarId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpeciesError {
    #[error("species must vanish on the empty set for this construction: {0}")]
    NotAdmissible(String),
    #[error("bijection witness failed at size {size} on {structure}: {detail}")]
    WitnessFailure {
        size: u32,
        structure: String,
        detail: String,
    },
    #[error("invalid species description: {0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// Integer-graded finite sets

/// A finite set whose elements carry integer grades; only the grade
/// multiset matters for sums, products and valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSet {
    grades: Vec<i64>,
}

impl GradedSet {
    pub fn new(mut grades: Vec<i64>) -> Self {
        grades.sort_unstable();
        GradedSet { grades }
    }

    pub fn size(&self) -> usize {
        self.grades.len()
    }

    pub fn grades(&self) -> &[i64] {
        &self.grades
    }

    /// Cartesian product; grades add.
    pub fn product(&self, other: &Self) -> Self {
        let mut grades = Vec::with_capacity(self.size() * other.size());
        for &a in &self.grades {
            for &b in &other.grades {
                grades.push(a + b);
            }
        }
        GradedSet::new(grades)
    }

    /// Restriction to strictly negative grades.
    pub fn negative_part(&self) -> Self {
        GradedSet::new(self.grades.iter().copied().filter(|&g| g < 0).collect())
    }

    /// Laurent series counting elements per grade; exact.
    pub fn valuation(&self) -> TruncatedSeries {
        let mut counts: BTreeMap<i64, i64> = BTreeMap::new();
        for &g in &self.grades {
            *counts.entry(g).or_insert(0) += 1;
        }
        TruncatedSeries::laurent_exact(counts.into_iter().map(|(g, c)| (g, Coefficient::int(c))))
    }

    fn grade_counts(&self) -> BTreeMap<i64, u64> {
        let mut counts = BTreeMap::new();
        for &g in &self.grades {
            *counts.entry(g).or_insert(0) += 1;
        }
        counts
    }
}

fn union_counts(a: BTreeMap<i64, u64>, b: BTreeMap<i64, u64>) -> BTreeMap<i64, u64> {
    let mut out = a;
    for (g, c) in b {
        *out.entry(g).or_insert(0) += c;
    }
    out
}

/// Exhaustive grade-multiset check of the subtraction-free weight -1
/// identity for the negative-grade restriction, over all graded sets
/// with at most `max_size` elements and grades in `lo..=hi` (up to
/// grade-multiset equivalence, which the identity only depends on).
pub fn gradedset_rb_exhaustive(max_size: usize, lo: i64, hi: i64) -> CheckReport {
    let sets: Vec<GradedSet>;
    fn extend(current: &mut Vec<i64>, min: i64, hi: i64, left: usize, out: &mut Vec<GradedSet>) {
        out.push(GradedSet::new(current.clone()));
        if left == 0 {
            return;
        }
        for g in min..=hi {
            current.push(g);
            extend(current, g, hi, left - 1, out);
            current.pop();
        }
    }
    // Build each multiset once by enumerating nondecreasing grade vectors.
    {
        let mut current = Vec::new();
        let mut all = Vec::new();
        extend(&mut current, lo, hi, max_size, &mut all);
        all.dedup();
        sets = all;
    }

    let total = (sets.len() * sets.len()) as u64;
    let name = "gradedset_negative_restriction";
    for (i, a) in sets.iter().enumerate() {
        for b in &sets {
            let pa = a.negative_part();
            let pb = b.negative_part();
            let ab = a.product(b);
            let lhs = union_counts(
                pa.product(&pb).grade_counts(),
                ab.negative_part().grade_counts(),
            );
            let rhs = union_counts(
                pa.product(b).negative_part().grade_counts(),
                a.product(&pb).negative_part().grade_counts(),
            );
            if lhs != rhs {
                let bad = lhs
                    .keys()
                    .chain(rhs.keys())
                    .find(|g| lhs.get(g) != rhs.get(g))
                    .copied()
                    .unwrap();
                return CheckReport::fails(
                    name,
                    Weight::MinusOne,
                    total,
                    hi,
                    0,
                    Witness {
                        sample: i as u64,
                        context: "graded multiset".into(),
                        f: json!(a.grades()),
                        g: json!(b.grades()),
                        index: bad.to_string(),
                        lhs: format!("{:?}", lhs.get(&bad)),
                        rhs: format!("{:?}", rhs.get(&bad)),
                    },
                );
            }
        }
    }
    CheckReport::holds(name, Weight::MinusOne, total, hi, 0)
}

// ---------------------------------------------------------------------------
// Linear species

/// A linear species up to a size bound: for each n <= bound, the finite
/// set of structures on the canonical ordered set [n], encoded as
/// canonical tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSpecies {
    bound: u32,
    structures: Vec<BTreeSet<String>>,
}

pub(crate) fn tok_sum_left(t: &str) -> String {
    format!("l({})", t)
}

pub(crate) fn tok_sum_right(t: &str) -> String {
    format!("r({})", t)
}

pub(crate) fn set_str(x1: &[u32]) -> String {
    let parts: Vec<String> = x1.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

pub(crate) fn tok_prod(x1: &[u32], f: &str, g: &str) -> String {
    format!("({};{};{})", set_str(x1), f, g)
}


/// All subsets of [1..=n] in mask order, each sorted ascending.
pub(crate) fn subsets_of(n: u32) -> Vec<Vec<u32>> {
    (0u32..(1 << n))
        .map(|mask| (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect())
        .collect()
}

impl LinearSpecies {
    fn empty_shell(bound: u32) -> Self {
        LinearSpecies {
            bound,
            structures: vec![BTreeSet::new(); bound as usize + 1],
        }
    }

    pub fn zero(bound: u32) -> Self {
        Self::empty_shell(bound)
    }

    /// The multiplicative unit: a single structure on the empty set.
    pub fn one(bound: u32) -> Self {
        let mut s = Self::empty_shell(bound);
        s.insert(0, "1".into());
        s
    }

    /// Exactly one structure on every finite set.
    pub fn e(bound: u32) -> Self {
        let mut s = Self::empty_shell(bound);
        for n in 0..=bound {
            s.insert(n, "E".into());
        }
        s
    }

    /// A single structure on singletons only.
    pub fn x(bound: u32) -> Self {
        let mut s = Self::empty_shell(bound);
        if bound >= 1 {
            s.insert(1, "X".into());
        }
        s
    }

    /// Linear orders: n! structures on [n].
    pub fn l(bound: u32) -> Self {
        let mut s = Self::empty_shell(bound);
        for n in 0..=bound {
            let mut perm: Vec<u32> = (1..=n).collect();
            permutations(&mut perm, 0, &mut |p| {
                let body: Vec<String> = p.iter().map(|i| i.to_string()).collect();
                s.insert(n, format!("L({})", body.join(",")));
            });
        }
        s
    }

    pub(crate) fn insert(&mut self, n: u32, token: String) {
        let fresh = self.structures[n as usize].insert(token);
        debug_assert!(fresh, "structure tokens must be unique per size");
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn structures_at(&self, n: u32) -> &BTreeSet<String> {
        &self.structures[n as usize]
    }

    pub fn count(&self, n: u32) -> u64 {
        self.structures[n as usize].len() as u64
    }

    pub fn vanishes_at_empty(&self) -> bool {
        self.structures[0].is_empty()
    }

    pub fn sum(&self, other: &Self) -> Self {
        let bound = self.bound.min(other.bound);
        let mut out = Self::empty_shell(bound);
        for n in 0..=bound {
            for t in self.structures_at(n) {
                out.insert(n, tok_sum_left(t));
            }
            for t in other.structures_at(n) {
                out.insert(n, tok_sum_right(t));
            }
        }
        out
    }

    /// Structures on [n] are triples: an ordered split of [n] and a
    /// structure of each factor on the canonically relabeled parts.
    pub fn product(&self, other: &Self) -> Self {
        let bound = self.bound.min(other.bound);
        let mut out = Self::empty_shell(bound);
        for n in 0..=bound {
            for x1 in subsets_of(n) {
                let k = x1.len() as u32;
                for f in self.structures_at(k) {
                    for g in other.structures_at(n - k) {
                        out.insert(n, tok_prod(&x1, f, g));
                    }
                }
            }
        }
        out
    }

    /// Removes the maximal element: structures on [n] are the structures
    /// on [n-1], with nothing on the empty set. The valuation of the
    /// result is the integral of the valuation.
    pub fn integral(&self) -> Self {
        let mut out = Self::empty_shell(self.bound);
        for n in 1..=self.bound {
            for t in self.structures_at(n - 1) {
                out.insert(n, t.clone());
            }
        }
        out
    }

    /// Restriction to nonempty underlying sets.
    pub fn positive_part(&self) -> Self {
        let mut out = self.clone();
        out.structures[0].clear();
        out
    }

    /// Exponential generating function on the divided-power basis.
    pub fn valuation(&self, var: VarId) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(
            crate::series::Basis::DividedPower,
            crate::series::Truncation::degree(self.bound as i64),
        );
        for n in 0..=self.bound {
            let c = Coefficient::Int(BigInt::from(self.count(n)));
            let idx = if n == 0 {
                MultiIndex::empty()
            } else {
                MultiIndex::from_pairs([(var, n)])
            };
            out.add_term(Index::Multi(idx), c);
        }
        out
    }

    /// Builds a species from a small JSON vocabulary: the strings
    /// "zero", "one", "E", "X", "L", or objects
    /// `{"sum": [..]}`, `{"prod": [..]}`, `{"P": ..}`, `{"pos": ..}`.
    pub fn from_json(v: &Value, bound: u32) -> Result<Self, SpeciesError> {
        match v {
            Value::String(name) => match name.as_str() {
                "zero" => Ok(Self::zero(bound)),
                "one" => Ok(Self::one(bound)),
                "E" => Ok(Self::e(bound)),
                "X" => Ok(Self::x(bound)),
                "L" => Ok(Self::l(bound)),
                other => Err(SpeciesError::Invalid(format!("unknown generator {:?}", other))),
            },
            Value::Object(obj) => {
                let key = |names: [&str; 2]| {
                    names.iter().find_map(|n| obj.get(*n))
                };
                if let Some(args) = key(["sum", "+"]).and_then(Value::as_array) {
                    let mut acc = Self::zero(bound);
                    for a in args {
                        acc = acc.sum(&Self::from_json(a, bound)?);
                    }
                    Ok(acc)
                } else if let Some(args) = key(["prod", "*"]).and_then(Value::as_array) {
                    let mut acc: Option<Self> = None;
                    for a in args {
                        let next = Self::from_json(a, bound)?;
                        acc = Some(match acc {
                            None => next,
                            Some(s) => s.product(&next),
                        });
                    }
                    Ok(acc.unwrap_or_else(|| Self::one(bound)))
                } else if let Some(a) = obj.get("P") {
                    Ok(Self::from_json(a, bound)?.integral())
                } else if let Some(a) = obj.get("pos") {
                    Ok(Self::from_json(a, bound)?.positive_part())
                } else {
                    Err(SpeciesError::Invalid("unknown species operator".into()))
                }
            }
            _ => Err(SpeciesError::Invalid("species must be a string or object".into())),
        }
    }
}

fn permutations(items: &mut Vec<u32>, k: usize, visit: &mut impl FnMut(&[u32])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

impl fmt::Display for LinearSpecies {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let counts: Vec<String> = (0..=self.bound).map(|n| self.count(n).to_string()).collect();
        write!(f, "[{}]", counts.join(", "))
    }
}

// ---------------------------------------------------------------------------
// Bijection witness for the weight-0 identity

/// An explicit, validated bijection between structure sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BijectionWitness {
    pub size: u32,
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub map: Vec<(String, String)>,
}

/// Constructs and validates the max-location bijection between the
/// structures of P(F)P(G) on [n] and those of P(P(F)G) + P(FP(G)),
/// where P removes the maximal element. A left structure with split
/// (x1, x2) goes to the first component when the maximum lies in x2
/// and to the second when it lies in x1.
pub fn weight0_bijection_witness(
    f: &LinearSpecies,
    g: &LinearSpecies,
    n: u32,
) -> Result<BijectionWitness, SpeciesError> {
    if !f.vanishes_at_empty() {
        return Err(SpeciesError::NotAdmissible("left species".into()));
    }
    if !g.vanishes_at_empty() {
        return Err(SpeciesError::NotAdmissible("right species".into()));
    }
    let pf = f.integral();
    let pg = g.integral();
    let left_set = pf.product(&pg);
    let right_a = pf.product(g).integral();
    let right_b = f.product(&pg).integral();

    let mut map: Vec<(String, String)> = Vec::new();
    // Enumerate left structures with their decomposition data.
    for x1 in subsets_of(n) {
        let k = x1.len() as u32;
        let x2: Vec<u32> = (1..=n).filter(|i| !x1.contains(i)).collect();
        if k == 0 || x2.is_empty() {
            continue; // P-images vanish on the empty part
        }
        for ftok in f.structures_at(k - 1) {
            for gtok in g.structures_at(n - k - 1) {
                let left = tok_prod(&x1, ftok, gtok);
                let target = if x2.contains(&n) {
                    format!("A:{}", tok_prod(&x1, ftok, gtok))
                } else {
                    let y1: Vec<u32> = x1.iter().copied().filter(|&i| i != n).collect();
                    format!("B:{}", tok_prod(&y1, ftok, gtok))
                };
                map.push((left, target));
            }
        }
    }

    let left: Vec<String> = left_set.structures_at(n).iter().cloned().collect();
    let mut right: Vec<String> = right_a
        .structures_at(n)
        .iter()
        .map(|t| format!("A:{}", t))
        .chain(right_b.structures_at(n).iter().map(|t| format!("B:{}", t)))
        .collect();
    right.sort();

    validate_bijection(n, &left, &right, &map)?;
    Ok(BijectionWitness {
        size: n,
        left,
        right,
        map,
    })
}

pub(crate) fn validate_bijection(
    n: u32,
    left: &[String],
    right: &[String],
    map: &[(String, String)],
) -> Result<(), SpeciesError> {
    let left_set: BTreeSet<&String> = left.iter().collect();
    let right_set: BTreeSet<&String> = right.iter().collect();
    let mut seen_left: BTreeSet<&String> = BTreeSet::new();
    let mut seen_right: BTreeSet<&String> = BTreeSet::new();
    for (l, r) in map {
        if !left_set.contains(l) {
            return Err(SpeciesError::WitnessFailure {
                size: n,
                structure: l.clone(),
                detail: "mapped structure is not a left structure".into(),
            });
        }
        if !right_set.contains(r) {
            return Err(SpeciesError::WitnessFailure {
                size: n,
                structure: r.clone(),
                detail: "target is not a right structure".into(),
            });
        }
        if !seen_left.insert(l) {
            return Err(SpeciesError::WitnessFailure {
                size: n,
                structure: l.clone(),
                detail: "left structure mapped twice".into(),
            });
        }
        if !seen_right.insert(r) {
            return Err(SpeciesError::WitnessFailure {
                size: n,
                structure: r.clone(),
                detail: "map is not injective".into(),
            });
        }
    }
    if seen_left.len() != left.len() {
        let missing = left.iter().find(|t| !seen_left.contains(t)).unwrap();
        return Err(SpeciesError::WitnessFailure {
            size: n,
            structure: missing.clone(),
            detail: "map is not total".into(),
        });
    }
    if seen_right.len() != right.len() {
        let missing = right.iter().find(|t| !seen_right.contains(t)).unwrap();
        return Err(SpeciesError::WitnessFailure {
            size: n,
            structure: missing.clone(),
            detail: "map is not surjective".into(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rb::integrate;
    use crate::series::Basis;

    #[test]
    fn gradedset_product_and_negative_part() {
        let a = GradedSet::new(vec![-1]);
        let b = GradedSet::new(vec![2]);
        assert_eq!(a.product(&b).grades(), &[1]);
        let empty = GradedSet::new(vec![]);
        assert_eq!(a.product(&empty).size(), 0);
        let c = GradedSet::new(vec![-1, 0]);
        let d = GradedSet::new(vec![1]);
        assert_eq!(c.product(&d).grades(), &[0, 1]);
        let e = GradedSet::new(vec![-2, -1, 0, 3]);
        assert_eq!(e.negative_part().grades(), &[-2, -1]);
        assert_eq!(GradedSet::new(vec![0, 1]).negative_part().size(), 0);
    }

    #[test]
    fn gradedset_valuation_counts() {
        let a = GradedSet::new(vec![-1, -1, 2]);
        let v = a.valuation();
        assert_eq!(v.coeff(&Index::Degree(-1)), Coefficient::int(2));
        assert_eq!(v.coeff(&Index::Degree(2)), Coefficient::int(1));
        assert!(GradedSet::new(vec![]).valuation().is_zero());
    }

    #[test]
    fn gradedset_valuation_multiplicative() {
        let a = GradedSet::new(vec![-2, 0, 1]);
        let b = GradedSet::new(vec![-1, -1, 3]);
        let lhs = a.product(&b).valuation();
        let rhs = a.valuation().mul(&b.valuation());
        assert!(lhs.eq_to_order(&rhs, 10).unwrap());
    }

    #[test]
    fn gradedset_rb_small_exhaustive() {
        let report = gradedset_rb_exhaustive(3, -2, 2);
        assert!(report.holds_exactly(), "witness: {:?}", report.witness);
    }

    #[test]
    fn species_counts() {
        let e = LinearSpecies::e(4);
        let ee = e.product(&e);
        // 2^n splits, one structure each.
        assert_eq!(ee.count(2), 4);
        let l = LinearSpecies::l(4);
        assert_eq!(l.count(3), 6);
        let x = LinearSpecies::x(4);
        assert_eq!(x.count(1), 1);
        assert_eq!(x.count(2), 0);
    }

    #[test]
    fn product_with_vanishing_factor_vanishes_at_zero() {
        let f = LinearSpecies::e(4).positive_part();
        let g = LinearSpecies::l(4);
        assert_eq!(f.product(&g).count(0), 0);
    }

    #[test]
    fn integral_counts_shift() {
        let e = LinearSpecies::e(5);
        let p = e.integral();
        assert_eq!(p.count(0), 0);
        for n in 1..=5 {
            assert_eq!(p.count(n), e.count(n - 1));
        }
        assert!(LinearSpecies::zero(3).integral().structures_at(2).is_empty());
    }

    #[test]
    fn valuation_homomorphism() {
        let var = VarId::intern("x");
        let f = LinearSpecies::l(6);
        let g = LinearSpecies::e(6).sum(&LinearSpecies::x(6));
        // |F+G| = |F| + |G|
        let lhs = f.sum(&g).valuation(var);
        let rhs = f.valuation(var).add(&g.valuation(var));
        assert!(lhs.eq_to_order(&rhs, 6).unwrap());
        // |FG| = |F||G|
        let lhs = f.product(&g).valuation(var);
        let rhs = f.valuation(var).mul(&g.valuation(var));
        assert!(lhs.eq_to_order(&rhs, 6).unwrap());
        // |P(F)| = integral of |F|
        let lhs = f.integral().valuation(var);
        let rhs = integrate(&f.valuation(var));
        assert!(lhs.eq_to_order(&rhs, 6).unwrap());
        assert!(lhs.basis() == Basis::DividedPower);
        assert!(lhs.coeff(&Index::Multi(MultiIndex::empty())).is_zero());
    }

    #[test]
    fn weight0_witness_small() {
        let f = LinearSpecies::e(4).positive_part();
        // Both parts of a split must stay nonempty after removing a
        // maximum, so content first appears at n = 4: the 6 splits of
        // type (2, 2).
        let w = weight0_bijection_witness(&f, &f, 4).unwrap();
        assert_eq!(w.left.len(), 6);
        assert_eq!(w.right.len(), 6);
        for n in [1, 2] {
            let w = weight0_bijection_witness(&f, &f, n).unwrap();
            assert!(w.left.is_empty() && w.map.is_empty());
        }
    }

    #[test]
    fn weight0_witness_requires_admissibility() {
        let e = LinearSpecies::e(3);
        assert!(matches!(
            weight0_bijection_witness(&e, &e, 2),
            Err(SpeciesError::NotAdmissible(_))
        ));
    }

    #[test]
    fn weight0_witness_medium_sizes() {
        let var_species = [
            LinearSpecies::x(6),
            LinearSpecies::e(6).positive_part(),
            LinearSpecies::l(6).positive_part(),
            LinearSpecies::e(6).integral(),
        ];
        for f in &var_species {
            for g in &var_species {
                for n in 1..=6 {
                    let w = weight0_bijection_witness(f, g, n).unwrap();
                    assert_eq!(w.left.len(), w.right.len());
                }
            }
        }
    }

    #[test]
    fn validate_bijection_catches_bad_maps() {
        let left = vec!["a".to_string()];
        let right = vec!["b".to_string()];
        assert!(validate_bijection(1, &left, &right, &[]).is_err());
        let bad_target = vec![("a".to_string(), "c".to_string())];
        assert!(validate_bijection(1, &left, &right, &bad_target).is_err());
        let good = vec![("a".to_string(), "b".to_string())];
        assert!(validate_bijection(1, &left, &right, &good).is_ok());
    }

    #[test]
    fn species_json_vocabulary() {
        let v = json!({"prod": ["E", {"P": "X"}]});
        let s = LinearSpecies::from_json(&v, 5).unwrap();
        let manual = LinearSpecies::e(5).product(&LinearSpecies::x(5).integral());
        assert_eq!(s, manual);
        assert!(LinearSpecies::from_json(&json!("nope"), 3).is_err());
    }
}
