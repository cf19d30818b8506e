//! q-integers, Gaussian binomials, and the q-deformed species layer with
//! inversion statistics. The parameter q stays formal (an integer
//! polynomial), so every identity is checked as a polynomial identity;
//! specialization recovers any integer value of q.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use serde_json::json;
use thiserror::Error;

use crate::coeff::{Coefficient, QPoly};
use crate::rb::{CheckReport, Weight, Witness};
use crate::series::{Basis, Index, MultiIndex, SeriesError, TruncatedSeries, VarId};
use crate::species::{
    subsets_of, tok_prod, tok_sum_left, tok_sum_right, LinearSpecies, SpeciesError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QcalcError {
    #[error("q-binomial out of range: n = {n}, k = {k}")]
    OutOfRange { n: u32, k: u32 },
}

/// The q-integer `[n]_q = 1 + q + ... + q^{n-1}`.
pub fn q_int(n: u32) -> Coefficient {
    let mut p = QPoly::zero();
    for e in 0..n {
        p = p.add(&QPoly::monomial(1, e));
    }
    Coefficient::QPoly(p)
}

/// The q-factorial `[n]_q! = [1]_q [2]_q ... [n]_q`.
pub fn q_factorial(n: u32) -> Coefficient {
    let mut acc = QPoly::constant(1);
    for i in 1..=n {
        let Coefficient::QPoly(qi) = q_int(i) else { unreachable!() };
        acc = acc.mul(&qi);
    }
    Coefficient::QPoly(acc)
}

fn q_binomial_table() -> &'static Mutex<Vec<Vec<QPoly>>> {
    static TABLE: std::sync::OnceLock<Mutex<Vec<Vec<QPoly>>>> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(vec![vec![QPoly::constant(1)]]))
}

/// The Gaussian binomial, computed division-free by the q-Pascal
/// recurrence `C(n,k)_q = C(n-1,k)_q + q^{n-k} C(n-1,k-1)_q`.
pub fn q_binomial(n: u32, k: u32) -> Result<Coefficient, QcalcError> {
    if k > n {
        return Err(QcalcError::OutOfRange { n, k });
    }
    let mut table = q_binomial_table().lock().unwrap();
    while table.len() <= n as usize {
        let m = table.len();
        let prev = &table[m - 1];
        let mut row = Vec::with_capacity(m + 1);
        row.push(QPoly::constant(1));
        for j in 1..m {
            let shifted = QPoly::monomial(1, (m - j) as u32).mul(&prev[j - 1]);
            row.push(prev[j].add(&shifted));
        }
        row.push(QPoly::constant(1));
        table.push(row);
    }
    Ok(Coefficient::QPoly(table[n as usize][k as usize].clone()))
}

/// Verifies, for all 1 <= k < n <= max_n, the q-Pascal recurrence and the
/// division-free factorization `C(n,k)_q [k]_q! [n-k]_q! = [n]_q!` as
/// exact polynomial identities.
pub fn q_pascal_check(max_n: u32) -> CheckReport {
    let name = "q_pascal_recurrence";
    let mut checked = 0u64;
    for n in 2..=max_n {
        for k in 1..n {
            checked += 1;
            let b = q_binomial(n, k).unwrap();
            let via_recurrence = q_binomial(n - 1, k).unwrap().add(
                &Coefficient::QPoly(QPoly::monomial(1, n - k)).mul(&q_binomial(n - 1, k - 1).unwrap()),
            );
            let refactored = b.mul(&q_factorial(k)).mul(&q_factorial(n - k));
            let full = q_factorial(n);
            if b != via_recurrence || refactored != full {
                let (lhs, rhs) = if b != via_recurrence {
                    (b.to_string(), via_recurrence.to_string())
                } else {
                    (refactored.to_string(), full.to_string())
                };
                return CheckReport::fails(
                    name,
                    Weight::Zero,
                    checked,
                    max_n as i64,
                    0,
                    Witness {
                        sample: checked,
                        context: "q_pascal".into(),
                        f: json!(n),
                        g: json!(k),
                        index: format!("({}, {})", n, k),
                        lhs,
                        rhs,
                    },
                );
            }
        }
    }
    CheckReport::holds(name, Weight::Zero, checked, max_n as i64, 0)
}

/// The inversion statistic of an ordered split: pairs (i, j) with
/// i in x1, j in x2 and i > j.
pub fn inversions(x1: &[u32], x2: &[u32]) -> u32 {
    let mut count = 0;
    for &i in x1 {
        for &j in x2 {
            if i > j {
                count += 1;
            }
        }
    }
    count
}

/// Independent oracle for the Gaussian binomial: enumerates all
/// k-subsets of [n] and sums q^(inversions), then compares with the
/// q-Pascal value.
pub fn inversion_gaussian_check(n: u32, k: u32) -> CheckReport {
    let name = "inversion_gaussian";
    let mut sum = QPoly::zero();
    let mut subsets = 0u64;
    for x1 in subsets_of(n) {
        if x1.len() != k as usize {
            continue;
        }
        subsets += 1;
        let x2: Vec<u32> = (1..=n).filter(|i| !x1.contains(i)).collect();
        sum = sum.add(&QPoly::monomial(1, inversions(&x1, &x2)));
    }
    let enumerated = Coefficient::QPoly(sum);
    let pascal = q_binomial(n, k).expect("k <= n");
    if enumerated != pascal {
        return CheckReport::fails(
            name,
            Weight::Zero,
            subsets,
            n as i64,
            0,
            Witness {
                sample: 0,
                context: "inversion enumeration".into(),
                f: json!(n),
                g: json!(k),
                index: format!("({}, {})", n, k),
                lhs: enumerated.to_string(),
                rhs: pascal.to_string(),
            },
        );
    }
    CheckReport::holds(name, Weight::Zero, subsets, n as i64, 0)
}

/// Specializes a q-divided series at an integer q, landing in the
/// single-variable divided-power basis.
pub fn qdivided_specialize(
    f: &TruncatedSeries,
    q0: &BigInt,
    var: VarId,
) -> Result<TruncatedSeries, SeriesError> {
    if f.basis() != Basis::QDivided {
        return Err(SeriesError::BasisMismatch(f.basis(), Basis::QDivided));
    }
    let mut out = TruncatedSeries::zero(Basis::DividedPower, f.trunc());
    for (idx, c) in f.terms() {
        let Index::Degree(n) = idx else { unreachable!() };
        let v = c.eval_q(q0).expect("q-divided coefficients are Int or QPoly");
        let m = if *n == 0 {
            MultiIndex::empty()
        } else {
            MultiIndex::from_pairs([(var, *n as u32)])
        };
        out.add_term(Index::Multi(m), v);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// q-weighted species

/// A linear species whose structures carry q-power weights; products pick
/// up the inversion statistic of the split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSpecies {
    bound: u32,
    structures: Vec<BTreeMap<String, u32>>,
}

impl QSpecies {
    fn empty_shell(bound: u32) -> Self {
        QSpecies {
            bound,
            structures: vec![BTreeMap::new(); bound as usize + 1],
        }
    }

    /// Classical species with all weights zero.
    pub fn from_classical(f: &LinearSpecies) -> Self {
        let mut out = Self::empty_shell(f.bound());
        for n in 0..=f.bound() {
            for t in f.structures_at(n) {
                out.insert(n, t.clone(), 0);
            }
        }
        out
    }

    pub fn e(bound: u32) -> Self {
        Self::from_classical(&LinearSpecies::e(bound))
    }

    pub fn x(bound: u32) -> Self {
        Self::from_classical(&LinearSpecies::x(bound))
    }

    pub fn l(bound: u32) -> Self {
        Self::from_classical(&LinearSpecies::l(bound))
    }

    fn insert(&mut self, n: u32, token: String, exponent: u32) {
        let fresh = self.structures[n as usize].insert(token, exponent);
        debug_assert!(fresh.is_none(), "structure tokens must be unique per size");
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn structures_at(&self, n: u32) -> &BTreeMap<String, u32> {
        &self.structures[n as usize]
    }

    pub fn vanishes_at_empty(&self) -> bool {
        self.structures[0].is_empty()
    }

    /// Forgets the q-weights.
    pub fn forget(&self) -> LinearSpecies {
        let mut out = LinearSpecies::zero(self.bound);
        for n in 0..=self.bound {
            for t in self.structures_at(n).keys() {
                out.insert(n, t.clone());
            }
        }
        out
    }

    pub fn sum(&self, other: &Self) -> Self {
        let bound = self.bound.min(other.bound);
        let mut out = Self::empty_shell(bound);
        for n in 0..=bound {
            for (t, &e) in self.structures_at(n) {
                out.insert(n, tok_sum_left(t), e);
            }
            for (t, &e) in other.structures_at(n) {
                out.insert(n, tok_sum_right(t), e);
            }
        }
        out
    }

    /// q-product: a structure on the split (x1, x2) carries the weight
    /// sum of its parts plus the inversion count of the split.
    pub fn q_product(&self, other: &Self) -> Self {
        let bound = self.bound.min(other.bound);
        let mut out = Self::empty_shell(bound);
        for n in 0..=bound {
            for x1 in subsets_of(n) {
                let k = x1.len() as u32;
                let x2: Vec<u32> = (1..=n).filter(|i| !x1.contains(i)).collect();
                let inv = inversions(&x1, &x2);
                for (f, &ef) in self.structures_at(k) {
                    for (g, &eg) in other.structures_at(n - k) {
                        out.insert(n, tok_prod(&x1, f, g), ef + eg + inv);
                    }
                }
            }
        }
        out
    }

    /// Removes the maximal element; weights are unchanged. The valuation
    /// of the result is the q-integral of the valuation.
    pub fn integral(&self) -> Self {
        let mut out = Self::empty_shell(self.bound);
        for n in 1..=self.bound {
            for (t, &e) in self.structures_at(n - 1) {
                out.insert(n, t.clone(), e);
            }
        }
        out
    }

    /// Evaluation one size up: structures on [n] are those on [n+1].
    /// The valuation of the result is the q-derivative of the valuation.
    pub fn derivative(&self) -> Self {
        if self.bound == 0 {
            return Self::empty_shell(0);
        }
        let mut out = Self::empty_shell(self.bound - 1);
        for n in 0..self.bound {
            for (t, &e) in self.structures_at(n + 1) {
                out.insert(n, t.clone(), e);
            }
        }
        out
    }

    /// The shift twist: every structure on an n-set gains weight n.
    pub fn shift(&self) -> Self {
        let mut out = Self::empty_shell(self.bound);
        for n in 0..=self.bound {
            for (t, &e) in self.structures_at(n) {
                out.insert(n, t.clone(), e + n);
            }
        }
        out
    }

    pub fn positive_part(&self) -> Self {
        let mut out = self.clone();
        out.structures[0].clear();
        out
    }

    /// q-weighted generating function on the q-divided basis.
    pub fn valuation(&self) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(
            Basis::QDivided,
            crate::series::Truncation::degree(self.bound as i64),
        );
        for n in 0..=self.bound {
            let mut p = QPoly::zero();
            for &e in self.structures_at(n).values() {
                p = p.add(&QPoly::monomial(1, e));
            }
            out.add_term(Index::Degree(n as i64), Coefficient::QPoly(p));
        }
        out
    }
}

/// Constructs and validates the weight-preserving bijection behind the
/// twisted identity `P(F)P(G) = P(P(F)G) + P(F S(P(G)))` on q-species,
/// for every size up to `n_max`: the max-location case split must match
/// structures and q-exponents on both sides.
pub fn twisted_species_check(
    f: &QSpecies,
    g: &QSpecies,
    n_max: u32,
) -> Result<CheckReport, SpeciesError> {
    if !f.vanishes_at_empty() {
        return Err(SpeciesError::NotAdmissible("left species".into()));
    }
    if !g.vanishes_at_empty() {
        return Err(SpeciesError::NotAdmissible("right species".into()));
    }
    let name = "twisted_species_bijection";
    let pf = f.integral();
    let pg = g.integral();
    let mut total = 0u64;
    for n in 0..=n_max {
        let left_side = pf.q_product(&pg);
        let right_a = pf.q_product(g).integral();
        let right_b = f.q_product(&pg.shift()).integral();

        // Tagged right-hand structure pool with weights.
        let mut right: BTreeMap<String, u32> = BTreeMap::new();
        for (t, &e) in right_a.structures_at(n) {
            right.insert(format!("A:{}", t), e);
        }
        for (t, &e) in right_b.structures_at(n) {
            right.insert(format!("B:{}", t), e);
        }

        let mut map: Vec<(String, String)> = Vec::new();
        for x1 in subsets_of(n) {
            let k = x1.len() as u32;
            let x2: Vec<u32> = (1..=n).filter(|i| !x1.contains(i)).collect();
            if x1.is_empty() || x2.is_empty() {
                continue;
            }
            let inv = inversions(&x1, &x2);
            for (ftok, &ef) in f.structures_at(k - 1) {
                for (gtok, &eg) in g.structures_at(n - k - 1) {
                    total += 1;
                    let left_tok = tok_prod(&x1, ftok, gtok);
                    let left_exp = ef + eg + inv;
                    let target = if x2.contains(&n) {
                        format!("A:{}", tok_prod(&x1, ftok, gtok))
                    } else {
                        let y1: Vec<u32> = x1.iter().copied().filter(|&i| i != n).collect();
                        format!("B:{}", tok_prod(&y1, ftok, gtok))
                    };
                    let stored = left_side.structures_at(n).get(&left_tok);
                    if stored != Some(&left_exp) {
                        return Err(SpeciesError::WitnessFailure {
                            size: n,
                            structure: left_tok,
                            detail: format!(
                                "left exponent mismatch: enumerated {}, product gave {:?}",
                                left_exp, stored
                            ),
                        });
                    }
                    match right.get(&target) {
                        Some(&re) if re == left_exp => {}
                        Some(&re) => {
                            return Err(SpeciesError::WitnessFailure {
                                size: n,
                                structure: target,
                                detail: format!(
                                    "weight mismatch: left q^{}, right q^{}",
                                    left_exp, re
                                ),
                            })
                        }
                        None => {
                            return Err(SpeciesError::WitnessFailure {
                                size: n,
                                structure: target,
                                detail: "target is not a right structure".into(),
                            })
                        }
                    }
                    map.push((left_tok, target));
                }
            }
        }

        let left: Vec<String> = left_side.structures_at(n).keys().cloned().collect();
        let right_toks: Vec<String> = right.keys().cloned().collect();
        crate::species::validate_bijection(n, &left, &right_toks, &map)?;
    }
    Ok(CheckReport::holds(name, Weight::MinusOne, total, n_max as i64, 0))
}

impl QSpecies {
    #[cfg(test)]
    fn clone_truncated(&self, bound: u32) -> Self {
        let mut out = Self::empty_shell(bound);
        for n in 0..=bound {
            for (t, &e) in self.structures_at(n) {
                out.insert(n, t.clone(), e);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rb::{q_integrate, RingOps};
    use num_traits::One;

    #[test]
    fn q_binomial_frozen_values() {
        assert_eq!(q_binomial(2, 1).unwrap(), "1 + q".parse().unwrap());
        assert_eq!(q_binomial(5, 0).unwrap(), Coefficient::int(1));
        assert_eq!(
            q_binomial(4, 2).unwrap(),
            "1 + q + 2*q^2 + q^3 + q^4".parse().unwrap()
        );
        assert!(matches!(
            q_binomial(2, 3),
            Err(QcalcError::OutOfRange { n: 2, k: 3 })
        ));
    }

    #[test]
    fn q_int_and_factorial() {
        assert_eq!(q_int(1), Coefficient::int(1));
        assert_eq!(q_int(3), "1 + q + q^2".parse().unwrap());
        assert_eq!(q_factorial(3), "1 + 2*q + 2*q^2 + q^3".parse().unwrap());
    }

    #[test]
    fn q_binomial_at_one_is_classical() {
        let one = BigInt::one();
        for n in 0..=12u32 {
            for k in 0..=n {
                let b = q_binomial(n, k).unwrap().eval_q(&one).unwrap();
                let classical = crate::coeff::binomial(n as u64, k as u64);
                assert_eq!(b, Coefficient::Int(classical));
            }
        }
    }

    #[test]
    fn pascal_check_sweep() {
        let report = q_pascal_check(12);
        assert!(report.holds_exactly(), "witness: {:?}", report.witness);
    }

    #[test]
    fn inversion_enumeration_matches() {
        // n=3, k=1: subsets {1},{2},{3} have 0, 1, 2 inversions.
        let report = inversion_gaussian_check(3, 1);
        assert!(report.holds_exactly());
        assert!(inversion_gaussian_check(4, 2).holds_exactly());
        assert!(inversion_gaussian_check(6, 0).holds_exactly());
        for n in 0..=8u32 {
            for k in 0..=n {
                assert!(inversion_gaussian_check(n, k).holds_exactly());
            }
        }
    }

    #[test]
    fn q_species_product_weights() {
        // E·E at n=2: the split ({2},{1}) carries q, ({1},{2}) carries 1.
        let e = QSpecies::e(3);
        let ee = e.q_product(&e);
        let with_weight_one = ee
            .structures_at(2)
            .iter()
            .filter(|(t, _)| t.starts_with("({2}"))
            .map(|(_, &e)| e)
            .collect::<Vec<_>>();
        assert_eq!(with_weight_one, vec![1]);
        let no_weight = ee.structures_at(2).get(&tok_prod(&[1], "E", "E"));
        assert_eq!(no_weight, Some(&0));
    }

    #[test]
    fn q_species_operators() {
        let e = QSpecies::e(4);
        let s = e.shift();
        assert_eq!(s.structures_at(2).values().copied().collect::<Vec<_>>(), vec![2]);
        // derivative of integral is the identity
        let f = e.q_product(&QSpecies::x(4));
        assert_eq!(f.integral().derivative(), f.clone_truncated(3));
        // integral of derivative keeps only nonempty sizes
        let fd = f.derivative().integral();
        for n in 1..=3 {
            assert_eq!(fd.structures_at(n), f.structures_at(n));
        }
        assert!(fd.vanishes_at_empty());
    }

    #[test]
    fn q_valuations_match_series_operators() {
        let f = QSpecies::l(5).positive_part();
        let g = QSpecies::e(5);
        // |FG| = |F||G| through the q-binomial product.
        let lhs = f.q_product(&g).valuation();
        let rhs = f.valuation().mul(&g.valuation());
        assert!(lhs.rg_eq_to_order(&rhs, 5));
        // |P_q(F)| is the q-integral of |F|.
        let lhs = f.integral().valuation();
        let rhs = q_integrate(&f.valuation());
        assert!(lhs.rg_eq_to_order(&rhs, 5));
    }

    #[test]
    fn q_species_at_one_match_classical_counts() {
        let one = BigInt::one();
        let fq = QSpecies::l(5).q_product(&QSpecies::e(5));
        let fc = LinearSpecies::l(5).product(&LinearSpecies::e(5));
        for n in 0..=5u32 {
            let weighted = fq
                .valuation()
                .coeff(&Index::Degree(n as i64))
                .eval_q(&one)
                .unwrap();
            assert_eq!(weighted, Coefficient::Int(BigInt::from(fc.count(n))));
        }
    }

    #[test]
    fn twisted_species_witness() {
        let e = QSpecies::e(5).positive_part();
        let x = QSpecies::x(5);
        let report = twisted_species_check(&e, &e, 4).unwrap();
        assert!(report.holds_exactly());
        assert!(twisted_species_check(&x, &e, 4).is_ok());
        assert!(twisted_species_check(&e, &x, 4).is_ok());
        let bad = QSpecies::e(4);
        assert!(matches!(
            twisted_species_check(&bad, &x, 3),
            Err(SpeciesError::NotAdmissible(_))
        ));
    }

    #[test]
    fn qdivided_specialization_at_one() {
        let x = VarId::intern("x");
        let f = TruncatedSeries::qdivided_term(1, Coefficient::int(1));
        let sq = f.mul(&f); // (1+q) x^2/[2]!
        let specialized = qdivided_specialize(&sq, &BigInt::one(), x).unwrap();
        // Divided-power counterpart: x*x = 2 x^2/2!.
        let d = TruncatedSeries::divided_term(x, 1, Coefficient::int(1));
        let expected = d.mul(&d);
        assert!(specialized.eq_to_order(&expected, 2).unwrap());
    }
}

