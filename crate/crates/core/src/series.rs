//! Sparse truncated series in four flavors: bounded-below Laurent series,
//! multivariate divided-power series, single-variable q-divided-power
//! series, and non-commutative word-indexed series.
//!
//! Every series carries an explicit truncation bound. Binary operations
//! propagate validity bounds; `None` upper bounds mark series whose
//! unstored coefficients are exactly zero (finite exact polynomials).
//!
//! Divided-power and q-divided series store the *divided* coefficient:
//! the term at index `m` is the coefficient of `x^m/m!` (resp.
//! `x^n/[n]_q!`), never the monomial coefficient.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::coeff::{binomial, factorial, Coefficient};
use crate::qcalc;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("basis mismatch: {0:?} vs {1:?}")]
    BasisMismatch(Basis, Basis),
    #[error("comparison order {order} exceeds a truncation bound {bound}")]
    OrderBeyondTruncation { order: i64, bound: i64 },
    #[error("substitution requires zero constant term in the inner series")]
    NonzeroConstantTerm,
    #[error("substitution requires single-variable divided-power series")]
    NotSingleVariable,
    #[error("matrix dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid series data: {0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// Variables

/// Interned variable identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(u32);

type InternerState = (Vec<String>, BTreeMap<String, u32>);

fn interner() -> &'static Mutex<InternerState> {
    static INTERNER: OnceLock<Mutex<InternerState>> = OnceLock::new();
    INTERNER.get_or_init(|| Mutex::new((Vec::new(), BTreeMap::new())))
}

impl VarId {
    pub fn intern(name: &str) -> VarId {
        let mut guard = interner().lock().unwrap();
        if let Some(&id) = guard.1.get(name) {
            return VarId(id);
        }
        let id = guard.0.len() as u32;
        guard.0.push(name.to_string());
        guard.1.insert(name.to_string(), id);
        VarId(id)
    }

    pub fn name(&self) -> String {
        interner().lock().unwrap().0[self.0 as usize].clone()
    }
}

// ---------------------------------------------------------------------------
// Basis indices

/// Finitely supported map from variables to positive exponents,
/// kept sorted by variable id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(Vec<(VarId, u32)>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        MultiIndex(vec![(v, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut map: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            if e > 0 {
                *map.entry(v).or_insert(0) += e;
            }
        }
        MultiIndex(map.into_iter().collect())
    }

    pub fn pairs(&self) -> &[(VarId, u32)] {
        &self.0
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.iter().map(|(v, _)| *v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        MultiIndex::from_pairs(self.0.iter().chain(other.0.iter()).cloned())
    }

    /// Removes one power of `v`; None if `v` does not occur.
    pub fn without_one(&self, v: VarId) -> Option<Self> {
        if self.exponent(v) == 0 {
            return None;
        }
        let pairs = self.0.iter().filter_map(|&(w, e)| {
            if w == v {
                (e > 1).then_some((w, e - 1))
            } else {
                Some((w, e))
            }
        });
        Some(MultiIndex(pairs.collect()))
    }

    /// Product of per-variable binomials `binom(self(v), sub(v))`.
    /// `sub` must be componentwise at most `self`.
    pub fn binomial(&self, sub: &Self) -> BigInt {
        let mut out = BigInt::one();
        for (v, e) in &self.0 {
            let k = sub.exponent(*v);
            out *= binomial(*e as u64, k as u64);
        }
        out
    }

    /// `m!` as a product of per-variable factorials.
    pub fn factorial(&self) -> BigInt {
        let mut out = BigInt::one();
        for (_, e) in &self.0 {
            out *= factorial(*e as u64);
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut named: Vec<(String, u32)> = self.0.iter().map(|(v, e)| (v.name(), *e)).collect();
        named.sort();
        let parts: Vec<String> = named
            .into_iter()
            .map(|(n, e)| if e == 1 { n } else { format!("{}^{}", n, e) })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Word over the alphabet `1..=n`; degree is the length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Self) -> Self {
        Word(self.0.iter().chain(other.0.iter()).copied().collect())
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Basis index for a series term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    Degree(i64),
    Multi(MultiIndex),
    Word(Word),
}

impl Index {
    pub fn total_degree(&self) -> i64 {
        match self {
            Index::Degree(n) => *n,
            Index::Multi(m) => m.total_degree() as i64,
            Index::Word(w) => w.len() as i64,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Degree(n) => write!(f, "{}", n),
            Index::Multi(m) => write!(f, "{}", m),
            Index::Word(w) => write!(f, "{}", w),
        }
    }
}

// ---------------------------------------------------------------------------
// Series

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    LaurentZ,
    DividedPower,
    QDivided,
    NonCommWord,
}

impl Basis {
    pub fn tag(&self) -> &'static str {
        match self {
            Basis::LaurentZ => "laurent",
            Basis::DividedPower => "divided",
            Basis::QDivided => "qdivided",
            Basis::NonCommWord => "word",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self, SeriesError> {
        match tag {
            "laurent" => Ok(Basis::LaurentZ),
            "divided" => Ok(Basis::DividedPower),
            "qdivided" => Ok(Basis::QDivided),
            "word" => Ok(Basis::NonCommWord),
            other => Err(SeriesError::Invalid(format!("unknown basis {:?}", other))),
        }
    }
}

/// Validity bound of a series. `upper: None` means every unstored
/// coefficient is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truncation {
    /// Laurent bounds: support vanishes below `lower` (`lower <= 0`);
    /// coefficients above `upper` are unknown.
    Laurent { lower: i64, upper: Option<i64> },
    /// Coefficients of total degree above the bound are unknown.
    Degree(Option<i64>),
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl Truncation {
    pub fn exact_degree() -> Self {
        Truncation::Degree(None)
    }

    pub fn degree(n: i64) -> Self {
        Truncation::Degree(Some(n))
    }

    pub fn upper(&self) -> Option<i64> {
        match self {
            Truncation::Laurent { upper, .. } => *upper,
            Truncation::Degree(n) => *n,
        }
    }

    fn meet(&self, other: &Self) -> Self {
        match (self, other) {
            (Truncation::Laurent { lower: l1, upper: u1 }, Truncation::Laurent { lower: l2, upper: u2 }) => {
                Truncation::Laurent {
                    lower: (*l1).min(*l2),
                    upper: min_opt(*u1, *u2),
                }
            }
            (Truncation::Degree(a), Truncation::Degree(b)) => Truncation::Degree(min_opt(*a, *b)),
            _ => panic!("truncation kind mismatch"),
        }
    }

    fn product(&self, other: &Self) -> Self {
        match (self, other) {
            (Truncation::Laurent { lower: l1, upper: u1 }, Truncation::Laurent { lower: l2, upper: u2 }) => {
                // Coefficient at n is determined when every contributing
                // split (a, n-a) with a >= l1, n-a >= l2 lies inside both
                // validity windows.
                Truncation::Laurent {
                    lower: l1 + l2,
                    upper: min_opt(u1.map(|u| u + l2), u2.map(|u| u + l1)),
                }
            }
            (Truncation::Degree(a), Truncation::Degree(b)) => Truncation::Degree(min_opt(*a, *b)),
            _ => panic!("truncation kind mismatch"),
        }
    }

    fn admits(&self, idx: &Index) -> bool {
        match self {
            Truncation::Laurent { lower, upper } => {
                let n = idx.total_degree();
                n >= *lower && upper.is_none_or(|u| n <= u)
            }
            Truncation::Degree(bound) => bound.is_none_or(|b| idx.total_degree() <= b),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Truncation::Laurent { lower, upper } => json!([lower, upper]),
            Truncation::Degree(n) => json!(n),
        }
    }
}

/// Sparse series: a map from basis index to exact coefficient with an
/// explicit truncation bound and a basis tag.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    basis: Basis,
    trunc: Truncation,
    terms: BTreeMap<Index, Coefficient>,
}

impl TruncatedSeries {
    pub fn zero(basis: Basis, trunc: Truncation) -> Self {
        Self::check_kind(basis, &trunc);
        TruncatedSeries {
            basis,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    fn check_kind(basis: Basis, trunc: &Truncation) {
        match (basis, trunc) {
            (Basis::LaurentZ, Truncation::Laurent { lower, .. }) => {
                assert!(*lower <= 0, "laurent lower bound must be <= 0");
            }
            (Basis::LaurentZ, _) => panic!("laurent series needs laurent truncation"),
            (_, Truncation::Laurent { .. }) => panic!("degree-based series needs degree truncation"),
            _ => {}
        }
    }

    pub fn from_terms(
        basis: Basis,
        trunc: Truncation,
        terms: impl IntoIterator<Item = (Index, Coefficient)>,
    ) -> Self {
        let mut out = Self::zero(basis, trunc);
        for (idx, c) in terms {
            out.add_term(idx, c);
        }
        out
    }

    /// Laurent series from explicit terms; exact (no unknown tail).
    pub fn laurent_exact(terms: impl IntoIterator<Item = (i64, Coefficient)>) -> Self {
        let terms: Vec<(i64, Coefficient)> = terms.into_iter().collect();
        let lower = terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, _)| *n)
            .min()
            .unwrap_or(0)
            .min(0);
        Self::from_terms(
            Basis::LaurentZ,
            Truncation::Laurent { lower, upper: None },
            terms.into_iter().map(|(n, c)| (Index::Degree(n), c)),
        )
    }

    /// Single-variable divided-power monomial `c * x^n/n!`.
    pub fn divided_term(v: VarId, n: u32, c: Coefficient) -> Self {
        let idx = if n == 0 {
            MultiIndex::empty()
        } else {
            MultiIndex::from_pairs([(v, n)])
        };
        Self::from_terms(
            Basis::DividedPower,
            Truncation::exact_degree(),
            [(Index::Multi(idx), c)],
        )
    }

    /// q-divided monomial `c * x^n/[n]_q!`.
    pub fn qdivided_term(n: u32, c: Coefficient) -> Self {
        Self::from_terms(
            Basis::QDivided,
            Truncation::exact_degree(),
            [(Index::Degree(n as i64), c)],
        )
    }

    pub fn one(basis: Basis, trunc: Truncation) -> Self {
        let idx = match basis {
            Basis::LaurentZ | Basis::QDivided => Index::Degree(0),
            Basis::DividedPower => Index::Multi(MultiIndex::empty()),
            Basis::NonCommWord => Index::Word(Word::empty()),
        };
        Self::from_terms(basis, trunc, [(idx, Coefficient::one())])
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn trunc(&self) -> Truncation {
        self.trunc
    }

    /// Restates the truncation bound; terms outside it are dropped.
    /// The caller asserts that the claimed validity is justified.
    pub fn with_trunc(mut self, trunc: Truncation) -> Self {
        Self::check_kind(self.basis, &trunc);
        self.trunc = trunc;
        self.terms.retain(|idx, _| trunc.admits(idx));
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, idx: &Index) -> Coefficient {
        self.terms.get(idx).cloned().unwrap_or_else(Coefficient::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Index, &Coefficient)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.terms.keys().map(|i| i.total_degree()).min()
    }

    pub fn add_term(&mut self, idx: Index, c: Coefficient) {
        if c.is_zero() || !self.trunc.admits(&idx) {
            return;
        }
        match self.terms.get_mut(&idx) {
            Some(entry) => {
                *entry = entry.add(&c);
                if entry.is_zero() {
                    self.terms.remove(&idx);
                }
            }
            None => {
                self.terms.insert(idx, c);
            }
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.basis != other.basis {
            return Err(SeriesError::BasisMismatch(self.basis, other.basis));
        }
        let mut out = Self::zero(self.basis, self.trunc.meet(&other.trunc));
        for (idx, c) in self.terms().chain(other.terms()) {
            out.add_term(idx.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("series add")
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries {
            basis: self.basis,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(i, c)| (i.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        let mut out = Self::zero(self.basis, self.trunc);
        for (idx, v) in self.terms() {
            out.add_term(idx.clone(), v.mul(c));
        }
        out
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&Coefficient::int(n))
    }

    /// Graded convolution with the basis-appropriate structure constants:
    /// plain convolution on Laurent indices, `binom(k+s, s)` on divided
    /// powers, `binom(k+s, s)_q` on q-divided powers, and deconcatenation
    /// on words.
    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.basis != other.basis {
            return Err(SeriesError::BasisMismatch(self.basis, other.basis));
        }
        let mut out = Self::zero(self.basis, self.trunc.product(&other.trunc));
        for (i1, c1) in self.terms() {
            for (i2, c2) in other.terms() {
                let (idx, factor) = match (self.basis, i1, i2) {
                    (Basis::LaurentZ, Index::Degree(a), Index::Degree(b)) => {
                        (Index::Degree(a + b), None)
                    }
                    (Basis::QDivided, Index::Degree(a), Index::Degree(b)) => {
                        let (a, b) = (*a as u64, *b as u64);
                        let qb = qcalc::q_binomial((a + b) as u32, b as u32)
                            .expect("q-binomial in range");
                        (Index::Degree((a + b) as i64), Some(qb))
                    }
                    (Basis::DividedPower, Index::Multi(m1), Index::Multi(m2)) => {
                        let sum = m1.add(m2);
                        let factor = sum.binomial(m2);
                        (Index::Multi(sum), Some(Coefficient::Int(factor)))
                    }
                    (Basis::NonCommWord, Index::Word(w1), Index::Word(w2)) => {
                        (Index::Word(w1.concat(w2)), None)
                    }
                    _ => panic!("index kind inconsistent with basis"),
                };
                if !out.trunc.admits(&idx) {
                    continue;
                }
                let mut c = c1.mul(c2);
                if let Some(f) = factor {
                    c = c.mul(&f);
                }
                out.add_term(idx, c);
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("series mul")
    }

    /// True iff every coefficient of total degree <= order matches exactly.
    /// Comparing beyond either validity bound is an error.
    pub fn eq_to_order(&self, other: &Self, order: i64) -> Result<bool, SeriesError> {
        if self.basis != other.basis {
            return Err(SeriesError::BasisMismatch(self.basis, other.basis));
        }
        for t in [&self.trunc, &other.trunc] {
            if let Some(u) = t.upper() {
                if order > u {
                    return Err(SeriesError::OrderBeyondTruncation { order, bound: u });
                }
            }
        }
        Ok(self.first_difference(other, order).is_none())
    }

    /// First index of total degree <= order where the two series differ.
    pub fn first_difference(&self, other: &Self, order: i64) -> Option<Index> {
        let mut keys: Vec<&Index> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .filter(|i| i.total_degree() <= order)
            .collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .find(|idx| self.coeff(idx) != other.coeff(idx))
            .cloned()
    }

    /// Keeps exactly the terms whose index satisfies the predicate.
    /// The truncation bound is unchanged.
    pub fn filter_terms(&self, mut pred: impl FnMut(&Index) -> bool) -> Self {
        TruncatedSeries {
            basis: self.basis,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| pred(i))
                .map(|(i, c)| (i.clone(), c.clone()))
                .collect(),
        }
    }

    /// Rebuilds the series by mapping each term; results outside the
    /// supplied truncation are dropped.
    pub fn map_terms(
        &self,
        basis: Basis,
        trunc: Truncation,
        mut f: impl FnMut(&Index, &Coefficient) -> Option<(Index, Coefficient)>,
    ) -> Self {
        let mut out = Self::zero(basis, trunc);
        for (idx, c) in self.terms() {
            if let Some((i2, c2)) = f(idx, c) {
                out.add_term(i2, c2);
            }
        }
        out
    }

    /// Composition `f(g(x))` of single-variable divided-power series,
    /// exact through total degree <= order. Both series must be in the
    /// same variable and `g` must have zero constant term.
    pub fn substitute(&self, g: &Self, order: i64) -> Result<Self, SeriesError> {
        if self.basis != Basis::DividedPower || g.basis != Basis::DividedPower {
            return Err(SeriesError::BasisMismatch(self.basis, g.basis));
        }
        let var = single_variable_of(self, g)?;
        if !g.coeff(&Index::Multi(MultiIndex::empty())).is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let bound = min_opt(
            Some(order),
            min_opt(self.trunc.upper(), g.trunc.upper()),
        );
        let trunc = Truncation::Degree(bound);
        let order = bound.unwrap_or(order);

        // Work in the monomial basis with rational coefficients:
        // monomial coefficient at n is (divided coefficient)/n!.
        let to_monomial = |s: &Self| -> BTreeMap<u32, BigRational> {
            let mut out = BTreeMap::new();
            for (idx, c) in s.terms() {
                let n = idx.total_degree() as u32;
                if (n as i64) > order {
                    continue;
                }
                let r = c.to_rat().expect("substitute needs Int/Rat coefficients")
                    / BigRational::from_integer(factorial(n as u64));
                if !r.is_zero() {
                    out.insert(n, r);
                }
            }
            out
        };
        let f_mono = to_monomial(self);
        let g_mono = to_monomial(g);

        let mul_mono = |a: &BTreeMap<u32, BigRational>,
                        b: &BTreeMap<u32, BigRational>|
         -> BTreeMap<u32, BigRational> {
            let mut out: BTreeMap<u32, BigRational> = BTreeMap::new();
            for (&n1, c1) in a {
                for (&n2, c2) in b {
                    let n = n1 + n2;
                    if (n as i64) > order {
                        continue;
                    }
                    let e = out.entry(n).or_insert_with(BigRational::zero);
                    *e += c1 * c2;
                }
            }
            out.retain(|_, c| !c.is_zero());
            out
        };

        // Horner-free accumulation: sum f_n * g^n.
        let mut acc: BTreeMap<u32, BigRational> = BTreeMap::new();
        let mut g_pow: BTreeMap<u32, BigRational> = BTreeMap::new();
        g_pow.insert(0, BigRational::one());
        let max_n = f_mono.keys().next_back().copied().unwrap_or(0);
        for n in 0..=max_n {
            if let Some(fn_c) = f_mono.get(&n) {
                for (&m, c) in &g_pow {
                    let e = acc.entry(m).or_insert_with(BigRational::zero);
                    *e += fn_c * c;
                }
            }
            if n < max_n {
                g_pow = mul_mono(&g_pow, &g_mono);
                if g_pow.is_empty() {
                    break;
                }
            }
        }

        let int_inputs = !has_rat_coeff(self) && !has_rat_coeff(g);
        let mut out = Self::zero(Basis::DividedPower, trunc);
        for (n, c) in acc {
            let divided = c * BigRational::from_integer(factorial(n as u64));
            if divided.is_zero() {
                continue;
            }
            let idx = if n == 0 {
                MultiIndex::empty()
            } else {
                MultiIndex::from_pairs([(var, n)])
            };
            let coeff = if int_inputs {
                Coefficient::Rat(divided).normalize_int()
            } else {
                Coefficient::Rat(divided)
            };
            out.add_term(Index::Multi(idx), coeff);
        }
        Ok(out)
    }

    // -- JSON -------------------------------------------------------------

    /// Canonical JSON form:
    /// `{"basis": tag, "trunc": ..., "terms": [[index, coeff-string], ...]}`.
    pub fn to_json(&self) -> Value {
        let mut terms: Vec<(Value, String)> = self
            .terms
            .iter()
            .map(|(idx, c)| (index_to_json(idx), c.to_string()))
            .collect();
        terms.sort_by_key(|t| t.0.to_string());
        json!({
            "basis": self.basis.tag(),
            "trunc": self.trunc.to_json(),
            "terms": terms.iter().map(|(i, c)| json!([i, c])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, SeriesError> {
        let obj = v
            .as_object()
            .ok_or_else(|| SeriesError::Invalid("series JSON must be an object".into()))?;
        let basis = Basis::from_tag(
            obj.get("basis")
                .and_then(Value::as_str)
                .ok_or_else(|| SeriesError::Invalid("missing basis tag".into()))?,
        )?;
        let trunc_v = obj
            .get("trunc")
            .ok_or_else(|| SeriesError::Invalid("missing trunc".into()))?;
        let trunc = match basis {
            Basis::LaurentZ => {
                let arr = trunc_v
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| SeriesError::Invalid("laurent trunc must be [lower, upper]".into()))?;
                let lower = arr[0]
                    .as_i64()
                    .ok_or_else(|| SeriesError::Invalid("bad lower bound".into()))?;
                let upper = if arr[1].is_null() {
                    None
                } else {
                    Some(
                        arr[1]
                            .as_i64()
                            .ok_or_else(|| SeriesError::Invalid("bad upper bound".into()))?,
                    )
                };
                Truncation::Laurent { lower, upper }
            }
            _ => {
                if trunc_v.is_null() {
                    Truncation::Degree(None)
                } else {
                    Truncation::Degree(Some(trunc_v.as_i64().ok_or_else(|| {
                        SeriesError::Invalid("bad degree bound".into())
                    })?))
                }
            }
        };
        let mut out = Self::zero(basis, trunc);
        let terms = obj
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| SeriesError::Invalid("missing terms".into()))?;
        for t in terms {
            let pair = t
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| SeriesError::Invalid("term must be [index, coeff]".into()))?;
            let idx = index_from_json(basis, &pair[0])?;
            let coeff: Coefficient = pair[1]
                .as_str()
                .ok_or_else(|| SeriesError::Invalid("coefficient must be a string".into()))?
                .parse()
                .map_err(|e| SeriesError::Invalid(format!("{}", e)))?;
            out.add_term(idx, coeff);
        }
        Ok(out)
    }
}

fn has_rat_coeff(s: &TruncatedSeries) -> bool {
    s.terms().any(|(_, c)| matches!(c, Coefficient::Rat(_)))
}

fn single_variable_of(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<VarId, SeriesError> {
    let mut var: Option<VarId> = None;
    for s in [f, g] {
        for (idx, _) in s.terms() {
            if let Index::Multi(m) = idx {
                for v in m.support() {
                    match var {
                        None => var = Some(v),
                        Some(w) if w == v => {}
                        Some(_) => return Err(SeriesError::NotSingleVariable),
                    }
                }
            }
        }
    }
    Ok(var.unwrap_or_else(|| VarId::intern("x")))
}

fn index_to_json(idx: &Index) -> Value {
    match idx {
        Index::Degree(n) => json!(n),
        Index::Multi(m) => {
            let mut pairs: Vec<(String, u32)> =
                m.pairs().iter().map(|(v, e)| (v.name(), *e)).collect();
            pairs.sort();
            Value::Array(pairs.into_iter().map(|(n, e)| json!([n, e])).collect())
        }
        Index::Word(w) => Value::Array(w.0.iter().map(|&s| json!(s)).collect()),
    }
}

fn index_from_json(basis: Basis, v: &Value) -> Result<Index, SeriesError> {
    match basis {
        Basis::LaurentZ | Basis::QDivided => v
            .as_i64()
            .map(Index::Degree)
            .ok_or_else(|| SeriesError::Invalid("index must be an integer".into())),
        Basis::DividedPower => {
            let arr = v
                .as_array()
                .ok_or_else(|| SeriesError::Invalid("index must be [var, exp] pairs".into()))?;
            let mut pairs = Vec::new();
            for p in arr {
                let pa = p
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| SeriesError::Invalid("bad [var, exp] pair".into()))?;
                let name = pa[0]
                    .as_str()
                    .ok_or_else(|| SeriesError::Invalid("variable must be a string".into()))?;
                let exp = pa[1]
                    .as_u64()
                    .ok_or_else(|| SeriesError::Invalid("exponent must be a natural".into()))?;
                pairs.push((VarId::intern(name), exp as u32));
            }
            Ok(Index::Multi(MultiIndex::from_pairs(pairs)))
        }
        Basis::NonCommWord => {
            let arr = v
                .as_array()
                .ok_or_else(|| SeriesError::Invalid("word index must be a list".into()))?;
            let mut word = Vec::new();
            for s in arr {
                word.push(
                    s.as_u64()
                        .filter(|&n| n >= 1 && n <= u8::MAX as u64)
                        .ok_or_else(|| SeriesError::Invalid("bad word symbol".into()))?
                        as u8,
                );
            }
            Ok(Index::Word(Word(word)))
        }
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in self.terms() {
            let mut coeff_str = c.to_string();
            if first {
                first = false;
            } else if let Some(rest) = coeff_str.strip_prefix('-') {
                write!(f, " - ")?;
                coeff_str = rest.to_string();
            } else {
                write!(f, " + ")?;
            }
            let needs_parens = coeff_str.contains(' ');
            let base = match (self.basis, idx) {
                (Basis::LaurentZ, Index::Degree(0)) => String::new(),
                (Basis::LaurentZ, Index::Degree(1)) => "z".to_string(),
                (Basis::LaurentZ, Index::Degree(n)) => format!("z^{}", n),
                (Basis::QDivided, Index::Degree(0)) => String::new(),
                (Basis::QDivided, Index::Degree(n)) => format!("x^{}/[{}]_q!", n, n),
                (Basis::DividedPower, Index::Multi(m)) if m.is_empty() => String::new(),
                (Basis::DividedPower, Index::Multi(m)) => {
                    let bang: Vec<String> = m
                        .pairs()
                        .iter()
                        .map(|(_, e)| format!("{}!", e))
                        .collect();
                    format!("{}/({})", m, bang.join("*"))
                }
                (Basis::NonCommWord, Index::Word(w)) => format!("{}", w),
                _ => format!("{}", idx),
            };
            let is_unit = coeff_str == "1" || coeff_str == "1/1";
            let is_neg_unit = coeff_str == "-1" || coeff_str == "-1/1";
            if base.is_empty() {
                write!(f, "{}", coeff_str)?;
            } else if is_unit {
                write!(f, "{}", base)?;
            } else if is_neg_unit {
                write!(f, "-{}", base)?;
            } else if needs_parens {
                write!(f, "({})*{}", coeff_str, base)?;
            } else {
                write!(f, "{}*{}", coeff_str, base)?;
            }
        }
        Ok(())
    }
}
