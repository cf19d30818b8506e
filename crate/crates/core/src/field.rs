//! Divided-power series on field-theoretic variable universes: jet
//! variables and their barred (momentum) partners, support projections,
//! total and partial derivatives, the Euler-Lagrange derivation, the
//! Poisson bracket, and the hbar-truncated Moyal star product.
//!
//! Coefficients are rational throughout; the Moyal expansion divides
//! by n!.

use std::collections::BTreeSet;

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::coeff::{factorial, Coefficient};
use crate::rb::{enumerate_multi_indices, rb_sides, CheckReport, RingOps, Weight};
use crate::series::{Basis, Index, MultiIndex, TruncatedSeries, Truncation, VarId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("cannot differentiate by hbar")]
    HbarDerivative,
    #[error("barred variables are not allowed in a configuration-space series")]
    BarredInConfigSpace,
    #[error("hbar is not allowed in a Lagrangian")]
    HbarInLagrangian,
    #[error("universe mismatch: ({0}, {1}) vs ({2}, {3})")]
    UniverseMismatch(u32, u32, u32, u32),
    #[error("jet order cap {cap} is below the maximal jet order {needed} in the Lagrangian")]
    JetCapTooSmall { cap: u32, needed: u32 },
    #[error("field index {0} out of range 1..={1}")]
    FieldOutOfRange(u32, u32),
    #[error("phase-space coefficients must be integers or rationals")]
    NotRational,
    #[error("invalid phase series data: {0}")]
    Invalid(String),
}

/// Fixed dimensions of a variable universe: d space-time directions and
/// k field components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Universe {
    pub d: u32,
    pub k: u32,
}

impl Universe {
    pub fn new(d: u32, k: u32) -> Self {
        Universe { d, k }
    }
}

/// A formal variable of the phase space: a jet variable (an iterated
/// derivative of a field treated as a symbol), its barred partner, or
/// the deformation parameter hbar.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FieldVariable {
    Jet { deriv: Vec<u32>, field: u32 },
    BarredJet { deriv: Vec<u32>, field: u32 },
    Hbar,
}

impl FieldVariable {
    pub fn jet(deriv: Vec<u32>, field: u32) -> Self {
        FieldVariable::Jet { deriv, field }
    }

    pub fn barred(deriv: Vec<u32>, field: u32) -> Self {
        FieldVariable::BarredJet { deriv, field }
    }

    /// Pads the jet multi-index with zeros to length d, so equal
    /// variables always intern to the same name.
    pub fn normalized(&self, d: u32) -> Self {
        let pad = |deriv: &Vec<u32>| {
            let mut v = deriv.clone();
            v.resize(d as usize, 0);
            v
        };
        match self {
            FieldVariable::Jet { deriv, field } => FieldVariable::Jet {
                deriv: pad(deriv),
                field: *field,
            },
            FieldVariable::BarredJet { deriv, field } => FieldVariable::BarredJet {
                deriv: pad(deriv),
                field: *field,
            },
            FieldVariable::Hbar => FieldVariable::Hbar,
        }
    }

    /// Swaps jet and barred jet; hbar is untouched.
    pub fn bar(&self) -> Self {
        match self {
            FieldVariable::Jet { deriv, field } => FieldVariable::BarredJet {
                deriv: deriv.clone(),
                field: *field,
            },
            FieldVariable::BarredJet { deriv, field } => FieldVariable::Jet {
                deriv: deriv.clone(),
                field: *field,
            },
            FieldVariable::Hbar => FieldVariable::Hbar,
        }
    }

    pub fn unbarred(&self) -> Self {
        match self {
            FieldVariable::BarredJet { .. } => self.bar(),
            other => other.clone(),
        }
    }

    pub fn is_hbar(&self) -> bool {
        matches!(self, FieldVariable::Hbar)
    }

    pub fn name(&self) -> String {
        match self {
            FieldVariable::Jet { deriv, field } => format!("phi{}[{}]", field, deriv_str(deriv)),
            FieldVariable::BarredJet { deriv, field } => {
                format!("phibar{}[{}]", field, deriv_str(deriv))
            }
            FieldVariable::Hbar => "hbar".into(),
        }
    }

    pub fn var_id(&self) -> VarId {
        VarId::intern(&self.name())
    }

    /// Inverse of `name`; used to recover structure from series indices.
    pub fn parse(name: &str) -> Result<Self, FieldError> {
        if name == "hbar" {
            return Ok(FieldVariable::Hbar);
        }
        let (barred, rest) = match name.strip_prefix("phibar") {
            Some(rest) => (true, rest),
            None => match name.strip_prefix("phi") {
                Some(rest) => (false, rest),
                None => return Err(FieldError::Invalid(format!("unknown variable {:?}", name))),
            },
        };
        let open = rest
            .find('[')
            .ok_or_else(|| FieldError::Invalid(format!("malformed variable {:?}", name)))?;
        let field: u32 = rest[..open]
            .parse()
            .map_err(|_| FieldError::Invalid(format!("bad field index in {:?}", name)))?;
        let inner = rest[open + 1..]
            .strip_suffix(']')
            .ok_or_else(|| FieldError::Invalid(format!("malformed variable {:?}", name)))?;
        let deriv = if inner.is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|s| s.parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| FieldError::Invalid(format!("bad jet index in {:?}", name)))?
        };
        Ok(if barred {
            FieldVariable::BarredJet { deriv, field }
        } else {
            FieldVariable::Jet { deriv, field }
        })
    }
}

fn deriv_str(deriv: &[u32]) -> String {
    deriv
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Divided-power series over field variables with rational coefficients
/// and separate validity bounds for the field degree and the hbar degree
/// (the latter is an exact quotient, not an unknown tail).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    universe: Universe,
    hbar_order: u32,
    field_order: Option<i64>,
    series: TruncatedSeries,
}

fn hbar_degree(idx: &Index) -> u32 {
    let Index::Multi(m) = idx else { unreachable!() };
    m.exponent(FieldVariable::Hbar.var_id())
}

fn field_degree(idx: &Index) -> i64 {
    idx.total_degree() - hbar_degree(idx) as i64
}

impl PhaseSeries {
    pub fn zero(universe: Universe, hbar_order: u32) -> Self {
        PhaseSeries {
            universe,
            hbar_order,
            field_order: None,
            series: TruncatedSeries::zero(Basis::DividedPower, Truncation::exact_degree()),
        }
    }

    pub fn one(universe: Universe, hbar_order: u32) -> Self {
        let mut out = Self::zero(universe, hbar_order);
        out.series.add_term(
            Index::Multi(MultiIndex::empty()),
            Coefficient::Rat(BigRational::from_integer(1.into())),
        );
        out
    }

    /// Builds from (variable powers, coefficient) terms; integer
    /// coefficients are promoted to rationals, q-polynomials rejected.
    pub fn from_terms(
        universe: Universe,
        hbar_order: u32,
        terms: impl IntoIterator<Item = (Vec<(FieldVariable, u32)>, Coefficient)>,
    ) -> Result<Self, FieldError> {
        let mut out = Self::zero(universe, hbar_order);
        for (vars, c) in terms {
            for (v, _) in &vars {
                if let FieldVariable::Jet { field, .. } | FieldVariable::BarredJet { field, .. } = v
                {
                    if *field == 0 || *field > universe.k {
                        return Err(FieldError::FieldOutOfRange(*field, universe.k));
                    }
                }
            }
            let rat = c.to_rat().map_err(|_| FieldError::NotRational)?;
            let idx = MultiIndex::from_pairs(
                vars.iter()
                    .map(|(v, e)| (v.normalized(universe.d).var_id(), *e)),
            );
            out.series
                .add_term(Index::Multi(idx), Coefficient::Rat(rat));
        }
        out.clamp();
        Ok(out)
    }

    /// The series consisting of a single variable.
    pub fn variable(universe: Universe, v: &FieldVariable, hbar_order: u32) -> Self {
        Self::from_terms(universe, hbar_order, [(vec![(v.clone(), 1)], Coefficient::one())])
            .expect("single variable")
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn hbar_order(&self) -> u32 {
        self.hbar_order
    }

    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }

    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    pub fn coeff(&self, vars: &[(FieldVariable, u32)]) -> Coefficient {
        let idx = MultiIndex::from_pairs(vars.iter().map(|(v, e)| (v.var_id(), *e)));
        self.series.coeff(&Index::Multi(idx))
    }

    fn clamp(&mut self) {
        let hb = self.hbar_order;
        let fo = self.field_order;
        self.series = self.series.filter_terms(|idx| {
            hbar_degree(idx) <= hb && fo.is_none_or(|b| field_degree(idx) <= b)
        });
    }

    fn check_universe(&self, other: &Self) -> Result<(), FieldError> {
        if self.universe != other.universe {
            return Err(FieldError::UniverseMismatch(
                self.universe.d,
                self.universe.k,
                other.universe.d,
                other.universe.k,
            ));
        }
        Ok(())
    }

    fn wrap(&self, series: TruncatedSeries, hbar_order: u32, field_order: Option<i64>) -> Self {
        let mut out = PhaseSeries {
            universe: self.universe,
            hbar_order,
            field_order,
            series,
        };
        out.clamp();
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_universe(other)?;
        Ok(self.wrap(
            self.series.add(&other.series),
            self.hbar_order.min(other.hbar_order),
            min_opt(self.field_order, other.field_order),
        ))
    }

    pub fn neg(&self) -> Self {
        self.wrap(self.series.neg(), self.hbar_order, self.field_order)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        self.wrap(
            self.series.scale(&Coefficient::Rat(c.clone())),
            self.hbar_order,
            self.field_order,
        )
    }

    /// Multinomial convolution on the divided basis.
    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_universe(other)?;
        Ok(self.wrap(
            self.series.mul(&other.series),
            self.hbar_order.min(other.hbar_order),
            min_opt(self.field_order, other.field_order),
        ))
    }

    /// Divided-basis index shift: the derivative by a field variable.
    pub fn partial_derivative(&self, v: &FieldVariable) -> Result<Self, FieldError> {
        if v.is_hbar() {
            return Err(FieldError::HbarDerivative);
        }
        let vid = v.normalized(self.universe.d).var_id();
        let shifted = self.series.map_terms(
            Basis::DividedPower,
            self.series.trunc(),
            |idx, c| {
                let Index::Multi(m) = idx else { unreachable!() };
                m.without_one(vid).map(|t| (Index::Multi(t), c.clone()))
            },
        );
        Ok(self.wrap(
            shifted,
            self.hbar_order,
            self.field_order.map(|b| b - 1),
        ))
    }

    /// Swaps jets and barred jets in every term.
    pub fn bar(&self) -> Self {
        let swapped = self.series.map_terms(
            Basis::DividedPower,
            self.series.trunc(),
            |idx, c| {
                let Index::Multi(m) = idx else { unreachable!() };
                let pairs = m.pairs().iter().map(|(v, e)| {
                    let fv = FieldVariable::parse(&v.name()).expect("phase variable");
                    (fv.bar().var_id(), *e)
                });
                Some((Index::Multi(MultiIndex::from_pairs(pairs)), c.clone()))
            },
        );
        self.wrap(swapped, self.hbar_order, self.field_order)
    }

    /// Largest total jet order |I| among the occurring jet variables.
    pub fn max_jet_order(&self) -> u32 {
        self.occurring_variables()
            .iter()
            .filter_map(|v| match v {
                FieldVariable::Jet { deriv, .. } | FieldVariable::BarredJet { deriv, .. } => {
                    Some(deriv.iter().sum())
                }
                FieldVariable::Hbar => None,
            })
            .max()
            .unwrap_or(0)
    }

    fn occurring_variables(&self) -> BTreeSet<FieldVariable> {
        let mut out = BTreeSet::new();
        for (idx, _) in self.series.terms() {
            let Index::Multi(m) = idx else { unreachable!() };
            for v in m.support() {
                out.insert(FieldVariable::parse(&v.name()).expect("phase variable"));
            }
        }
        out
    }

    /// The derivation sending each jet variable (I, j) to (I + e_i, j),
    /// extended by the Leibniz rule on the divided basis.
    pub fn total_derivative(&self, direction: u32) -> Result<Self, FieldError> {
        assert!(direction >= 1 && direction <= self.universe.d, "direction in 1..=d");
        let mut out_series =
            TruncatedSeries::zero(Basis::DividedPower, self.series.trunc());
        for (idx, c) in self.series.terms() {
            let Index::Multi(m) = idx else { unreachable!() };
            for (vid, _) in m.pairs() {
                let fv = FieldVariable::parse(&vid.name()).expect("phase variable");
                let (deriv, field) = match &fv {
                    FieldVariable::Jet { deriv, field } => (deriv.clone(), *field),
                    FieldVariable::BarredJet { .. } => {
                        return Err(FieldError::BarredInConfigSpace)
                    }
                    FieldVariable::Hbar => continue,
                };
                let mut up = deriv;
                if up.len() < self.universe.d as usize {
                    up.resize(self.universe.d as usize, 0);
                }
                up[(direction - 1) as usize] += 1;
                let target_var = FieldVariable::jet(up, field);
                let target = m
                    .without_one(*vid)
                    .expect("variable occurs")
                    .add(&MultiIndex::var(target_var.var_id()));
                let mult = target.exponent(target_var.var_id());
                out_series.add_term(
                    Index::Multi(target),
                    c.mul(&Coefficient::int(mult as i64)),
                );
            }
        }
        Ok(self.wrap(out_series, self.hbar_order, self.field_order))
    }

    /// Keeps exactly the terms all of whose field variables, after
    /// unbarring, lie in the given set; hbar is unconstrained.
    pub fn support_projection(&self, allowed: &BTreeSet<FieldVariable>) -> Self {
        let filtered = self.series.filter_terms(|idx| {
            let Index::Multi(m) = idx else { unreachable!() };
            m.support().all(|v| {
                let fv = FieldVariable::parse(&v.name()).expect("phase variable");
                fv.is_hbar() || allowed.contains(&fv.unbarred())
            })
        });
        self.wrap(filtered, self.hbar_order, self.field_order)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.universe.d,
            "k": self.universe.k,
            "hbar_order": self.hbar_order,
            "series": self.series.to_json(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, FieldError> {
        let obj = v
            .as_object()
            .ok_or_else(|| FieldError::Invalid("phase series JSON must be an object".into()))?;
        let d = obj
            .get("d")
            .and_then(Value::as_u64)
            .ok_or_else(|| FieldError::Invalid("missing dimension d".into()))? as u32;
        let k = obj
            .get("k")
            .and_then(Value::as_u64)
            .ok_or_else(|| FieldError::Invalid("missing field count k".into()))? as u32;
        let hbar_order = obj
            .get("hbar_order")
            .and_then(Value::as_u64)
            .unwrap_or(0) as u32;
        let series = TruncatedSeries::from_json(
            obj.get("series")
                .ok_or_else(|| FieldError::Invalid("missing series".into()))?,
        )
        .map_err(|e| FieldError::Invalid(e.to_string()))?;
        if series.basis() != Basis::DividedPower {
            return Err(FieldError::Invalid("phase series must be divided-power".into()));
        }
        let mut terms = Vec::new();
        for (idx, c) in series.terms() {
            let Index::Multi(m) = idx else { unreachable!() };
            let vars = m
                .pairs()
                .iter()
                .map(|(v, e)| FieldVariable::parse(&v.name()).map(|fv| (fv, *e)))
                .collect::<Result<Vec<_>, _>>()?;
            terms.push((vars, c.clone()));
        }
        Self::from_terms(Universe::new(d, k), hbar_order, terms)
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

// ---------------------------------------------------------------------------
// Euler-Lagrange

/// The variational derivative
/// `e_j(l) = sum_I (-1)^|I| d_I (dl / d(jet(I, j)))`
/// over the jet orders I actually occurring in the polynomial
/// Lagrangian. The cap must bound the maximal occurring jet order.
pub fn euler_lagrange(l: &PhaseSeries, field: u32, i_cap: u32) -> Result<PhaseSeries, FieldError> {
    if field == 0 || field > l.universe.k {
        return Err(FieldError::FieldOutOfRange(field, l.universe.k));
    }
    let mut jet_orders: BTreeSet<Vec<u32>> = BTreeSet::new();
    for v in l.occurring_variables() {
        match v {
            FieldVariable::Jet { deriv, field: f } => {
                if f == field {
                    let mut padded = deriv;
                    padded.resize(l.universe.d as usize, 0);
                    jet_orders.insert(padded);
                }
            }
            FieldVariable::BarredJet { .. } => return Err(FieldError::BarredInConfigSpace),
            FieldVariable::Hbar => return Err(FieldError::HbarInLagrangian),
        }
    }
    if let Some(max_order) = jet_orders.iter().map(|i| i.iter().sum::<u32>()).max() {
        if max_order > i_cap {
            return Err(FieldError::JetCapTooSmall {
                cap: i_cap,
                needed: max_order,
            });
        }
    }
    let mut acc = PhaseSeries::zero(l.universe, l.hbar_order);
    for deriv in jet_orders {
        let v = FieldVariable::jet(deriv.clone(), field);
        let mut term = l.partial_derivative(&v)?;
        for (dir, &times) in deriv.iter().enumerate() {
            for _ in 0..times {
                term = term.total_derivative(dir as u32 + 1)?;
            }
        }
        let total: u32 = deriv.iter().sum();
        if total % 2 == 1 {
            term = term.neg();
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Poisson bracket and Moyal star

/// `{f, g} = sum_k df/dk dg/dkbar - df/dkbar dg/dk` over the unbarred
/// variables occurring in either argument.
pub fn poisson_bracket(f: &PhaseSeries, g: &PhaseSeries) -> Result<PhaseSeries, FieldError> {
    f.check_universe(g)?;
    let mut keys: BTreeSet<FieldVariable> = BTreeSet::new();
    for v in f.occurring_variables().union(&g.occurring_variables()) {
        if !v.is_hbar() {
            keys.insert(v.unbarred());
        }
    }
    let mut acc = PhaseSeries::zero(f.universe, f.hbar_order.min(g.hbar_order));
    for k in keys {
        let kb = k.bar();
        let t1 = f.partial_derivative(&k)?.mul(&g.partial_derivative(&kb)?)?;
        let t2 = f.partial_derivative(&kb)?.mul(&g.partial_derivative(&k)?)?;
        acc = acc.add(&t1)?.add(&t2.neg())?;
    }
    Ok(acc)
}

/// The Moyal star product through the given hbar order:
/// `f * g = sum_n (hbar^n / n!) m(sum_k d_k (x) d_kbar - d_kbar (x) d_k)^n (f (x) g)`.
/// The order-0 term is the plain product and the order-1 term is
/// hbar times the Poisson bracket.
pub fn moyal_star(
    f: &PhaseSeries,
    g: &PhaseSeries,
    hbar_order: u32,
) -> Result<PhaseSeries, FieldError> {
    f.check_universe(g)?;
    let out_order = hbar_order.min(f.hbar_order).min(g.hbar_order);
    let hbar_gen = PhaseSeries::variable(f.universe, &FieldVariable::Hbar, out_order);
    let mut acc = PhaseSeries::zero(f.universe, out_order);
    let mut pairs: Vec<(PhaseSeries, PhaseSeries)> = vec![(f.clone(), g.clone())];
    let mut hbar_power = PhaseSeries::one(f.universe, out_order);
    for n in 0..=out_order {
        if n > 0 {
            // One application of the antisymmetric biderivation.
            let mut next: Vec<(PhaseSeries, PhaseSeries)> = Vec::new();
            for (a, b) in &pairs {
                let mut keys: BTreeSet<FieldVariable> = BTreeSet::new();
                for v in a.occurring_variables().union(&b.occurring_variables()) {
                    if !v.is_hbar() {
                        keys.insert(v.unbarred());
                    }
                }
                for k in keys {
                    let kb = k.bar();
                    let da = a.partial_derivative(&k)?;
                    let dbb = b.partial_derivative(&kb)?;
                    if !da.is_zero() && !dbb.is_zero() {
                        next.push((da, dbb));
                    }
                    let dab = a.partial_derivative(&kb)?;
                    let db = b.partial_derivative(&k)?;
                    if !dab.is_zero() && !db.is_zero() {
                        next.push((dab.neg(), db));
                    }
                }
            }
            pairs = next;
            hbar_power = hbar_power.mul(&hbar_gen)?;
        }
        if pairs.is_empty() {
            break;
        }
        let mut term = PhaseSeries::zero(f.universe, out_order);
        for (a, b) in &pairs {
            term = term.add(&a.mul(b)?)?;
        }
        let inv_fact = BigRational::new(1.into(), factorial(n as u64));
        acc = acc.add(&term.scale(&inv_fact).mul(&hbar_power)?)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// The star-product support projection check

/// A phase series regarded as an element of the star-product ring at a
/// fixed hbar order.
#[derive(Clone)]
pub struct StarRing(pub PhaseSeries);

impl RingOps for StarRing {
    fn rg_add(&self, other: &Self) -> Self {
        StarRing(self.0.add(&other.0).expect("star ring add"))
    }
    fn rg_mul(&self, other: &Self) -> Self {
        let order = self.0.hbar_order.min(other.0.hbar_order);
        StarRing(moyal_star(&self.0, &other.0, order).expect("star ring mul"))
    }
    fn rg_neg(&self) -> Self {
        StarRing(self.0.neg())
    }
    fn rg_eq_to_order(&self, other: &Self, _order: i64) -> bool {
        self.0.series == other.0.series
    }
    fn rg_first_diff(&self, other: &Self, _order: i64) -> Option<(String, String, String)> {
        self.0
            .series
            .first_difference(&other.0.series, i64::MAX)
            .map(|idx| {
                (
                    idx.to_string(),
                    self.0.series.coeff(&idx).to_string(),
                    other.0.series.coeff(&idx).to_string(),
                )
            })
    }
    fn rg_json(&self) -> Value {
        self.0.to_json()
    }
}

/// Samples a phase-space polynomial over the given unbarred jets, their
/// bars, and hbar, with field degree at most `field_cap`.
pub fn sample_phase_series(
    universe: Universe,
    jets: &[FieldVariable],
    field_cap: u32,
    hbar_order: u32,
    rng: &mut ChaCha8Rng,
) -> PhaseSeries {
    let mut vars: Vec<VarId> = Vec::new();
    for j in jets {
        let j = j.normalized(universe.d);
        vars.push(j.var_id());
        vars.push(j.bar().var_id());
    }
    vars.push(FieldVariable::Hbar.var_id());
    let mut out = PhaseSeries::zero(universe, hbar_order);
    for m in enumerate_multi_indices(&vars, field_cap + hbar_order) {
        let idx = Index::Multi(m);
        if field_degree(&idx) > field_cap as i64 || hbar_degree(&idx) > hbar_order {
            continue;
        }
        if !rng.gen_bool(0.5) {
            continue;
        }
        let c = rng.gen_range(-9..=9i64);
        out.series.add_term(
            idx,
            Coefficient::Rat(BigRational::from_integer(c.into())),
        );
    }
    out
}

/// Runs the weight -1 identity for the support projection against the
/// star product: first on the targeted probe pairs (k, kbar) for each
/// jet k outside the allowed set, then on seeded random polynomials.
/// At hbar order 0 the star product is the plain product.
pub fn star_support_projection_check(
    universe: Universe,
    jets: &[FieldVariable],
    allowed: &BTreeSet<FieldVariable>,
    samples: u64,
    hbar_order: u32,
    seed: u64,
) -> CheckReport {
    let name = format!("star_support_projection[hbar_order={}]", hbar_order);
    let allowed: BTreeSet<FieldVariable> = allowed
        .iter()
        .map(|v| v.normalized(universe.d))
        .collect();
    let jets: Vec<FieldVariable> = jets.iter().map(|v| v.normalized(universe.d)).collect();
    let apply = |h: &StarRing| StarRing(h.0.support_projection(&allowed));
    let mut count = 0u64;

    // Probe family: (k, kbar) for k outside the allowed set.
    for k in &jets {
        if allowed.contains(&k.unbarred()) {
            continue;
        }
        count += 1;
        let f = StarRing(PhaseSeries::variable(universe, k, hbar_order));
        let g = StarRing(PhaseSeries::variable(universe, &k.bar(), hbar_order));
        let (lhs, rhs) = rb_sides(apply, Weight::MinusOne, false, &f, &g);
        if !lhs.rg_eq_to_order(&rhs, 0) {
            let (index, l, r) = lhs.rg_first_diff(&rhs, 0).unwrap();
            return CheckReport::fails(
                &name,
                Weight::MinusOne,
                count,
                hbar_order as i64,
                seed,
                crate::rb::Witness {
                    sample: count - 1,
                    context: "probe (k, kbar) outside the projection".into(),
                    f: f.rg_json(),
                    g: g.rg_json(),
                    index,
                    lhs: l,
                    rhs: r,
                },
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        count += 1;
        let f = StarRing(sample_phase_series(universe, &jets, 3, hbar_order, &mut rng));
        let g = StarRing(sample_phase_series(universe, &jets, 3, hbar_order, &mut rng));
        let (lhs, rhs) = rb_sides(apply, Weight::MinusOne, false, &f, &g);
        if !lhs.rg_eq_to_order(&rhs, 0) {
            let (index, l, r) = lhs.rg_first_diff(&rhs, 0).unwrap();
            return CheckReport::fails(
                &name,
                Weight::MinusOne,
                count,
                hbar_order as i64,
                seed,
                crate::rb::Witness {
                    sample: i,
                    context: "random pair".into(),
                    f: f.rg_json(),
                    g: g.rg_json(),
                    index,
                    lhs: l,
                    rhs: r,
                },
            );
        }
    }
    CheckReport::holds(&name, Weight::MinusOne, count, hbar_order as i64, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u11() -> Universe {
        Universe::new(1, 1)
    }

    fn phi(deriv: u32) -> FieldVariable {
        FieldVariable::jet(vec![deriv], 1)
    }

    #[test]
    fn variable_names_roundtrip() {
        for v in [
            phi(0),
            phi(2),
            FieldVariable::jet(vec![1, 0, 3], 2),
            FieldVariable::barred(vec![0], 1),
            FieldVariable::Hbar,
        ] {
            assert_eq!(FieldVariable::parse(&v.name()).unwrap(), v);
        }
        assert!(FieldVariable::parse("zeta").is_err());
    }

    #[test]
    fn phase_mul_divided_constant() {
        // phi * phi = 2 (phi^2 divided term)
        let u = u11();
        let f = PhaseSeries::variable(u, &phi(0), 0);
        let sq = f.mul(&f).unwrap();
        assert_eq!(sq.coeff(&[(phi(0), 2)]), Coefficient::rat(2, 1));
        // unit
        let one = PhaseSeries::one(u, 0);
        assert_eq!(f.mul(&one).unwrap(), f);
    }

    #[test]
    fn phase_mul_commutative_random() {
        let u = Universe::new(1, 2);
        let jets = [phi(0), FieldVariable::jet(vec![0], 2)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = sample_phase_series(u, &jets, 3, 1, &mut rng);
            let g = sample_phase_series(u, &jets, 3, 1, &mut rng);
            assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
        }
    }

    #[test]
    fn partial_derivative_rules() {
        let u = u11();
        let f = PhaseSeries::from_terms(u, 0, [(vec![(phi(0), 2)], Coefficient::int(5))]).unwrap();
        let df = f.partial_derivative(&phi(0)).unwrap();
        assert_eq!(df.coeff(&[(phi(0), 1)]), Coefficient::rat(5, 1));
        let one = PhaseSeries::one(u, 0);
        assert!(one.partial_derivative(&phi(0)).unwrap().is_zero());
        assert!(matches!(
            f.partial_derivative(&FieldVariable::Hbar),
            Err(FieldError::HbarDerivative)
        ));
    }

    #[test]
    fn leibniz_rule_random() {
        let u = u11();
        let jets = [phi(0)];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let f = sample_phase_series(u, &jets, 3, 0, &mut rng);
            let g = sample_phase_series(u, &jets, 3, 0, &mut rng);
            let v = phi(0);
            let lhs = f.mul(&g).unwrap().partial_derivative(&v).unwrap();
            let rhs = f
                .partial_derivative(&v)
                .unwrap()
                .mul(&g)
                .unwrap()
                .add(&f.mul(&g.partial_derivative(&v).unwrap()).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn total_derivative_generator_and_leibniz() {
        let u = u11();
        // d1(phi) = phi_(1)
        let f = PhaseSeries::variable(u, &phi(0), 0);
        let df = f.total_derivative(1).unwrap();
        assert_eq!(df.coeff(&[(phi(1), 1)]), Coefficient::rat(1, 1));
        // d1 of the divided square of phi is the product term phi*phi_(1).
        let sq = PhaseSeries::from_terms(u, 0, [(vec![(phi(0), 2)], Coefficient::int(1))]).unwrap();
        let dsq = sq.total_derivative(1).unwrap();
        assert_eq!(dsq.coeff(&[(phi(0), 1), (phi(1), 1)]), Coefficient::rat(1, 1));
        // constants die
        assert!(PhaseSeries::one(u, 0).total_derivative(1).unwrap().is_zero());
        // barred variables are rejected
        let barred = PhaseSeries::variable(u, &FieldVariable::barred(vec![0], 1), 0);
        assert!(matches!(
            barred.total_derivative(1),
            Err(FieldError::BarredInConfigSpace)
        ));
    }

    #[test]
    fn euler_lagrange_frozen_example() {
        // l = (phi_(1))^2/2! - phi^2/2!  =>  e(l) = -phi - phi_(2)
        let u = u11();
        let l = PhaseSeries::from_terms(
            u,
            0,
            [
                (vec![(phi(1), 2)], Coefficient::int(1)),
                (vec![(phi(0), 2)], Coefficient::int(-1)),
            ],
        )
        .unwrap();
        let e = euler_lagrange(&l, 1, 1).unwrap();
        let expected = PhaseSeries::from_terms(
            u,
            0,
            [
                (vec![(phi(0), 1)], Coefficient::int(-1)),
                (vec![(phi(2), 1)], Coefficient::int(-1)),
            ],
        )
        .unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn euler_lagrange_edge_cases() {
        let u = u11();
        // Linear Lagrangian: e(phi) = 1.
        let l = PhaseSeries::variable(u, &phi(0), 0);
        assert_eq!(euler_lagrange(&l, 1, 0).unwrap(), PhaseSeries::one(u, 0));
        // Independent of the field: zero.
        let u2 = Universe::new(1, 2);
        let l2 = PhaseSeries::variable(u2, &phi(0), 0);
        assert!(euler_lagrange(&l2, 2, 0).unwrap().is_zero());
        // Cap too small.
        let l3 = PhaseSeries::from_terms(u, 0, [(vec![(phi(2), 1)], Coefficient::int(1))]).unwrap();
        assert!(matches!(
            euler_lagrange(&l3, 1, 1),
            Err(FieldError::JetCapTooSmall { cap: 1, needed: 2 })
        ));
    }

    #[test]
    fn euler_lagrange_kills_total_derivatives() {
        let u = u11();
        let hs = [
            PhaseSeries::variable(u, &phi(0), 0),
            PhaseSeries::variable(u, &phi(1), 0),
            PhaseSeries::from_terms(u, 0, [(vec![(phi(0), 2)], Coefficient::int(1))]).unwrap(),
            PhaseSeries::from_terms(u, 0, [(vec![(phi(0), 1), (phi(1), 1)], Coefficient::int(1))])
                .unwrap(),
            PhaseSeries::from_terms(u, 0, [(vec![(phi(1), 2)], Coefficient::int(1))]).unwrap(),
            PhaseSeries::from_terms(u, 0, [(vec![(phi(0), 3)], Coefficient::int(1))]).unwrap(),
        ];
        for h in &hs {
            let dh = h.total_derivative(1).unwrap();
            let cap = 4;
            let e = euler_lagrange(&dh, 1, cap).unwrap();
            assert!(e.is_zero(), "variational derivative of d({}) nonzero", h.to_json());
        }
    }

    #[test]
    fn euler_lagrange_additive() {
        let u = u11();
        let l1 = PhaseSeries::from_terms(u, 0, [(vec![(phi(1), 2)], Coefficient::int(1))]).unwrap();
        let l2 = PhaseSeries::from_terms(u, 0, [(vec![(phi(0), 3)], Coefficient::int(2))]).unwrap();
        let lhs = euler_lagrange(&l1.add(&l2).unwrap(), 1, 2).unwrap();
        let rhs = euler_lagrange(&l1, 1, 2)
            .unwrap()
            .add(&euler_lagrange(&l2, 1, 2).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn poisson_bracket_generators() {
        let u = u11();
        let k = PhaseSeries::variable(u, &phi(0), 0);
        let kb = PhaseSeries::variable(u, &FieldVariable::barred(vec![0], 1), 0);
        assert_eq!(poisson_bracket(&k, &kb).unwrap(), PhaseSeries::one(u, 0));
        // distinct unbarred variables commute
        let s = PhaseSeries::variable(u11(), &phi(1), 0);
        assert!(poisson_bracket(&k, &s).unwrap().is_zero());
        // antisymmetry
        assert_eq!(
            poisson_bracket(&kb, &k).unwrap(),
            PhaseSeries::one(u, 0).neg()
        );
    }

    #[test]
    fn poisson_jacobi_random() {
        let u = u11();
        let jets = [phi(0)];
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let f = sample_phase_series(u, &jets, 2, 0, &mut rng);
            let g = sample_phase_series(u, &jets, 2, 0, &mut rng);
            let h = sample_phase_series(u, &jets, 2, 0, &mut rng);
            let a = poisson_bracket(&f, &poisson_bracket(&g, &h).unwrap()).unwrap();
            let b = poisson_bracket(&g, &poisson_bracket(&h, &f).unwrap()).unwrap();
            let c = poisson_bracket(&h, &poisson_bracket(&f, &g).unwrap()).unwrap();
            let sum = a.add(&b).unwrap().add(&c).unwrap();
            assert!(sum.is_zero(), "jacobi violated");
        }
    }

    #[test]
    fn moyal_star_frozen_examples() {
        let u = u11();
        let k = PhaseSeries::variable(u, &phi(0), 1);
        let kb = PhaseSeries::variable(u, &FieldVariable::barred(vec![0], 1), 1);
        let prod = moyal_star(&k, &kb, 1).unwrap();
        // k * kbar = (k kbar term) + hbar
        assert_eq!(prod.coeff(&[(phi(0), 1), (FieldVariable::barred(vec![0], 1), 1)]), Coefficient::rat(1, 1));
        assert_eq!(prod.coeff(&[(FieldVariable::Hbar, 1)]), Coefficient::rat(1, 1));
        // kbar * k flips the hbar sign
        let prod2 = moyal_star(&kb, &k, 1).unwrap();
        assert_eq!(prod2.coeff(&[(FieldVariable::Hbar, 1)]), Coefficient::rat(-1, 1));
        // f * 1 = f
        let one = PhaseSeries::one(u, 1);
        assert_eq!(moyal_star(&k, &one, 1).unwrap(), k);
        // commutator: k * kbar - kbar * k = 2 hbar
        let comm = prod.add(&prod2.neg()).unwrap();
        let expected =
            PhaseSeries::from_terms(u, 1, [(vec![(FieldVariable::Hbar, 1)], Coefficient::int(2))])
                .unwrap();
        assert_eq!(comm, expected);
    }

    #[test]
    fn moyal_order_one_is_poisson() {
        let u = u11();
        let jets = [phi(0)];
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let f = sample_phase_series(u, &jets, 2, 0, &mut rng);
            let g = sample_phase_series(u, &jets, 2, 0, &mut rng);
            let f1 = PhaseSeries { hbar_order: 1, ..f.clone() };
            let g1 = PhaseSeries { hbar_order: 1, ..g.clone() };
            let star = moyal_star(&f1, &g1, 1).unwrap();
            let classical = f1.mul(&g1).unwrap();
            let hbar = PhaseSeries::variable(u, &FieldVariable::Hbar, 1);
            let pb = poisson_bracket(&f1, &g1).unwrap().mul(&hbar).unwrap();
            assert_eq!(star, classical.add(&pb).unwrap());
        }
    }

    #[test]
    fn star_commutator_is_twice_poisson_through_hbar2() {
        // The even star terms are symmetric, so the commutator has no
        // hbar^0 or hbar^2 part: [f, g]* = 2 hbar {f, g} in the quotient.
        let u = u11();
        let jets = [phi(0)];
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..10 {
            let f = sample_phase_series(u, &jets, 2, 2, &mut rng);
            let g = sample_phase_series(u, &jets, 2, 2, &mut rng);
            let comm = moyal_star(&f, &g, 2)
                .unwrap()
                .add(&moyal_star(&g, &f, 2).unwrap().neg())
                .unwrap();
            let hbar = PhaseSeries::variable(u, &FieldVariable::Hbar, 2);
            let pb2 = poisson_bracket(&f, &g)
                .unwrap()
                .mul(&hbar)
                .unwrap()
                .scale(&BigRational::from_integer(2.into()));
            assert_eq!(comm, pb2);
        }
    }

    #[test]
    fn moyal_associative_through_hbar2() {
        let u = u11();
        let jets = [phi(0)];
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..8 {
            let f = sample_phase_series(u, &jets, 3, 2, &mut rng);
            let g = sample_phase_series(u, &jets, 3, 2, &mut rng);
            let h = sample_phase_series(u, &jets, 3, 2, &mut rng);
            let lhs = moyal_star(&moyal_star(&f, &g, 2).unwrap(), &h, 2).unwrap();
            let rhs = moyal_star(&f, &moyal_star(&g, &h, 2).unwrap(), 2).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn star_projection_classical_holds_quantum_fails() {
        let u = Universe::new(1, 2);
        let jets = vec![phi(0), FieldVariable::jet(vec![0], 2)];
        let allowed: BTreeSet<FieldVariable> = [phi(0)].into();
        // hbar order 0: the star product is the plain product.
        let report = star_support_projection_check(u, &jets, &allowed, 30, 0, 51);
        assert!(report.holds_exactly(), "witness: {:?}", report.witness);
        // hbar order 1: the probe (k, kbar) with k outside breaks it.
        let report = star_support_projection_check(u, &jets, &allowed, 10, 1, 51);
        assert!(!report.holds_exactly());
        let w = report.witness.unwrap();
        assert!(w.context.contains("probe"));
        // full projection: identity operator, trivially fine.
        let all: BTreeSet<FieldVariable> = jets.iter().cloned().collect();
        let report = star_support_projection_check(u, &jets, &all, 10, 1, 51);
        assert!(report.holds_exactly());
    }

    #[test]
    fn phase_json_roundtrip() {
        let u = Universe::new(2, 2);
        let f = PhaseSeries::from_terms(
            u,
            1,
            [
                (vec![(FieldVariable::jet(vec![1, 0], 2), 2)], Coefficient::rat(-3, 4)),
                (vec![(phi(0), 1), (FieldVariable::Hbar, 1)], Coefficient::int(2)),
            ],
        )
        .unwrap();
        let v = f.to_json();
        let back = PhaseSeries::from_json(&v).unwrap();
        assert_eq!(back, f);
    }
}
