//! Exact coefficient arithmetic: arbitrary-precision integers, rationals,
//! and integer polynomials in the formal parameter `q`.
//!
//! Invariants:
//! - `Rat` is always in lowest terms with positive denominator (guaranteed
//!   by `BigRational`).
//! - `QPoly` stores no zero coefficients and no negative exponents.
//! - `Int` promotes to either `Rat` or `QPoly`; `Rat` and `QPoly` never mix.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("incompatible coefficient variants: {0} and {1}")]
    IncompatibleVariants(&'static str, &'static str),
    #[error("cannot parse coefficient from {0:?}: {1}")]
    Parse(String, String),
}

/// Integer polynomial in `q` with exponent -> coefficient map.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPoly {
    terms: BTreeMap<u32, BigInt>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        QPoly { terms }
    }

    /// The monomial `c * q^e`.
    pub fn monomial(c: impl Into<BigInt>, e: u32) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        QPoly { terms }
    }

    /// The polynomial `q`.
    pub fn q() -> Self {
        QPoly::monomial(1, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: u32) -> BigInt {
        self.terms.get(&e).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigInt)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    fn insert_add(&mut self, e: u32, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.insert_add(e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        QPoly {
            terms: self.terms.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = QPoly::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                out.insert_add(e1 + e2, c1 * c2);
            }
        }
        out
    }

    /// Substitutes an exact integer for `q`.
    pub fn eval(&self, q0: &BigInt) -> BigInt {
        // Horner over the sparse map, highest exponent first.
        let mut acc = BigInt::zero();
        let mut prev_exp: Option<u32> = None;
        for (&e, c) in self.terms.iter().rev() {
            if let Some(p) = prev_exp {
                acc *= q0.pow(p - e);
            }
            acc += c;
            prev_exp = Some(e);
        }
        if let Some(p) = prev_exp {
            acc *= q0.pow(p);
        }
        acc
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = !abs.is_one() || e == 0;
            if show_coeff {
                write!(f, "{}", abs)?;
            }
            if e > 0 {
                if show_coeff {
                    write!(f, "*")?;
                }
                if e == 1 {
                    write!(f, "q")?;
                } else {
                    write!(f, "q^{}", e)?;
                }
            }
        }
        Ok(())
    }
}

/// An exact ring element: integer, rational, or integer polynomial in `q`.
#[derive(Debug, Clone)]
pub enum Coefficient {
    Int(BigInt),
    Rat(BigRational),
    QPoly(QPoly),
}

impl Coefficient {
    pub fn int(n: impl Into<BigInt>) -> Self {
        Coefficient::Int(n.into())
    }

    pub fn rat(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Coefficient::Rat(BigRational::new(num.into(), den.into()))
    }

    pub fn q() -> Self {
        Coefficient::QPoly(QPoly::q())
    }

    pub fn zero() -> Self {
        Coefficient::Int(BigInt::zero())
    }

    pub fn one() -> Self {
        Coefficient::Int(BigInt::one())
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Coefficient::Int(_) => "Int",
            Coefficient::Rat(_) => "Rat",
            Coefficient::QPoly(_) => "QPoly",
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Int(n) => n.is_zero(),
            Coefficient::Rat(r) => r.is_zero(),
            Coefficient::QPoly(p) => p.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coefficient::Int(n) => n.is_one(),
            Coefficient::Rat(r) => r.is_one(),
            Coefficient::QPoly(p) => p.terms.len() == 1 && p.coeff(0).is_one(),
        }
    }

    pub fn to_rat(&self) -> Result<BigRational, CoeffError> {
        match self {
            Coefficient::Int(n) => Ok(BigRational::from_integer(n.clone())),
            Coefficient::Rat(r) => Ok(r.clone()),
            Coefficient::QPoly(_) => Err(CoeffError::IncompatibleVariants("QPoly", "Rat")),
        }
    }

    pub fn to_qpoly(&self) -> Result<QPoly, CoeffError> {
        match self {
            Coefficient::Int(n) => Ok(QPoly::constant(n.clone())),
            Coefficient::QPoly(p) => Ok(p.clone()),
            Coefficient::Rat(_) => Err(CoeffError::IncompatibleVariants("Rat", "QPoly")),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, CoeffError> {
        use Coefficient::*;
        Ok(match (self, other) {
            (Int(a), Int(b)) => Int(a + b),
            (Rat(_), _) | (_, Rat(_)) => Rat(self.to_rat()? + other.to_rat()?),
            (QPoly(_), _) | (_, QPoly(_)) => QPoly(self.to_qpoly()?.add(&other.to_qpoly()?)),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, CoeffError> {
        use Coefficient::*;
        Ok(match (self, other) {
            (Int(a), Int(b)) => Int(a * b),
            (Rat(_), _) | (_, Rat(_)) => Rat(self.to_rat()? * other.to_rat()?),
            (QPoly(_), _) | (_, QPoly(_)) => QPoly(self.to_qpoly()?.mul(&other.to_qpoly()?)),
        })
    }

    pub fn neg(&self) -> Self {
        match self {
            Coefficient::Int(n) => Coefficient::Int(-n),
            Coefficient::Rat(r) => Coefficient::Rat(-r),
            Coefficient::QPoly(p) => Coefficient::QPoly(p.neg()),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("coefficient add: variant mismatch")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("coefficient mul: variant mismatch")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Substitutes `q = q0`. Integers pass through unchanged.
    pub fn eval_q(&self, q0: &BigInt) -> Result<Self, CoeffError> {
        match self {
            Coefficient::Int(n) => Ok(Coefficient::Int(n.clone())),
            Coefficient::QPoly(p) => Ok(Coefficient::Int(p.eval(q0))),
            Coefficient::Rat(_) => Err(CoeffError::IncompatibleVariants("Rat", "QPoly")),
        }
    }

    /// Rational with denominator 1 demotes to Int; everything else unchanged.
    pub fn normalize_int(self) -> Self {
        match self {
            Coefficient::Rat(r) if r.is_integer() => Coefficient::Int(r.to_integer()),
            c => c,
        }
    }
}

impl PartialEq for Coefficient {
    /// Promotion-aware equality; `Rat` never equals `QPoly`.
    fn eq(&self, other: &Self) -> bool {
        use Coefficient::*;
        match (self, other) {
            (Int(a), Int(b)) => a == b,
            (Rat(a), Rat(b)) => a == b,
            (QPoly(a), QPoly(b)) => a == b,
            (Int(a), Rat(b)) | (Rat(b), Int(a)) => &BigRational::from_integer(a.clone()) == b,
            (Int(a), QPoly(b)) | (QPoly(b), Int(a)) => &crate::coeff::QPoly::constant(a.clone()) == b,
            (Rat(_), QPoly(_)) | (QPoly(_), Rat(_)) => false,
        }
    }
}

impl Eq for Coefficient {}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Int(n) => write!(f, "{}", n),
            Coefficient::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Coefficient::QPoly(p) => write!(f, "{}", p),
        }
    }
}

impl FromStr for Coefficient {
    type Err = CoeffError;

    /// Canonical textual form: decimal integers, rationals as `a/b`,
    /// q-polynomials as `c0 + c1*q + c2*q^2` with zero terms omitted.
    fn from_str(s: &str) -> Result<Self, CoeffError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(CoeffError::Parse(s.into(), "empty string".into()));
        }
        if s.contains('q') {
            return parse_qpoly(s).map(Coefficient::QPoly);
        }
        if let Some((num, den)) = s.split_once('/') {
            let num = BigInt::from_str(num.trim())
                .map_err(|e| CoeffError::Parse(s.into(), e.to_string()))?;
            let den = BigInt::from_str(den.trim())
                .map_err(|e| CoeffError::Parse(s.into(), e.to_string()))?;
            if den.is_zero() {
                return Err(CoeffError::Parse(s.into(), "zero denominator".into()));
            }
            return Ok(Coefficient::Rat(BigRational::new(num, den)));
        }
        BigInt::from_str(s)
            .map(Coefficient::Int)
            .map_err(|e| CoeffError::Parse(s.into(), e.to_string()))
    }
}

fn parse_qpoly(s: &str) -> Result<QPoly, CoeffError> {
    let err = |msg: &str| CoeffError::Parse(s.into(), msg.into());
    let mut out = QPoly::zero();
    // Split on +/- while keeping signs; normalize " - " into "+-".
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut sign_neg = false;
    let mut chars = s.chars().peekable();
    // Leading sign.
    if let Some(&c) = chars.peek() {
        if c == '-' {
            sign_neg = true;
            chars.next();
        } else if c == '+' {
            chars.next();
        }
    }
    for c in chars {
        match c {
            '+' | '-' => {
                terms.push((sign_neg, current.trim().to_string()));
                current = String::new();
                sign_neg = c == '-';
            }
            _ => current.push(c),
        }
    }
    terms.push((sign_neg, current.trim().to_string()));

    for (neg, term) in terms {
        if term.is_empty() {
            return Err(err("empty term"));
        }
        let (coeff_str, q_part) = match term.split_once('*') {
            Some((c, rest)) => (c.trim().to_string(), Some(rest.trim().to_string())),
            None => {
                if term.starts_with('q') {
                    ("1".to_string(), Some(term.clone()))
                } else {
                    (term.clone(), None)
                }
            }
        };
        let mut c = BigInt::from_str(&coeff_str).map_err(|e| err(&e.to_string()))?;
        if neg {
            c = -c;
        }
        let e = match q_part {
            None => 0,
            Some(qp) => {
                if qp == "q" {
                    1
                } else if let Some(exp) = qp.strip_prefix("q^") {
                    exp.parse::<u32>().map_err(|e| err(&e.to_string()))?
                } else {
                    return Err(err("expected q or q^<n>"));
                }
            }
        };
        out.insert_add(e, c);
    }
    Ok(out)
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut res = BigInt::one();
    for i in 0..k {
        res = res * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    res
}

/// Exact factorial.
pub fn factorial(n: u64) -> BigInt {
    let mut res = BigInt::one();
    for i in 2..=n {
        res *= BigInt::from(i);
    }
    res
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_normalization() {
        let a = Coefficient::rat(2, 3);
        let b = Coefficient::rat(1, 6);
        assert_eq!(a.add(&b), Coefficient::rat(5, 6));
    }

    #[test]
    fn qpoly_square() {
        let p = Coefficient::one().add(&Coefficient::q());
        let sq = p.mul(&p);
        let expected = parse_qpoly("1 + 2*q + q^2").unwrap();
        assert_eq!(sq, Coefficient::QPoly(expected));
    }

    #[test]
    fn zero_identification_across_promotion() {
        let r = Coefficient::rat(0, 5);
        assert_eq!(r, Coefficient::int(0));
        assert!(r.is_zero());
    }

    #[test]
    fn rat_qpoly_mix_is_an_error() {
        let r = Coefficient::rat(1, 2);
        let p = Coefficient::q();
        assert!(matches!(
            r.try_add(&p),
            Err(CoeffError::IncompatibleVariants(_, _))
        ));
        assert!(matches!(
            p.try_mul(&r),
            Err(CoeffError::IncompatibleVariants(_, _))
        ));
    }

    #[test]
    fn eval_q_examples() {
        // 1 + q + q^2 at q = 1 recovers the classical count.
        let p = parse_qpoly("1 + q + q^2").unwrap();
        assert_eq!(p.eval(&BigInt::from(1)), BigInt::from(3));
        let p = parse_qpoly("1 + q").unwrap();
        assert_eq!(p.eval(&BigInt::from(0)), BigInt::from(1));
        let p = parse_qpoly("q^2").unwrap();
        assert_eq!(p.eval(&BigInt::from(2)), BigInt::from(4));
    }

    #[test]
    fn display_roundtrip() {
        for s in [
            "-7",
            "5/3",
            "-2/7",
            "1 + q + 2*q^2 + q^3 + q^4",
            "1 - 2*q + q^2",
            "-q",
            "0",
            "3*q^5",
        ] {
            let c: Coefficient = s.parse().unwrap();
            assert_eq!(c.to_string(), s, "canonical form should round-trip");
        }
    }

    #[test]
    fn binomial_and_factorial() {
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(10, 5), BigInt::from(252));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(factorial(6), BigInt::from(720));
    }
}
