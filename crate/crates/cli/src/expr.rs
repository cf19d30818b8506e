//! The command-line expression language: exact literals, Laurent
//! monomials `z^n`, divided-power atoms `x^k/k!`, the formal parameter
//! q, and the operator forms `P(...)`, `Int(...)`, `Intq(...)`,
//! `Sq(...)`.
//!
//! Standard precedence (unary minus binds tighter than `*`, which binds
//! tighter than `+`/`-`), left associativity, explicit multiplication.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use baxter_core::coeff::Coefficient;
use baxter_core::rb::{integrate, laurent_negative_part, q_integrate, q_shift};
use baxter_core::series::{Basis, Truncation, VarId};
use baxter_core::TruncatedSeries;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub found: String,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at {}:{}: found {}, expected {}",
            self.line,
            self.col,
            self.found,
            self.expected.join(" | ")
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpName {
    NegativePart,
    Integrate,
    QIntegrate,
    QShift,
}

impl OpName {
    fn keyword(&self) -> &'static str {
        match self {
            OpName::NegativePart => "P",
            OpName::Integrate => "Int",
            OpName::QIntegrate => "Intq",
            OpName::QShift => "Sq",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "P" => Some(OpName::NegativePart),
            "Int" => Some(OpName::Integrate),
            "Intq" => Some(OpName::QIntegrate),
            "Sq" => Some(OpName::QShift),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expression {
    Int(BigInt),
    Rat(BigInt, BigInt),
    Q,
    Var(String),
    /// `v^n`; negative exponents only make sense for the Laurent
    /// variable z.
    VarPow(String, i64),
    /// `v^k/k!`, parsed atomically.
    Divided(String, u32),
    Neg(Box<Expression>),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Apply(OpName, Box<Expression>),
}

// ---------------------------------------------------------------------------
// Tokenizer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Bang,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer {}", n),
            Tok::Ident(s) => format!("identifier {:?}", s),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Bang => "'!'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn tokenize(input: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let single = |c: char| match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '!' => Some(Tok::Bang),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
        } else if c.is_whitespace() {
            col += 1;
            i += 1;
        } else if let Some(tok) = single(c) {
            out.push((tok, tline, tcol));
            col += 1;
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
                col += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push((Tok::Int(BigInt::from_str(&digits).expect("digits")), tline, tcol));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
                col += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), tline, tcol));
        } else {
            return Err(ParseError {
                line,
                col,
                found: format!("{:?}", c),
                expected: vec!["token"],
            });
        }
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].1, self.toks[self.pos].2)
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            found: self.peek().describe(),
            expected,
        }
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<(), ParseError> {
        if self.peek() == &tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(vec![what]))
        }
    }
}

pub fn parse_expression(input: &str) -> Result<Expression, ParseError> {
    let mut lex = Lexer {
        toks: tokenize(input)?,
        pos: 0,
    };
    let expr = parse_sum(&mut lex)?;
    if lex.peek() != &Tok::Eof {
        return Err(lex.error(vec!["'+'", "'-'", "'*'", "end of input"]));
    }
    Ok(expr)
}

fn parse_sum(lex: &mut Lexer) -> Result<Expression, ParseError> {
    let mut acc = parse_term(lex)?;
    loop {
        match lex.peek() {
            Tok::Plus => {
                lex.next();
                acc = Expression::Add(Box::new(acc), Box::new(parse_term(lex)?));
            }
            Tok::Minus => {
                lex.next();
                acc = Expression::Sub(Box::new(acc), Box::new(parse_term(lex)?));
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_term(lex: &mut Lexer) -> Result<Expression, ParseError> {
    let mut acc = parse_factor(lex)?;
    while lex.peek() == &Tok::Star {
        lex.next();
        acc = Expression::Mul(Box::new(acc), Box::new(parse_factor(lex)?));
    }
    Ok(acc)
}

fn parse_factor(lex: &mut Lexer) -> Result<Expression, ParseError> {
    if lex.peek() == &Tok::Minus {
        lex.next();
        return Ok(Expression::Neg(Box::new(parse_factor(lex)?)));
    }
    parse_primary(lex)
}

fn parse_exponent(lex: &mut Lexer) -> Result<i64, ParseError> {
    let negative = if lex.peek() == &Tok::Minus {
        lex.next();
        true
    } else {
        false
    };
    match lex.peek().clone() {
        Tok::Int(n) => {
            let v: i64 = n
                .to_string()
                .parse()
                .map_err(|_| lex.error(vec!["small integer exponent"]))?;
            lex.next();
            Ok(if negative { -v } else { v })
        }
        _ => Err(lex.error(vec!["integer exponent"])),
    }
}

fn parse_primary(lex: &mut Lexer) -> Result<Expression, ParseError> {
    match lex.peek().clone() {
        Tok::Int(n) => {
            lex.next();
            // A rational literal is INT '/' INT not followed by '!'.
            if lex.peek() == &Tok::Slash {
                if let Tok::Int(_) = lex.peek_at(1) {
                    if lex.peek_at(2) != &Tok::Bang {
                        lex.next();
                        let Tok::Int(den) = lex.next() else { unreachable!() };
                        return Ok(Expression::Rat(n, den));
                    }
                }
            }
            Ok(Expression::Int(n))
        }
        Tok::Ident(name) => {
            lex.next();
            if name == "q" {
                return Ok(Expression::Q);
            }
            if lex.peek() == &Tok::LParen {
                if let Some(op) = OpName::from_keyword(&name) {
                    lex.next();
                    let inner = parse_sum(lex)?;
                    lex.expect(Tok::RParen, "')'")?;
                    return Ok(Expression::Apply(op, Box::new(inner)));
                }
                return Err(lex.error(vec!["'P'", "'Int'", "'Intq'", "'Sq'"]));
            }
            if lex.peek() == &Tok::Caret {
                lex.next();
                let exp = parse_exponent(lex)?;
                // Divided atom: v^k/k!
                if lex.peek() == &Tok::Slash {
                    if let Tok::Int(k) = lex.peek_at(1).clone() {
                        if lex.peek_at(2) == &Tok::Bang {
                            lex.next();
                            let (line, col) = lex.here();
                            lex.next();
                            lex.next();
                            if exp < 0 || BigInt::from(exp) != k {
                                return Err(ParseError {
                                    line,
                                    col,
                                    found: format!("{}", k),
                                    expected: vec!["factorial index equal to the exponent"],
                                });
                            }
                            return Ok(Expression::Divided(name, exp as u32));
                        }
                    }
                }
                return Ok(Expression::VarPow(name, exp));
            }
            Ok(Expression::Var(name))
        }
        Tok::LParen => {
            lex.next();
            let inner = parse_sum(lex)?;
            lex.expect(Tok::RParen, "')'")?;
            Ok(inner)
        }
        _ => Err(lex.error(vec!["integer", "identifier", "'('", "'-'"])),
    }
}

// ---------------------------------------------------------------------------
// Printer: canonical form, round-trips through the parser.

impl Expression {
    fn precedence(&self) -> u8 {
        match self {
            Expression::Add(..) | Expression::Sub(..) => 1,
            Expression::Mul(..) => 2,
            Expression::Neg(..) => 3,
            _ => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            Expression::Int(n) => write!(f, "{}", n)?,
            Expression::Rat(n, d) => write!(f, "{}/{}", n, d)?,
            Expression::Q => write!(f, "q")?,
            Expression::Var(v) => write!(f, "{}", v)?,
            Expression::VarPow(v, e) => write!(f, "{}^{}", v, e)?,
            Expression::Divided(v, k) => write!(f, "{}^{}/{}!", v, k, k)?,
            Expression::Neg(inner) => {
                write!(f, "-")?;
                inner.fmt_prec(f, 4)?;
            }
            Expression::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Expression::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Expression::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Expression::Apply(op, inner) => {
                write!(f, "{}(", op.keyword())?;
                inner.fmt_prec(f, 1)?;
                write!(f, ")")?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    MixedBases(String),
    NegativeExponent(String),
    WrongOperand { op: &'static str, need: &'static str },
    QDividedVariable(String),
    Coefficient(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::MixedBases(m) => write!(f, "mixed series bases: {}", m),
            EvalError::NegativeExponent(v) => {
                write!(f, "negative exponent on non-Laurent variable {}", v)
            }
            EvalError::WrongOperand { op, need } => {
                write!(f, "{} needs {}", op, need)
            }
            EvalError::QDividedVariable(v) => write!(
                f,
                "q-divided series use the variable x, found {}",
                v
            ),
            EvalError::Coefficient(m) => write!(f, "coefficient error: {}", m),
        }
    }
}

impl std::error::Error for EvalError {}

/// Result of evaluating an expression: a bare coefficient when no series
/// variable occurs, a series otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalResult {
    Coefficient(Coefficient),
    Series(TruncatedSeries),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum World {
    Scalar,
    Laurent,
    Divided,
    QDivided,
}

fn infer_world(expr: &Expression, acc: &mut World, q_seen: &mut bool) -> Result<(), EvalError> {
    let mut join = |w: World| -> Result<(), EvalError> {
        *acc = match (*acc, w) {
            (World::Scalar, w) | (w, World::Scalar) => w,
            (a, b) if a == b => a,
            (World::Divided, World::QDivided) | (World::QDivided, World::Divided) => {
                World::QDivided
            }
            (a, b) => {
                return Err(EvalError::MixedBases(format!("{:?} vs {:?}", a, b)));
            }
        };
        Ok(())
    };
    match expr {
        Expression::Int(_) | Expression::Rat(..) => Ok(()),
        Expression::Q => {
            *q_seen = true;
            Ok(())
        }
        Expression::Var(v) | Expression::VarPow(v, _) | Expression::Divided(v, _) => {
            if v == "z" {
                join(World::Laurent)
            } else {
                join(World::Divided)
            }
        }
        Expression::Neg(a) => infer_world(a, acc, q_seen),
        Expression::Add(a, b) | Expression::Sub(a, b) | Expression::Mul(a, b) => {
            infer_world(a, acc, q_seen)?;
            infer_world(b, acc, q_seen)
        }
        Expression::Apply(op, a) => {
            match op {
                OpName::NegativePart => join(World::Laurent)?,
                OpName::Integrate => join(World::Divided)?,
                OpName::QIntegrate | OpName::QShift => {
                    join(World::Divided)?;
                    *q_seen = true;
                }
            }
            infer_world(a, acc, q_seen)
        }
    }
}

fn as_series(v: EvalResult, basis: Basis) -> TruncatedSeries {
    match v {
        EvalResult::Series(s) => s,
        EvalResult::Coefficient(c) => {
            let one = TruncatedSeries::one(basis, constant_trunc(basis));
            one.scale(&c)
        }
    }
}

fn constant_trunc(basis: Basis) -> Truncation {
    match basis {
        Basis::LaurentZ => Truncation::Laurent {
            lower: 0,
            upper: None,
        },
        _ => Truncation::exact_degree(),
    }
}

/// Evaluates an expression exactly; the result is truncated to the given
/// order for reporting.
pub fn eval_expression(expr: &Expression, order: i64) -> Result<EvalResult, EvalError> {
    let mut world = World::Scalar;
    let mut q_seen = false;
    infer_world(expr, &mut world, &mut q_seen)?;
    if world == World::Divided && q_seen {
        world = World::QDivided;
    }
    let out = eval_in(expr, world)?;
    Ok(match out {
        EvalResult::Series(s) => {
            let trunc = match s.trunc() {
                Truncation::Laurent { lower, upper } => Truncation::Laurent {
                    lower,
                    upper: Some(upper.unwrap_or(order).min(order)),
                },
                Truncation::Degree(b) => Truncation::Degree(Some(b.unwrap_or(order).min(order))),
            };
            EvalResult::Series(s.with_trunc(trunc))
        }
        c => c,
    })
}

fn eval_in(expr: &Expression, world: World) -> Result<EvalResult, EvalError> {
    use EvalResult::{Coefficient as Co, Series as Se};
    let basis = match world {
        World::Scalar => None,
        World::Laurent => Some(Basis::LaurentZ),
        World::Divided => Some(Basis::DividedPower),
        World::QDivided => Some(Basis::QDivided),
    };
    let build_var = |name: &str, exp: i64, divided: Option<u32>| -> Result<EvalResult, EvalError> {
        match world {
            World::Laurent => Ok(Se(TruncatedSeries::laurent_exact([(
                exp,
                Coefficient::one(),
            )]))),
            World::QDivided => {
                if name != "x" {
                    return Err(EvalError::QDividedVariable(name.into()));
                }
                if exp < 0 {
                    return Err(EvalError::NegativeExponent(name.into()));
                }
                let k = exp as u32;
                let coeff = match divided {
                    Some(_) => Coefficient::one(),
                    // Monomial x^k is [k]_q! times the divided generator.
                    None => baxter_core::qcalc::q_factorial(k),
                };
                Ok(Se(TruncatedSeries::qdivided_term(k, coeff)))
            }
            World::Divided => {
                if exp < 0 {
                    return Err(EvalError::NegativeExponent(name.into()));
                }
                let k = exp as u32;
                let coeff = match divided {
                    Some(_) => Coefficient::one(),
                    None => Coefficient::Int(baxter_core::coeff::factorial(k as u64)),
                };
                Ok(Se(TruncatedSeries::divided_term(
                    VarId::intern(name),
                    k,
                    coeff,
                )))
            }
            World::Scalar => unreachable!("variables force a series world"),
        }
    };
    match expr {
        Expression::Int(n) => Ok(Co(Coefficient::Int(n.clone()))),
        Expression::Rat(n, d) => Ok(Co(Coefficient::rat(n.clone(), d.clone()))),
        Expression::Q => Ok(Co(Coefficient::q())),
        Expression::Var(v) => build_var(v, 1, None),
        Expression::VarPow(v, e) => build_var(v, *e, None),
        Expression::Divided(v, k) => build_var(v, *k as i64, Some(*k)),
        Expression::Neg(a) => Ok(match eval_in(a, world)? {
            Co(c) => Co(c.neg()),
            Se(s) => Se(s.neg()),
        }),
        Expression::Add(a, b) | Expression::Sub(a, b) => {
            let mut rhs = eval_in(b, world)?;
            if matches!(expr, Expression::Sub(..)) {
                rhs = match rhs {
                    Co(c) => Co(c.neg()),
                    Se(s) => Se(s.neg()),
                };
            }
            let lhs = eval_in(a, world)?;
            match (lhs, rhs) {
                (Co(x), Co(y)) => x
                    .try_add(&y)
                    .map(Co)
                    .map_err(|e| EvalError::Coefficient(e.to_string())),
                (x, y) => {
                    let b = basis.expect("series world");
                    Ok(Se(as_series(x, b).add(&as_series(y, b))))
                }
            }
        }
        Expression::Mul(a, b) => {
            let lhs = eval_in(a, world)?;
            let rhs = eval_in(b, world)?;
            match (lhs, rhs) {
                (Co(x), Co(y)) => x
                    .try_mul(&y)
                    .map(Co)
                    .map_err(|e| EvalError::Coefficient(e.to_string())),
                (Co(x), Se(s)) | (Se(s), Co(x)) => Ok(Se(s.scale(&x))),
                (Se(x), Se(y)) => Ok(Se(x.mul(&y))),
            }
        }
        Expression::Apply(op, a) => {
            let inner = eval_in(a, world)?;
            match op {
                OpName::NegativePart => {
                    let s = as_series(inner, Basis::LaurentZ);
                    if s.basis() != Basis::LaurentZ {
                        return Err(EvalError::WrongOperand {
                            op: "P",
                            need: "a Laurent series in z",
                        });
                    }
                    Ok(Se(laurent_negative_part(&s)))
                }
                OpName::Integrate => {
                    let s = as_series(inner, Basis::DividedPower);
                    if s.basis() != Basis::DividedPower {
                        return Err(EvalError::WrongOperand {
                            op: "Int",
                            need: "a divided-power series",
                        });
                    }
                    Ok(Se(integrate(&s)))
                }
                OpName::QIntegrate => {
                    let s = as_series(inner, Basis::QDivided);
                    Ok(Se(q_integrate(&s)))
                }
                OpName::QShift => {
                    let s = as_series(inner, Basis::QDivided);
                    Ok(Se(q_shift(&s)))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use baxter_core::series::{Index, MultiIndex};

    fn parse(s: &str) -> Expression {
        parse_expression(s).unwrap()
    }

    #[test]
    fn parses_spec_examples() {
        let e = parse("z^-2 + 3 + z");
        assert_eq!(
            e,
            Expression::Add(
                Box::new(Expression::Add(
                    Box::new(Expression::VarPow("z".into(), -2)),
                    Box::new(Expression::Int(3.into()))
                )),
                Box::new(Expression::Var("z".into()))
            )
        );
        let e = parse("(1+q)*x^2/2!");
        assert_eq!(
            e,
            Expression::Mul(
                Box::new(Expression::Add(
                    Box::new(Expression::Int(1.into())),
                    Box::new(Expression::Q)
                )),
                Box::new(Expression::Divided("x".into(), 2))
            )
        );
        let e = parse("P(x*P(y))");
        assert!(matches!(e, Expression::Apply(OpName::NegativePart, _)));
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(
            parse("-2*x + 3"),
            Expression::Add(
                Box::new(Expression::Mul(
                    Box::new(Expression::Neg(Box::new(Expression::Int(2.into())))),
                    Box::new(Expression::Var("x".into()))
                )),
                Box::new(Expression::Int(3.into()))
            )
        );
    }

    #[test]
    fn rational_vs_divided_lookahead() {
        assert_eq!(parse("2/3"), Expression::Rat(2.into(), 3.into()));
        assert_eq!(parse("x^2/2!"), Expression::Divided("x".into(), 2));
        // Mismatched factorial index is rejected.
        let err = parse_expression("x^2/3!").unwrap_err();
        assert!(err.expected.iter().any(|e| e.contains("factorial")));
    }

    #[test]
    fn error_reports_position_and_expectations() {
        let err = parse_expression("x +").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.col, 4);
        assert!(!err.expected.is_empty());
        let err = parse_expression("foo(x)").unwrap_err();
        assert!(err.expected.contains(&"'P'"));
    }

    #[test]
    fn eval_laurent() {
        let e = parse("(z^-1 + z) * z^-1");
        let EvalResult::Series(s) = eval_expression(&e, 8).unwrap() else {
            panic!()
        };
        assert_eq!(s.coeff(&Index::Degree(-2)), Coefficient::one());
        assert_eq!(s.coeff(&Index::Degree(0)), Coefficient::one());
        // P keeps the pole part.
        let e = parse("P(z^-2 + 3 + z)");
        let EvalResult::Series(s) = eval_expression(&e, 8).unwrap() else {
            panic!()
        };
        assert_eq!(s.num_terms(), 1);
    }

    #[test]
    fn eval_divided_and_qdivided() {
        let e = parse("x*x");
        let EvalResult::Series(s) = eval_expression(&e, 8).unwrap() else {
            panic!()
        };
        let x = VarId::intern("x");
        assert_eq!(
            s.coeff(&Index::Multi(MultiIndex::from_pairs([(x, 2)]))),
            Coefficient::int(2)
        );
        // With q in a coefficient the same atom lands in the q-divided basis.
        let e = parse("(1+q)*x^2/2!");
        let EvalResult::Series(s) = eval_expression(&e, 8).unwrap() else {
            panic!()
        };
        assert_eq!(s.basis(), Basis::QDivided);
        assert_eq!(s.coeff(&Index::Degree(2)), "1 + q".parse().unwrap());
        // Intq(1) = x.
        let e = parse("Intq(1)");
        let EvalResult::Series(s) = eval_expression(&e, 8).unwrap() else {
            panic!()
        };
        assert_eq!(s.coeff(&Index::Degree(1)), Coefficient::one());
    }

    #[test]
    fn eval_scalar() {
        let e = parse("2/3 + 1/6");
        assert_eq!(
            eval_expression(&e, 8).unwrap(),
            EvalResult::Coefficient(Coefficient::rat(5, 6))
        );
    }

    #[test]
    fn eval_rejects_mixed_bases() {
        let e = parse("z + x");
        assert!(matches!(
            eval_expression(&e, 8),
            Err(EvalError::MixedBases(_))
        ));
    }

    #[test]
    fn printer_roundtrip_on_examples() {
        for src in [
            "z^-2 + 3 + z",
            "(1 + q)*x^2/2!",
            "P(x*P(y))",
            "-2*x + 3",
            "Int(x^2/2!) - Sq(x)",
            "1/2*x - (x + y)*z",
        ] {
            let e = parse(src);
            let printed = e.to_string();
            assert_eq!(parse(&printed), e, "printed form: {}", printed);
        }
    }
}
