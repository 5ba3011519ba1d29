//! Scalar fields on ℝ⁴ as expression trees.
//!
//! Grammar (whitespace insignificant, `#` comments to end of line):
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | power
//! power  := atom ("^" exponent)?
//! atom   := number | var | "(" expr ")" | func "(" expr ")"
//! exponent := ["-"] number ["/" number] | "(" ["-"] number ["/" number] ")"
//! ```
//!
//! Numbers are parsed into exact rationals; floats appear only at evaluation.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::scalar::{exponent_as_i64, parse_rational, DomainError, Func};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(BigRational),
    /// Coordinate index, 0-based (`x1` is `Var(0)`).
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, BigRational),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected {found}, expected {expected}")]
    Unexpected { found: String, expected: &'static str },
    #[error("unknown identifier \"{0}\"")]
    UnknownIdentifier(String),
    #[error("exponent must be a numeric literal")]
    ExponentNotLiteral,
    #[error("malformed number {0:?}")]
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

/// Set of coordinate indices (0-based) an expression mentions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct VarDependence(u8);

impl VarDependence {
    pub fn empty() -> Self {
        VarDependence(0)
    }

    pub fn only(vars: &[usize]) -> Self {
        VarDependence(vars.iter().fold(0, |m, &v| m | (1 << v)))
    }

    pub fn contains(self, var: usize) -> bool {
        self.0 & (1 << var) != 0
    }

    pub fn is_subset(self, other: VarDependence) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: VarDependence) -> Self {
        VarDependence(self.0 | other.0)
    }

    /// 0-based indices in increasing order.
    pub fn indices(self) -> Vec<usize> {
        (0..4).filter(|&v| self.contains(v)).collect()
    }
}

impl fmt::Display for VarDependence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.indices().iter().map(|v| format!("x{}", v + 1)).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

impl Expr {
    pub fn constant(r: BigRational) -> Self {
        Expr::Const(r)
    }

    pub fn int(n: i64) -> Self {
        Expr::Const(BigRational::from_integer(n.into()))
    }

    pub fn var(index: usize) -> Self {
        assert!(index < 4, "coordinate index out of range");
        Expr::Var(index)
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_const_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }

    pub fn pow(self, exponent: BigRational) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Box::new(arg))
    }

    /// Horner form of `Σ coeffs[k]·x^k` in coordinate `var`.
    pub fn polynomial(var: usize, coeffs: &[BigRational]) -> Expr {
        let mut iter = coeffs.iter().rev();
        let Some(lead) = iter.next() else {
            return Expr::zero();
        };
        let mut acc = Expr::Const(lead.clone());
        for c in iter {
            acc = acc.mul(Expr::var(var)).add(Expr::Const(c.clone()));
        }
        acc
    }

    pub fn dependence(&self) -> VarDependence {
        match self {
            Expr::Const(_) => VarDependence::empty(),
            Expr::Var(v) => VarDependence::only(&[*v]),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.dependence().union(b.dependence())
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.dependence(),
        }
    }

    /// Whether evaluation over an exact ring can succeed structurally.
    pub fn is_rational(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_rational() && b.is_rational()
            }
            Expr::Neg(a) => a.is_rational(),
            Expr::Pow(a, e) => e.is_integer() && a.is_rational(),
            Expr::Call(f, a) => *f == Func::Abs && a.is_rational(),
        }
    }

    /// Evaluate at a point whose coordinates live in the ring `S`.
    pub fn eval<S: crate::scalar::Scalar>(&self, point: &[S; 4]) -> Result<S, DomainError> {
        Ok(match self {
            Expr::Const(c) => S::from_rational(c),
            Expr::Var(v) => point[*v].clone(),
            Expr::Add(a, b) => a.eval(point)? + b.eval(point)?,
            Expr::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            Expr::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            Expr::Div(a, b) => a.eval(point)?.try_div(&b.eval(point)?)?,
            Expr::Neg(a) => -a.eval(point)?,
            Expr::Pow(a, e) => {
                let base = a.eval(point)?;
                match exponent_as_i64(e)? {
                    Some(n) => base.powi(n)?,
                    None => base.powr(e)?,
                }
            }
            Expr::Call(f, a) => a.eval(point)?.apply(*f)?,
        })
    }

    /// Replace every `Var(k)` by `subs[k]`.
    pub fn substitute(&self, subs: &[Expr; 4]) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => subs[*v].clone(),
            Expr::Add(a, b) => a.substitute(subs).add(b.substitute(subs)),
            Expr::Sub(a, b) => a.substitute(subs).sub(b.substitute(subs)),
            Expr::Mul(a, b) => a.substitute(subs).mul(b.substitute(subs)),
            Expr::Div(a, b) => a.substitute(subs).div(b.substitute(subs)),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(subs))),
            Expr::Pow(a, e) => a.substitute(subs).pow(e.clone()),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(subs)),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse(s)
    }
}

fn fmt_const(c: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.is_negative() {
        f.write_str("(-")?;
        fmt_const(&-c.clone(), f)?;
        return f.write_str(")");
    }
    if c.is_integer() {
        return write!(f, "{}", c.numer());
    }
    // Terminating decimals print as decimals so they re-parse to the same constant.
    let mut d = c.denom().clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    let two = num_bigint::BigInt::from(2);
    let five = num_bigint::BigInt::from(5);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d.is_one() {
        let digits = twos.max(fives) as usize;
        let scaled = c * BigRational::from_integer(num_traits::pow(num_bigint::BigInt::from(10), digits));
        let s = scaled.to_integer().to_string();
        let s = format!("{s:0>width$}", width = digits + 1);
        let (int, frac) = s.split_at(s.len() - digits);
        write!(f, "{int}.{frac}")
    } else {
        write!(f, "({}/{})", c.numer(), c.denom())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_const(c, f),
            Expr::Var(v) => write!(f, "x{}", v + 1),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, e) => {
                if e.is_integer() {
                    write!(f, "({a}^({}))", e.numer())
                } else {
                    write!(f, "({a}^({}/{}))", e.numer(), e.denom())
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number {n}"),
            Tok::Ident(s) => format!("identifier \"{s}\""),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' => {
                let t = match c {
                    b'+' => Tok::Plus,
                    b'-' => Tok::Minus,
                    b'*' => Tok::Star,
                    b'/' => Tok::Slash,
                    b'^' => Tok::Caret,
                    b'(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push((t, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value = parse_rational(text).ok_or(ParseError {
                    offset: start,
                    kind: ParseErrorKind::BadNumber(text.to_string()),
                })?;
                out.push((Tok::Num(value), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: i,
                    kind: ParseErrorKind::UnexpectedChar(ch),
                });
            }
        }
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Unexpected {
                found: self.peek().describe(),
                expected,
            },
        }
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = lhs.add(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = lhs.sub(self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = lhs.mul(self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = lhs.div(self.factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent = if *self.peek() == Tok::LParen {
            self.bump();
            let e = self.exponent_literal()?;
            self.expect(Tok::RParen, "')'")?;
            e
        } else {
            self.exponent_literal()?
        };
        Ok(base.pow(exponent))
    }

    fn exponent_literal(&mut self) -> Result<BigRational, ParseError> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let offset = self.offset();
        let mut value = match self.bump() {
            Tok::Num(n) => n,
            _ => {
                return Err(ParseError {
                    offset,
                    kind: ParseErrorKind::ExponentNotLiteral,
                })
            }
        };
        // `p/q` belongs to the exponent only when a number follows the slash;
        // otherwise the slash is a division at term level.
        let next_is_num = matches!(self.toks.get(self.pos + 1), Some((Tok::Num(_), _)));
        if *self.peek() == Tok::Slash && next_is_num {
            self.bump();
            let offset = self.offset();
            match self.bump() {
                Tok::Num(d) if !d.is_zero() => value /= d,
                _ => {
                    return Err(ParseError {
                        offset,
                        kind: ParseErrorKind::ExponentNotLiteral,
                    })
                }
            }
        }
        Ok(if neg { -value } else { value })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Const(n))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "'(' after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::call(func, arg));
                }
                match name.as_str() {
                    "x1" => Ok(Expr::Var(0)),
                    "x2" => Ok(Expr::Var(1)),
                    "x3" => Ok(Expr::Var(2)),
                    "x4" => Ok(Expr::Var(3)),
                    _ => Err(ParseError {
                        offset,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    }),
                }
            }
            _ => Err(self.unexpected("a number, variable, function or '('")),
        }
    }
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet2;
    use crate::scalar::q;

    fn c(n: i64, d: i64) -> Expr {
        Expr::Const(q(n, d))
    }

    #[test]
    fn grammar_cases() {
        assert_eq!(
            parse("x1 + 2*x2").unwrap(),
            Expr::var(0).add(c(2, 1).mul(Expr::var(1)))
        );
        assert_eq!(
            parse("0.5*ln(abs(x1-x2))").unwrap(),
            c(1, 2).mul(Expr::call(
                Func::Ln,
                Expr::call(Func::Abs, Expr::var(0).sub(Expr::var(1)))
            ))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        // ^ binds tighter than unary minus
        assert_eq!(
            parse("-x1^2").unwrap(),
            Expr::Neg(Box::new(Expr::var(0).pow(q(2, 1))))
        );
        assert_eq!(
            parse("x1 - x2 - x3").unwrap(),
            Expr::var(0).sub(Expr::var(1)).sub(Expr::var(2))
        );
        assert_eq!(
            parse("x1 / x2 * x3").unwrap(),
            Expr::var(0).div(Expr::var(1)).mul(Expr::var(2))
        );
        assert_eq!(parse("x1^(-3)").unwrap(), Expr::var(0).pow(q(-3, 1)));
        assert_eq!(parse("x1^-3").unwrap(), Expr::var(0).pow(q(-3, 1)));
        assert_eq!(parse("x1^(1/2)").unwrap(), Expr::var(0).pow(q(1, 2)));
        assert_eq!(parse("x1^0.5").unwrap(), Expr::var(0).pow(q(1, 2)));
    }

    #[test]
    fn unknown_identifier() {
        let err = parse("x5+1").unwrap_err();
        assert_eq!(err.offset, 0);
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("x5".into()));
        assert!(err.to_string().contains("\"x5\""));
    }

    #[test]
    fn exponent_must_be_literal() {
        let err = parse("x1^x2").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ExponentNotLiteral);
        assert_eq!(err.offset, 3);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(parse("x1 + ").unwrap_err().offset, 5);
        assert_eq!(parse("(x1").unwrap_err().offset, 3);
        assert_eq!(parse("x1 $ 2").unwrap_err().offset, 3);
        assert!(parse("exp x1").is_err());
        assert!(parse("x1 x2").is_err());
    }

    #[test]
    fn comments_are_ignored() {
        assert_eq!(parse("x1 # the first coordinate\n + 1").unwrap(), Expr::var(0).add(c(1, 1)));
    }

    #[test]
    fn dependence_sets() {
        assert_eq!(parse("x1*x3").unwrap().dependence(), VarDependence::only(&[0, 2]));
        assert_eq!(parse("7").unwrap().dependence(), VarDependence::empty());
        assert_eq!(parse("exp(x2)+x2").unwrap().dependence(), VarDependence::only(&[1]));
    }

    #[test]
    fn eval_float_and_rational() {
        let e = parse("x1*x2").unwrap();
        assert_eq!(e.eval(&[2.0, 3.0, 0.0, 0.0]).unwrap(), 6.0);
        let e = parse("(x1-x2)^(-3)").unwrap();
        let p = [q(1, 2), q(1, 3), q(0, 1), q(0, 1)];
        assert_eq!(e.eval(&p).unwrap(), q(216, 1));
    }

    #[test]
    fn eval_domain_errors() {
        let e = parse("ln(x1)").unwrap();
        let p = Jet2::seed(&[0.0, 1.0, 1.0, 1.0]);
        assert!(e.eval(&p).is_err());
        let e = parse("1/(x1-x2)").unwrap();
        assert_eq!(e.eval(&[1.0, 1.0, 0.0, 0.0]), Err(DomainError::DivisionByZero));
        let e = parse("exp(x1)").unwrap();
        assert!(matches!(
            e.eval(&[q(0, 1), q(0, 1), q(0, 1), q(0, 1)]),
            Err(DomainError::NotExact("exp"))
        ));
        let e = parse("abs(x1)").unwrap();
        assert_eq!(e.eval(&Jet2::seed(&[0.0; 4])), Err(DomainError::AbsAtZero));
    }

    #[test]
    fn printing_round_trips() {
        for src in [
            "x1 + 2*x2",
            "-x1^2 + (x2-x3)^(-3)/5",
            "0.5*ln(abs(x1-x2))",
            "0.125 - 3*x4^(1/3)",
            "sqrt(exp(x1)) * cos(-x2) - sin(x3)",
            "(-x1)^2",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn polynomial_horner() {
        let p = Expr::polynomial(1, &[q(1, 1), q(0, 1), q(2, 1)]);
        assert_eq!(p.eval(&[0.0, 3.0, 0.0, 0.0]).unwrap(), 19.0);
        assert_eq!(p.dependence(), VarDependence::only(&[1]));
        assert!(Expr::polynomial(0, &[]).is_const_zero());
    }

    #[test]
    fn rational_structure() {
        assert!(parse("abs(x1-x2)^3/(1+x4)").unwrap().is_rational());
        assert!(!parse("x1^(1/2)").unwrap().is_rational());
        assert!(!parse("exp(x1)").unwrap().is_rational());
    }
}
