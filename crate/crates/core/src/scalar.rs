//! Scalar rings the expression evaluator and curvature engine run over.
//!
//! Two base rings are provided: `f64` and exact [`BigRational`]. The jet types in
//! [`crate::jet`] lift any base ring to one that also carries derivatives.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Unary functions callable from expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Abs,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} evaluated outside its domain")]
    OutOfDomain(&'static str),
    #[error("abs is not differentiable at zero")]
    AbsAtZero,
    #[error("{0} is not available in the exact rational ring")]
    NotExact(&'static str),
    #[error("exponent {0} does not fit in a machine integer")]
    ExponentTooLarge(String),
}

/// Commutative ring operations shared by every numeric type in the crate,
/// including first-order jets.
pub trait Ring:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(r: &BigRational) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn zero() -> Self {
        Self::from_i64(0)
    }

    fn one() -> Self {
        Self::from_i64(1)
    }

    fn half() -> Self {
        Self::from_rational(&BigRational::new(1.into(), 2.into()))
    }
}

/// A ring with division and the elementary functions, possibly partial.
pub trait Scalar: Ring + PartialEq {
    /// `true` for rings where every operation is exact.
    const EXACT: bool;

    /// Whether the leading value is exactly zero.
    fn is_zero(&self) -> bool;

    /// Sign of the leading value, `None` when undefined (NaN).
    fn signum(&self) -> Option<i8>;

    fn recip(&self) -> Result<Self, DomainError>;

    fn try_div(&self, rhs: &Self) -> Result<Self, DomainError> {
        Ok(self.clone() * rhs.recip()?)
    }

    fn powi(&self, n: i64) -> Result<Self, DomainError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * sq.clone();
            }
            e >>= 1;
            if e > 0 {
                sq = sq.clone() * sq;
            }
        }
        Ok(acc)
    }

    /// Non-integer power; defined only for a positive base.
    fn powr(&self, r: &BigRational) -> Result<Self, DomainError>;

    fn apply(&self, f: Func) -> Result<Self, DomainError>;

    /// Leading value as a float, for reporting.
    fn to_f64(&self) -> f64;
}

/// Base rings with a total order and an absolute value.
pub trait Real: Scalar + PartialOrd {
    fn abs(&self) -> Self;
}

pub(crate) fn exponent_as_i64(r: &BigRational) -> Result<Option<i64>, DomainError> {
    if !r.is_integer() {
        return Ok(None);
    }
    r.to_integer()
        .to_i64()
        .map(Some)
        .ok_or_else(|| DomainError::ExponentTooLarge(r.to_string()))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Keep 64 leading bits of each side and carry the binary exponent separately.
            let sn = r.numer().bits().saturating_sub(64);
            let sd = r.denom().bits().saturating_sub(64);
            let n = (r.numer() >> sn).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> sd).to_f64().unwrap_or(f64::NAN);
            let shift = sn as i64 - sd as i64;
            (n / d) * 2f64.powi(shift.clamp(-4000, 4000) as i32)
        }
    }
}

impl Ring for f64 {
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }

    fn from_i64(n: i64) -> Self {
        n as f64
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn signum(&self) -> Option<i8> {
        if self.is_nan() {
            None
        } else if *self > 0.0 {
            Some(1)
        } else if *self < 0.0 {
            Some(-1)
        } else {
            Some(0)
        }
    }

    fn recip(&self) -> Result<Self, DomainError> {
        if *self == 0.0 {
            Err(DomainError::DivisionByZero)
        } else {
            Ok(1.0 / self)
        }
    }

    fn powi(&self, n: i64) -> Result<Self, DomainError> {
        if n < 0 && *self == 0.0 {
            return Err(DomainError::DivisionByZero);
        }
        match i32::try_from(n) {
            Ok(k) => Ok(f64::powi(*self, k)),
            Err(_) => Ok(f64::powf(*self, n as f64)),
        }
    }

    fn powr(&self, r: &BigRational) -> Result<Self, DomainError> {
        if *self <= 0.0 {
            return Err(DomainError::OutOfDomain("non-integer power"));
        }
        Ok((rational_to_f64(r) * self.ln()).exp())
    }

    fn apply(&self, f: Func) -> Result<Self, DomainError> {
        let x = *self;
        Ok(match f {
            Func::Exp => x.exp(),
            Func::Ln => {
                if x <= 0.0 {
                    return Err(DomainError::OutOfDomain("ln"));
                }
                x.ln()
            }
            Func::Abs => x.abs(),
            Func::Sqrt => {
                if x < 0.0 {
                    return Err(DomainError::OutOfDomain("sqrt"));
                }
                x.sqrt()
            }
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
        })
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Real for f64 {
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl Ring for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }

    fn one() -> Self {
        <BigRational as One>::one()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn signum(&self) -> Option<i8> {
        Some(if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        })
    }

    fn recip(&self) -> Result<Self, DomainError> {
        if Zero::is_zero(self) {
            Err(DomainError::DivisionByZero)
        } else {
            Ok(BigRational::recip(self))
        }
    }

    fn powr(&self, r: &BigRational) -> Result<Self, DomainError> {
        match exponent_as_i64(r)? {
            Some(n) => self.powi(n),
            None => Err(DomainError::NotExact("non-integer power")),
        }
    }

    fn apply(&self, f: Func) -> Result<Self, DomainError> {
        match f {
            Func::Abs => Ok(Signed::abs(self)),
            other => Err(DomainError::NotExact(other.name())),
        }
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
}

impl Real for BigRational {
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

/// Parse `p/q`, a decimal such as `-0.25`, or scientific `1e-3` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if Zero::is_zero(&q) {
            return None;
        }
        return Some(p / q);
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Some(value)
}

/// Convenience constructor for small rationals.
pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Format a rational as `p/q` (always with a denominator).
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
