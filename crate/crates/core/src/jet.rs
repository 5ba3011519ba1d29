//! Truncated Taylor jets over ℝ⁴.
//!
//! [`Jet2`] carries a value, the gradient and the Hessian of a scalar field at a
//! point; arithmetic propagates them with the Leibniz and Faà di Bruno rules cut
//! at order two, so results are exact up to the base ring's own rounding.
//! [`Jet1`] is the order-one counterpart used for Christoffel symbols, which
//! need one derivative less than the metric.

use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;

use crate::expr::Expr;
use crate::scalar::{exponent_as_i64, DomainError, Func, Ring, Scalar};
use crate::Error;

pub const DIM: usize = 4;

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * DIM - a * a.saturating_sub(1) / 2 + (b - a)
}

/// Order-2 jet. The Hessian is stored as its upper triangle, so symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2<S> {
    pub value: S,
    pub grad: [S; DIM],
    hess: [S; 10],
}

impl<S: Ring> Jet2<S> {
    pub fn constant(value: S) -> Self {
        Jet2 {
            value,
            grad: std::array::from_fn(|_| S::zero()),
            hess: std::array::from_fn(|_| S::zero()),
        }
    }

    /// Seed jet for coordinate `x^{k+1}` (0-based `k`).
    pub fn variable(k: usize, value: S) -> Self {
        let mut jet = Self::constant(value);
        jet.grad[k] = S::one();
        jet
    }

    /// Seed all four coordinates of a point.
    pub fn seed(point: &[S; DIM]) -> [Self; DIM] {
        std::array::from_fn(|k| Self::variable(k, point[k].clone()))
    }

    pub fn from_parts(value: S, grad: [S; DIM], hess: impl Fn(usize, usize) -> S) -> Self {
        let mut h: [S; 10] = std::array::from_fn(|_| S::zero());
        for i in 0..DIM {
            for j in i..DIM {
                h[tri(i, j)] = hess(i, j);
            }
        }
        Jet2 {
            value,
            grad,
            hess: h,
        }
    }

    pub fn hess(&self, i: usize, j: usize) -> &S {
        &self.hess[tri(i, j)]
    }

    pub fn hessian(&self) -> [[S; DIM]; DIM] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.hess(i, j).clone()))
    }

    /// Compose with a univariate function given `f(a)`, `f'(a)`, `f''(a)`.
    pub fn compose(&self, f0: S, f1: S, f2: S) -> Self {
        let grad = std::array::from_fn(|i| f1.clone() * self.grad[i].clone());
        let mut hess: [S; 10] = std::array::from_fn(|_| S::zero());
        for i in 0..DIM {
            for j in i..DIM {
                hess[tri(i, j)] = f2.clone() * self.grad[i].clone() * self.grad[j].clone()
                    + f1.clone() * self.hess(i, j).clone();
            }
        }
        Jet2 {
            value: f0,
            grad,
            hess,
        }
    }

    /// The first partial derivative along `a` as an order-1 jet.
    pub fn partial(&self, a: usize) -> Jet1<S> {
        Jet1 {
            value: self.grad[a].clone(),
            grad: std::array::from_fn(|b| self.hess(a, b).clone()),
        }
    }

    /// Drop the Hessian.
    pub fn truncate(&self) -> Jet1<S> {
        Jet1 {
            value: self.value.clone(),
            grad: self.grad.clone(),
        }
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Jet2<T> {
        Jet2 {
            value: f(&self.value),
            grad: std::array::from_fn(|i| f(&self.grad[i])),
            hess: std::array::from_fn(|i| f(&self.hess[i])),
        }
    }
}

impl<S: Ring> Add for Jet2<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Jet2 {
            value: self.value + rhs.value,
            grad: std::array::from_fn(|i| self.grad[i].clone() + rhs.grad[i].clone()),
            hess: std::array::from_fn(|i| self.hess[i].clone() + rhs.hess[i].clone()),
        }
    }
}

impl<S: Ring> Sub for Jet2<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Jet2 {
            value: self.value - rhs.value,
            grad: std::array::from_fn(|i| self.grad[i].clone() - rhs.grad[i].clone()),
            hess: std::array::from_fn(|i| self.hess[i].clone() - rhs.hess[i].clone()),
        }
    }
}

impl<S: Ring> Neg for Jet2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x.clone())
    }
}

impl<S: Ring> Mul for Jet2<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let grad = std::array::from_fn(|i| {
            self.grad[i].clone() * rhs.value.clone() + self.value.clone() * rhs.grad[i].clone()
        });
        let mut hess: [S; 10] = std::array::from_fn(|_| S::zero());
        for i in 0..DIM {
            for j in i..DIM {
                let t = tri(i, j);
                hess[t] = self.hess[t].clone() * rhs.value.clone()
                    + self.value.clone() * rhs.hess[t].clone()
                    + self.grad[i].clone() * rhs.grad[j].clone()
                    + self.grad[j].clone() * rhs.grad[i].clone();
            }
        }
        Jet2 {
            value: self.value * rhs.value,
            grad,
            hess,
        }
    }
}

impl<S: Ring> Ring for Jet2<S> {
    fn from_rational(r: &BigRational) -> Self {
        Jet2::constant(S::from_rational(r))
    }
}

impl<S: Scalar> Scalar for Jet2<S> {
    const EXACT: bool = S::EXACT;

    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn signum(&self) -> Option<i8> {
        self.value.signum()
    }

    fn recip(&self) -> Result<Self, DomainError> {
        let inv = self.value.recip()?;
        let inv2 = inv.clone() * inv.clone();
        let two = S::from_i64(2);
        Ok(self.compose(inv.clone(), -inv2.clone(), two * inv2 * inv))
    }

    fn powi(&self, n: i64) -> Result<Self, DomainError> {
        match n {
            0 => return Ok(Self::one()),
            1 => return Ok(self.clone()),
            _ => {}
        }
        // f'' needs a^{n-2}; compute from the lowest power to avoid dividing by a.
        let low = self.value.powi(n - 2)?;
        let f1 = S::from_i64(n) * low.clone() * self.value.clone();
        let f2 = S::from_i64(n) * S::from_i64(n - 1) * low.clone();
        let f0 = low * self.value.clone() * self.value.clone();
        Ok(self.compose(f0, f1, f2))
    }

    fn powr(&self, r: &BigRational) -> Result<Self, DomainError> {
        if let Some(n) = exponent_as_i64(r)? {
            return self.powi(n);
        }
        if self.value.signum() != Some(1) {
            return Err(DomainError::OutOfDomain("non-integer power"));
        }
        let rv = S::from_rational(r);
        let f0 = self.value.powr(r)?;
        let inv = self.value.recip()?;
        let f1 = rv.clone() * f0.clone() * inv.clone();
        let f2 = rv.clone() * (rv - S::one()) * f0.clone() * inv.clone() * inv;
        Ok(self.compose(f0, f1, f2))
    }

    fn apply(&self, f: Func) -> Result<Self, DomainError> {
        let a = &self.value;
        match f {
            Func::Exp => {
                let e = a.apply(Func::Exp)?;
                Ok(self.compose(e.clone(), e.clone(), e))
            }
            Func::Ln => {
                if a.signum() != Some(1) {
                    return Err(DomainError::OutOfDomain("ln"));
                }
                let l = a.apply(Func::Ln)?;
                let inv = a.recip()?;
                Ok(self.compose(l, inv.clone(), -(inv.clone() * inv)))
            }
            Func::Abs => match a.signum() {
                Some(1) => Ok(self.clone()),
                Some(-1) => Ok(-self.clone()),
                _ => Err(DomainError::AbsAtZero),
            },
            Func::Sqrt => {
                if a.signum() != Some(1) {
                    return Err(DomainError::OutOfDomain("sqrt"));
                }
                let s = a.apply(Func::Sqrt)?;
                let f1 = (S::from_i64(2) * s.clone()).recip()?;
                let f2 = -(S::from_i64(4) * a.clone() * s.clone()).recip()?;
                Ok(self.compose(s, f1, f2))
            }
            Func::Sin => {
                let s = a.apply(Func::Sin)?;
                let c = a.apply(Func::Cos)?;
                Ok(self.compose(s.clone(), c, -s))
            }
            Func::Cos => {
                let s = a.apply(Func::Sin)?;
                let c = a.apply(Func::Cos)?;
                Ok(self.compose(c.clone(), -s, -c))
            }
        }
    }

    fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// Order-1 jet: value and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1<S> {
    pub value: S,
    pub grad: [S; DIM],
}

impl<S: Ring> Jet1<S> {
    pub fn constant(value: S) -> Self {
        Jet1 {
            value,
            grad: std::array::from_fn(|_| S::zero()),
        }
    }
}

impl<S: Scalar> Jet1<S> {
    pub fn try_div(&self, rhs: &Self) -> Result<Self, DomainError> {
        let inv = rhs.value.recip()?;
        let value = self.value.clone() * inv.clone();
        let grad = std::array::from_fn(|i| {
            (self.grad[i].clone() - value.clone() * rhs.grad[i].clone()) * inv.clone()
        });
        Ok(Jet1 { value, grad })
    }
}

impl<S: Ring> Add for Jet1<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Jet1 {
            value: self.value + rhs.value,
            grad: std::array::from_fn(|i| self.grad[i].clone() + rhs.grad[i].clone()),
        }
    }
}

impl<S: Ring> Sub for Jet1<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Jet1 {
            value: self.value - rhs.value,
            grad: std::array::from_fn(|i| self.grad[i].clone() - rhs.grad[i].clone()),
        }
    }
}

impl<S: Ring> Neg for Jet1<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet1 {
            value: -self.value,
            grad: std::array::from_fn(|i| -self.grad[i].clone()),
        }
    }
}

impl<S: Ring> Mul for Jet1<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Jet1 {
            grad: std::array::from_fn(|i| {
                self.grad[i].clone() * rhs.value.clone() + self.value.clone() * rhs.grad[i].clone()
            }),
            value: self.value * rhs.value,
        }
    }
}

impl<S: Ring> Ring for Jet1<S> {
    fn from_rational(r: &BigRational) -> Self {
        Jet1::constant(S::from_rational(r))
    }
}

/// Largest discrepancy between the jet derivatives of `e` at `point` and
/// central-difference estimates with step `h`.
pub fn fd_check(e: &Expr, point: &[f64; DIM], h: f64) -> Result<f64, Error> {
    let jet = e.eval(&Jet2::seed(point))?;
    let f = |dx: [f64; DIM]| -> Result<f64, Error> {
        let p: [f64; DIM] = std::array::from_fn(|i| point[i] + dx[i]);
        Ok(e.eval(&p)?)
    };
    let step = |pairs: &[(usize, f64)]| {
        let mut d = [0.0; DIM];
        for &(i, s) in pairs {
            d[i] += s * h;
        }
        d
    };
    let f0 = f([0.0; DIM])?;
    let mut worst: f64 = (f0 - jet.value).abs();
    for a in 0..DIM {
        let fp = f(step(&[(a, 1.0)]))?;
        let fm = f(step(&[(a, -1.0)]))?;
        worst = worst.max(((fp - fm) / (2.0 * h) - jet.grad[a]).abs());
        worst = worst.max(((fp - 2.0 * f0 + fm) / (h * h) - jet.hess(a, a)).abs());
        for b in (a + 1)..DIM {
            let fpp = f(step(&[(a, 1.0), (b, 1.0)]))?;
            let fpm = f(step(&[(a, 1.0), (b, -1.0)]))?;
            let fmp = f(step(&[(a, -1.0), (b, 1.0)]))?;
            let fmm = f(step(&[(a, -1.0), (b, -1.0)]))?;
            let mixed = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            worst = worst.max((mixed - jet.hess(a, b)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn at(x: [f64; 4]) -> [Jet2<f64>; 4] {
        Jet2::seed(&x)
    }

    #[test]
    fn triangle_index_covers_ten_slots() {
        let mut seen = [false; 10];
        for i in 0..4 {
            for j in i..4 {
                assert!(!seen[tri(i, j)]);
                seen[tri(i, j)] = true;
                assert_eq!(tri(i, j), tri(j, i));
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn product_rule() {
        let [x1, x2, _, _] = at([2.0, 3.0, 0.0, 0.0]);
        let p = x1 * x2;
        assert_eq!(p.value, 6.0);
        assert_eq!(p.grad, [3.0, 2.0, 0.0, 0.0]);
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i, j) == (0, 1) || (i, j) == (1, 0) { 1.0 } else { 0.0 };
                assert_eq!(*p.hess(i, j), want);
            }
        }
    }

    #[test]
    fn sum_of_same_seed() {
        let [x1, ..] = at([5.0, 0.0, 0.0, 0.0]);
        let s = x1.clone() + x1;
        assert_eq!(s.value, 10.0);
        assert_eq!(s.grad, [2.0, 0.0, 0.0, 0.0]);
        assert!(s.hessian().iter().flatten().all(|h| *h == 0.0));
    }

    #[test]
    fn reciprocal_of_zero_fails() {
        let zero = Jet2::constant(0.0f64);
        assert_eq!(Jet2::<f64>::one().try_div(&zero), Err(DomainError::DivisionByZero));
    }

    #[test]
    fn exp_at_origin() {
        let [x1, ..] = at([0.0; 4]);
        let e = x1.apply(Func::Exp).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.grad, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(*e.hess(0, 0), 1.0);
    }

    #[test]
    fn square_of_difference_is_exact() {
        let [x1, x2, ..] = Jet2::seed(&[q(1, 1), q(3, 1), q(0, 1), q(0, 1)]);
        let d = (x1 - x2).powi(2).unwrap();
        assert_eq!(d.value, q(4, 1));
        assert_eq!(d.grad, [q(-4, 1), q(4, 1), q(0, 1), q(0, 1)]);
        assert_eq!(*d.hess(0, 0), q(2, 1));
        assert_eq!(*d.hess(0, 1), q(-2, 1));
        assert_eq!(*d.hess(1, 1), q(2, 1));
    }

    #[test]
    fn inverse_power() {
        let [x1, ..] = Jet2::seed(&[q(2, 1), q(0, 1), q(0, 1), q(0, 1)]);
        let r = x1.powi(-1).unwrap();
        assert_eq!(r.value, q(1, 2));
        assert_eq!(r.grad[0], q(-1, 4));
        assert_eq!(*r.hess(0, 0), q(1, 4));
    }

    #[test]
    fn abs_at_zero_is_an_error() {
        let [x1, ..] = at([0.0; 4]);
        assert_eq!(x1.apply(Func::Abs), Err(DomainError::AbsAtZero));
        let [y, ..] = at([-2.0, 0.0, 0.0, 0.0]);
        let a = y.apply(Func::Abs).unwrap();
        assert_eq!(a.value, 2.0);
        assert_eq!(a.grad[0], -1.0);
    }

    #[test]
    fn ln_requires_positive_value() {
        let [x1, ..] = at([0.0; 4]);
        assert!(x1.apply(Func::Ln).is_err());
    }

    #[test]
    fn rational_power_matches_float_chain_rule() {
        let [x1, ..] = at([4.0, 0.0, 0.0, 0.0]);
        let r = x1.powr(&q(3, 2)).unwrap();
        assert!((r.value - 8.0).abs() < 1e-12);
        assert!((r.grad[0] - 3.0).abs() < 1e-12);
        assert!((r.hess(0, 0) - 0.375).abs() < 1e-12);
    }

    #[test]
    fn jet1_quotient_rule() {
        let a = Jet1 {
            value: 3.0,
            grad: [1.0, 0.0, 0.0, 0.0],
        };
        let b = Jet1 {
            value: 2.0,
            grad: [0.0, 1.0, 0.0, 0.0],
        };
        let c = a.try_div(&b).unwrap();
        assert_eq!(c.value, 1.5);
        assert_eq!(c.grad, [0.5, -0.75, 0.0, 0.0]);
    }

    #[test]
    fn partial_extracts_hessian_row() {
        let [x1, x2, ..] = at([2.0, 3.0, 0.0, 0.0]);
        let p = x1.clone() * x1 * x2;
        let d1 = p.partial(0);
        assert_eq!(d1.value, 12.0);
        assert_eq!(d1.grad, [6.0, 4.0, 0.0, 0.0]);
    }
}
