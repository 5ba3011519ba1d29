//! Closed-form Weyl components of binary metrics and the algebraic
//! quantities of the case-iv analysis.
//!
//! Notation: `φ_ab,c = ∂_c φ_ab`, `G_k² = exp(2 Σ_{l≠k} φ_kl) = g_kk M² F_k`,
//! `E_ij = φ_ij − ½ Σ_{k≠i,j} φ_ik`.

use num_rational::BigRational;

use crate::expr::Expr;
use crate::jet::{Jet1, Jet2, DIM};
use crate::metric::{pair_index, MetricSpec, PAIRS};
use crate::scalar::{q, DomainError, Func, Real, Ring, Scalar};
use crate::Error;

fn distinct(idx: &[usize]) -> Result<(), Error> {
    let ok = idx.iter().all(|&i| i < DIM)
        && idx.iter().enumerate().all(|(a, &i)| idx[a + 1..].iter().all(|&j| j != i));
    if ok {
        Ok(())
    } else {
        Err(Error::Index(idx.iter().map(|i| i + 1).collect()))
    }
}

fn others(exclude: &[usize]) -> impl Iterator<Item = usize> + '_ {
    (0..DIM).filter(move |k| !exclude.contains(k))
}

/// `d^e` for a coordinate difference. Integral exponents are exact in every
/// ring; other exponents use `|d|^e` and are only available in float rings.
pub fn pow_diff<S: Scalar>(d: &S, e: &BigRational) -> Result<S, Error> {
    if e.is_integer() {
        let n = crate::scalar::exponent_as_i64(e)?.expect("integral exponent");
        Ok(d.powi(n)?)
    } else if S::EXACT {
        Err(Error::NonIntegralExponent(crate::scalar::format_rational(e)))
    } else {
        Ok(d.apply(Func::Abs)?.powr(e)?)
    }
}

/// Jets of the pair functions, the `F_i`, `M` and `G_k²` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiJets<S> {
    /// `φ_ij` in pair order. For logarithmic families in exact rings the
    /// value slot holds 0 (only derivatives of `φ` are rational there).
    pub phi: [Jet2<S>; 6],
    pub f: [Jet2<S>; DIM],
    /// Value of the conformal factor `M`.
    pub conformal: S,
    /// `G_k²`, absent when it is not representable in the ring.
    pub g2: Option<[S; DIM]>,
}

impl<S: Scalar> PhiJets<S> {
    pub fn at(spec: &MetricSpec, p: &[S; DIM]) -> Result<Self, Error> {
        let seeds = Jet2::seed(p);
        let mut f: Vec<Jet2<S>> = Vec::with_capacity(DIM);
        for fi in &spec.f {
            f.push(fi.expr.eval(&seeds)?);
        }
        let f: [Jet2<S>; DIM] = f.try_into().expect("four F");
        let conformal = spec.conformal.eval(p)?;

        let (phi, g2) = match (&spec.log_base, &spec.m) {
            (Some(u), Some(m)) => {
                let mut uj: Vec<Jet2<S>> = Vec::with_capacity(DIM);
                for ui in u {
                    uj.push(ui.eval(&seeds)?);
                }
                let mj = Jet2::constant(S::from_rational(m));
                let mut phi: Vec<Jet2<S>> = Vec::with_capacity(6);
                for &(i, j) in &PAIRS {
                    let d = uj[i].clone() - uj[j].clone();
                    let inv = d.value.recip()?;
                    let value = if S::EXACT {
                        S::zero()
                    } else {
                        d.value.apply(Func::Abs)?.apply(Func::Ln)?
                    };
                    let ln_abs = d.compose(value, inv.clone(), -(inv.clone() * inv));
                    phi.push(mj.clone() * ln_abs);
                }
                let two_m = m * BigRational::from_integer(2.into());
                let mut g2: Vec<S> = Vec::with_capacity(DIM);
                for k in 0..DIM {
                    let mut acc = S::one();
                    for l in others(&[k]) {
                        let d = (uj[k].value.clone() - uj[l].value.clone()).apply(Func::Abs)?;
                        acc = acc * pow_diff(&d, &two_m)?;
                    }
                    g2.push(acc);
                }
                (phi, g2.try_into().ok())
            }
            _ => {
                let mut phi: Vec<Jet2<S>> = Vec::with_capacity(6);
                for e in &spec.phi {
                    phi.push(e.eval(&seeds)?);
                }
                let mut g2: Vec<S> = Vec::with_capacity(DIM);
                let mut representable = true;
                for k in 0..DIM {
                    let sum = others(&[k]).fold(S::zero(), |acc, l| acc + phi[pair_index(k, l)].value.clone());
                    match (S::from_i64(2) * sum).apply(Func::Exp) {
                        Ok(v) => g2.push(v),
                        Err(DomainError::NotExact(_)) if S::EXACT => {
                            // exp(0) is still exact
                            representable = false;
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                let all_zero = spec.phi.iter().all(Expr::is_const_zero);
                let g2 = if representable {
                    g2.try_into().ok()
                } else if all_zero {
                    Some(std::array::from_fn(|_| S::one()))
                } else {
                    None
                };
                (phi, g2)
            }
        };
        Ok(PhiJets {
            phi: phi.try_into().expect("six phi"),
            f,
            conformal,
            g2,
        })
    }

    pub fn phi(&self, i: usize, j: usize) -> &Jet2<S> {
        &self.phi[pair_index(i, j)]
    }

    /// `φ_ij,c`.
    pub fn d(&self, i: usize, j: usize, c: usize) -> &S {
        &self.phi(i, j).grad[c]
    }

    /// `φ_ij,ij`.
    pub fn mixed(&self, i: usize, j: usize) -> &S {
        self.phi(i, j).hess(i, j)
    }

    /// Largest `|φ_ab,c|` over all pairs and directions.
    pub fn first_scale(&self) -> f64 {
        self.phi
            .iter()
            .flat_map(|p| p.grad.iter())
            .fold(0.0, |m, x| m.max(x.to_f64().abs()))
    }

    /// Largest `|φ_ab,ab|`.
    pub fn mixed_scale(&self) -> f64 {
        PAIRS
            .iter()
            .fold(0.0, |m, &(i, j)| m.max(self.mixed(i, j).to_f64().abs()))
    }
}

/// `E_ij = φ_ij − ½ Σ_{k≠i,j} φ_ik` as a jet.
pub fn e_ij<S: Scalar>(phi: &PhiJets<S>, i: usize, j: usize) -> Result<Jet2<S>, Error> {
    distinct(&[i, j])?;
    let half = Jet2::constant(S::half());
    let mut e = phi.phi(i, j).clone();
    for k in others(&[i, j]) {
        e = e - half.clone() * phi.phi(i, k).clone();
    }
    Ok(e)
}

/// `C^k_{ikj}` from first derivatives of `φ`, generic over the ring of the
/// derivatives so it can itself be differentiated. `d(a, b, c) = φ_ab,c`.
pub fn ckikj_with<R: Ring>(d: impl Fn(usize, usize, usize) -> R, i: usize, j: usize, k: usize) -> R {
    let mut main = d(i, j, i) * d(j, k, j) + d(k, i, i) * d(i, j, j) - d(k, i, i) * d(k, j, j);
    let mut tail = R::zero();
    for l in others(&[i, j]) {
        tail = tail + d(i, j, i) * d(j, l, j) + d(l, i, i) * d(i, j, j) - d(l, i, i) * d(l, j, j);
    }
    main = main - R::half() * tail;
    main
}

/// Closed-form `C^k_{ikj}` for pairwise distinct `i, j, k`.
pub fn ckikj<S: Scalar>(phi: &PhiJets<S>, i: usize, j: usize, k: usize) -> Result<S, Error> {
    distinct(&[i, j, k])?;
    Ok(ckikj_with(|a, b, c| phi.d(a, b, c).clone(), i, j, k))
}

/// Range of the inner double sum in the `k`-terms of `C^{ij}_{ij}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CijijVariant {
    /// `½ Σ_{l≠k} Σ_{r≠k,l} φ_kl,k φ_kr,k`, which matches the Weyl tensor.
    #[default]
    Corrected,
    /// `½ Σ_{l≠k} Σ_{r≠k} φ_kl,k φ_kr,k` (includes the diagonal `r = l`).
    FullDoubleSum,
}

/// Closed-form `C^{ij}_{ij}` for `i ≠ j`.
pub fn cijij<S: Scalar>(phi: &PhiJets<S>, i: usize, j: usize) -> Result<S, Error> {
    cijij_variant(phi, i, j, CijijVariant::Corrected)
}

pub fn cijij_variant<S: Scalar>(phi: &PhiJets<S>, i: usize, j: usize, variant: CijijVariant) -> Result<S, Error> {
    distinct(&[i, j])?;
    let g2 = phi
        .g2
        .as_ref()
        .ok_or(Error::Domain(DomainError::NotExact("G_k² = exp(2Σφ)")))?;
    let ginv: Vec<S> = g2.iter().map(|g| g.recip()).collect::<Result<_, _>>()?;
    let f = |k: usize| phi.f[k].value.clone();
    let fp = |k: usize| phi.f[k].grad[k].clone();
    let d = |a: usize, b: usize, c: usize| phi.d(a, b, c).clone();
    let half = S::half();

    let block = |a: usize, b: usize| -> Result<S, Error> {
        let e = e_ij(phi, a, b)?;
        let mut s = e.hess(a, a).clone();
        let sum_k = others(&[a, b]).fold(S::zero(), |acc, k| acc + d(a, k, a));
        s = s - d(a, b, a) * sum_k;
        for l in others(&[a, b]) {
            for k in others(&[a, b, l]) {
                s = s + d(a, l, a) * d(a, k, a);
            }
        }
        Ok(s)
    };

    let e_ij_ = e_ij(phi, i, j)?;
    let e_ji_ = e_ij(phi, j, i)?;
    let mut bracket = half.clone() * ginv[i].clone() * e_ij_.grad[i].clone() * fp(i)
        + half.clone() * ginv[j].clone() * e_ji_.grad[j].clone() * fp(j)
        + ginv[i].clone() * block(i, j)? * f(i)
        + ginv[j].clone() * block(j, i)? * f(j);
    for k in others(&[i, j]) {
        let ek = e_ij(phi, k, i)? + e_ij(phi, k, j)?;
        bracket = bracket - half.clone() * ginv[k].clone() * ek.grad[k].clone() * fp(k);
        let mut inner = ek.hess(k, k).clone() - S::from_i64(3) * d(i, k, k) * d(j, k, k);
        let mut dbl = S::zero();
        for l in others(&[k]) {
            for r in others(&[k]) {
                if variant == CijijVariant::Corrected && r == l {
                    continue;
                }
                dbl = dbl + d(k, l, k) * d(k, r, k);
            }
        }
        inner = inner + half.clone() * dbl;
        bracket = bracket - ginv[k].clone() * inner * f(k);
    }
    let m2 = phi.conformal.clone() * phi.conformal.clone();
    Ok(-(S::from_rational(&q(1, 3)) * m2 * bracket))
}

/// `λ_ijk = (φ_jk − φ_ik),k · φ_ij,ij`.
pub fn lambda<S: Scalar>(phi: &PhiJets<S>, i: usize, j: usize, k: usize) -> Result<S, Error> {
    distinct(&[i, j, k])?;
    Ok((phi.d(j, k, k).clone() - phi.d(i, k, k).clone()) * phi.mixed(i, j).clone())
}

/// `λ_ijk − λ_jki` and `λ_jki − λ_kij`; both vanish iff λ is cyclic in `(i, j, k)`.
pub fn lambda_cyclic_differences<S: Scalar>(phi: &PhiJets<S>, i: usize, j: usize, k: usize) -> Result<[S; 2], Error> {
    let a = lambda(phi, i, j, k)?;
    let b = lambda(phi, j, k, i)?;
    let c = lambda(phi, k, i, j)?;
    Ok([a - b.clone(), b - c])
}

/// `max(|λ_ijk − λ_jki|, |λ_jki − λ_kij|)`.
pub fn lambda_cyclic_residual<S: Real>(phi: &PhiJets<S>, i: usize, j: usize, k: usize) -> Result<S, Error> {
    let [x, y] = lambda_cyclic_differences(phi, i, j, k)?;
    let (x, y) = (x.abs(), y.abs());
    Ok(if x > y { x } else { y })
}

/// `∂_k C^k_{ikj} − ½(λ_kij + λ_kji)`, with `∂_k` of the closed form taken by
/// evaluating it over order-1 jets of the first derivatives of `φ`.
pub fn derivative_identity_difference<S: Scalar>(phi: &PhiJets<S>, i: usize, j: usize, k: usize) -> Result<S, Error> {
    distinct(&[i, j, k])?;
    let jet: Jet1<S> = ckikj_with(|a, b, c| phi.phi(a, b).partial(c), i, j, k);
    let lhs = jet.grad[k].clone();
    let rhs = S::half() * (lambda(phi, k, i, j)? + lambda(phi, k, j, i)?);
    Ok(lhs - rhs)
}

/// `P_i = Π_{k<l; k,l≠i} (x^k − x^l)^{2(m+1)}` as jets.
fn l_coefficients<S: Scalar>(m: &BigRational, p: &[S; DIM]) -> Result<[Jet2<S>; DIM], Error> {
    let e = (m + q(1, 1)) * BigRational::from_integer(2.into());
    let x = Jet2::seed(p);
    let mut out: Vec<Jet2<S>> = Vec::with_capacity(DIM);
    for i in 0..DIM {
        let mut acc = Jet2::constant(S::one());
        for &(k, l) in &PAIRS {
            if k != i && l != i {
                acc = acc * pow_diff(&(x[k].clone() - x[l].clone()), &e)?;
            }
        }
        out.push(acc);
    }
    Ok(out.try_into().expect("four coefficients"))
}

/// `L = Σ_i Π_{k<l; k,l≠i}(x^k − x^l)^{2(m+1)} F_i` for given values `F_i`.
pub fn l_quantity<S: Scalar>(m: &BigRational, f: &[S; DIM], p: &[S; DIM]) -> Result<S, Error> {
    check_distinct(p)?;
    let c = l_coefficients(m, p)?;
    Ok((0..DIM).fold(S::zero(), |acc, i| acc + c[i].value.clone() * f[i].clone()))
}

/// `L` for a case-iv spec, with `F_i` evaluated from the spec.
pub fn l_quantity_spec<S: Scalar>(spec: &MetricSpec, p: &[S; DIM]) -> Result<S, Error> {
    let m = parameter(spec)?;
    let mut f: Vec<S> = Vec::with_capacity(DIM);
    for fi in &spec.f {
        f.push(fi.expr.eval(p)?);
    }
    l_quantity(m, &f.try_into().expect("four F"), p)
}

/// `K = L · Π_{k<l}(x^k − x^l)^{−2(m+1)}`.
pub fn k_quantity<S: Scalar>(m: &BigRational, f: &[S; DIM], p: &[S; DIM]) -> Result<S, Error> {
    let l = l_quantity(m, f, p)?;
    let e = -(m + q(1, 1)) * BigRational::from_integer(2.into());
    Ok(l * diff_product(p, &e)?)
}

fn parameter(spec: &MetricSpec) -> Result<&BigRational, Error> {
    if spec.log_base.is_none() {
        return Err(Error::FamilyMismatch(format!("{} has no logarithmic pair functions", spec.family)));
    }
    spec.m
        .as_ref()
        .ok_or_else(|| Error::FamilyMismatch(format!("{} has no parameter m", spec.family)))
}

fn check_distinct<S: Scalar>(p: &[S; DIM]) -> Result<(), Error> {
    for &(i, j) in &PAIRS {
        if (p[i].clone() - p[j].clone()).is_zero() {
            return Err(Error::Inadmissible(format!("coordinate collision ({},{})", i + 1, j + 1)));
        }
    }
    Ok(())
}

/// `Π_{k<l}(x^k − x^l)^e`.
fn diff_product<S: Scalar>(p: &[S; DIM], e: &BigRational) -> Result<S, Error> {
    let mut acc = S::one();
    for &(k, l) in &PAIRS {
        acc = acc * pow_diff(&(p[k].clone() - p[l].clone()), e)?;
    }
    Ok(acc)
}

/// Coefficients of the bracket identity
/// `A·C^{12}_{12} − B·C^{13}_{13} = s·M²·m(2m + t)·Π_{k<l}(x^k−x^l)^{−2m+u}·L`.
/// Each field is exposed so single coefficients can be perturbed.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketForm {
    /// `A` on the monomials `x1x2, x1x3, x1x4, x2x3, x2x4, x3x4`.
    pub a: [BigRational; 6],
    /// `B` on the same monomials.
    pub b: [BigRational; 6],
    pub scale: BigRational,
    pub shift: BigRational,
    pub exponent_shift: BigRational,
}

impl Default for BracketForm {
    fn default() -> Self {
        let z = |v: [i64; 6]| v.map(|c| q(c, 1));
        BracketForm {
            a: z([1, -2, 1, 1, -2, 1]),
            b: z([-2, 1, 1, 1, 1, -2]),
            scale: q(1, 2),
            shift: q(-1, 1),
            exponent_shift: q(-1, 1),
        }
    }
}

impl BracketForm {
    /// Number of individually perturbable coefficients.
    pub const COEFFICIENTS: usize = 15;

    /// Copy with coefficient `index` increased by one.
    pub fn perturbed(&self, index: usize) -> Self {
        let mut out = self.clone();
        let one = q(1, 1);
        match index {
            0..=5 => out.a[index] += one,
            6..=11 => out.b[index - 6] += one,
            12 => out.scale += one,
            13 => out.shift += one,
            14 => out.exponent_shift += one,
            _ => panic!("bracket coefficient index {index} out of range"),
        }
        out
    }
}

/// Both sides of the bracket identity for a case-iv spec.
pub fn bracket_sides<S: Scalar>(spec: &MetricSpec, p: &[S; DIM], form: &BracketForm) -> Result<(S, S), Error> {
    let m = parameter(spec)?.clone();
    check_distinct(p)?;
    let phi = PhiJets::at(spec, p)?;
    let mono = |c: &[BigRational; 6]| {
        PAIRS.iter().enumerate().fold(S::zero(), |acc, (n, &(k, l))| {
            acc + S::from_rational(&c[n]) * p[k].clone() * p[l].clone()
        })
    };
    let lhs = mono(&form.a) * cijij(&phi, 0, 1)? - mono(&form.b) * cijij(&phi, 0, 2)?;
    let two = BigRational::from_integer(2.into());
    let factor = &m * (&two * &m + &form.shift);
    let e = -(&two * &m) + &form.exponent_shift;
    let m2 = phi.conformal.clone() * phi.conformal.clone();
    let rhs = S::from_rational(&(&form.scale * factor)) * m2 * diff_product(p, &e)? * l_quantity_spec(spec, p)?;
    Ok((lhs, rhs))
}

/// The 4×4 coefficient matrix of `F_1..F_4` in `L = 0, ∂_12 L = 0,
/// ∂_13 L = 0, ∂_14 L = 0` after eliminating each `F'_a` with `∂_a L = 0`,
/// together with its determinant.
pub fn det_m_build<S: Scalar>(m: &BigRational, p: &[S; DIM]) -> Result<([[S; DIM]; DIM], S), Error> {
    check_distinct(p)?;
    let c = l_coefficients(m, p)?;
    for (a, ca) in c.iter().enumerate() {
        if ca.value.is_zero() {
            return Err(Error::PivotZero(a + 1));
        }
    }
    let inv: Vec<S> = c.iter().map(|ca| ca.value.recip()).collect::<Result<_, _>>()?;
    let row_for = |a: usize, b: usize| -> [S; DIM] {
        std::array::from_fn(|i| {
            c[i].hess(a, b).clone()
                - c[a].grad[b].clone() * c[i].grad[a].clone() * inv[a].clone()
                - c[b].grad[a].clone() * c[i].grad[b].clone() * inv[b].clone()
        })
    };
    let matrix = [
        std::array::from_fn(|i| c[i].value.clone()),
        row_for(0, 1),
        row_for(0, 2),
        row_for(0, 3),
    ];
    let det = det4(&matrix);
    Ok((matrix, det))
}

/// Determinant by cofactor expansion (division free).
pub fn det4<R: Ring>(a: &[[R; 4]; 4]) -> R {
    let det3 = |r: [usize; 3], c: [usize; 3]| {
        a[r[0]][c[0]].clone() * (a[r[1]][c[1]].clone() * a[r[2]][c[2]].clone() - a[r[1]][c[2]].clone() * a[r[2]][c[1]].clone())
            - a[r[0]][c[1]].clone() * (a[r[1]][c[0]].clone() * a[r[2]][c[2]].clone() - a[r[1]][c[2]].clone() * a[r[2]][c[0]].clone())
            + a[r[0]][c[2]].clone() * (a[r[1]][c[0]].clone() * a[r[2]][c[1]].clone() - a[r[1]][c[1]].clone() * a[r[2]][c[0]].clone())
    };
    let mut det = R::zero();
    for col in 0..4 {
        let minor_cols: Vec<usize> = (0..4).filter(|&c| c != col).collect();
        let minor = det3([1, 2, 3], [minor_cols[0], minor_cols[1], minor_cols[2]]);
        let term = a[0][col].clone() * minor;
        det = if col % 2 == 0 { det + term } else { det - term };
    }
    det
}

/// Coefficients of
/// `det M = s (m+α)³ (2m+β)³ (x²−x³)^γ (x²−x⁴)^γ (x³−x⁴)^γ Π_{k<l}(x^k−x^l)^{2(2m+β)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetMForm {
    pub scale: BigRational,
    pub alpha: BigRational,
    pub beta: BigRational,
    pub gamma: BigRational,
}

impl Default for DetMForm {
    fn default() -> Self {
        DetMForm {
            scale: q(-16, 1),
            alpha: q(1, 1),
            beta: q(1, 1),
            gamma: q(2, 1),
        }
    }
}

impl DetMForm {
    pub const COEFFICIENTS: usize = 4;

    pub fn perturbed(&self, index: usize) -> Self {
        let mut out = self.clone();
        let one = q(1, 1);
        match index {
            0 => out.scale += one,
            1 => out.alpha += one,
            2 => out.beta += one,
            3 => out.gamma += one,
            _ => panic!("det M coefficient index {index} out of range"),
        }
        out
    }
}

pub fn det_m_closed<S: Scalar>(m: &BigRational, p: &[S; DIM], form: &DetMForm) -> Result<S, Error> {
    check_distinct(p)?;
    let two = BigRational::from_integer(2.into());
    let a = m + &form.alpha;
    let b = &two * m + &form.beta;
    let lead = &form.scale * &a * &a * &a * &b * &b * &b;
    let mut v = S::from_rational(&lead);
    for (k, l) in [(1, 2), (1, 3), (2, 3)] {
        v = v * pow_diff(&(p[k].clone() - p[l].clone()), &form.gamma)?;
    }
    Ok(v * diff_product(p, &(&two * &b))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::{approx_eq_with, KAPPA_CIJIJ, KAPPA_CKIKJ};
    use crate::curvature::curvature;
    use crate::expr::parse;
    use crate::metric::{make_lemma_family, make_table1, CoordFn, LemmaFamily, Table1Row};

    fn case_iv(m: BigRational) -> MetricSpec {
        let f = std::array::from_fn(|i| CoordFn::poly(i, vec![q(2, 1), q(1, 3), q(-1, 5)]));
        MetricSpec::case_iv("t", m, f, Expr::int(1)).unwrap()
    }

    fn generic_binary() -> MetricSpec {
        let src = ["0.3*x1*x2 + 0.2*x1^2*x2", "0.1*x1*x3^2", "-0.2*x1*x4", "0.25*x2^2*x3", "0.15*x2*x4 - 0.1*x4^2", "0.3*x3*x4^2"];
        let phi = src.map(|s| parse(s).unwrap());
        let f = [
            CoordFn::expr(parse("2 + 0.3*x1").unwrap()),
            CoordFn::expr(parse("-2 + 0.1*x2^2").unwrap()),
            CoordFn::expr(parse("1.5 - 0.2*x3").unwrap()),
            CoordFn::expr(parse("2 + 0.2*x4^3").unwrap()),
        ];
        MetricSpec::binary("g", phi, f, parse("1 + 0.1*x1*x3").unwrap()).unwrap()
    }

    const TRIPLES: [(usize, usize, usize); 24] = {
        let mut out = [(0, 0, 0); 24];
        let mut n = 0;
        let mut i = 0;
        while i < 4 {
            let mut j = 0;
            while j < 4 {
                let mut k = 0;
                while k < 4 {
                    if i != j && j != k && i != k {
                        out[n] = (i, j, k);
                        n += 1;
                    }
                    k += 1;
                }
                j += 1;
            }
            i += 1;
        }
        out
    };

    #[test]
    fn e_ij_examples() {
        let mut phi: [Expr; 6] = std::array::from_fn(|_| Expr::zero());
        phi[0] = Expr::int(3);
        let f = std::array::from_fn(|_| CoordFn::constant(q(1, 1)));
        let spec = MetricSpec::binary("c", phi, f, Expr::int(1)).unwrap();
        let pj = PhiJets::at(&spec, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(e_ij(&pj, 0, 1).unwrap().value, 3.0);
        assert_eq!(e_ij(&pj, 0, 2).unwrap().value, -1.5);
        assert!(e_ij(&pj, 1, 1).is_err());

        let spec = case_iv(q(1, 1));
        let pj = PhiJets::at(&spec, &[4.0, 2.0, 1.0, 0.0]).unwrap();
        let want = 2f64.ln() - 0.5 * (3f64.ln() + 4f64.ln());
        assert!((e_ij(&pj, 0, 1).unwrap().value - want).abs() < 1e-15);
    }

    #[test]
    fn lambda_example_and_antisymmetry() {
        let spec = case_iv(q(1, 1));
        let p = [q(4, 1), q(2, 1), q(1, 1), q(0, 1)];
        let pj = PhiJets::<BigRational>::at(&spec, &p).unwrap();
        assert_eq!(lambda(&pj, 0, 1, 2).unwrap(), q(-1, 6));
        let g = PhiJets::at(&generic_binary(), &[0.4, -0.3, 0.8, -0.6]).unwrap();
        for (i, j, k) in TRIPLES {
            assert_eq!(lambda(&g, i, j, k).unwrap(), -lambda(&g, j, i, k).unwrap());
        }
    }

    #[test]
    fn closed_forms_match_engine() {
        for (spec, p) in [
            (generic_binary(), [0.4, -0.3, 0.8, -0.6]),
            (case_iv(q(2, 1)), [2.5, 1.5, 0.5, -0.5]),
            (case_iv(q(-3, 2)), [2.2, 1.1, 0.3, -0.7]),
        ] {
            let b = curvature(&spec, &p).unwrap();
            let pj = PhiJets::at(&spec, &p).unwrap();
            for (i, j, k) in TRIPLES {
                let engine = b.weyl_mixed13[k][i][k][j];
                let closed = ckikj(&pj, i, j, k).unwrap();
                assert!(approx_eq_with(closed, KAPPA_CKIKJ * engine, 1e-10, 1e-8), "{closed} {engine}");
            }
            for &(i, j) in &PAIRS {
                let engine = *b.weyl22(i, j);
                let closed = cijij(&pj, i, j).unwrap();
                assert!(approx_eq_with(closed, KAPPA_CIJIJ * engine, 1e-10, 1e-8), "{closed} {engine}");
            }
        }
    }

    #[test]
    fn full_double_sum_disagrees_with_engine() {
        let spec = generic_binary();
        let p = [0.4, -0.3, 0.8, -0.6];
        let b = curvature(&spec, &p).unwrap();
        let pj = PhiJets::at(&spec, &p).unwrap();
        let worst = PAIRS
            .iter()
            .map(|&(i, j)| (cijij_variant(&pj, i, j, CijijVariant::FullDoubleSum).unwrap() - b.weyl22(i, j)).abs())
            .fold(0.0, f64::max);
        assert!(worst > 1e-4);
    }

    #[test]
    fn derivative_identity_holds() {
        for (spec, p) in [(generic_binary(), [0.4, -0.3, 0.8, -0.6]), (case_iv(q(1, 1)), [2.5, 1.5, 0.5, -0.5])] {
            let pj = PhiJets::at(&spec, &p).unwrap();
            for (i, j, k) in TRIPLES {
                assert!(derivative_identity_difference(&pj, i, j, k).unwrap().abs() < 1e-12);
            }
        }
        let p = [q(7, 2), q(5, 3), q(-1, 4), q(-2, 1)];
        let pj = PhiJets::<BigRational>::at(&case_iv(q(3, 2)), &p).unwrap();
        for (i, j, k) in TRIPLES {
            assert!(derivative_identity_difference(&pj, i, j, k).unwrap().is_zero());
        }
    }

    #[test]
    fn table1_row_i_satisfies_condition() {
        let u = std::array::from_fn(Expr::var);
        let f = std::array::from_fn(|_| CoordFn::constant(q(1, 1)));
        let spec = make_table1(
            "i",
            Table1Row::I { u, phi12: parse("x1*x2").unwrap(), phi34: parse("x3*x4").unwrap() },
            f,
            Expr::int(1),
        )
        .unwrap();
        let pj = PhiJets::at(&spec, &[0.3, -0.4, 0.9, 0.1]).unwrap();
        for (i, j, k) in TRIPLES {
            assert!(ckikj(&pj, i, j, k).unwrap().abs() < 1e-14);
            assert!(lambda_cyclic_residual(&pj, i, j, k).unwrap() < 1e-14);
        }
    }

    #[test]
    fn l_quantity_examples() {
        let p = [q(3, 1), q(1, 2), q(-1, 3), q(-2, 1)];
        let f = [q(1, 1), q(2, 1), q(3, 1), q(-6, 1)];
        assert!(l_quantity(&q(-1, 1), &f, &p).unwrap().is_zero());
        assert_eq!(l_quantity(&q(-1, 1), &std::array::from_fn(|_| q(1, 1)), &p).unwrap(), q(4, 1));
        let spec = make_lemma_family(LemmaFamily::B([q(1, 1), q(-2, 3), q(5, 2)]), Expr::int(1)).unwrap();
        assert!(l_quantity_spec(&spec, &p).unwrap().is_zero());
        assert!(matches!(l_quantity(&q(-1, 1), &f, &[q(1, 1), q(1, 1), q(0, 1), q(2, 1)]), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn k_is_l_times_product() {
        let p = [2.5, 1.0, 0.5, -1.0];
        let f = [1.0, -2.0, 0.5, 3.0];
        let m = q(1, 1);
        let l = l_quantity(&m, &f, &p).unwrap();
        let k = k_quantity(&m, &f, &p).unwrap();
        let prod: f64 = PAIRS.iter().map(|&(a, b)| (p[a] - p[b]).powi(-4)).product();
        assert!((k - l * prod).abs() < 1e-12 * k.abs());
    }

    #[test]
    fn bracket_identity_exact() {
        let p = [q(9, 2), q(5, 3), q(-1, 7), q(-3, 1)];
        for m in [q(2, 1), q(1, 1), q(-2, 1), q(3, 2), q(-1, 2), q(1, 2), q(0, 1)] {
            let (l, r) = bracket_sides::<BigRational>(&case_iv(m.clone()), &p, &BracketForm::default()).unwrap();
            assert_eq!(l, r, "m = {m}");
        }
        let (l, r) = bracket_sides::<BigRational>(&case_iv(q(2, 1)), &p, &BracketForm::default().perturbed(13)).unwrap();
        assert_ne!(l, r);
    }

    #[test]
    fn det_m_build_matches_closed_form() {
        let p = [q(4, 1), q(2, 1), q(1, 1), q(0, 1)];
        for m in [q(1, 1), q(3, 2), q(2, 1), q(-1, 1), q(-1, 2), q(0, 1)] {
            let (_, det) = det_m_build::<BigRational>(&m, &p).unwrap();
            let closed = det_m_closed(&m, &p, &DetMForm::default()).unwrap();
            assert_eq!(det, closed, "m = {m}");
        }
        let (_, det) = det_m_build::<BigRational>(&q(-1, 1), &p).unwrap();
        assert!(det.is_zero());
        let closed = det_m_closed(&q(1, 1), &p, &DetMForm::default()).unwrap();
        let prod: BigRational = PAIRS.iter().map(|&(a, b)| (&p[a] - &p[b]).powi(6).unwrap()).product();
        assert_eq!(closed, q(-16 * 8 * 27 * 4, 1) * prod);
    }

    #[test]
    fn non_integral_exponent_is_rejected_exactly() {
        let p = [q(4, 1), q(2, 1), q(1, 1), q(0, 1)];
        assert!(matches!(det_m_build::<BigRational>(&q(1, 4), &p), Err(Error::NonIntegralExponent(_))));
    }

    #[test]
    fn index_errors() {
        let pj = PhiJets::at(&generic_binary(), &[0.4, -0.3, 0.8, -0.6]).unwrap();
        assert_eq!(ckikj(&pj, 0, 0, 1).unwrap_err(), Error::Index(vec![1, 1, 2]));
        assert!(lambda(&pj, 0, 1, 1).is_err());
        assert!(cijij(&pj, 2, 2).is_err());
    }
}
