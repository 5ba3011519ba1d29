//! Diagonal binary metrics and the named families built from them.
//!
//! A binary metric is described by six pair functions `φ_ij(x^i, x^j)`, four
//! one-variable functions `F_i(x^i)` and a conformal factor `M(x)`:
//!
//! ```text
//! g_ii = exp(2 Σ_{j≠i} φ_ij) / (M² F_i)
//! ```
//!
//! The factor 2 comes from `g_ii = H_i²` with `H_i = Π_j exp(φ_ij) / (M f_i)`.
//! Families whose pair functions are `m·ln|U_i − U_j|` keep the `U_i` and
//! build `g_ii` as a product of powers `|U_i − U_j|^{2m}` so that half-integer
//! `m` stays evaluable over the rationals.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;

use crate::consts::DEFAULT_GAP;
use crate::expr::{Expr, VarDependence};
use crate::jet::Jet2;
use crate::scalar::{q, Func, Scalar};
use crate::Error;

/// Unordered coordinate pairs in the storage order of [`MetricSpec::phi`].
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Position of the pair `{i, j}` in [`PAIRS`].
pub fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(a != b && b < 4);
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        _ => 5,
    }
}

/// Signs relating the shared polynomial of the half-integer lemma families
/// to the `F_i` of case iv on the chart `x1 > x2 > x3 > x4`: the sign of
/// `Π_{j≠i}(x^i − x^j)` there.
pub const ORDERED_SIGNS: [i64; 4] = [1, -1, 1, -1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    BinaryGeneral,
    Table1I,
    Table1II,
    Table1III,
    Table1IV,
    CaseIV,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::BinaryGeneral => "binary-general",
            Family::Table1I => "table1-i",
            Family::Table1II => "table1-ii",
            Family::Table1III => "table1-iii",
            Family::Table1IV => "table1-iv",
            Family::CaseIV => "case-iv",
        }
    }

    pub fn has_parameter(self) -> bool {
        matches!(self, Family::Table1IV | Family::CaseIV)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "binary-general" => Family::BinaryGeneral,
            "table1-i" => Family::Table1I,
            "table1-ii" => Family::Table1II,
            "table1-iii" => Family::Table1III,
            "table1-iv" => Family::Table1IV,
            "case-iv" => Family::CaseIV,
            other => return Err(Error::InvalidMetric(format!("unknown family {other:?}"))),
        })
    }
}

/// A one-variable function, optionally remembered as exact polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordFn {
    pub expr: Expr,
    pub poly: Option<Vec<BigRational>>,
}

impl CoordFn {
    pub fn expr(expr: Expr) -> Self {
        CoordFn { expr, poly: None }
    }

    /// `Σ coeffs[k]·(x^var)^k`.
    pub fn poly(var: usize, coeffs: Vec<BigRational>) -> Self {
        CoordFn {
            expr: Expr::polynomial(var, &coeffs),
            poly: Some(coeffs),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        CoordFn {
            expr: Expr::Const(c.clone()),
            poly: Some(vec![c]),
        }
    }

    /// Polynomial coefficients with trailing zeros removed.
    /// A constant expression counts as a degree-0 polynomial.
    pub fn trimmed_poly(&self) -> Option<Vec<BigRational>> {
        let mut p = match (&self.poly, &self.expr) {
            (Some(p), _) => p.clone(),
            (None, Expr::Const(c)) => vec![c.clone()],
            (None, _) => return None,
        };
        while p.last().is_some_and(|c| c.is_zero()) {
            p.pop();
        }
        Some(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    /// Minimum coordinate separation in float mode; exact mode requires only distinctness.
    pub gap: f64,
    /// Restrict to the chart `x1 > x2 > x3 > x4`.
    pub ordered: bool,
    /// Sampling box per coordinate.
    pub boxes: [(f64, f64); 4],
}

impl Default for Domain {
    fn default() -> Self {
        Domain {
            gap: DEFAULT_GAP,
            ordered: false,
            boxes: [(-1.0, 1.0); 4],
        }
    }
}

impl Domain {
    /// Ordered chart with disjoint boxes that respect the ordering.
    pub fn ordered_chart() -> Self {
        Domain {
            gap: DEFAULT_GAP,
            ordered: true,
            boxes: [(2.1, 2.9), (1.1, 1.9), (0.1, 0.9), (-0.9, -0.1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub family: Family,
    /// Exponent parameter of the logarithmic families.
    pub m: Option<BigRational>,
    /// `φ_ij` in [`PAIRS`] order.
    pub phi: [Expr; 6],
    pub f: [CoordFn; 4],
    /// Conformal factor `M`.
    pub conformal: Expr,
    pub domain: Domain,
    /// `U_i` when `φ_ij = m·ln|U_i − U_j|`.
    pub log_base: Option<[Expr; 4]>,
}

/// Result of [`MetricSpec::admissible`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Admissibility {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

impl Admissibility {
    pub fn into_result(self) -> Result<(), Error> {
        if self.ok {
            Ok(())
        } else {
            Err(Error::Inadmissible(self.diagnostics.join("; ")))
        }
    }
}

fn coords() -> [Expr; 4] {
    std::array::from_fn(Expr::var)
}

fn check_dependence(what: &str, e: &Expr, allowed: &[usize]) -> Result<(), Error> {
    let dep = e.dependence();
    if dep.is_subset(VarDependence::only(allowed)) {
        Ok(())
    } else {
        let allowed: Vec<String> = allowed.iter().map(|v| format!("x{}", v + 1)).collect();
        Err(Error::InvalidMetric(format!(
            "{what} depends on {dep} but may only depend on {{{}}}",
            allowed.join(",")
        )))
    }
}

fn log_phi(m: &BigRational, u: &[Expr; 4], i: usize, j: usize) -> Expr {
    Expr::Const(m.clone()).mul(Expr::call(
        Func::Ln,
        Expr::call(Func::Abs, u[i].clone().sub(u[j].clone())),
    ))
}

impl MetricSpec {
    /// A general binary metric.
    pub fn binary(name: &str, phi: [Expr; 6], f: [CoordFn; 4], conformal: Expr) -> Result<Self, Error> {
        let spec = MetricSpec {
            name: name.to_string(),
            family: Family::BinaryGeneral,
            m: None,
            phi,
            f,
            conformal,
            domain: Domain::default(),
            log_base: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The case-iv family: `φ_ij = m·ln|x^i − x^j|`.
    pub fn case_iv(name: &str, m: BigRational, f: [CoordFn; 4], conformal: Expr) -> Result<Self, Error> {
        let u = coords();
        let phi = std::array::from_fn(|p| {
            let (i, j) = PAIRS[p];
            log_phi(&m, &u, i, j)
        });
        let spec = MetricSpec {
            name: name.to_string(),
            family: Family::CaseIV,
            m: Some(m),
            phi,
            f,
            conformal,
            domain: Domain::ordered_chart(),
            log_base: Some(u),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Euclidean ℝ⁴ in Cartesian coordinates.
    pub fn euclidean() -> Self {
        let one = || CoordFn::constant(q(1, 1));
        MetricSpec::binary(
            "euclidean",
            std::array::from_fn(|_| Expr::zero()),
            [one(), one(), one(), one()],
            Expr::int(1),
        )
        .expect("euclidean metric is valid")
    }

    pub fn with_conformal(mut self, conformal: Expr) -> Self {
        self.conformal = conformal;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn phi_expr(&self, i: usize, j: usize) -> &Expr {
        &self.phi[pair_index(i, j)]
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.family.has_parameter() != self.m.is_some() {
            return Err(Error::InvalidMetric(format!(
                "family {} {} a parameter m",
                self.family,
                if self.family.has_parameter() { "requires" } else { "does not take" }
            )));
        }
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            check_dependence(&format!("phi{}{}", i + 1, j + 1), &self.phi[p], &[i, j])?;
        }
        for (i, f) in self.f.iter().enumerate() {
            check_dependence(&format!("F{}", i + 1), &f.expr, &[i])?;
        }
        if let Some(u) = &self.log_base {
            for (i, ui) in u.iter().enumerate() {
                check_dependence(&format!("U{}", i + 1), ui, &[i])?;
            }
        }
        for (lo, hi) in self.domain.boxes {
            if !(lo <= hi) {
                return Err(Error::InvalidMetric(format!("empty sampling box [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// `2m` as an integer, if the family has a parameter and it is integral.
    pub fn two_m(&self) -> Option<i64> {
        use num_traits::ToPrimitive;
        let m = self.m.as_ref()?;
        let t = m * BigRational::from_integer(2.into());
        if t.is_integer() {
            t.to_integer().to_i64()
        } else {
            None
        }
    }

    /// Closed-form expression of `g_ii` (0-based `i`).
    pub fn component_expr(&self, i: usize) -> Expr {
        let numerator = match (&self.log_base, &self.m) {
            (Some(u), Some(m)) => {
                let exponent = m * BigRational::from_integer(2.into());
                if exponent.is_zero() {
                    None
                } else {
                    (0..4).filter(|&j| j != i).fold(None, |acc: Option<Expr>, j| {
                        let factor = Expr::call(Func::Abs, u[i].clone().sub(u[j].clone()))
                            .pow(exponent.clone());
                        Some(match acc {
                            Some(a) => a.mul(factor),
                            None => factor,
                        })
                    })
                }
            }
            _ => self.exp_numerator(i),
        };
        self.assemble(i, numerator)
    }

    /// `g_ii` through `exp(2 Σ φ_ij)` regardless of family; equal to
    /// [`component_expr`](Self::component_expr) wherever both evaluate.
    pub fn generic_component_expr(&self, i: usize) -> Expr {
        self.assemble(i, self.exp_numerator(i))
    }

    fn exp_numerator(&self, i: usize) -> Option<Expr> {
        let sum = (0..4)
            .filter(|&j| j != i)
            .map(|j| self.phi_expr(i, j).clone())
            .filter(|e| !e.is_const_zero())
            .reduce(|a, b| a.add(b))?;
        Some(Expr::call(Func::Exp, Expr::int(2).mul(sum)))
    }

    fn assemble(&self, i: usize, numerator: Option<Expr>) -> Expr {
        let numerator = numerator.unwrap_or_else(|| Expr::int(1));
        let denominator = if self.conformal.is_const_one() {
            self.f[i].expr.clone()
        } else {
            self.conformal.clone().pow(q(2, 1)).mul(self.f[i].expr.clone())
        };
        numerator.div(denominator)
    }

    pub fn metric_values<S: Scalar>(&self, p: &[S; 4]) -> Result<[S; 4], Error> {
        let mut out: [S; 4] = std::array::from_fn(|_| S::zero());
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.component_expr(i).eval(p)?;
        }
        Ok(out)
    }

    pub fn metric_jets<S: Scalar>(&self, p: &[S; 4]) -> Result<[Jet2<S>; 4], Error> {
        let seeds = Jet2::seed(p);
        let mut out: [Jet2<S>; 4] = std::array::from_fn(|_| Jet2::constant(S::zero()));
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.component_expr(i).eval(&seeds)?;
        }
        Ok(out)
    }

    /// Whether `p` is a valid evaluation site, with reasons when it is not.
    pub fn admissible<S: Scalar>(&self, p: &[S; 4]) -> Admissibility {
        let mut diagnostics = Vec::new();
        let too_close = |d: S| -> bool {
            if S::EXACT {
                d.is_zero()
            } else {
                !(d.to_f64().abs() >= self.domain.gap)
            }
        };
        for &(i, j) in &PAIRS {
            if too_close(p[i].clone() - p[j].clone()) {
                diagnostics.push(format!("coordinate collision ({},{})", i + 1, j + 1));
            }
        }
        if let Some(u) = &self.log_base {
            let values: Result<Vec<S>, _> = u.iter().map(|e| e.eval(p)).collect();
            match values {
                Ok(v) => {
                    for &(i, j) in &PAIRS {
                        if u[i] != Expr::var(i) || u[j] != Expr::var(j) {
                            if too_close(v[i].clone() - v[j].clone()) {
                                diagnostics.push(format!("U collision ({},{})", i + 1, j + 1));
                            }
                        }
                    }
                }
                Err(e) => diagnostics.push(format!("U evaluation failed: {e}")),
            }
        }
        if self.domain.ordered {
            for i in 0..3 {
                if (p[i].clone() - p[i + 1].clone()).signum() != Some(1) {
                    diagnostics.push(format!("ordering x{} > x{} violated", i + 1, i + 2));
                }
            }
        }
        for (i, f) in self.f.iter().enumerate() {
            match f.expr.eval(p) {
                Ok(v) if !v.is_zero() && v.signum().is_some() => {}
                Ok(_) => diagnostics.push(format!("degenerate metric component {}", i + 1)),
                Err(e) => diagnostics.push(format!("F{} not evaluable: {e}", i + 1)),
            }
        }
        match self.conformal.eval(p) {
            Ok(v) if !v.is_zero() => {}
            Ok(_) => diagnostics.push("conformal factor vanishes".to_string()),
            Err(e) => diagnostics.push(format!("conformal factor not evaluable: {e}")),
        }
        if diagnostics.is_empty() {
            if let Err(e) = self.metric_values(p) {
                diagnostics.push(format!("metric not evaluable: {e}"));
            }
        }
        Admissibility {
            ok: diagnostics.is_empty(),
            diagnostics,
        }
    }
}

/// Rows of the table of binary metrics with `C^k_{ikj} = 0`. Entries of the
/// `u`, `v`, `q` arrays are one-variable functions of their own coordinate;
/// slots a row does not use are still validated.
#[derive(Debug, Clone)]
pub enum Table1Row {
    /// `φ13 = U1+U3, φ14 = U1+U4, φ23 = U2+U3, φ24 = U2+U4`; `φ12`, `φ34` free.
    I { u: [Expr; 4], phi12: Expr, phi34: Expr },
    /// `φ13 = U1+U3, φ14 = V1+V4, φ23 = U2+U3, φ24 = V2+V4, φ34 = Q3+Q4`; `φ12` free.
    II { u: [Expr; 4], v: [Expr; 4], q: [Expr; 4], phi12: Expr },
    /// `φ12 = U1+U2, φ13 = V1+U3, φ14 = Q1+U4, φ23 = V2+V3, φ24 = Q2+V4, φ34 = Q3+Q4`.
    III { u: [Expr; 4], v: [Expr; 4], q: [Expr; 4] },
    /// `φ_ij = m·ln|U_i − U_j|`.
    IV { u: [Expr; 4], m: BigRational },
}

pub fn make_table1(name: &str, row: Table1Row, f: [CoordFn; 4], conformal: Expr) -> Result<MetricSpec, Error> {
    let check_one_var = |label: &str, fns: &[Expr; 4]| -> Result<(), Error> {
        for (i, e) in fns.iter().enumerate() {
            check_dependence(&format!("{label}{}", i + 1), e, &[i])?;
        }
        Ok(())
    };
    let s = |a: &Expr, b: &Expr| a.clone().add(b.clone());
    let (family, phi, m, log_base) = match row {
        Table1Row::I { u, phi12, phi34 } => {
            check_one_var("U", &u)?;
            let phi = [phi12, s(&u[0], &u[2]), s(&u[0], &u[3]), s(&u[1], &u[2]), s(&u[1], &u[3]), phi34];
            (Family::Table1I, phi, None, None)
        }
        Table1Row::II { u, v, q, phi12 } => {
            check_one_var("U", &u)?;
            check_one_var("V", &v)?;
            check_one_var("Q", &q)?;
            let phi = [phi12, s(&u[0], &u[2]), s(&v[0], &v[3]), s(&u[1], &u[2]), s(&v[1], &v[3]), s(&q[2], &q[3])];
            (Family::Table1II, phi, None, None)
        }
        Table1Row::III { u, v, q } => {
            check_one_var("U", &u)?;
            check_one_var("V", &v)?;
            check_one_var("Q", &q)?;
            let phi = [
                s(&u[0], &u[1]),
                s(&v[0], &u[2]),
                s(&q[0], &u[3]),
                s(&v[1], &v[2]),
                s(&q[1], &v[3]),
                s(&q[2], &q[3]),
            ];
            (Family::Table1III, phi, None, None)
        }
        Table1Row::IV { u, m } => {
            check_one_var("U", &u)?;
            let phi = std::array::from_fn(|p| {
                let (i, j) = PAIRS[p];
                log_phi(&m, &u, i, j)
            });
            (Family::Table1IV, phi, Some(m), Some(u))
        }
    };
    let spec = MetricSpec {
        name: name.to_string(),
        family,
        m,
        phi,
        f,
        conformal,
        domain: Domain::default(),
        log_base,
    };
    spec.validate()?;
    Ok(spec)
}

/// The four conformally flat case-iv families.
#[derive(Debug, Clone)]
pub enum LemmaFamily {
    /// `m = −1`, constant `F_i` summing to zero.
    A([BigRational; 4]),
    /// `m = −1/2`, `g_ii = 1/(Π_{j≠i}(x^i−x^j)·(a0 + a1 x + a2 x²))`.
    B([BigRational; 3]),
    /// `m = 0`, arbitrary one-variable `F_i`.
    C([Expr; 4]),
    /// `m = 1/2`, `g_ii = Π_{j≠i}(x^i−x^j)/(a0 + … + a6 x⁶)`.
    D([BigRational; 7]),
}

pub fn make_lemma_family(family: LemmaFamily, conformal: Expr) -> Result<MetricSpec, Error> {
    let shared = |coeffs: &[BigRational]| -> [CoordFn; 4] {
        std::array::from_fn(|i| {
            let sign = BigRational::from_integer(ORDERED_SIGNS[i].into());
            CoordFn::poly(i, coeffs.iter().map(|c| c * &sign).collect())
        })
    };
    let (name, m, f) = match family {
        LemmaFamily::A(consts) => {
            let sum: BigRational = consts.iter().cloned().sum();
            if !sum.is_zero() {
                return Err(Error::InvalidMetric(format!(
                    "m = -1 with constant F_i is conformally flat only when L = F1+F2+F3+F4 = 0, got {sum}"
                )));
            }
            if consts.iter().any(|c| c.is_zero()) {
                return Err(Error::InvalidMetric("F_i must be nonzero".into()));
            }
            ("lemma-a", q(-1, 1), consts.map(CoordFn::constant))
        }
        LemmaFamily::B(a) => ("lemma-b", q(-1, 2), shared(&a)),
        LemmaFamily::C(fs) => ("lemma-c", q(0, 1), fs.map(CoordFn::expr)),
        LemmaFamily::D(a) => ("lemma-d", q(1, 2), shared(&a)),
    };
    MetricSpec::case_iv(name, m, f, conformal)
}

/// Structural match of a case-iv spec against the four conformally flat families.
pub fn shared_polynomial(spec: &MetricSpec) -> Option<Vec<BigRational>> {
    let polys: Option<Vec<Vec<BigRational>>> = spec.f.iter().map(|f| f.trimmed_poly()).collect();
    let polys = polys?;
    // Allow an overall sign flip of the whole metric.
    for global in [1i64, -1] {
        let base: Vec<BigRational> = polys[0]
            .iter()
            .map(|c| c * BigRational::from_integer((global * ORDERED_SIGNS[0]).into()))
            .collect();
        let all = polys.iter().enumerate().all(|(i, p)| {
            let s = BigRational::from_integer((global * ORDERED_SIGNS[i]).into());
            p.len() == base.len() && p.iter().zip(&base).all(|(c, b)| c * &s == *b)
        });
        if all {
            return Some(base);
        }
    }
    None
}
