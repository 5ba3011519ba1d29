//! Verdicts: signature, conformal flatness, Lemma-family membership, the
//! `C^k_{ikj} = 0` table conditions and a Petrov D/O tag.

use std::fmt;

use num_rational::BigRational;

use crate::consts::TAU_FLAT;
use crate::curvature::curvature;
use crate::expr::Expr;
use crate::formulas::{ckikj, lambda_cyclic_residual, PhiJets};
use crate::metric::{shared_polynomial, Family, MetricSpec, PAIRS};
use crate::sampling::{grid_points, par_map, sample_points, SamplePlan};
use crate::scalar::{q, Scalar};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignatureKind {
    Riemannian,
    Lorentzian,
    Neutral,
}

impl SignatureKind {
    pub fn name(self) -> &'static str {
        match self {
            SignatureKind::Riemannian => "riemannian",
            SignatureKind::Lorentzian => "lorentzian",
            SignatureKind::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignatureProfile {
    pub signs: [i8; 4],
    pub kind: SignatureKind,
}

impl SignatureProfile {
    pub fn from_signs(signs: [i8; 4]) -> Self {
        let plus = signs.iter().filter(|&&s| s > 0).count();
        let kind = match plus {
            0 | 4 => SignatureKind::Riemannian,
            1 | 3 => SignatureKind::Lorentzian,
            _ => SignatureKind::Neutral,
        };
        SignatureProfile { signs, kind }
    }

    /// Sign string such as `+++-`.
    pub fn pattern(&self) -> String {
        self.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }
}

impl fmt::Display for SignatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.pattern(), self.kind.name())
    }
}

pub fn signature<S: Scalar>(spec: &MetricSpec, p: &[S; 4]) -> Result<SignatureProfile, Error> {
    spec.admissible(p).into_result()?;
    let g = spec.metric_values(p)?;
    let mut signs = [0i8; 4];
    for (i, gi) in g.iter().enumerate() {
        signs[i] = match gi.signum() {
            Some(s) if s != 0 => s,
            _ => return Err(Error::Inadmissible(format!("degenerate metric component {}", i + 1))),
        };
    }
    Ok(SignatureProfile::from_signs(signs))
}

/// Outcome of a sampled or exact check.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: String,
    pub pass: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples_used: usize,
    pub details: String,
}

impl Verdict {
    pub fn from_residual(kind: &str, max_residual: f64, tolerance: f64, samples_used: usize, details: String) -> Self {
        Verdict {
            kind: kind.to_string(),
            // NaN residuals fail
            pass: max_residual <= tolerance,
            max_residual,
            tolerance,
            samples_used,
            details,
        }
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// Normalized Weyl residual of `spec` at each sampled point.
pub fn weyl_residuals(spec: &MetricSpec, points: &[[f64; 4]]) -> Result<Vec<f64>, Error> {
    par_map(points, |p| curvature(spec, p).map(|b| b.weyl_residual()))
        .into_iter()
        .collect()
}

/// Passes iff the normalized Weyl residual is at most `tol` at every sampled point.
pub fn conformal_flatness(spec: &MetricSpec, plan: &SamplePlan, tol: f64) -> Result<Verdict, Error> {
    let points = sample_points(spec, plan)?;
    let residuals = weyl_residuals(spec, &points)?;
    Ok(Verdict::from_residual(
        "conformal_flatness",
        max_of(residuals),
        tol,
        points.len(),
        format!("tol={tol:e} normalization=frame-weyl/max(1,frame-riemann)"),
    ))
}

pub fn conformal_flatness_default(spec: &MetricSpec, plan: &SamplePlan) -> Result<Verdict, Error> {
    conformal_flatness(spec, plan, TAU_FLAT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LemmaCase {
    A,
    B,
    C,
    D,
    None,
}

impl LemmaCase {
    pub fn name(self) -> &'static str {
        match self {
            LemmaCase::A => "a",
            LemmaCase::B => "b",
            LemmaCase::C => "c",
            LemmaCase::D => "d",
            LemmaCase::None => "none",
        }
    }
}

/// Structural membership in the four conformally flat case-iv families.
///
/// Items b and d compare the `F_i` against one shared polynomial with the
/// sign pattern `(+, −, +, −)` of the ordered chart, which is what makes
/// `g_ii` equal to the printed product forms there.
pub fn lemma_case(spec: &MetricSpec) -> Result<LemmaCase, Error> {
    if !matches!(spec.family, Family::CaseIV | Family::Table1IV) {
        return Err(Error::FamilyMismatch(format!("lemma cases apply to case-iv specs, not {}", spec.family)));
    }
    let m = spec.m.as_ref().ok_or_else(|| Error::FamilyMismatch("missing m".into()))?;
    let identity_base = spec
        .log_base
        .as_ref()
        .is_some_and(|u| u.iter().enumerate().all(|(i, e)| *e == Expr::var(i)));
    if !identity_base {
        return Ok(LemmaCase::None);
    }
    let degree_at_most = |d: usize| shared_polynomial(spec).is_some_and(|p| p.len() <= d + 1);
    Ok(if *m == q(0, 1) {
        LemmaCase::C
    } else if *m == q(-1, 1) {
        let consts: Option<Vec<BigRational>> = spec
            .f
            .iter()
            .map(|f| f.trimmed_poly().filter(|p| p.len() <= 1).map(|p| p.first().cloned().unwrap_or_default()))
            .collect();
        match consts {
            Some(c) if c.iter().cloned().sum::<BigRational>().is_zero() => LemmaCase::A,
            _ => LemmaCase::None,
        }
    } else if *m == q(-1, 2) && degree_at_most(2) {
        LemmaCase::B
    } else if *m == q(1, 2) && degree_at_most(6) {
        LemmaCase::D
    } else {
        LemmaCase::None
    })
}

/// All ordered triples of pairwise distinct indices.
pub fn distinct_triples() -> impl Iterator<Item = (usize, usize, usize)> {
    (0..4).flat_map(|i| (0..4).flat_map(move |j| (0..4).map(move |k| (i, j, k))))
        .filter(|&(i, j, k)| i != j && j != k && i != k)
}

/// Normalized `max |C^k_{ikj}|` over the closed form and the normalized
/// λ-cyclic residual at one point.
///
/// `C^k_{ikj}` is quadratic in first derivatives of φ and is divided by
/// `max(1, max|φ_ab,c|²)`; λ is divided by `max(1, max|φ_ab,c|·max|φ_ab,ab|)`.
pub fn table1_residuals(spec: &MetricSpec, p: &[f64; 4]) -> Result<(f64, f64), Error> {
    spec.admissible(p).into_result()?;
    let phi = PhiJets::at(spec, p)?;
    let s1 = phi.first_scale();
    let s2 = phi.mixed_scale();
    let mut c: f64 = 0.0;
    let mut l: f64 = 0.0;
    for (i, j, k) in distinct_triples() {
        c = c.max(ckikj(&phi, i, j, k)?.abs());
        l = l.max(lambda_cyclic_residual(&phi, i, j, k)?);
    }
    Ok((c / (s1 * s1).max(1.0), l / (s1 * s2).max(1.0)))
}

/// Table condition check: both residuals at most `tol` at every sampled point.
pub fn table1_check(spec: &MetricSpec, plan: &SamplePlan, tol: f64) -> Result<Verdict, Error> {
    let points = sample_points(spec, plan)?;
    let rows: Result<Vec<(f64, f64)>, Error> = par_map(&points, |p| table1_residuals(spec, p)).into_iter().collect();
    let rows = rows?;
    let c = max_of(rows.iter().map(|r| r.0));
    let l = max_of(rows.iter().map(|r| r.1));
    Ok(Verdict::from_residual(
        "table1",
        max_of([c, l]),
        tol,
        points.len(),
        format!("ckikj={c:e} lambda={l:e}"),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PetrovKind {
    O,
    D,
    I,
}

impl PetrovKind {
    pub fn name(self) -> &'static str {
        match self {
            PetrovKind::O => "O",
            PetrovKind::D => "D",
            PetrovKind::I => "I",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PetrovTag {
    pub kind: PetrovKind,
    /// Set for signatures where the real-triple reading is only indicative.
    pub advisory: bool,
}

/// Tags `(w1, w2, w3) = (C^{12}_{12}, C^{13}_{13}, C^{14}_{14})` of a metric
/// whose only surviving Weyl components are the `C^{ij}_{ij}`.
///
/// `O` when `max|w| ≤ tol`; otherwise coincidences and the trace constraint
/// are judged relative to `max|w|`, so the tag is scale invariant.
pub fn petrov_tag(w: [f64; 3], sig: &SignatureProfile, tol: f64) -> Result<PetrovTag, Error> {
    let advisory = sig.kind != SignatureKind::Lorentzian;
    let scale = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale <= tol {
        return Ok(PetrovTag { kind: PetrovKind::O, advisory });
    }
    let trace = w[0] + w[1] + w[2];
    if trace.abs() > 10.0 * tol * scale {
        return Err(Error::TraceViolation(trace));
    }
    let close = |a: f64, b: f64| (a - b).abs() <= tol * scale;
    let coincident = [(0, 1), (0, 2), (1, 2)].iter().filter(|&&(a, b)| close(w[a], w[b])).count();
    let kind = if coincident == 1 { PetrovKind::D } else { PetrovKind::I };
    Ok(PetrovTag { kind, advisory })
}

/// The six `C^{ij}_{ij}` reduced to the independent triple `(w1, w2, w3)`.
pub fn petrov_triple(mixed22: &[f64; 6]) -> [f64; 3] {
    let idx = |i, j| PAIRS.iter().position(|&p| p == (i, j)).expect("pair");
    [mixed22[idx(0, 1)], mixed22[idx(0, 2)], mixed22[idx(0, 3)]]
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanStatus {
    Evaluated {
        signature: SignatureProfile,
        weyl_residual: f64,
        riemann_norm: f64,
    },
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub point: [f64; 4],
    pub status: ScanStatus,
}

/// One row per grid point in lexicographic order; inadmissible points are skipped with a reason.
pub fn scan_report(spec: &MetricSpec, grid: [usize; 4]) -> Vec<ScanRow> {
    let points = grid_points(&spec.domain.boxes, grid);
    par_map(&points, |p| {
        let status = match (signature(spec, p), curvature(spec, p)) {
            (Ok(signature), Ok(b)) => ScanStatus::Evaluated {
                signature,
                weyl_residual: b.weyl_residual(),
                riemann_norm: b.riemann_norm(),
            },
            (Err(e), _) | (_, Err(e)) => ScanStatus::Skipped(e.to_string()),
        };
        ScanRow { point: *p, status }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::metric::{make_lemma_family, CoordFn, LemmaFamily};

    fn lorentz() -> SignatureProfile {
        SignatureProfile::from_signs([1, 1, 1, -1])
    }

    #[test]
    fn signature_kinds() {
        assert_eq!(SignatureProfile::from_signs([1, 1, 1, 1]).kind, SignatureKind::Riemannian);
        assert_eq!(SignatureProfile::from_signs([-1, -1, -1, -1]).kind, SignatureKind::Riemannian);
        assert_eq!(SignatureProfile::from_signs([-1, 1, 1, 1]).kind, SignatureKind::Lorentzian);
        assert_eq!(SignatureProfile::from_signs([1, -1, 1, -1]).kind, SignatureKind::Neutral);
        let e = signature(&MetricSpec::euclidean(), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.pattern(), "++++");
    }

    #[test]
    fn neutral_case_iv() {
        let spec = MetricSpec::case_iv(
            "n",
            q(-1, 1),
            [q(1, 1), q(1, 1), q(-1, 1), q(-1, 1)].map(CoordFn::constant),
            Expr::int(1),
        )
        .unwrap();
        let s = signature(&spec, &[2.5, 1.5, 0.5, -0.5]).unwrap();
        assert_eq!(s.pattern(), "++--");
        assert_eq!(s.kind, SignatureKind::Neutral);
    }

    #[test]
    fn petrov_examples() {
        assert_eq!(petrov_tag([0.0; 3], &lorentz(), 1e-9).unwrap().kind, PetrovKind::O);
        assert_eq!(petrov_tag([-2.0, 1.0, 1.0], &lorentz(), 1e-9).unwrap().kind, PetrovKind::D);
        assert_eq!(petrov_tag([3.0, -1.0, -2.0], &lorentz(), 1e-9).unwrap().kind, PetrovKind::I);
        assert!(!petrov_tag([3.0, -1.0, -2.0], &lorentz(), 1e-9).unwrap().advisory);
        assert!(petrov_tag([3.0, -1.0, -2.0], &SignatureProfile::from_signs([1; 4]), 1e-9).unwrap().advisory);
        assert!(matches!(petrov_tag([1.0, 1.0, 1.0], &lorentz(), 1e-9), Err(Error::TraceViolation(_))));
    }

    #[test]
    fn lemma_cases() {
        let one = Expr::int(1);
        let b = make_lemma_family(LemmaFamily::B([q(1, 1), q(0, 1), q(2, 1)]), one.clone()).unwrap();
        assert_eq!(lemma_case(&b).unwrap(), LemmaCase::B);
        let d = make_lemma_family(
            LemmaFamily::D([q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1), q(1, 1)]),
            one.clone(),
        )
        .unwrap();
        assert_eq!(lemma_case(&d).unwrap(), LemmaCase::D);
        let a = make_lemma_family(LemmaFamily::A([q(1, 1), q(2, 1), q(3, 1), q(-6, 1)]), one.clone()).unwrap();
        assert_eq!(lemma_case(&a).unwrap(), LemmaCase::A);
        let c = make_lemma_family(LemmaFamily::C(["x1", "x2^2+1", "3", "exp(x4)"].map(|s| parse(s).unwrap())), one.clone()).unwrap();
        assert_eq!(lemma_case(&c).unwrap(), LemmaCase::C);
        let none = MetricSpec::case_iv("m2", q(2, 1), std::array::from_fn(|_| CoordFn::constant(q(1, 1))), one.clone()).unwrap();
        assert_eq!(lemma_case(&none).unwrap(), LemmaCase::None);
        let nonzero_sum = MetricSpec::case_iv("m-1", q(-1, 1), std::array::from_fn(|_| CoordFn::constant(q(1, 1))), one).unwrap();
        assert_eq!(lemma_case(&nonzero_sum).unwrap(), LemmaCase::None);
        assert!(matches!(lemma_case(&MetricSpec::euclidean()), Err(Error::FamilyMismatch(_))));
    }

    #[test]
    fn lemma_a_is_conformally_flat_not_flat() {
        let a = make_lemma_family(LemmaFamily::A([q(1, 1), q(2, 1), q(3, 1), q(-6, 1)]), Expr::int(1)).unwrap();
        let v = conformal_flatness(&a, &SamplePlan::new(20, 5), TAU_FLAT).unwrap();
        assert!(v.pass, "{v:?}");
        let rows = scan_report(&a, [2, 2, 2, 2]);
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().any(|r| matches!(r.status, ScanStatus::Evaluated { riemann_norm, .. } if riemann_norm > 1e-6)));
    }

    #[test]
    fn euclidean_scan_has_sixteen_zero_rows() {
        let mut spec = MetricSpec::euclidean();
        spec.domain.boxes = [(0.0, 1.0), (2.0, 3.0), (4.0, 5.0), (6.0, 7.0)];
        let rows = scan_report(&spec, [2, 2, 2, 2]);
        assert_eq!(rows.len(), 16);
        for r in rows {
            match r.status {
                ScanStatus::Evaluated { weyl_residual, riemann_norm, .. } => {
                    assert_eq!(weyl_residual, 0.0);
                    assert_eq!(riemann_norm, 0.0);
                }
                ScanStatus::Skipped(s) => panic!("{s}"),
            }
        }
    }

    #[test]
    fn scan_marks_collisions() {
        let spec = MetricSpec::euclidean();
        let rows = scan_report(&spec, [3, 3, 1, 1]);
        let skipped = rows.iter().filter(|r| matches!(r.status, ScanStatus::Skipped(_))).count();
        assert!(skipped >= 3);
    }
}
